//! Seeded input generators.
//!
//! Every trial owns an independent ChaCha stream derived from
//! `(seed, trial)`, so results do not depend on evaluation order. Values
//! live on a 1/64 grid: sums of a few of them are exact in `f64`, which
//! keeps aggregate ties intact under the transfers the axioms perform.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AxiomId, CheckConfig, InfoMode, Instance};
use crate::prob::{EndowmentProfile, FiniteSpace, InfoPartition};

const GRID: f64 = 64.0;

/// Inputs of one trial.
#[derive(Debug, Clone)]
pub struct TrialInput {
    pub space: FiniteSpace,
    pub g: InfoPartition,
    pub profile: EndowmentProfile,
    pub instance: Instance,
}

pub(crate) fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn grid_value(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let lo_k = libm::ceil(lo * GRID) as i64;
    let hi_k = libm::floor(hi * GRID) as i64;
    if hi_k <= lo_k {
        return lo_k as f64 / GRID;
    }
    rng.random_range(lo_k..=hi_k) as f64 / GRID
}

fn draw_space(rng: &mut ChaCha8Rng, cfg: &CheckConfig) -> FiniteSpace {
    let m = cfg.space_size;
    let raw: Vec<f64> = if rng.random_bool(0.25) {
        vec![1.0; m]
    } else {
        (0..m).map(|_| rng.random_range(0.05..1.0)).collect()
    };
    let total: f64 = raw.iter().sum();
    FiniteSpace::normalized(raw.iter().map(|p| p / total).collect(), 1e-9)
        .expect("generated probabilities are positive")
        .with_tie_tol(cfg.tol)
}

fn draw_info(rng: &mut ChaCha8Rng, cfg: &CheckConfig) -> InfoPartition {
    let m = cfg.space_size;
    match cfg.info {
        InfoMode::Trivial => InfoPartition::trivial(m),
        InfoMode::Random => {
            let k = rng.random_range(1..=m.min(4));
            let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
            InfoPartition::from_labels(&labels)
        }
    }
}

/// Random endowment rows with duplicated entries, exact zeros, forced
/// aggregate ties and occasional all-zero agents.
fn draw_rows(rng: &mut ChaCha8Rng, cfg: &CheckConfig) -> Vec<Vec<f64>> {
    let (m, n) = (cfg.space_size, cfg.n_agents);
    let (lo, hi) = cfg.value_range;
    let mut rows = vec![vec![0.0; m]; n];
    for row in rows.iter_mut() {
        if rng.random_bool(0.1) {
            continue;
        }
        for w in 0..m {
            let u: f64 = rng.random();
            row[w] = if u < 0.25 && w > 0 {
                row[rng.random_range(0..w)]
            } else if u < 0.5 {
                0.0
            } else {
                grid_value(rng, lo, hi)
            };
        }
    }
    for w in 1..m {
        if rng.random_bool(0.25) {
            let v = rng.random_range(0..w);
            let s_v: f64 = rows.iter().map(|r| r[v]).sum();
            let s_w: f64 = rows.iter().map(|r| r[w]).sum();
            rows[n - 1][w] += s_v - s_w;
        }
    }
    rows
}

fn two_agents(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Draws the inputs of `trial` for `axiom`, honoring the axiom's
/// hypothesis (zero coordinate, dominance, measurability, equal sums).
pub fn draw(axiom: AxiomId, cfg: &CheckConfig, trial: usize) -> TrialInput {
    let mut rng = trial_rng(cfg.seed, trial);
    let space = draw_space(&mut rng, cfg);
    let g = draw_info(&mut rng, cfg);
    let mut rows = draw_rows(&mut rng, cfg);
    let (m, n) = (cfg.space_size, cfg.n_agents);
    let (lo, hi) = cfg.value_range;

    let instance = match axiom {
        AxiomId::IF => {
            let (i, j) = two_agents(&mut rng, n);
            for w in 0..m {
                let gap = if rng.random_bool(0.25) {
                    0.0
                } else {
                    grid_value(&mut rng, 0.0, hi - lo)
                };
                rows[j][w] = rows[i][w] - gap;
            }
            Instance::Single
        }
        AxiomId::AA => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            Instance::Permutation(perm)
        }
        AxiomId::OA => {
            let (i, j) = two_agents(&mut rng, n);
            Instance::Move { i, j }
        }
        AxiomId::FP | AxiomId::FPstar => {
            let (i, j) = two_agents(&mut rng, n);
            rows[j] = vec![0.0; m];
            let z = (0..m)
                .map(|_| {
                    if rng.random_bool(0.25) {
                        0.0
                    } else {
                        grid_value(&mut rng, lo, hi)
                    }
                })
                .collect();
            Instance::Transfer { i, j, z }
        }
        AxiomId::SI => {
            let (i, j) = two_agents(&mut rng, n);
            rows[j] = vec![0.0; m];
            let alpha = rng.random_range(0.0..=1.0);
            Instance::Split { i, j, alpha }
        }
        AxiomId::ZP => {
            let j = rng.random_range(0..n);
            rows[j] = vec![0.0; m];
            Instance::Single
        }
        AxiomId::IB => {
            let i = rng.random_range(0..n);
            let nontrivial = !g.is_trivial();
            match rng.random_range(0..3) {
                0 => rows[i] = vec![grid_value(&mut rng, lo, hi); m],
                1 if nontrivial => {
                    let levels: Vec<f64> = (0..g.num_blocks())
                        .map(|_| grid_value(&mut rng, lo, hi))
                        .collect();
                    rows[i] = (0..m).map(|w| levels[g.block_of(w)]).collect();
                }
                _ => {
                    // X_i equal to the sum of the others makes it S/2
                    let others: Vec<f64> = (0..m)
                        .map(|w| (0..n).filter(|&k| k != i).map(|k| rows[k][w]).sum())
                        .collect();
                    rows[i] = others;
                }
            }
            Instance::Single
        }
        AxiomId::CostConvexity => {
            let other = draw_rows(&mut rng, cfg);
            let mut y = other;
            for w in 0..m {
                let s: f64 = rows.iter().map(|r| r[w]).sum();
                let head: f64 = y[..n - 1].iter().map(|r| r[w]).sum();
                y[n - 1][w] = s - head;
            }
            let lambda = rng.random_range(0.0..=1.0);
            Instance::Mix { other: y, lambda }
        }
        AxiomId::Com | AxiomId::IA | AxiomId::RF | AxiomId::AF | AxiomId::UI => Instance::Single,
    };

    TrialInput {
        space,
        g,
        profile: EndowmentProfile::from_rows(rows).expect("generated rows are finite"),
        instance,
    }
}

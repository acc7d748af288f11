//! Platform-fee example with CRRA agents.
//!
//! A platform keeps the fraction `ε` of the aggregate and splits the rest
//! equally. `ε₀` is the largest fee an individual participant accepts:
//! `E[u((1-ε₀) S/n)] = E[u(X_i)]`. Two agents entering as one merged
//! account accept only a smaller fee, which is the friction the example
//! illustrates.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Bisection tolerance on the fee.
pub const EPSILON_TOL: f64 = 1e-4;
/// Number of batches used for the Monte Carlo standard error.
pub const BATCHES: usize = 20;

/// Law of the i.i.d. positive endowments.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sampler {
    Constant(f64),
    /// `exp(mu + sigma Z)` with `Z` standard normal.
    LogNormal { mu: f64, sigma: f64 },
}

impl Sampler {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Constant(c) if !(c > 0.0 && c.is_finite()) => Err(Error::InvalidDistribution(
                format!("endowments must be positive, got constant {c}"),
            )),
            Self::LogNormal { mu, sigma } if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) => {
                Err(Error::InvalidDistribution(format!(
                    "invalid lognormal parameters ({mu}, {sigma})"
                )))
            }
            _ => Ok(()),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Self::Constant(c) => c,
            Self::LogNormal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                libm::exp(mu + sigma * z)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrraReport {
    pub gamma: f64,
    pub n: usize,
    pub samples: usize,
    /// Fee accepted by a single participant.
    pub epsilon0: f64,
    /// Fee accepted by a merged pair `X_i + X_j` receiving `2(1-ε) S/n`.
    pub merged_epsilon: f64,
    /// Batch-means standard error of `epsilon0 - merged_epsilon`.
    pub difference_se: f64,
    /// `epsilon0 - merged_epsilon > 3 * difference_se`.
    pub margin_ok: bool,
}

fn utility(x: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        libm::log(x)
    } else {
        libm::pow(x, 1.0 - gamma) / (1.0 - gamma)
    }
}

/// Solves `mean_s u(scale (1-ε) m_s) = target` for `ε ∈ [0, 1)`.
fn solve_fee(means: &[f64], scale: f64, target: f64, gamma: f64) -> Result<f64> {
    let value = |eps: f64| -> f64 {
        means.iter().map(|m| utility(scale * (1.0 - eps) * m, gamma)).sum::<f64>() / means.len() as f64
    };
    let at_zero = value(0.0);
    if !at_zero.is_finite() || !target.is_finite() {
        return Err(Error::NonFiniteUtility);
    }
    if at_zero <= target + 1e-12 * (1.0 + target.abs()) {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > EPSILON_TOL {
        let mid = 0.5 * (lo + hi);
        let v = value(mid);
        if v.is_nan() {
            return Err(Error::NonFiniteUtility);
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

struct Fees {
    single: f64,
    merged: f64,
}

fn fees(draws: &[f64], n: usize, gamma: f64) -> Result<Fees> {
    let rows = draws.len() / n;
    let mut means = Vec::with_capacity(rows);
    let mut single = 0.0;
    let mut pair = 0.0;
    let pairs = n * (n - 1) / 2;
    for row in draws.chunks_exact(n) {
        means.push(row.iter().sum::<f64>() / n as f64);
        single += row.iter().map(|x| utility(*x, gamma)).sum::<f64>() / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                acc += utility(row[i] + row[j], gamma);
            }
        }
        pair += acc / pairs as f64;
    }
    let single_target = single / rows as f64;
    let pair_target = pair / rows as f64;
    Ok(Fees {
        single: solve_fee(&means, 1.0, single_target, gamma)?,
        merged: solve_fee(&means, 2.0, pair_target, gamma)?,
    })
}

/// Monte Carlo estimate of `ε₀` and of the merged-pair fee on a common
/// sample. Sample `k` draws its `n` endowments from its own ChaCha stream
/// `(seed, k)`.
pub fn crra_epsilon0(
    sampler: &Sampler,
    gamma: f64,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<CrraReport> {
    sampler.validate()?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "risk aversion must be > 0, got {gamma}"
        )));
    }
    if n < 3 {
        return Err(Error::TooFewAgents(n));
    }
    if samples < BATCHES {
        return Err(Error::InvalidParameter(format!(
            "need at least {BATCHES} samples, got {samples}"
        )));
    }
    let mut draws = Vec::with_capacity(samples * n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        rng.set_stream(k as u64);
        rng.set_word_pos(0);
        for _ in 0..n {
            draws.push(sampler.draw(&mut rng));
        }
    }
    if let Some(i) = draws.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidDistribution(format!(
            "sample {} produced a non-positive endowment {}",
            i / n,
            draws[i]
        )));
    }

    let all = fees(&draws, n, gamma)?;
    let per_batch = samples / BATCHES;
    let diffs: Vec<f64> = (0..BATCHES)
        .map(|b| {
            let chunk = &draws[b * per_batch * n..(b + 1) * per_batch * n];
            fees(chunk, n, gamma).map(|f| f.single - f.merged)
        })
        .collect::<Result<_>>()?;
    let mean = diffs.iter().sum::<f64>() / BATCHES as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (BATCHES - 1) as f64;
    let se = libm::sqrt(var / BATCHES as f64);
    let diff = all.single - all.merged;
    Ok(CrraReport {
        gamma,
        n,
        samples,
        epsilon0: all.single,
        merged_epsilon: all.merged,
        difference_se: se,
        margin_ok: diff > 3.0 * se,
    })
}

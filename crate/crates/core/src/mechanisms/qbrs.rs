//! Quantile-based risk sharing.
//!
//! The uniform variable driving the comonotone counterpart is realized on
//! the grid of cumulative base probabilities of all marginals: between two
//! consecutive grid levels every marginal quantile is constant, so the
//! counterpart `S^{X,c}` is an atom per grid interval.

use alloc::vec;
use alloc::vec::Vec;

use super::quantile::{DiscreteDist, LEVEL_EPS};
use super::Allocation;
use crate::prob::{sigma_of, EndowmentProfile, FiniteSpace, RandVar};
use crate::{Error, Result};

/// `X^c = (F^{-1}_{X_1}(U), .., F^{-1}_{X_n}(U))` on the merged level grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComonotoneCounterpart {
    /// Right endpoints `u_k` of the level intervals; the last one is 1.
    pub levels: Vec<f64>,
    /// `quantiles[k][i] = F^{-1}_{X_i}(u)` for `u` in the `k`-th interval.
    pub quantiles: Vec<Vec<f64>>,
    /// `sums[k] = Σ_i quantiles[k][i]`, strictly increasing in `k`.
    pub sums: Vec<f64>,
}

impl ComonotoneCounterpart {
    /// Law of the comonotone sum `S^{X,c}`.
    pub fn sum_distribution(&self) -> Result<DiscreteDist> {
        let mut prev = 0.0;
        let weights = self
            .levels
            .iter()
            .map(|&u| {
                let w = u - prev;
                prev = u;
                w
            })
            .collect();
        DiscreteDist::new(self.sums.clone(), weights)
    }
}

pub fn comonotone_counterpart(
    profile: &EndowmentProfile,
    space: &FiniteSpace,
) -> Result<ComonotoneCounterpart> {
    space.check_len(profile.outcomes())?;
    let marginals: Vec<DiscreteDist> = profile
        .agents()
        .iter()
        .map(|x| DiscreteDist::from_weighted(x.values(), space.probs()))
        .collect::<Result<_>>()?;

    let mut breaks: Vec<f64> = Vec::new();
    for d in &marginals {
        let mut acc = 0.0;
        for w in &d.weights()[..d.weights().len() - 1] {
            acc += w;
            breaks.push(acc);
        }
    }
    breaks.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = Vec::with_capacity(breaks.len() + 1);
    for b in breaks {
        if b >= 1.0 - LEVEL_EPS {
            continue;
        }
        if levels.last().is_none_or(|&l| b - l > LEVEL_EPS) {
            levels.push(b);
        }
    }
    levels.push(1.0);

    let mut out_levels = Vec::with_capacity(levels.len());
    let mut quantiles: Vec<Vec<f64>> = Vec::with_capacity(levels.len());
    let mut sums: Vec<f64> = Vec::with_capacity(levels.len());
    for u in levels {
        let q: Vec<f64> = marginals.iter().map(|d| d.quantile(u)).collect();
        let s: f64 = q.iter().sum();
        if sums.last() == Some(&s) {
            // no marginal moved: widen the previous interval
            out_levels.pop();
            quantiles.pop();
            sums.pop();
        }
        out_levels.push(u);
        quantiles.push(q);
        sums.push(s);
    }
    Ok(ComonotoneCounterpart {
        levels: out_levels,
        quantiles,
        sums,
    })
}

/// QBRS allocation under trivial information.
///
/// For each realized aggregate `s`, `p = F_{S^c}(s)` and the mixing weight
/// `α` solves `α F^{-1}_{S^c}(p) + (1-α) F^{-1,+}_{S^c}(p) = s`; agent `i`
/// receives `F^{-1,α}_{X_i}(p)`. When `s` is an atom of `S^c` the solution
/// interval is degenerate and `α = 1`.
pub fn qbrs_alloc(profile: &EndowmentProfile, space: &FiniteSpace) -> Result<Allocation> {
    let counterpart = comonotone_counterpart(profile, space)?;
    let s = profile.aggregate();
    let info = sigma_of(&s, space.tie_tol());
    let n = profile.n();
    let m = profile.outcomes();
    let mut parts = vec![vec![0.0; m]; n];
    let sums = &counterpart.sums;
    let last = sums.len() - 1;

    for block in info.blocks() {
        let target = s[block[0]];
        let slack = 1e-9 * (1.0 + target.abs());
        let k = match sums.iter().rposition(|&c| c <= target + slack) {
            Some(k) => k,
            None => return Err(Error::QbrsNoSolution { s: target, p: 0.0 }),
        };
        let share: Vec<f64> = if target <= sums[k] {
            counterpart.quantiles[k].clone()
        } else if k < last {
            let (lo, hi) = (sums[k], sums[k + 1]);
            let alpha = (hi - target) / (hi - lo);
            counterpart.quantiles[k]
                .iter()
                .zip(&counterpart.quantiles[k + 1])
                .map(|(a, b)| if a == b { *a } else { alpha * a + (1.0 - alpha) * b })
                .collect()
        } else if target - sums[k] <= slack {
            counterpart.quantiles[k].clone()
        } else {
            return Err(Error::QbrsNoSolution { s: target, p: 1.0 });
        };
        for &w in block {
            for (i, v) in share.iter().enumerate() {
                parts[i][w] = *v;
            }
        }
    }
    Ok(Allocation {
        parts: parts.into_iter().map(RandVar::from_raw).collect(),
        info_used: info,
    })
}

#[cfg(test)]
mod tests {
    use super::super::quantile_mixed;
    use super::*;

    fn profile(rows: &[&[f64]]) -> EndowmentProfile {
        EndowmentProfile::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Direct evaluation of the distributional definition through the
    /// generic quantile functions.
    fn qbrs_oracle(x: &EndowmentProfile, space: &FiniteSpace) -> Vec<Vec<f64>> {
        let margs: Vec<DiscreteDist> = x
            .agents()
            .iter()
            .map(|a| DiscreteDist::from_weighted(a.values(), space.probs()).unwrap())
            .collect();
        // comonotone sum: evaluate quantiles at the midpoint of every cell of
        // the merged cumulative grid
        let mut grid: Vec<f64> = vec![0.0, 1.0];
        for d in &margs {
            for &u in d.support() {
                grid.push(d.cdf(u));
            }
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut vals = Vec::new();
        let mut wts = Vec::new();
        for w in grid.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            vals.push(margs.iter().map(|d| d.quantile(mid)).sum::<f64>());
            wts.push(w[1] - w[0]);
        }
        let sc = DiscreteDist::from_weighted(&vals, &wts).unwrap();
        let s = x.aggregate();
        (0..x.n())
            .map(|i| {
                (0..x.outcomes())
                    .map(|w| {
                        let p = sc.cdf(s[w]);
                        let (lo, hi) = (sc.quantile(p), sc.quantile_upper(p));
                        let alpha = if p >= 1.0 || lo == hi {
                            1.0
                        } else {
                            (hi - s[w]) / (hi - lo)
                        };
                        quantile_mixed(&margs[i], p, alpha)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_endowments_are_kept() {
        let x = profile(&[&[2.0; 3], &[-1.0; 3], &[0.5; 3]]);
        let space = FiniteSpace::new(vec![0.2, 0.3, 0.5]).unwrap();
        let h = qbrs_alloc(&x, &space).unwrap();
        for i in 0..3 {
            assert_eq!(h.parts[i], *x.agent(i));
        }
    }

    #[test]
    fn comonotone_profiles_are_fixed_points() {
        let x = profile(&[&[1.0, 2.0], &[10.0, 20.0], &[0.0, 0.0]]);
        let space = FiniteSpace::uniform(2).unwrap();
        let h = qbrs_alloc(&x, &space).unwrap();
        for i in 0..3 {
            assert_eq!(h.parts[i], *x.agent(i));
        }
    }

    #[test]
    fn full_allocation_and_oracle_agreement() {
        let x = profile(&[
            &[1.0, 0.0, 3.0, 2.0, 0.0],
            &[0.0, 4.0, 1.0, 1.0, 2.0],
            &[2.5, -1.0, 0.0, 0.5, 1.0],
        ]);
        let space = FiniteSpace::new(vec![0.1, 0.3, 0.2, 0.25, 0.15]).unwrap();
        let h = qbrs_alloc(&x, &space).unwrap();
        let s = x.aggregate();
        let total = h.total();
        for w in 0..5 {
            assert!((total[w] - s[w]).abs() < 1e-9);
        }
        let oracle = qbrs_oracle(&x, &space);
        for i in 0..3 {
            for w in 0..5 {
                assert!((h.parts[i][w] - oracle[i][w]).abs() < 1e-9, "agent {i} outcome {w}");
            }
        }
    }

    #[test]
    fn counterpart_sums_increase() {
        let x = profile(&[&[3.0, 1.0, 2.0, 1.0], &[0.0, 5.0, 5.0, 1.0], &[1.0, 1.0, 1.0, 1.0]]);
        let space = FiniteSpace::uniform(4).unwrap();
        let c = comonotone_counterpart(&x, &space).unwrap();
        assert!(c.sums.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*c.levels.last().unwrap(), 1.0);
        let d = c.sum_distribution().unwrap();
        assert_eq!(d.support()[0], 2.0);
        assert_eq!(*d.support().last().unwrap(), 9.0);
    }
}

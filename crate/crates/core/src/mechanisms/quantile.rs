use alloc::format;
use alloc::vec::Vec;

use crate::prob::NORMALIZATION_TOL;
use crate::{Error, Result};

/// Slack used when comparing a level `p` with cumulative weights.
pub(crate) const LEVEL_EPS: f64 = 1e-12;

/// Finitely supported law: strictly increasing atoms with their weights.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteDist {
    support: Vec<f64>,
    weights: Vec<f64>,
    #[cfg_attr(feature = "serde", serde(skip))]
    cumulative: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Empty("distribution support"));
        }
        if support.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: weights.len(),
            });
        }
        if support.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite atom".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "support must be strictly increasing".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("negative weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            support,
            weights,
            cumulative,
        })
    }

    /// Law of a random variable taking `values[k]` with probability
    /// `probs[k]`; equal values are merged.
    pub fn from_weighted(values: &[f64], probs: &[f64]) -> Result<Self> {
        if values.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                found: probs.len(),
            });
        }
        let mut pairs: Vec<(f64, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            if support.last() == Some(&v) {
                *weights.last_mut().unwrap() += p;
            } else {
                support.push(v);
                weights.push(p);
            }
        }
        Self::new(support, weights)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `F(y) = P[Y <= y]`.
    pub fn cdf(&self, y: f64) -> f64 {
        match self.support.iter().rposition(|&s| s <= y) {
            Some(k) => self.cumulative[k],
            None => 0.0,
        }
    }

    /// Left-continuous inverse `F^{-1}(p) = inf{y : F(y) >= p}`.
    /// Returns `-inf` for `p <= 0`.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let k = self
            .cumulative
            .iter()
            .position(|&c| c >= p - LEVEL_EPS)
            .unwrap_or(self.support.len() - 1);
        self.support[k]
    }

    /// Right-continuous inverse `F^{-1,+}(p) = sup{y : F(y) <= p}`.
    /// Returns `+inf` for `p >= 1`.
    pub fn quantile_upper(&self, p: f64) -> f64 {
        match self.cumulative.iter().position(|&c| c > p + LEVEL_EPS) {
            Some(k) if p < 1.0 => self.support[k],
            _ => f64::INFINITY,
        }
    }
}

/// Mixed generalized inverse `F^{-1,α}(p)`:
/// `F^{-1,+}(0)` at `p = 0`, `α F^{-1}(p) + (1-α) F^{-1,+}(p)` inside,
/// `F^{-1}(1)` at `p = 1`.
pub fn quantile_mixed(d: &DiscreteDist, p: f64, alpha: f64) -> f64 {
    if p <= 0.0 {
        d.quantile_upper(0.0)
    } else if p >= 1.0 {
        d.quantile(1.0)
    } else {
        let lo = d.quantile(p);
        let hi = d.quantile_upper(p);
        if lo == hi {
            lo
        } else {
            alpha * lo + (1.0 - alpha) * hi
        }
    }
}

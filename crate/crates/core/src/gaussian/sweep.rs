//! Cost and trade-off sweeps over correlation and pool size.

use alloc::format;
use alloc::vec::Vec;

use super::{tradeoff, GaussianPool};
use crate::{Error, Result};

/// Correlation structure of a homogeneous pool.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CorrelationScheme {
    /// `ρ_ij = ρ` for all `i != j`.
    Constant(f64),
    /// `ρ_ij = base^{|i-j|}`.
    Decay(f64),
}

impl CorrelationScheme {
    pub fn rho(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        match *self {
            Self::Constant(r) => r,
            Self::Decay(base) => libm::pow(base, i.abs_diff(j) as f64),
        }
    }

    /// Pool of `n` agents with zero means and common volatility `sigma`.
    pub fn pool(&self, n: usize, sigma: f64) -> Result<GaussianPool> {
        let rho: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.rho(i, j)).collect())
            .collect();
        GaussianPool::from_correlation(alloc::vec![0.0; n], &alloc::vec![sigma; n], &rho)
    }
}

pub fn equicorrelated_pool(n: usize, sigma: f64, rho: f64) -> Result<GaussianPool> {
    CorrelationScheme::Constant(rho).pool(n, sigma)
}

/// One sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub param: f64,
    pub global_cost: f64,
    pub avg_t: f64,
    pub avg_cost_per_agent: f64,
}

fn row(param: f64, pool: &GaussianPool, lambda: f64, theta: f64) -> Result<SweepRow> {
    let n = pool.n();
    let report = tradeoff(pool, lambda, &alloc::vec![theta; n])?;
    Ok(SweepRow {
        param,
        global_cost: report.global_cost,
        avg_t: report.t.iter().sum::<f64>() / n as f64,
        avg_cost_per_agent: report.global_cost / n as f64,
    })
}

fn name_param(err: Error, what: &str) -> Error {
    match err {
        Error::NotPsd { min_eigenvalue, .. } => Error::NotPsd {
            min_eigenvalue,
            context: what.into(),
        },
        other => other,
    }
}

/// Equicorrelated pools of size `n` over a grid of `ρ`.
pub fn correlation_sweep(
    grid: &[f64],
    n: usize,
    sigma: f64,
    lambda: f64,
    theta: f64,
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Empty("correlation grid"));
    }
    grid.iter()
        .map(|&rho| {
            let what = format!("rho = {rho}");
            let pool = equicorrelated_pool(n, sigma, rho).map_err(|e| name_param(e, &what))?;
            row(rho, &pool, lambda, theta).map_err(|e| name_param(e, &what))
        })
        .collect()
}

/// Pools of increasing size under a fixed correlation scheme.
pub fn participants_sweep(
    sizes: &[usize],
    scheme: CorrelationScheme,
    sigma: f64,
    lambda: f64,
    theta: f64,
) -> Result<Vec<SweepRow>> {
    if sizes.is_empty() {
        return Err(Error::Empty("pool sizes"));
    }
    sizes
        .iter()
        .map(|&n| {
            let what = format!("n = {n}");
            let pool = scheme.pool(n, sigma).map_err(|e| name_param(e, &what))?;
            row(n as f64, &pool, lambda, theta)
        })
        .collect()
}

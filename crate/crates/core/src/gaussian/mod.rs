//! Left expected-shortfall mechanism for multivariate normal endowments.
//!
//! For `X ~ N(μ, V)` and `G` trivial, `X_i | S^X = s` is normal and the
//! conditional left ES is `E[X_i|S] - κ(λ) s_i`, where `s_i` is the
//! conditional standard deviation. All quantities below are closed forms
//! in `μ`, `V` and `λ`.

mod crra;
mod normal;
mod sweep;

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

pub use crra::{crra_epsilon0, CrraReport, Sampler};
pub use normal::{cdf, inv_cdf, kappa, pdf};
pub use sweep::{
    correlation_sweep, equicorrelated_pool, participants_sweep, CorrelationScheme, SweepRow,
};

/// Lower end of the `λ*` search bracket; `κ` diverges at `0+`.
pub const LAMBDA_FLOOR: f64 = 1e-6;
/// Bisection tolerance on `λ*`.
pub const LAMBDA_TOL: f64 = 1e-8;

/// `N(μ, V)` endowments for `n` agents.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianPool {
    mu: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

/// Smallest eigenvalue of a symmetric matrix given by rows.
pub fn min_eigenvalue(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

impl GaussianPool {
    pub fn new(mu: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::Empty("pool"));
        }
        if let Some(i) = mu.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        if cov.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: cov.len(),
            });
        }
        for row in &cov {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: j });
            }
        }
        let scale = cov.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..n {
            if cov[i][i] < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "negative variance {} for agent {i}",
                    cov[i][i]
                )));
            }
            for j in 0..i {
                if (cov[i][j] - cov[j][i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "covariance is not symmetric at ({i}, {j})"
                    )));
                }
                let bound = libm::sqrt(cov[i][i] * cov[j][j]);
                if cov[i][j].abs() > (1.0 + 1e-12) * bound + 1e-300 {
                    return Err(Error::InvalidParameter(format!(
                        "implied correlation of agents {i} and {j} exceeds 1 in absolute value"
                    )));
                }
            }
        }
        let min_eig = min_eigenvalue(&cov);
        if min_eig < -1e-12 * scale {
            return Err(Error::NotPsd {
                min_eigenvalue: min_eig,
                context: "covariance".into(),
            });
        }
        Ok(Self { mu, cov })
    }

    /// `V_ij = ρ_ij σ_i σ_j`.
    pub fn from_correlation(mu: Vec<f64>, sigma: &[f64], rho: &[Vec<f64>]) -> Result<Self> {
        let n = mu.len();
        if sigma.len() != n || rho.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if sigma.len() != n { sigma.len() } else { rho.len() },
            });
        }
        if let Some(i) = sigma.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "volatility of agent {i} must be finite and >= 0, got {}",
                sigma[i]
            )));
        }
        for (i, row) in rho.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            if (row[i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "correlation diagonal must be 1, got {} at {i}",
                    row[i]
                )));
            }
            if let Some(j) = row.iter().position(|r| r.is_nan() || r.abs() > 1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "correlation ({i}, {j}) = {} is outside [-1, 1]",
                    row[j]
                )));
            }
        }
        let cov = (0..n)
            .map(|i| (0..n).map(|j| rho[i][j] * sigma[i] * sigma[j]).collect())
            .collect();
        Self::new(mu, cov)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn cov(&self) -> &[Vec<f64>] {
        &self.cov
    }

    pub fn sigma(&self, i: usize) -> f64 {
        libm::sqrt(self.cov[i][i])
    }
}

/// Aggregate volatility and per-agent correlation with the aggregate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoolStats {
    pub sigma: Vec<f64>,
    /// `σ_{1:n}`, the standard deviation of `S^X`.
    pub sigma_total: f64,
    /// `ρ̄_i = Σ_j ρ_ij σ_i σ_j / (σ_i σ_{1:n})`, including `j = i`.
    pub rho_bar: Vec<f64>,
    /// `s_i = sqrt((1 - ρ̄_i²) σ_i²)`, the conditional volatility given `S^X`.
    pub idio: Vec<f64>,
    /// `Cov(X_i, S^X) = Σ_j V_ij`.
    pub cov_with_total: Vec<f64>,
}

/// Computes [`PoolStats`]. A pool whose aggregate is deterministic while
/// some agent is risky has no conditional law and is rejected; a pool of
/// constant endowments gets all-zero statistics.
pub fn pool_stats(pool: &GaussianPool) -> Result<PoolStats> {
    let n = pool.n();
    let sigma: Vec<f64> = (0..n).map(|i| pool.sigma(i)).collect();
    let cov_with_total: Vec<f64> = pool.cov.iter().map(|row| row.iter().sum()).collect();
    let var_total: f64 = cov_with_total.iter().sum::<f64>().max(0.0);
    let sigma_total = libm::sqrt(var_total);
    let sigma_sum: f64 = sigma.iter().sum();
    if sigma_sum == 0.0 {
        return Ok(PoolStats {
            sigma,
            sigma_total: 0.0,
            rho_bar: alloc::vec![0.0; n],
            idio: alloc::vec![0.0; n],
            cov_with_total,
        });
    }
    if sigma_total <= 1e-12 * sigma_sum {
        return Err(Error::DegeneratePool);
    }
    let rho_bar = (0..n)
        .map(|i| {
            if sigma[i] == 0.0 {
                0.0
            } else {
                cov_with_total[i] / (sigma[i] * sigma_total)
            }
        })
        .collect();
    let idio = (0..n)
        .map(|i| {
            let explained = cov_with_total[i] * cov_with_total[i] / var_total;
            libm::sqrt((pool.cov[i][i] - explained).max(0.0))
        })
        .collect();
    Ok(PoolStats {
        sigma,
        sigma_total,
        rho_bar,
        idio,
        cov_with_total,
    })
}

/// `H_i = a_i + b_i S^X - c_i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EsClosedForm {
    pub lambda: f64,
    pub kappa: f64,
    pub intercept: Vec<f64>,
    pub slope: Vec<f64>,
    pub penalty: Vec<f64>,
}

impl EsClosedForm {
    /// Allocation vector at aggregate realization `s`.
    pub fn allocate(&self, s: f64) -> Vec<f64> {
        (0..self.slope.len())
            .map(|i| self.intercept[i] + self.slope[i] * s - self.penalty[i])
            .collect()
    }

    /// Deterministic global cost `Σ c_i`.
    pub fn global_cost(&self) -> f64 {
        self.penalty.iter().sum()
    }
}

pub fn es_closed_form(pool: &GaussianPool, lambda: f64) -> Result<EsClosedForm> {
    let k = kappa(lambda)?;
    let stats = pool_stats(pool)?;
    let n = pool.n();
    let total_mu: f64 = pool.mu.iter().sum();
    let var_total = stats.sigma_total * stats.sigma_total;
    let slope: Vec<f64> = if var_total == 0.0 {
        alloc::vec![1.0 / n as f64; n]
    } else {
        stats.cov_with_total.iter().map(|c| c / var_total).collect()
    };
    let intercept = (0..n).map(|i| pool.mu[i] - slope[i] * total_mu).collect();
    let penalty = stats.idio.iter().map(|s| k * s).collect();
    Ok(EsClosedForm {
        lambda,
        kappa: k,
        intercept,
        slope,
        penalty,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaussianCosts {
    /// Deterministic global cost `κ(λ) Σ s_i`.
    pub global: f64,
    /// `C̄_i = κ(λ) s_i`.
    pub per_agent: Vec<f64>,
}

pub fn gaussian_costs(pool: &GaussianPool, lambda: f64) -> Result<GaussianCosts> {
    let form = es_closed_form(pool, lambda)?;
    Ok(GaussianCosts {
        global: form.global_cost(),
        per_agent: form.penalty,
    })
}

/// Participation trade-off under mean-variance preferences
/// `V_i(Y) = E[Y] - θ_i Var(Y)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TradeoffReport {
    pub lambda: f64,
    /// `T_i = V_i(H_i) - V_i(X_i) = s_i (θ_i s_i - κ(λ))`.
    pub t: Vec<f64>,
    pub expected_cost: Vec<f64>,
    /// `E[H_i] = μ_i - κ(λ) s_i`.
    pub expected_alloc: Vec<f64>,
    pub global_cost: f64,
}

pub fn tradeoff(pool: &GaussianPool, lambda: f64, theta: &[f64]) -> Result<TradeoffReport> {
    if theta.len() != pool.n() {
        return Err(Error::DimensionMismatch {
            expected: pool.n(),
            found: theta.len(),
        });
    }
    if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let k = kappa(lambda)?;
    let stats = pool_stats(pool)?;
    let n = pool.n();
    let t = (0..n)
        .map(|i| {
            let s = stats.idio[i];
            s * (theta[i] * s - k)
        })
        .collect();
    let expected_cost: Vec<f64> = stats.idio.iter().map(|s| k * s).collect();
    let expected_alloc = (0..n).map(|i| pool.mu[i] - expected_cost[i]).collect();
    let global_cost = expected_cost.iter().sum();
    Ok(TradeoffReport {
        lambda,
        t,
        expected_cost,
        expected_alloc,
        global_cost,
    })
}

/// Level `λ ∈ (0, 1)` at which `κ(λ) = θ s`, i.e. where the trade-off of an
/// agent with conditional volatility `s` changes sign.
pub fn lambda_star_for(idio: f64, theta: f64) -> Option<f64> {
    if !(theta > 0.0 && idio > 0.0) {
        return None;
    }
    let target = theta * idio;
    let k_floor = kappa(LAMBDA_FLOOR).ok()?;
    if target >= k_floor {
        return None;
    }
    let (mut lo, mut hi) = (LAMBDA_FLOOR, 1.0);
    while hi - lo > LAMBDA_TOL {
        let mid = 0.5 * (lo + hi);
        if kappa(mid).ok()? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// `λ*_i(θ)` for `agent`; `None` when no level in `(0, 1)` balances the
/// trade-off (`θ <= 0`, no idiosyncratic risk, or `θ s_i >= κ(1e-6)`).
pub fn lambda_star(pool: &GaussianPool, theta: f64, agent: usize) -> Result<Option<f64>> {
    if agent >= pool.n() {
        return Err(Error::InvalidParameter(format!(
            "agent {agent} out of range for a pool of {}",
            pool.n()
        )));
    }
    let stats = pool_stats(pool)?;
    Ok(lambda_star_for(stats.idio[agent], theta))
}

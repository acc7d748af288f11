//! Loss tables, summary statistics and the Gaussian ES report built on them.
//!
//! Endowments are the negatives of losses, so a pool of claim histories
//! becomes a pool of endowments with negative means.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::gaussian::{kappa, tradeoff, GaussianPool};
use crate::{Error, Result};

/// Minimum number of periods a table must keep after ingestion.
pub const MIN_PERIODS: usize = 3;
/// Correlation matrices with a smallest eigenvalue in `[-PSD_SLACK, 0)` are
/// projected onto the PSD cone; anything lower is rejected.
pub const PSD_SLACK: f64 = 1e-8;

/// One `period,entity,amount` row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossRecord {
    pub period: String,
    pub entity: String,
    pub amount: f64,
}

/// Entities × periods matrix of losses (positive = claims paid).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LossTable {
    pub entity_names: Vec<String>,
    pub periods: Vec<String>,
    pub losses: Vec<Vec<f64>>,
}

/// Entities removed during ingestion because some period was missing.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IngestReport {
    pub dropped: Vec<DroppedEntity>,
    pub duplicates_summed: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DroppedEntity {
    pub entity: String,
    pub missing_periods: Vec<String>,
}

fn sort_periods(periods: &mut [String]) {
    let numeric: Option<Vec<f64>> = periods.iter().map(|p| p.trim().parse::<f64>().ok()).collect();
    if numeric.is_some() {
        periods.sort_by(|a, b| {
            let x: f64 = a.trim().parse().unwrap_or(f64::NAN);
            let y: f64 = b.trim().parse().unwrap_or(f64::NAN);
            x.total_cmp(&y).then_with(|| a.cmp(b))
        });
    } else {
        periods.sort();
    }
}

impl LossTable {
    /// Pivots records into a rectangular table. Duplicate `(period, entity)`
    /// rows are summed; entities missing any period are dropped and listed
    /// in the report.
    pub fn from_records(records: &[LossRecord]) -> Result<(Self, IngestReport)> {
        let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
        let mut periods: BTreeSet<String> = BTreeSet::new();
        let mut entities: Vec<String> = Vec::new();
        let mut report = IngestReport::default();
        for (k, r) in records.iter().enumerate() {
            if !(r.amount.is_finite() && r.amount >= 0.0) {
                return Err(Error::InvalidTable(format!(
                    "record {k}: amount must be finite and >= 0, got {}",
                    r.amount
                )));
            }
            periods.insert(r.period.clone());
            if !entities.contains(&r.entity) {
                entities.push(r.entity.clone());
            }
            let key = (r.entity.clone(), r.period.clone());
            match cells.get_mut(&key) {
                Some(v) => {
                    *v += r.amount;
                    report.duplicates_summed += 1;
                }
                None => {
                    cells.insert(key, r.amount);
                }
            }
        }
        let mut periods: Vec<String> = periods.into_iter().collect();
        sort_periods(&mut periods);
        if periods.len() < MIN_PERIODS {
            return Err(Error::InvalidTable(format!(
                "need at least {MIN_PERIODS} periods, found {}",
                periods.len()
            )));
        }
        let mut names = Vec::new();
        let mut losses = Vec::new();
        for e in entities {
            let missing: Vec<String> = periods
                .iter()
                .filter(|p| !cells.contains_key(&(e.clone(), (*p).clone())))
                .cloned()
                .collect();
            if missing.is_empty() {
                losses.push(periods.iter().map(|p| cells[&(e.clone(), p.clone())]).collect());
                names.push(e);
            } else {
                report.dropped.push(DroppedEntity {
                    entity: e,
                    missing_periods: missing,
                });
            }
        }
        if names.is_empty() {
            return Err(Error::InvalidTable(
                "no entity has a complete history".into(),
            ));
        }
        Ok((
            Self {
                entity_names: names,
                periods,
                losses,
            },
            report,
        ))
    }
}

/// Means, variances and correlations of the endowment series.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SummaryStats {
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Vec::is_empty"))]
    pub names: Vec<String>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub correlation: Vec<Vec<f64>>,
    /// Entities with zero sample variance; their correlations are set to 0.
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Vec::is_empty"))]
    pub zero_variance: Vec<usize>,
}

impl SummaryStats {
    pub fn validate(&self) -> Result<()> {
        let n = self.means.len();
        if n == 0 {
            return Err(Error::Empty("summary statistics"));
        }
        if self.variances.len() != n || self.correlation.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if self.variances.len() != n {
                    self.variances.len()
                } else {
                    self.correlation.len()
                },
            });
        }
        if !self.names.is_empty() && self.names.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.names.len(),
            });
        }
        if let Some(i) = self.variances.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "variance {i} must be finite and >= 0, got {}",
                self.variances[i]
            )));
        }
        for (i, row) in self.correlation.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &r) in row.iter().enumerate() {
                let ok = if i == j {
                    (r - 1.0).abs() <= 1e-12
                } else {
                    r.abs() <= 1.0 + 1e-12 && (r - self.correlation[j][i]).abs() <= 1e-12
                };
                if !ok {
                    return Err(Error::InvalidParameter(format!(
                        "invalid correlation entry ({i}, {j}) = {r}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Sample statistics of `-losses`: mean, unbiased variance, Pearson
/// correlation (two-pass).
pub fn summarize(table: &LossTable) -> Result<SummaryStats> {
    let n = table.losses.len();
    let t = table.periods.len();
    if n == 0 {
        return Err(Error::Empty("loss table"));
    }
    if t < 2 {
        return Err(Error::InvalidTable(format!("need at least 2 periods, found {t}")));
    }
    let series: Vec<Vec<f64>> = table
        .losses
        .iter()
        .map(|row| row.iter().map(|l| -l).collect())
        .collect();
    let means: Vec<f64> = series.iter().map(|s| s.iter().sum::<f64>() / t as f64).collect();
    let centered: Vec<Vec<f64>> = series
        .iter()
        .zip(&means)
        .map(|(s, m)| s.iter().map(|v| v - m).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let sums_sq: Vec<f64> = centered.iter().map(|c| dot(c, c)).collect();
    let variances: Vec<f64> = sums_sq.iter().map(|s| s / (t - 1) as f64).collect();
    let zero_variance: Vec<usize> = (0..n).filter(|&i| sums_sq[i] == 0.0).collect();
    let mut correlation = vec![vec![0.0; n]; n];
    for i in 0..n {
        correlation[i][i] = 1.0;
        for j in 0..i {
            let r = if sums_sq[i] == 0.0 || sums_sq[j] == 0.0 {
                0.0
            } else {
                (dot(&centered[i], &centered[j]) / libm::sqrt(sums_sq[i] * sums_sq[j])).clamp(-1.0, 1.0)
            };
            correlation[i][j] = r;
            correlation[j][i] = r;
        }
    }
    Ok(SummaryStats {
        names: table.entity_names.clone(),
        means,
        variances,
        correlation,
        zero_variance,
    })
}

/// One agent's line of the ES report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReportRow {
    pub name: String,
    /// `E[H_i] = μ_i - κ(λ) s_i`.
    pub expected_alloc: f64,
    /// `C̄_i = κ(λ) s_i`.
    pub expected_cost: f64,
    /// Mean-variance participation trade-off `T_i`.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalReport {
    pub lambda: f64,
    pub kappa: f64,
    pub rows: Vec<ReportRow>,
    pub global_cost: f64,
    /// Set when the correlation matrix had to be projected onto the PSD cone.
    pub projected: bool,
    pub min_eigenvalue: f64,
}

/// Nearest PSD correlation matrix by zeroing negative eigenvalues and
/// restoring the unit diagonal.
fn project_psd(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rows.len();
    let eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]));
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let m = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = libm::sqrt(m[(i, i)] * m[(j, j)]);
                    if i == j {
                        1.0
                    } else if d > 0.0 {
                        0.5 * (m[(i, j)] + m[(j, i)]) / d
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Gaussian left-ES report `(E[H_i], C̄_i, T_i)` for pool statistics.
pub fn report(stats: &SummaryStats, lambda: f64, theta: &[f64]) -> Result<EmpiricalReport> {
    stats.validate()?;
    let n = stats.means.len();
    let min_eig = crate::gaussian::min_eigenvalue(&stats.correlation);
    if min_eig < -PSD_SLACK {
        return Err(Error::NotPsd {
            min_eigenvalue: min_eig,
            context: "correlation matrix".into(),
        });
    }
    let projected = min_eig < 0.0;
    let rho = if projected {
        project_psd(&stats.correlation)
    } else {
        stats.correlation.clone()
    };
    let sigma: Vec<f64> = stats.variances.iter().map(|v| libm::sqrt(*v)).collect();
    let pool = GaussianPool::from_correlation(stats.means.clone(), &sigma, &rho)?;
    let tr = tradeoff(&pool, lambda, theta)?;
    let rows = (0..n)
        .map(|i| ReportRow {
            name: stats
                .names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("agent{}", i + 1)),
            expected_alloc: tr.expected_alloc[i],
            expected_cost: tr.expected_cost[i],
            t: tr.t[i],
        })
        .collect();
    Ok(EmpiricalReport {
        lambda,
        kappa: kappa(lambda)?,
        rows,
        global_cost: tr.global_cost,
        projected,
        min_eigenvalue: min_eig,
    })
}

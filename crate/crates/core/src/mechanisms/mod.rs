//! Allocation rules on finite spaces and their frictional costs.
//!
//! Every rule conditions on `G^X = σ{G, σ{S^X}}`. The conditional-mean
//! family (CMRS, subjective CMRS), QBRS and the proportional rule return
//! full allocations; the robust rules (robust CMRS, left expected
//! shortfall, mean-deviation) return sub-allocations whose shortfall is
//! the global frictional cost.

mod qbrs;
mod quantile;
mod robust;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::prob::{
    cond_expect, info_with_aggregate, EndowmentProfile, FiniteSpace, InfoPartition, Measure,
    RandVar,
};
use crate::{Error, Result};

pub use qbrs::{comonotone_counterpart, qbrs_alloc};
pub use quantile::{quantile_mixed, DiscreteDist};
pub use robust::{cond_deviation, cond_left_es, mean_dev_alloc, robust_cmrs};

/// Relative slack allowed for `Σ H_i <= S^X`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Conditional deviation measure used by the mean-deviation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Deviation {
    /// Block-conditional standard deviation.
    CondStdDev,
    /// Block-conditional mean absolute deviation about the block mean.
    CondMeanAbsDev,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MechanismSpec {
    /// Conditional mean risk sharing under the base probability.
    Cmrs,
    /// Conditional mean under a single subjective measure.
    SubjectiveCmrs(Measure),
    /// Pointwise minimum of conditional means over a common measure set.
    RobustCmrs(Vec<Measure>),
    /// Left expected shortfall at level `lambda` of the conditional law.
    LeftEs { lambda: f64 },
    /// Conditional mean minus `theta` times a conditional deviation.
    MeanDeviation { dev: Deviation, theta: f64 },
    /// Quantile-based risk sharing (trivial information only).
    Qbrs,
    /// Equal split of the aggregate, `S^X / n`.
    Proportional,
}

impl MechanismSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::LeftEs { lambda } if !(*lambda > 0.0 && *lambda <= 1.0) => Err(
                Error::InvalidParameter(format!("left ES level must lie in (0, 1], got {lambda}")),
            ),
            Self::MeanDeviation { theta, .. } if !(theta.is_finite() && *theta >= 0.0) => Err(
                Error::InvalidParameter(format!("deviation loading must be >= 0, got {theta}")),
            ),
            Self::RobustCmrs(measures) if measures.is_empty() => Err(Error::InvalidParameter(
                "robust CMRS needs at least one measure".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Short human-readable label, e.g. `LeftES(0.9)`.
    pub fn label(&self) -> String {
        match self {
            Self::Cmrs => "CMRS".into(),
            Self::SubjectiveCmrs(_) => "SubjectiveCMRS".into(),
            Self::RobustCmrs(m) => format!("RobustCMRS({})", m.len()),
            Self::LeftEs { lambda } => format!("LeftES({lambda})"),
            Self::MeanDeviation { dev, theta } => {
                let d = match dev {
                    Deviation::CondStdDev => "std",
                    Deviation::CondMeanAbsDev => "mad",
                };
                format!("MeanDev({d},{theta})")
            }
            Self::Qbrs => "QBRS".into(),
            Self::Proportional => "Proportional".into(),
        }
    }

    /// Whether the rule always redistributes the whole aggregate.
    pub fn is_full_allocation(&self) -> bool {
        matches!(
            self,
            Self::Cmrs | Self::SubjectiveCmrs(_) | Self::Qbrs | Self::Proportional
        )
    }
}

impl fmt::Display for MechanismSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Result of applying a rule: one allocation per agent plus the realized
/// conditioning partition `G^X`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Allocation {
    pub parts: Vec<RandVar>,
    pub info_used: InfoPartition,
}

impl Allocation {
    pub fn total(&self) -> RandVar {
        let mut total = RandVar::zeros(self.info_used.outcome_count());
        for h in &self.parts {
            total = total.add(h);
        }
        total
    }

    /// First outcome where `Σ H_i` exceeds `S^X` beyond the feasibility slack.
    pub fn infeasibility(&self, aggregate: &RandVar) -> Option<(usize, f64)> {
        let total = self.total();
        (0..aggregate.len()).find_map(|w| {
            let excess = total[w] - aggregate[w];
            (excess > FEASIBILITY_TOL * (1.0 + aggregate[w].abs())).then_some((w, excess))
        })
    }
}

/// Something that maps a profile and an information set to an allocation.
///
/// [`MechanismSpec`] is the main implementor; the trait exists so that the
/// axiom harness can also run hand-written rules (negative controls).
pub trait AllocationRule {
    fn allocate(
        &self,
        profile: &EndowmentProfile,
        g: &InfoPartition,
        space: &FiniteSpace,
    ) -> Result<Allocation>;

    fn name(&self) -> String;

    fn requires_trivial_info(&self) -> bool {
        false
    }
}

impl AllocationRule for MechanismSpec {
    fn allocate(
        &self,
        profile: &EndowmentProfile,
        g: &InfoPartition,
        space: &FiniteSpace,
    ) -> Result<Allocation> {
        apply(self, profile, g, space)
    }

    fn name(&self) -> String {
        self.label()
    }

    fn requires_trivial_info(&self) -> bool {
        matches!(self, Self::Qbrs)
    }
}

/// Applies `spec` to `profile` given information `g`.
pub fn apply(
    spec: &MechanismSpec,
    profile: &EndowmentProfile,
    g: &InfoPartition,
    space: &FiniteSpace,
) -> Result<Allocation> {
    spec.validate()?;
    let info = info_with_aggregate(g, profile, space)?;
    match spec {
        MechanismSpec::Cmrs => conditional_means(profile, info, &space.base_measure()),
        MechanismSpec::SubjectiveCmrs(q) => {
            space.check_len(q.len())?;
            conditional_means(profile, info, q)
        }
        MechanismSpec::RobustCmrs(measures) => robust_cmrs(profile, g, measures, space),
        MechanismSpec::LeftEs { lambda } => {
            let base = space.base_measure();
            let parts = profile
                .agents()
                .iter()
                .map(|x| cond_left_es(x, &info, *lambda, &base))
                .collect::<Result<_>>()?;
            Ok(Allocation {
                parts,
                info_used: info,
            })
        }
        MechanismSpec::MeanDeviation { dev, theta } => {
            mean_dev_alloc(profile, g, *dev, *theta, space)
        }
        MechanismSpec::Qbrs => {
            if !g.is_trivial() {
                return Err(Error::NonTrivialInformation);
            }
            qbrs_alloc(profile, space)
        }
        MechanismSpec::Proportional => {
            let share = profile.aggregate().scale(1.0 / profile.n() as f64);
            Ok(Allocation {
                parts: (0..profile.n()).map(|_| share.clone()).collect(),
                info_used: info,
            })
        }
    }
}

fn conditional_means(
    profile: &EndowmentProfile,
    info: InfoPartition,
    q: &Measure,
) -> Result<Allocation> {
    let parts = profile
        .agents()
        .iter()
        .map(|x| cond_expect(x, &info, q))
        .collect::<Result<_>>()?;
    Ok(Allocation {
        parts,
        info_used: info,
    })
}

/// Global and pairwise frictional costs of an allocation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostReport {
    /// `S^X - Σ H_i`, nonnegative.
    pub global: RandVar,
    /// `X_i + X_j - H_i - H_j` for every `i < j`.
    pub pairwise: BTreeMap<(usize, usize), RandVar>,
}

impl CostReport {
    pub fn pair(&self, i: usize, j: usize) -> Option<&RandVar> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pairwise.get(&key)
    }
}

/// Computes the global and local frictional costs of `alloc` for `profile`.
///
/// Float residue in the global cost down to `-1e-9` is reported as zero;
/// anything below that is a feasibility violation.
pub fn frictional_costs(profile: &EndowmentProfile, alloc: &Allocation) -> Result<CostReport> {
    if alloc.parts.len() != profile.n() {
        return Err(Error::DimensionMismatch {
            expected: profile.n(),
            found: alloc.parts.len(),
        });
    }
    if let Some(bad) = alloc.parts.iter().find(|h| h.len() != profile.outcomes()) {
        return Err(Error::DimensionMismatch {
            expected: profile.outcomes(),
            found: bad.len(),
        });
    }
    let s = profile.aggregate();
    let raw = s.sub(&alloc.total());
    let mut worst: Option<(usize, f64)> = None;
    for (w, &c) in raw.iter().enumerate() {
        if c < -FEASIBILITY_TOL && worst.is_none_or(|(_, e)| -c > e) {
            worst = Some((w, -c));
        }
    }
    if let Some((outcome, excess)) = worst {
        return Err(Error::Infeasible { outcome, excess });
    }
    let global = raw.map(|c| if c < 0.0 { 0.0 } else { c });

    let mut pairwise = BTreeMap::new();
    for i in 0..profile.n() {
        for j in i + 1..profile.n() {
            let c = profile
                .agent(i)
                .add(profile.agent(j))
                .sub(&alloc.parts[i])
                .sub(&alloc.parts[j]);
            pairwise.insert((i, j), c);
        }
    }
    Ok(CostReport { global, pairwise })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn profile(rows: &[&[f64]]) -> EndowmentProfile {
        EndowmentProfile::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    // two-agent examples are padded with a zero third agent
    fn four_state() -> (EndowmentProfile, FiniteSpace) {
        (
            profile(&[&[1.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 1.0, 2.0], &[0.0; 4]]),
            FiniteSpace::uniform(4).unwrap(),
        )
    }

    #[test]
    fn cmrs_partition_averaging() {
        let (x, space) = four_state();
        let h = apply(&MechanismSpec::Cmrs, &x, &InfoPartition::trivial(4), &space).unwrap();
        assert!(close(h.parts[0].values(), &[0.5, 0.5, 0.5, 0.5], 1e-15));
        assert!(close(h.parts[1].values(), &[0.5, 0.5, 1.5, 1.5], 1e-15));
        assert!(h.parts[2].is_zero());
        assert_eq!(h.info_used.blocks(), &[vec![0, 1], vec![2, 3]]);
        let costs = frictional_costs(&x, &h).unwrap();
        assert!(costs.global.is_zero());
    }

    #[test]
    fn subjective_cmrs_with_base_is_cmrs() {
        let (x, space) = four_state();
        let g = InfoPartition::trivial(4);
        let a = apply(&MechanismSpec::Cmrs, &x, &g, &space).unwrap();
        let b = apply(
            &MechanismSpec::SubjectiveCmrs(space.base_measure()),
            &x,
            &g,
            &space,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn proportional_splits_evenly() {
        let (x, space) = four_state();
        let h = apply(
            &MechanismSpec::Proportional,
            &x,
            &InfoPartition::trivial(4),
            &space,
        )
        .unwrap();
        let s = x.aggregate().scale(1.0 / 3.0);
        for part in &h.parts {
            assert_eq!(part, &s);
        }
        let costs = frictional_costs(&x, &h).unwrap();
        assert!(costs.global.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn left_es_cost_is_positive_somewhere() {
        let (x, space) = four_state();
        let h = apply(
            &MechanismSpec::LeftEs { lambda: 0.5 },
            &x,
            &InfoPartition::trivial(4),
            &space,
        )
        .unwrap();
        // S = (1,1,2,2); worst-half means: H1 = 0, H2 = (0,0,1,1), H3 = 0
        assert!(close(h.parts[0].values(), &[0.0; 4], 1e-15));
        assert!(close(h.parts[1].values(), &[0.0, 0.0, 1.0, 1.0], 1e-15));
        let costs = frictional_costs(&x, &h).unwrap();
        assert!(close(costs.global.values(), &[1.0; 4], 1e-15));
        assert!(costs.global.iter().all(|&c| c >= 0.0));
    }

    #[test]
    fn pairwise_costs_follow_definition() {
        let (x, space) = four_state();
        let h = apply(
            &MechanismSpec::LeftEs { lambda: 0.5 },
            &x,
            &InfoPartition::trivial(4),
            &space,
        )
        .unwrap();
        let costs = frictional_costs(&x, &h).unwrap();
        let c01 = costs.pair(1, 0).unwrap();
        assert!(close(c01.values(), &[1.0, 1.0, 1.0, 1.0], 1e-15));
        assert_eq!(costs.pairwise.len(), 3);
    }

    #[test]
    fn infeasible_allocation_is_reported() {
        let (x, _) = four_state();
        let mut parts = x.agents().to_vec();
        parts[0] = RandVar::new(vec![1.0, 0.0, 3.0, 0.0]).unwrap();
        let alloc = Allocation {
            parts,
            info_used: InfoPartition::discrete(4),
        };
        assert_eq!(
            frictional_costs(&x, &alloc).unwrap_err(),
            Error::Infeasible {
                outcome: 2,
                excess: 2.0
            }
        );
    }

    #[test]
    fn tiny_negative_costs_are_clamped() {
        let (x, _) = four_state();
        let mut parts = x.agents().to_vec();
        parts[0] = parts[0].shift(5e-10);
        let alloc = Allocation {
            parts,
            info_used: InfoPartition::discrete(4),
        };
        let costs = frictional_costs(&x, &alloc).unwrap();
        assert!(costs.global.is_zero());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let (x, space) = four_state();
        let g = InfoPartition::trivial(4);
        for spec in [
            MechanismSpec::LeftEs { lambda: 0.0 },
            MechanismSpec::LeftEs { lambda: 1.5 },
            MechanismSpec::MeanDeviation {
                dev: Deviation::CondStdDev,
                theta: -1.0,
            },
            MechanismSpec::RobustCmrs(vec![]),
        ] {
            assert!(matches!(
                apply(&spec, &x, &g, &space),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn qbrs_rejects_information() {
        let (x, space) = four_state();
        let g = InfoPartition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(
            apply(&MechanismSpec::Qbrs, &x, &g, &space).unwrap_err(),
            Error::NonTrivialInformation
        );
    }

    #[test]
    fn information_is_joined_with_aggregate() {
        let (x, space) = four_state();
        let g = InfoPartition::new(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let h = apply(&MechanismSpec::Cmrs, &x, &g, &space).unwrap();
        assert_eq!(h.info_used, InfoPartition::discrete(4));
        assert_eq!(h.parts[0], *x.agent(0));
    }
}

//! Sub-allocation rules: robust CMRS, left expected shortfall and
//! mean-deviation.

use alloc::vec;
use alloc::vec::Vec;

use super::{Allocation, Deviation};
use crate::prob::{
    cond_expect, first_restriction_violation, info_with_aggregate, EndowmentProfile, FiniteSpace,
    InfoPartition, Measure, RandVar,
};
use crate::{Error, Result};

/// Tolerance for `Q|_{G^X} = P|_{G^X}` when admitting a robust measure.
pub const MEASURE_TOL: f64 = 1e-9;

fn check_dims(x: &RandVar, part: &InfoPartition, q: &Measure) -> Result<()> {
    for found in [x.len(), q.len()] {
        if found != part.outcome_count() {
            return Err(Error::DimensionMismatch {
                expected: part.outcome_count(),
                found,
            });
        }
    }
    Ok(())
}

fn block_is_constant(x: &RandVar, block: &[usize]) -> bool {
    block.iter().all(|&w| x[w] == x[block[0]])
}

/// Left expected shortfall at level `lambda` of the conditional law of `x`
/// given `part`, under `q`.
///
/// Per block the values are sorted ascending and averaged over the lowest
/// `lambda` share of the conditional mass, with a fractional weight on the
/// atom that straddles the level.
pub fn cond_left_es(
    x: &RandVar,
    part: &InfoPartition,
    lambda: f64,
    q: &Measure,
) -> Result<RandVar> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "left ES level must lie in (0, 1], got {lambda}"
        )));
    }
    if lambda == 1.0 {
        return cond_expect(x, part, q);
    }
    check_dims(x, part, q)?;
    let mut out = vec![0.0; x.len()];
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for (k, block) in part.blocks().iter().enumerate() {
        let mass = q.block_mass(block);
        if mass <= 0.0 {
            return Err(Error::ZeroMassBlock { block: k });
        }
        let value = if block_is_constant(x, block) {
            x[block[0]]
        } else {
            atoms.clear();
            atoms.extend(block.iter().map(|&w| (x[w], q.probs()[w])));
            atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
            let budget = lambda * mass;
            let mut taken = 0.0;
            let mut acc = 0.0;
            for &(v, p) in &atoms {
                let take = p.min(budget - taken);
                if take <= 0.0 {
                    break;
                }
                acc += take * v;
                taken += take;
            }
            acc / budget
        };
        for &w in block {
            out[w] = value;
        }
    }
    Ok(RandVar::from_raw(out))
}

/// Block-conditional deviation `D(x | part)` under `q`.
pub fn cond_deviation(
    x: &RandVar,
    part: &InfoPartition,
    q: &Measure,
    dev: Deviation,
) -> Result<RandVar> {
    check_dims(x, part, q)?;
    let mut out = vec![0.0; x.len()];
    for (k, block) in part.blocks().iter().enumerate() {
        let mass = q.block_mass(block);
        if mass <= 0.0 {
            return Err(Error::ZeroMassBlock { block: k });
        }
        if block_is_constant(x, block) {
            continue;
        }
        let p = q.probs();
        let mean = block.iter().map(|&w| p[w] * x[w]).sum::<f64>() / mass;
        let value = match dev {
            Deviation::CondStdDev => {
                let var = block
                    .iter()
                    .map(|&w| p[w] * (x[w] - mean) * (x[w] - mean))
                    .sum::<f64>()
                    / mass;
                libm::sqrt(var)
            }
            Deviation::CondMeanAbsDev => {
                block.iter().map(|&w| p[w] * (x[w] - mean).abs()).sum::<f64>() / mass
            }
        };
        for &w in block {
            out[w] = value;
        }
    }
    Ok(RandVar::from_raw(out))
}

/// `H_i = E[X_i | G^X] - theta * D(X_i | G^X)` under the base probability.
pub fn mean_dev_alloc(
    profile: &EndowmentProfile,
    g: &InfoPartition,
    dev: Deviation,
    theta: f64,
    space: &FiniteSpace,
) -> Result<Allocation> {
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "deviation loading must be >= 0, got {theta}"
        )));
    }
    let info = info_with_aggregate(g, profile, space)?;
    let base = space.base_measure();
    let parts = profile
        .agents()
        .iter()
        .map(|x| {
            let mean = cond_expect(x, &info, &base)?;
            if theta == 0.0 {
                return Ok(mean);
            }
            let d = cond_deviation(x, &info, &base, dev)?;
            Ok(mean.sub(&d.scale(theta)))
        })
        .collect::<Result<_>>()?;
    Ok(Allocation {
        parts,
        info_used: info,
    })
}

/// Robust CMRS: `H_i = min_{Q} E^Q[X_i | G^X]`, the same measure set for
/// every agent. Each measure must agree with the base probability on
/// `G^X`.
pub fn robust_cmrs(
    profile: &EndowmentProfile,
    g: &InfoPartition,
    measures: &[Measure],
    space: &FiniteSpace,
) -> Result<Allocation> {
    if measures.is_empty() {
        return Err(Error::InvalidParameter(
            "robust CMRS needs at least one measure".into(),
        ));
    }
    let info = info_with_aggregate(g, profile, space)?;
    for (idx, q) in measures.iter().enumerate() {
        space.check_len(q.len())?;
        if let Some((block, found, expected)) =
            first_restriction_violation(q, &info, space, MEASURE_TOL)
        {
            return Err(Error::MeasureRestriction {
                measure: idx,
                block,
                found,
                expected,
            });
        }
    }
    let parts = profile
        .agents()
        .iter()
        .map(|x| {
            let mut best = cond_expect(x, &info, &measures[0])?.into_vec();
            for q in &measures[1..] {
                let h = cond_expect(x, &info, q)?;
                for (b, v) in best.iter_mut().zip(h.iter()) {
                    if *v < *b {
                        *b = *v;
                    }
                }
            }
            Ok(RandVar::from_raw(best))
        })
        .collect::<Result<_>>()?;
    Ok(Allocation {
        parts,
        info_used: info,
    })
}

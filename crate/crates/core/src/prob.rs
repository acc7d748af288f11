//! Finite probability spaces.
//!
//! Sub-σ-algebras of a finite outcome set are represented by the partitions
//! that generate them; a join of σ-algebras is the common refinement of the
//! partitions. Base probabilities are strictly positive, so almost-sure
//! statements are pointwise statements.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use crate::{Error, Result};

/// Absolute tolerance for probability vectors to sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-12;

fn check_normalized(probs: &[f64], tol: f64) -> Result<f64> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotNormalized { sum });
    }
    Ok(sum)
}

/// Outcome set `{0, .., m-1}` with a strictly positive base probability.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiniteSpace {
    probs: Vec<f64>,
    tie_tol: f64,
}

impl FiniteSpace {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("probability vector"));
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveProbability { index, value });
            }
        }
        check_normalized(&probs, NORMALIZATION_TOL)?;
        Ok(Self { probs, tie_tol: 0.0 })
    }

    /// Accepts weights whose sum is within `tol` of one and rescales them.
    pub fn normalized(mut probs: Vec<f64>, tol: f64) -> Result<Self> {
        for (index, &value) in probs.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveProbability { index, value });
            }
        }
        let sum = check_normalized(&probs, tol)?;
        probs.iter_mut().for_each(|p| *p /= sum);
        Self::new(probs)
    }

    /// Equal mass on `m` outcomes.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Empty("probability vector"));
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    /// Gap tolerance used when the σ-algebra of the aggregate is formed.
    pub fn with_tie_tol(mut self, tol: f64) -> Self {
        self.tie_tol = tol.max(0.0);
        self
    }

    pub fn tie_tol(&self) -> f64 {
        self.tie_tol
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn base_measure(&self) -> Measure {
        Measure {
            probs: self.probs.clone(),
        }
    }

    pub fn expectation(&self, x: &RandVar) -> f64 {
        self.probs.iter().zip(x.values()).map(|(p, v)| p * v).sum()
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}

/// A real-valued random variable on a finite space (one value per outcome).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct RandVar(Vec<f64>);

impl RandVar {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(values))
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self(values)
    }

    pub fn constant(value: f64, m: usize) -> Self {
        Self(vec![value; m])
    }

    pub fn zeros(m: usize) -> Self {
        Self::constant(0.0, m)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    pub fn add(&self, other: &RandVar) -> RandVar {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RandVar) -> RandVar {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, factor: f64) -> RandVar {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn shift(&self, c: f64) -> RandVar {
        Self(self.0.iter().map(|v| v + c).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RandVar {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }
}

impl Index<usize> for RandVar {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

/// Partition of the outcome set, kept in canonical form: members ascending,
/// blocks ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InfoPartition {
    blocks: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

impl InfoPartition {
    /// Validates that `blocks` are nonempty, disjoint and cover `0..m`.
    pub fn new(m: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; m];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &w in block {
                if w >= m {
                    return Err(Error::InvalidPartition(format!(
                        "outcome {w} out of range for {m} outcomes"
                    )));
                }
                if seen[w] {
                    return Err(Error::InvalidPartition(format!(
                        "outcome {w} appears in more than one block"
                    )));
                }
                seen[w] = true;
            }
        }
        if let Some(w) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("outcome {w} is not covered")));
        }
        Ok(Self::canonical(m, blocks))
    }

    /// Groups outcomes carrying the same label.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot: Vec<(usize, usize)> = Vec::new();
        for (w, &l) in labels.iter().enumerate() {
            match slot.iter().find(|(label, _)| *label == l) {
                Some(&(_, b)) => blocks[b].push(w),
                None => {
                    slot.push((l, blocks.len()));
                    blocks.push(vec![w]);
                }
            }
        }
        Self::canonical(labels.len(), blocks)
    }

    fn canonical(m: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut labels = vec![0; m];
        for (k, b) in blocks.iter().enumerate() {
            for &w in b {
                labels[w] = k;
            }
        }
        Self { blocks, labels }
    }

    /// The trivial σ-algebra `{∅, Ω}`.
    pub fn trivial(m: usize) -> Self {
        Self::canonical(m, vec![(0..m).collect()])
    }

    /// The power set: every outcome on its own.
    pub fn discrete(m: usize) -> Self {
        Self::canonical(m, (0..m).map(|w| vec![w]).collect())
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn outcome_count(&self) -> usize {
        self.labels.len()
    }

    /// Index of the block containing outcome `w`.
    pub fn block_of(&self, w: usize) -> usize {
        self.labels[w]
    }

    pub fn is_trivial(&self) -> bool {
        self.blocks.len() == 1
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &InfoPartition) -> bool {
        self.outcome_count() == coarser.outcome_count()
            && self.blocks.iter().all(|b| {
                let l = coarser.block_of(b[0]);
                b.iter().all(|&w| coarser.block_of(w) == l)
            })
    }

    /// Common refinement: the partition generating `σ{self, other}`.
    pub fn join(&self, other: &InfoPartition) -> Result<InfoPartition> {
        if self.outcome_count() != other.outcome_count() {
            return Err(Error::DimensionMismatch {
                expected: self.outcome_count(),
                found: other.outcome_count(),
            });
        }
        let m = self.outcome_count();
        let pairs: Vec<usize> = (0..m)
            .map(|w| self.block_of(w) * other.num_blocks() + other.block_of(w))
            .collect();
        Ok(Self::from_labels(&pairs))
    }
}

/// Partition generated by `x`: outcomes are linked when their sorted values
/// are chained by gaps no larger than `tol` (single linkage). `tol = 0`
/// groups exactly equal values.
pub fn sigma_of(x: &RandVar, tol: f64) -> InfoPartition {
    let m = x.len();
    if m == 0 {
        return InfoPartition::canonical(0, Vec::new());
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut labels = vec![0usize; m];
    let mut label = 0;
    for k in 1..m {
        if x[order[k]] - x[order[k - 1]] > tol {
            label += 1;
        }
        labels[order[k]] = label;
    }
    InfoPartition::from_labels(&labels)
}

/// Join of two partitions; see [`InfoPartition::join`].
pub fn join(p: &InfoPartition, q: &InfoPartition) -> Result<InfoPartition> {
    p.join(q)
}

/// A probability measure on the outcome set; may put zero mass on outcomes.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct Measure {
    probs: Vec<f64>,
}

impl Measure {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("probability vector"));
        }
        for (index, &value) in probs.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::NegativeProbability { index, value });
            }
        }
        check_normalized(&probs, NORMALIZATION_TOL)?;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Radon-Nikodym derivative with respect to the base probability.
    pub fn density(&self, space: &FiniteSpace) -> Result<RandVar> {
        space.check_len(self.len())?;
        Ok(RandVar::from_raw(
            self.probs
                .iter()
                .zip(space.probs())
                .map(|(q, p)| q / p)
                .collect(),
        ))
    }

    pub fn block_mass(&self, block: &[usize]) -> f64 {
        block.iter().map(|&w| self.probs[w]).sum()
    }
}

/// Conditional expectation `E^q[x | part]`, constant on each block.
pub fn cond_expect(x: &RandVar, part: &InfoPartition, q: &Measure) -> Result<RandVar> {
    if x.len() != part.outcome_count() || q.len() != part.outcome_count() {
        return Err(Error::DimensionMismatch {
            expected: part.outcome_count(),
            found: if x.len() != part.outcome_count() {
                x.len()
            } else {
                q.len()
            },
        });
    }
    let mut out = vec![0.0; x.len()];
    for (k, block) in part.blocks().iter().enumerate() {
        let mass = q.block_mass(block);
        if mass <= 0.0 {
            return Err(Error::ZeroMassBlock { block: k });
        }
        let weighted: f64 = block.iter().map(|&w| q.probs[w] * x[w]).sum();
        let value = weighted / mass;
        for &w in block {
            out[w] = value;
        }
    }
    Ok(RandVar::from_raw(out))
}

/// True when `x` varies by at most `tol` inside every block.
pub fn is_measurable(x: &RandVar, part: &InfoPartition, tol: f64) -> bool {
    x.len() == part.outcome_count()
        && part.blocks().iter().all(|block| {
            let (lo, hi) = block.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
                (lo.min(x[w]), hi.max(x[w]))
            });
            hi - lo <= tol
        })
}

/// Checks `q|_part = P|_part`: every block carries the same mass under `q`
/// as under the base probability. Absolute continuity is automatic.
pub fn verify_measure(q: &Measure, part: &InfoPartition, space: &FiniteSpace, tol: f64) -> bool {
    first_restriction_violation(q, part, space, tol).is_none()
}

/// First block whose mass differs, as `(block, q mass, base mass)`.
pub(crate) fn first_restriction_violation(
    q: &Measure,
    part: &InfoPartition,
    space: &FiniteSpace,
    tol: f64,
) -> Option<(usize, f64, f64)> {
    if q.len() != space.len() || part.outcome_count() != space.len() {
        return Some((0, f64::NAN, f64::NAN));
    }
    part.blocks().iter().enumerate().find_map(|(k, block)| {
        let found = q.block_mass(block);
        let expected: f64 = block.iter().map(|&w| space.probs()[w]).sum();
        ((found - expected).abs() > tol).then_some((k, found, expected))
    })
}

/// Endowments of `n >= 3` agents on a common outcome set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EndowmentProfile {
    agents: Vec<RandVar>,
}

impl EndowmentProfile {
    pub fn new(agents: Vec<RandVar>) -> Result<Self> {
        if agents.len() < 3 {
            return Err(Error::TooFewAgents(agents.len()));
        }
        let m = agents[0].len();
        if m == 0 {
            return Err(Error::Empty("endowment"));
        }
        if let Some(bad) = agents.iter().find(|a| a.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self { agents })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(RandVar::new).collect::<Result<_>>()?)
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn outcomes(&self) -> usize {
        self.agents[0].len()
    }

    pub fn agents(&self) -> &[RandVar] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &RandVar {
        &self.agents[i]
    }

    /// `S^X`, the entrywise sum of the endowments.
    pub fn aggregate(&self) -> RandVar {
        let mut s = vec![0.0; self.outcomes()];
        for a in &self.agents {
            for (acc, v) in s.iter_mut().zip(a.values()) {
                *acc += v;
            }
        }
        RandVar::from_raw(s)
    }

    pub fn with_agent(&self, i: usize, x: RandVar) -> Self {
        let mut agents = self.agents.clone();
        agents[i] = x;
        Self { agents }
    }

    /// Profile whose `k`-th agent is agent `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            agents: perm.iter().map(|&k| self.agents[k].clone()).collect(),
        }
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            agents: self.agents.iter().map(|a| a.scale(alpha)).collect(),
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.agents.iter().map(|a| a.values().to_vec()).collect()
    }
}

/// `G^X = σ{G, σ{S^X}}`, using the space's tie tolerance for `σ{S^X}`.
pub fn info_with_aggregate(
    g: &InfoPartition,
    profile: &EndowmentProfile,
    space: &FiniteSpace,
) -> Result<InfoPartition> {
    space.check_len(profile.outcomes())?;
    space.check_len(g.outcome_count())?;
    g.join(&sigma_of(&profile.aggregate(), space.tie_tol()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rv(v: &[f64]) -> RandVar {
        RandVar::new(v.to_vec()).unwrap()
    }

    fn part(m: usize, blocks: &[&[usize]]) -> InfoPartition {
        InfoPartition::new(m, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn space_rejects_bad_probabilities() {
        assert!(matches!(
            FiniteSpace::new(vec![0.5, 0.5, 0.0]),
            Err(Error::NonPositiveProbability { index: 2, .. })
        ));
        assert!(matches!(
            FiniteSpace::new(vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(FiniteSpace::normalized(vec![0.5, 0.5 + 5e-10], 1e-9).is_ok());
        assert!(FiniteSpace::normalized(vec![0.5, 0.5 + 5e-9], 1e-9).is_err());
    }

    #[test]
    fn sigma_of_groups_equal_values() {
        assert_eq!(
            sigma_of(&rv(&[1.0, 1.0, 2.0, 2.0]), 0.0),
            part(4, &[&[0, 1], &[2, 3]])
        );
        assert_eq!(sigma_of(&rv(&[3.0; 5]), 0.0), InfoPartition::trivial(5));
    }

    #[test]
    fn sigma_of_single_linkage_with_tolerance() {
        let x = rv(&[1.0, 1.0 + 5e-10, 2.0, 3.0]);
        assert_eq!(sigma_of(&x, 1e-9), part(4, &[&[0, 1], &[2], &[3]]));
        assert_eq!(sigma_of(&x, 0.0), InfoPartition::discrete(4));
        // chains: 0 - 1e-9 - 2e-9 are linked even though the ends differ by 2e-9
        let chain = rv(&[0.0, 2e-9, 1e-9]);
        assert!(sigma_of(&chain, 1.5e-9).is_trivial());
    }

    #[test]
    fn join_examples() {
        let a = part(4, &[&[0, 1], &[2, 3]]);
        let b = part(4, &[&[0, 2], &[1, 3]]);
        assert_eq!(join(&a, &b).unwrap(), InfoPartition::discrete(4));
        assert_eq!(join(&a, &InfoPartition::trivial(4)).unwrap(), a);
        let c = part(4, &[&[0, 1, 2], &[3]]);
        let d = part(4, &[&[0], &[1, 2, 3]]);
        assert_eq!(join(&c, &d).unwrap(), part(4, &[&[0], &[1, 2], &[3]]));
        assert!(matches!(
            join(&a, &InfoPartition::trivial(5)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn partition_validation() {
        assert!(InfoPartition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(InfoPartition::new(3, vec![vec![0, 1]]).is_err());
        assert!(InfoPartition::new(3, vec![vec![0, 1], vec![]]).is_err());
        assert!(InfoPartition::new(3, vec![vec![0, 3], vec![1, 2]]).is_err());
        let p = InfoPartition::new(4, vec![vec![3, 1], vec![2, 0]]).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn cond_expect_examples() {
        let u = FiniteSpace::uniform(4).unwrap().base_measure();
        let x = rv(&[1.0, 0.0, 1.0, 0.0]);
        let e = cond_expect(&x, &part(4, &[&[0, 1], &[2, 3]]), &u).unwrap();
        assert_eq!(e.values(), &[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(cond_expect(&x, &InfoPartition::discrete(4), &u).unwrap(), x);

        let p = Measure::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let e = cond_expect(&rv(&[1.0, 2.0, 3.0, 4.0]), &InfoPartition::trivial(4), &p).unwrap();
        for v in e.values() {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cond_expect_zero_mass_block() {
        let q = Measure::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let err = cond_expect(
            &rv(&[1.0, 2.0, 3.0, 4.0]),
            &part(4, &[&[0, 1], &[2, 3]]),
            &q,
        )
        .unwrap_err();
        assert_eq!(err, Error::ZeroMassBlock { block: 1 });
    }

    #[test]
    fn measurability_examples() {
        let p = part(4, &[&[0, 1], &[2, 3]]);
        assert!(is_measurable(&rv(&[1.0, 1.0, 2.0, 2.0]), &p, 0.0));
        assert!(!is_measurable(&rv(&[1.0, 2.0, 2.0, 2.0]), &p, 0.0));
        assert!(is_measurable(&rv(&[1.0, 1.0 + 1e-10, 2.0, 2.0]), &p, 1e-9));
    }

    #[test]
    fn verify_measure_examples() {
        let space = FiniteSpace::uniform(4).unwrap();
        let p = part(4, &[&[0, 1], &[2, 3]]);
        assert!(verify_measure(&space.base_measure(), &p, &space, 1e-12));
        let ok = Measure::new(vec![0.3, 0.2, 0.25, 0.25]).unwrap();
        assert!(verify_measure(&ok, &p, &space, 1e-12));
        let bad = Measure::new(vec![0.6, 0.1, 0.15, 0.15]).unwrap();
        assert!(!verify_measure(&bad, &p, &space, 1e-12));
        assert!(verify_measure(&bad, &InfoPartition::trivial(4), &space, 1e-12));
    }

    #[test]
    fn profile_needs_three_agents() {
        assert_eq!(
            EndowmentProfile::from_rows(vec![vec![1.0], vec![2.0]]).unwrap_err(),
            Error::TooFewAgents(2)
        );
        let x = EndowmentProfile::from_rows(vec![vec![1.0, 2.0], vec![0.0, 1.0], vec![3.0, 3.0]])
            .unwrap();
        assert_eq!(x.aggregate().values(), &[4.0, 6.0]);
    }

    fn arb_labels(m: usize) -> impl Strategy<Value = Vec<usize>> {
        proptest::collection::vec(0usize..4, m)
    }

    fn arb_setup() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<usize>, Vec<usize>)> {
        (2usize..10).prop_flat_map(|m| {
            (
                proptest::collection::vec(0.05f64..1.0, m),
                proptest::collection::vec(-10.0f64..10.0, m),
                arb_labels(m),
                arb_labels(m),
            )
        })
    }

    fn normalize(w: &[f64]) -> Measure {
        let s: f64 = w.iter().sum();
        Measure::new(w.iter().map(|v| v / s).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn join_is_a_semilattice((_w, _x, la, lb) in arb_setup(), lc in arb_labels(1)) {
            let a = InfoPartition::from_labels(&la);
            let b = InfoPartition::from_labels(&lb);
            let c = InfoPartition::from_labels(&lc.iter().cycle().take(la.len()).copied().collect::<Vec<_>>());
            prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
            prop_assert_eq!(a.join(&a).unwrap(), a.clone());
            prop_assert_eq!(
                a.join(&b).unwrap().join(&c).unwrap(),
                a.join(&b.join(&c).unwrap()).unwrap()
            );
            prop_assert!(a.join(&b).unwrap().refines(&a));
        }

        #[test]
        fn cond_expect_idempotent_and_tower((w, x, la, lb) in arb_setup()) {
            let q = normalize(&w);
            let x = RandVar::new(x).unwrap();
            let coarse = InfoPartition::from_labels(&la);
            let fine = coarse.join(&InfoPartition::from_labels(&lb)).unwrap();
            let e = cond_expect(&x, &coarse, &q).unwrap();
            let ee = cond_expect(&e, &coarse, &q).unwrap();
            for (a, b) in e.iter().zip(ee.iter()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            let tower = cond_expect(&cond_expect(&x, &fine, &q).unwrap(), &coarse, &q).unwrap();
            for (a, b) in e.iter().zip(tower.iter()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
            prop_assert!(is_measurable(&e, &coarse, 0.0));
        }

        #[test]
        fn cond_expect_is_linear((w, x, la, _lb) in arb_setup(), a in -3.0f64..3.0, shift in -5.0f64..5.0) {
            let q = normalize(&w);
            let x = RandVar::new(x).unwrap();
            let y = x.map(|v| v * v - 1.0);
            let p = InfoPartition::from_labels(&la);
            let lhs = cond_expect(&x.scale(a).add(&y).shift(shift), &p, &q).unwrap();
            let rhs = cond_expect(&x, &p, &q).unwrap().scale(a)
                .add(&cond_expect(&y, &p, &q).unwrap()).shift(shift);
            for (l, r) in lhs.iter().zip(rhs.iter()) {
                prop_assert!((l - r).abs() <= 1e-9);
            }
        }

        #[test]
        fn trivial_restriction_is_vacuous((w, _x, _la, _lb) in arb_setup()) {
            let q = normalize(&w);
            let space = FiniteSpace::uniform(w.len()).unwrap();
            prop_assert!(verify_measure(&q, &InfoPartition::trivial(w.len()), &space, 1e-12));
        }

        #[test]
        fn sigma_of_is_order_independent(x in proptest::collection::vec(-3i32..3, 1..12), tol in 0.0f64..1.5) {
            let xs: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let p = sigma_of(&RandVar::new(xs.clone()).unwrap(), tol);
            // reversing the outcome labels must give the mirrored partition
            let rev: Vec<f64> = xs.iter().rev().copied().collect();
            let q = sigma_of(&RandVar::new(rev).unwrap(), tol);
            let m = xs.len();
            for a in 0..m {
                for b in 0..m {
                    prop_assert_eq!(
                        p.block_of(a) == p.block_of(b),
                        q.block_of(m - 1 - a) == q.block_of(m - 1 - b)
                    );
                }
            }
            prop_assert!(is_measurable(&RandVar::new(xs).unwrap(), &p, tol * m as f64));
        }
    }
}

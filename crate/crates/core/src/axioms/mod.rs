//! Seeded randomized checks of allocation axioms and properties.
//!
//! A passing check only means that no counterexample turned up in the
//! configured number of trials. A failing check always carries the
//! counterexample, which can be replayed from its stored inputs alone.

mod gen;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use gen::{draw, TrialInput};

use crate::mechanisms::AllocationRule;
use crate::prob::{info_with_aggregate, is_measurable, EndowmentProfile, FiniteSpace, InfoPartition, RandVar};
use crate::{Error, Result};

/// Number of thresholds in the stop-loss grid used for the convex-order check.
pub const STOP_LOSS_POINTS: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AxiomId {
    /// Internal fairness: `X_i >= X_j` implies `H_i >= H_j`.
    IF,
    /// Agent anonymity.
    AA,
    /// Operational anonymity.
    OA,
    /// Frictional participation.
    FP,
    /// Scale invariance.
    SI,
    /// Zero preserving.
    ZP,
    /// Information anonymity.
    IA,
    /// Information backtracking.
    IB,
    /// Frictionless participation.
    FPstar,
    /// Pairwise comonotonicity of the allocation.
    Com,
    /// No-ripoff.
    RF,
    /// Actuarial fairness.
    AF,
    /// Convex-order improvement `X_i >=_cx H_i`.
    UI,
    /// Convexity of global and pairwise costs along equal-sum segments.
    CostConvexity,
}

impl AxiomId {
    pub const ALL: [AxiomId; 14] = [
        Self::IF,
        Self::AA,
        Self::OA,
        Self::FP,
        Self::SI,
        Self::ZP,
        Self::IA,
        Self::IB,
        Self::FPstar,
        Self::Com,
        Self::RF,
        Self::AF,
        Self::UI,
        Self::CostConvexity,
    ];

    /// Columns of the rule comparison table.
    pub const TABLE: [AxiomId; 9] = [
        Self::Com,
        Self::UI,
        Self::IF,
        Self::AF,
        Self::RF,
        Self::ZP,
        Self::AA,
        Self::OA,
        Self::IA,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Self::IF => "IF",
            Self::AA => "AA",
            Self::OA => "OA",
            Self::FP => "FP",
            Self::SI => "SI",
            Self::ZP => "ZP",
            Self::IA => "IA",
            Self::IB => "IB",
            Self::FPstar => "FP*",
            Self::Com => "Com",
            Self::RF => "RF",
            Self::AF => "AF",
            Self::UI => "UI",
            Self::CostConvexity => "CostConvexity",
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        let found = Self::ALL.into_iter().find(|a| {
            a.code().eq_ignore_ascii_case(key)
                || (*a == Self::FPstar && key.eq_ignore_ascii_case("fpstar"))
                || (*a == Self::CostConvexity && key.eq_ignore_ascii_case("convexity"))
        });
        found.ok_or_else(|| Error::InvalidParameter(format!("unknown axiom `{key}`")))
    }
}

/// Information sets drawn by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum InfoMode {
    /// `G = {∅, Ω}` in every trial.
    #[default]
    Trivial,
    /// A random partition with up to four blocks per trial.
    Random,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckConfig {
    pub trials: usize,
    pub seed: u64,
    pub space_size: usize,
    pub n_agents: usize,
    pub value_range: (f64, f64),
    pub tol: f64,
    pub info: InfoMode,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 42,
            space_size: 8,
            n_agents: 3,
            value_range: (-10.0, 10.0),
            tol: 1e-9,
            info: InfoMode::Trivial,
        }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.space_size < 4 {
            return bad(format!("space size must be >= 4, got {}", self.space_size));
        }
        if self.n_agents < 3 {
            return Err(Error::TooFewAgents(self.n_agents));
        }
        let (lo, hi) = self.value_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("invalid value range [{lo}, {hi}]"));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tolerance must be > 0, got {}", self.tol));
        }
        Ok(())
    }
}

/// Axiom-specific transformation of a trial's profile.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Instance {
    /// The axiom is a statement about `H(X)` alone.
    Single,
    /// `Y_k = X_{perm[k]}`.
    Permutation(Vec<usize>),
    /// `Y = X - X_j e_j + X_j e_i`, plus the collapsed profile with `X_i`
    /// at `i`, `S - X_i` at `j` and zeros elsewhere.
    Move { i: usize, j: usize },
    /// `X_j = 0` and `Y = X + Z e_j - Z e_i`.
    Transfer { i: usize, j: usize, z: Vec<f64> },
    /// `X_j = 0` and `Y = X + a X_i e_j - a X_i e_i`.
    Split { i: usize, j: usize, alpha: f64 },
    /// `S^Y = S^X`; compares costs at `lambda X + (1 - lambda) Y`.
    Mix { other: Vec<Vec<f64>>, lambda: f64 },
}

/// Required relation between the two sides of a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

/// The concrete comparison that failed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    /// What is compared, e.g. `H_i(Y) vs H_i(X)`.
    pub what: String,
    pub agents: Vec<usize>,
    pub outcomes: Vec<usize>,
    /// Extra scalar of the comparison (stop-loss threshold), if any.
    pub param: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
}

impl Witness {
    /// Amount by which `lhs relation rhs` is violated (`<= 0` when it holds).
    pub fn violation(&self) -> f64 {
        match self.relation {
            Relation::Eq => (self.lhs - self.rhs).abs(),
            Relation::Ge => self.rhs - self.lhs,
            Relation::Le => self.lhs - self.rhs,
        }
    }
}

/// A failing trial, with everything needed to replay it.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counterexample {
    pub axiom: AxiomId,
    pub rule: String,
    pub trial: usize,
    pub probs: Vec<f64>,
    pub tie_tol: f64,
    pub info: Vec<Vec<usize>>,
    pub profile: Vec<Vec<f64>>,
    pub instance: Instance,
    pub witness: Witness,
    pub tol: f64,
}

impl Counterexample {
    pub fn space(&self) -> Result<FiniteSpace> {
        Ok(FiniteSpace::new(self.probs.clone())?.with_tie_tol(self.tie_tol))
    }

    pub fn info_partition(&self) -> Result<InfoPartition> {
        InfoPartition::new(self.probs.len(), self.info.clone())
    }

    pub fn endowments(&self) -> Result<EndowmentProfile> {
        EndowmentProfile::from_rows(self.profile.clone())
    }

    /// Re-evaluates the stored inputs under `rule` and returns the worst
    /// violating comparison, if any.
    pub fn replay<R: AllocationRule + ?Sized>(&self, rule: &R) -> Result<Option<Witness>> {
        let space = self.space()?;
        let g = self.info_partition()?;
        let x = self.endowments()?;
        evaluate(self.axiom, rule, &space, &g, &x, &self.instance, self.tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckResult {
    pub axiom: AxiomId,
    pub rule: String,
    pub passed: bool,
    pub trials_run: usize,
    pub counterexample: Option<Counterexample>,
}

fn inapplicable<R: AllocationRule + ?Sized>(axiom: AxiomId, rule: &R, cfg: &CheckConfig) -> Result<()> {
    if rule.requires_trivial_info() && cfg.info != InfoMode::Trivial {
        return Err(Error::Inapplicable {
            axiom: axiom.code(),
            rule: rule.name(),
            reason: "the rule is only defined for trivial information",
        });
    }
    Ok(())
}

/// Runs `cfg.trials` seeded trials of `axiom` against `rule`, stopping at
/// the first counterexample.
pub fn check<R: AllocationRule + ?Sized>(rule: &R, axiom: AxiomId, cfg: &CheckConfig) -> Result<CheckResult> {
    cfg.validate()?;
    inapplicable(axiom, rule, cfg)?;
    for trial in 0..cfg.trials {
        let input = draw(axiom, cfg, trial);
        let found = evaluate(
            axiom,
            rule,
            &input.space,
            &input.g,
            &input.profile,
            &input.instance,
            cfg.tol,
        )?;
        if let Some(witness) = found {
            return Ok(CheckResult {
                axiom,
                rule: rule.name(),
                passed: false,
                trials_run: trial + 1,
                counterexample: Some(Counterexample {
                    axiom,
                    rule: rule.name(),
                    trial,
                    probs: input.space.probs().to_vec(),
                    tie_tol: input.space.tie_tol(),
                    info: input.g.blocks().to_vec(),
                    profile: input.profile.rows(),
                    instance: input.instance,
                    witness,
                    tol: cfg.tol,
                }),
            });
        }
    }
    Ok(CheckResult {
        axiom,
        rule: rule.name(),
        passed: true,
        trials_run: cfg.trials,
        counterexample: None,
    })
}

/// Convexity of the global and pairwise costs along `λX + (1-λ)Y` with
/// `S^X = S^Y`.
pub fn check_cost_convexity<R: AllocationRule + ?Sized>(rule: &R, cfg: &CheckConfig) -> Result<CheckResult> {
    check(rule, AxiomId::CostConvexity, cfg)
}

/// One cell of the comparison matrix.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Cell {
    Checked(CheckResult),
    NotApplicable(String),
}

impl Cell {
    /// `pass`, `fail` or `n/a`.
    pub fn status(&self) -> &'static str {
        match self {
            Self::Checked(r) if r.passed => "pass",
            Self::Checked(_) => "fail",
            Self::NotApplicable(_) => "n/a",
        }
    }

    /// `✓`, `✗` or `n/a`.
    pub fn symbol(&self) -> &'static str {
        match self {
            Self::Checked(r) if r.passed => "✓",
            Self::Checked(_) => "✗",
            Self::NotApplicable(_) => "n/a",
        }
    }

    pub fn result(&self) -> Option<&CheckResult> {
        match self {
            Self::Checked(r) => Some(r),
            Self::NotApplicable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonMatrix {
    pub rules: Vec<String>,
    pub axioms: Vec<AxiomId>,
    /// `cells[r][a]` for rule `r` and axiom `a`.
    pub cells: Vec<Vec<Cell>>,
    pub trials: usize,
    pub seed: u64,
}

impl ComparisonMatrix {
    pub fn cell(&self, rule: usize, axiom: AxiomId) -> Option<&Cell> {
        let a = self.axioms.iter().position(|&x| x == axiom)?;
        self.cells.get(rule)?.get(a)
    }
}

/// Full cross product of rules and axioms under one configuration.
pub fn comparison_matrix<R: AllocationRule>(
    rules: &[R],
    axioms: &[AxiomId],
    cfg: &CheckConfig,
) -> Result<ComparisonMatrix> {
    cfg.validate()?;
    let mut cells = Vec::with_capacity(rules.len());
    for rule in rules {
        let mut row = Vec::with_capacity(axioms.len());
        for &axiom in axioms {
            row.push(match check(rule, axiom, cfg) {
                Ok(r) => Cell::Checked(r),
                Err(Error::Inapplicable { reason, .. }) => Cell::NotApplicable(reason.into()),
                Err(e) => return Err(e),
            });
        }
        cells.push(row);
    }
    Ok(ComparisonMatrix {
        rules: rules.iter().map(|r| r.name()).collect(),
        axioms: axioms.to_vec(),
        cells,
        trials: cfg.trials,
        seed: cfg.seed,
    })
}

/// Keeps the comparison with the largest violation above `tol`.
struct Worst {
    tol: f64,
    best: Option<Witness>,
}

impl Worst {
    fn new(tol: f64) -> Self {
        Self { tol, best: None }
    }

    #[allow(clippy::too_many_arguments)]
    fn offer(
        &mut self,
        what: &str,
        agents: &[usize],
        outcomes: &[usize],
        param: Option<f64>,
        lhs: f64,
        rhs: f64,
        relation: Relation,
    ) {
        let w = Witness {
            what: what.into(),
            agents: agents.to_vec(),
            outcomes: outcomes.to_vec(),
            param,
            lhs,
            rhs,
            relation,
        };
        let v = w.violation();
        if v > self.tol && self.best.as_ref().is_none_or(|b| v > b.violation()) {
            self.best = Some(w);
        }
    }
}

fn alloc_parts<R: AllocationRule + ?Sized>(
    rule: &R,
    x: &EndowmentProfile,
    g: &InfoPartition,
    space: &FiniteSpace,
) -> Result<Vec<RandVar>> {
    Ok(rule.allocate(x, g, space)?.parts)
}

fn profile_from(rows: Vec<Vec<f64>>) -> Result<EndowmentProfile> {
    EndowmentProfile::from_rows(rows)
}

fn dominates(a: &RandVar, b: &RandVar) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x >= y)
}

fn stop_loss(x: &RandVar, t: f64, space: &FiniteSpace) -> f64 {
    x.iter()
        .zip(space.probs())
        .map(|(v, p)| p * (v - t).max(0.0))
        .sum()
}

/// Evaluates one instance of `axiom`; `Some` holds the worst comparison
/// violated by more than `tol`.
pub fn evaluate<R: AllocationRule + ?Sized>(
    axiom: AxiomId,
    rule: &R,
    space: &FiniteSpace,
    g: &InfoPartition,
    x: &EndowmentProfile,
    instance: &Instance,
    tol: f64,
) -> Result<Option<Witness>> {
    let n = x.n();
    let m = x.outcomes();
    let mut worst = Worst::new(tol);
    let rows = x.rows();

    match (axiom, instance) {
        (AxiomId::IF, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            for i in 0..n {
                for j in 0..n {
                    if i != j && dominates(x.agent(i), x.agent(j)) {
                        for w in 0..m {
                            worst.offer("H_i(X) >= H_j(X)", &[i, j], &[w], None, h[i][w], h[j][w], Relation::Ge);
                        }
                    }
                }
            }
        }
        (AxiomId::AA, Instance::Permutation(perm)) => {
            let hx = alloc_parts(rule, x, g, space)?;
            let y = profile_from(perm.iter().map(|&k| rows[k].clone()).collect())?;
            let hy = alloc_parts(rule, &y, g, space)?;
            for i in 0..n {
                for w in 0..m {
                    worst.offer("H_i(X_perm) = H_perm(i)(X)", &[i, perm[i]], &[w], None, hy[i][w], hx[perm[i]][w], Relation::Eq);
                }
            }
        }
        (AxiomId::OA, &Instance::Move { i, j }) => {
            let hx = alloc_parts(rule, x, g, space)?;
            let mut moved = rows.clone();
            for w in 0..m {
                moved[i][w] += moved[j][w];
                moved[j][w] = 0.0;
            }
            let hy = alloc_parts(rule, &profile_from(moved)?, g, space)?;
            for k in (0..n).filter(|&k| k != i && k != j) {
                for w in 0..m {
                    worst.offer("H_k(Y) = H_k(X) after merging j into i", &[k, i, j], &[w], None, hy[k][w], hx[k][w], Relation::Eq);
                }
            }
            let s = x.aggregate();
            let mut collapsed = vec![vec![0.0; m]; n];
            collapsed[i] = rows[i].clone();
            collapsed[j] = (0..m).map(|w| s[w] - rows[i][w]).collect();
            let hc = alloc_parts(rule, &profile_from(collapsed)?, g, space)?;
            for w in 0..m {
                worst.offer("H_i(0,..,X_i,S-X_i,..,0) = H_i(X)", &[i, j], &[w], None, hc[i][w], hx[i][w], Relation::Eq);
            }
        }
        (AxiomId::FP | AxiomId::FPstar, Instance::Transfer { i, j, z }) => {
            let (i, j) = (*i, *j);
            let hx = alloc_parts(rule, x, g, space)?;
            let mut y = rows.clone();
            for w in 0..m {
                y[j][w] += z[w];
                y[i][w] -= z[w];
            }
            let hy = alloc_parts(rule, &profile_from(y)?, g, space)?;
            let rel = if axiom == AxiomId::FP { Relation::Ge } else { Relation::Eq };
            for w in 0..m {
                worst.offer(
                    "H_i(X) + H_j(X) vs H_i(Y) + H_j(Y)",
                    &[i, j],
                    &[w],
                    None,
                    hx[i][w] + hx[j][w],
                    hy[i][w] + hy[j][w],
                    rel,
                );
            }
        }
        (AxiomId::SI, &Instance::Split { i, j, alpha }) => {
            let hx = alloc_parts(rule, x, g, space)?;
            let mut y = rows.clone();
            for w in 0..m {
                let part = alpha * rows[i][w];
                y[j][w] += part;
                y[i][w] -= part;
            }
            let hy = alloc_parts(rule, &profile_from(y)?, g, space)?;
            for w in 0..m {
                worst.offer("H_j(Y) = a H_i(X)", &[j, i], &[w], Some(alpha), hy[j][w], alpha * hx[i][w], Relation::Eq);
            }
        }
        (AxiomId::ZP, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            for j in (0..n).filter(|&j| x.agent(j).is_zero()) {
                for w in 0..m {
                    worst.offer("H_j(X) = 0 when X_j = 0", &[j], &[w], None, h[j][w], 0.0, Relation::Eq);
                }
            }
        }
        (AxiomId::IA, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            let info = info_with_aggregate(g, x, space)?;
            for (i, hi) in h.iter().enumerate() {
                for block in info.blocks() {
                    for &w in &block[1..] {
                        worst.offer("H_i constant on blocks of G^X", &[i], &[w, block[0]], None, hi[w], hi[block[0]], Relation::Eq);
                    }
                }
            }
        }
        (AxiomId::IB, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            let info = info_with_aggregate(g, x, space)?;
            for i in (0..n).filter(|&i| is_measurable(x.agent(i), &info, tol)) {
                for w in 0..m {
                    worst.offer("H_i(X) = X_i when X_i is G^X-measurable", &[i], &[w], None, h[i][w], x.agent(i)[w], Relation::Eq);
                }
            }
        }
        (AxiomId::Com, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            for i in 0..n {
                for j in i + 1..n {
                    for w in 0..m {
                        for v in w + 1..m {
                            let prod = (h[i][w] - h[i][v]) * (h[j][w] - h[j][v]);
                            worst.offer("(H_i(w)-H_i(v))(H_j(w)-H_j(v)) >= 0", &[i, j], &[w, v], None, prod, 0.0, Relation::Ge);
                        }
                    }
                }
            }
        }
        (AxiomId::RF, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            for j in 0..n {
                let cap = x.agent(j).max();
                for w in 0..m {
                    worst.offer("H_j(X) <= max X_j", &[j], &[w], None, h[j][w], cap, Relation::Le);
                }
            }
        }
        (AxiomId::AF, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            for i in 0..n {
                worst.offer("E[H_i] = E[X_i]", &[i], &[], None, space.expectation(&h[i]), space.expectation(x.agent(i)), Relation::Eq);
            }
        }
        (AxiomId::UI, _) => {
            let h = alloc_parts(rule, x, g, space)?;
            for i in 0..n {
                let xi = x.agent(i);
                worst.offer("E[H_i] = E[X_i]", &[i], &[], None, space.expectation(&h[i]), space.expectation(xi), Relation::Eq);
                let lo = xi.min().min(h[i].min());
                let hi = xi.max().max(h[i].max());
                for k in 0..STOP_LOSS_POINTS {
                    let t = lo + (hi - lo) * k as f64 / (STOP_LOSS_POINTS - 1) as f64;
                    worst.offer(
                        "E[(H_i - t)+] <= E[(X_i - t)+]",
                        &[i],
                        &[],
                        Some(t),
                        stop_loss(&h[i], t, space),
                        stop_loss(xi, t, space),
                        Relation::Le,
                    );
                }
            }
        }
        (AxiomId::CostConvexity, Instance::Mix { other, lambda }) => {
            let lambda = *lambda;
            let y = profile_from(other.clone())?;
            let mix = profile_from(
                (0..n)
                    .map(|k| (0..m).map(|w| lambda * rows[k][w] + (1.0 - lambda) * other[k][w]).collect())
                    .collect(),
            )?;
            let costs = |p: &EndowmentProfile| -> Result<(RandVar, Vec<Vec<RandVar>>)> {
                let h = alloc_parts(rule, p, g, space)?;
                let mut total = RandVar::zeros(m);
                for part in &h {
                    total = total.add(part);
                }
                let global = p.aggregate().sub(&total);
                let pairwise = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| p.agent(i).add(p.agent(j)).sub(&h[i]).sub(&h[j]))
                            .collect()
                    })
                    .collect();
                Ok((global, pairwise))
            };
            let (gx, px) = costs(x)?;
            let (gy, py) = costs(&y)?;
            let (gm, pm) = costs(&mix)?;
            for w in 0..m {
                worst.offer(
                    "C(mix) <= l C(X) + (1-l) C(Y)",
                    &[],
                    &[w],
                    Some(lambda),
                    gm[w],
                    lambda * gx[w] + (1.0 - lambda) * gy[w],
                    Relation::Le,
                );
                for i in 0..n {
                    for j in i + 1..n {
                        worst.offer(
                            "C_ij(mix) <= l C_ij(X) + (1-l) C_ij(Y)",
                            &[i, j],
                            &[w],
                            Some(lambda),
                            pm[i][j][w],
                            lambda * px[i][j][w] + (1.0 - lambda) * py[i][j][w],
                            Relation::Le,
                        );
                    }
                }
            }
        }
        (axiom, _) => {
            return Err(Error::InvalidParameter(format!(
                "instance does not match axiom {axiom}"
            )))
        }
    }
    Ok(worst.best)
}

use fricshare_core::axioms::{
    check, check_cost_convexity, comparison_matrix, draw, AxiomId, CheckConfig, InfoMode, Instance,
};
use fricshare_core::mechanisms::{Allocation, AllocationRule, MechanismSpec};
use fricshare_core::prob::{cond_expect, info_with_aggregate, EndowmentProfile, FiniteSpace, InfoPartition};
use fricshare_core::{Error, Result};

fn cfg(trials: usize) -> CheckConfig {
    CheckConfig {
        trials,
        ..CheckConfig::default()
    }
}

/// `H_i = E[-|X_i| | G^X]`: symmetric and local, but rewards small
/// endowments over large ones.
struct NegAbs;

impl AllocationRule for NegAbs {
    fn allocate(&self, x: &EndowmentProfile, g: &InfoPartition, space: &FiniteSpace) -> Result<Allocation> {
        let info = info_with_aggregate(g, x, space)?;
        let q = space.base_measure();
        let parts = x
            .agents()
            .iter()
            .map(|xi| cond_expect(&xi.map(|v| -v.abs()), &info, &q))
            .collect::<Result<_>>()?;
        Ok(Allocation { parts, info_used: info })
    }

    fn name(&self) -> String {
        "NegAbs".into()
    }
}

/// CMRS plus a concave bonus `c_i |E[X_i]|` with `c_i = (i + 1) / 2`.
struct ConcaveBonus;

impl AllocationRule for ConcaveBonus {
    fn allocate(&self, x: &EndowmentProfile, g: &InfoPartition, space: &FiniteSpace) -> Result<Allocation> {
        let base = MechanismSpec::Cmrs.allocate(x, g, space)?;
        let parts = base
            .parts
            .iter()
            .enumerate()
            .map(|(i, h)| h.shift(0.5 * (i + 1) as f64 * space.expectation(x.agent(i)).abs()))
            .collect();
        Ok(Allocation {
            parts,
            info_used: base.info_used,
        })
    }

    fn name(&self) -> String {
        "ConcaveBonus".into()
    }
}

fn symbols(rule: &MechanismSpec, c: &CheckConfig) -> String {
    let m = comparison_matrix(std::slice::from_ref(rule), &AxiomId::TABLE, c).unwrap();
    m.cells[0].iter().map(|c| c.symbol()).collect()
}

#[test]
fn comparison_table_rows() {
    let c = cfg(1000);
    assert_eq!(symbols(&MechanismSpec::Cmrs, &c), "✗✓✓✓✓✓✓✓✓");
    assert_eq!(symbols(&MechanismSpec::Qbrs, &c), "✓✗✓✗✓✓✓✗✓");
    assert_eq!(symbols(&MechanismSpec::LeftEs { lambda: 0.9 }, &c), "✗✗✓✗✓✓✓✓✓");
}

#[test]
fn cmrs_passes_the_remaining_axioms_with_random_information() {
    let c = CheckConfig {
        info: InfoMode::Random,
        ..cfg(500)
    };
    for axiom in [AxiomId::FP, AxiomId::FPstar, AxiomId::SI, AxiomId::IB, AxiomId::CostConvexity] {
        let r = check(&MechanismSpec::Cmrs, axiom, &c).unwrap();
        assert!(r.passed, "{axiom}: {:?}", r.counterexample);
    }
}

#[test]
fn qbrs_with_random_information_is_not_applicable() {
    let c = CheckConfig {
        info: InfoMode::Random,
        ..cfg(10)
    };
    assert!(matches!(
        check(&MechanismSpec::Qbrs, AxiomId::ZP, &c),
        Err(Error::Inapplicable { .. })
    ));
}

#[test]
fn same_seed_same_result() {
    let c = cfg(300);
    for axiom in [AxiomId::Com, AxiomId::OA, AxiomId::UI] {
        let a = check(&MechanismSpec::Qbrs, axiom, &c).unwrap();
        let b = check(&MechanismSpec::Qbrs, axiom, &c).unwrap();
        assert_eq!(a, b);
    }
    let a = draw(AxiomId::SI, &c, 17);
    let b = draw(AxiomId::SI, &c, 17);
    assert_eq!(a.profile, b.profile);
    assert_eq!(a.instance, b.instance);
}

#[test]
fn proportional_rule_fails_zero_and_split_properties() {
    let c = cfg(500);
    for axiom in [AxiomId::ZP, AxiomId::SI] {
        let r = check(&MechanismSpec::Proportional, axiom, &c).unwrap();
        assert!(!r.passed, "{axiom}");
    }
}

#[test]
fn negative_absolute_rule_fails_only_fairness() {
    let c = cfg(500);
    let r = check(&NegAbs, AxiomId::IF, &c).unwrap();
    assert!(!r.passed);
    let w = &r.counterexample.unwrap().witness;
    assert!(w.violation() > 0.0);
    for axiom in [AxiomId::AA, AxiomId::OA, AxiomId::FP, AxiomId::SI] {
        assert!(check(&NegAbs, axiom, &c).unwrap().passed, "{axiom}");
    }
}

#[test]
fn concave_bonus_breaks_cost_convexity() {
    let r = check_cost_convexity(&ConcaveBonus, &cfg(500)).unwrap();
    assert!(!r.passed);
    assert!(check_cost_convexity(&MechanismSpec::Cmrs, &cfg(500)).unwrap().passed);
}

#[test]
fn counterexamples_replay_from_stored_inputs() {
    let c = cfg(1000);
    let cases: [(&dyn AllocationRule, AxiomId); 4] = [
        (&MechanismSpec::Cmrs, AxiomId::Com),
        (&MechanismSpec::Qbrs, AxiomId::OA),
        (&MechanismSpec::LeftEs { lambda: 0.9 }, AxiomId::UI),
        (&NegAbs, AxiomId::IF),
    ];
    for (rule, axiom) in cases {
        let r = check(rule, axiom, &c).unwrap();
        let ce = r.counterexample.expect("failing check carries a counterexample");
        assert_eq!(ce.axiom, axiom);
        let again = ce.replay(rule).unwrap().expect("replay reproduces the violation");
        assert_eq!(again, ce.witness);
        assert!(again.violation() > c.tol);
    }
}

fn on_grid(v: f64) -> bool {
    (v * 64.0).fract() == 0.0
}

#[test]
fn generated_inputs_satisfy_the_axiom_hypotheses() {
    let c = CheckConfig {
        info: InfoMode::Random,
        ..cfg(200)
    };
    for axiom in AxiomId::ALL {
        for trial in 0..c.trials {
            let t = draw(axiom, &c, trial);
            assert_eq!(t.space.len(), c.space_size);
            assert_eq!(t.profile.n(), c.n_agents);
            assert!(t.profile.rows().iter().flatten().all(|v| on_grid(*v)), "{axiom} trial {trial}");
            assert!((t.space.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            match (&axiom, &t.instance) {
                (AxiomId::IF, _) => {
                    let x = &t.profile;
                    let found = (0..x.n()).any(|i| {
                        (0..x.n()).any(|j| i != j && x.agent(i).iter().zip(x.agent(j).iter()).all(|(a, b)| a >= b))
                    });
                    assert!(found, "IF trial {trial} has no dominance pair");
                }
                (AxiomId::AA, Instance::Permutation(p)) => {
                    let mut sorted = p.clone();
                    sorted.sort();
                    assert_eq!(sorted, (0..c.n_agents).collect::<Vec<_>>());
                }
                (AxiomId::OA, Instance::Move { i, j }) => assert_ne!(i, j),
                (AxiomId::FP | AxiomId::FPstar, Instance::Transfer { i, j, z }) => {
                    assert_ne!(i, j);
                    assert!(t.profile.agent(*j).is_zero());
                    assert_eq!(z.len(), c.space_size);
                }
                (AxiomId::SI, Instance::Split { i, j, alpha }) => {
                    assert_ne!(i, j);
                    assert!(t.profile.agent(*j).is_zero());
                    assert!((0.0..=1.0).contains(alpha));
                }
                (AxiomId::ZP, _) => assert!((0..c.n_agents).any(|j| t.profile.agent(j).is_zero())),
                (AxiomId::CostConvexity, Instance::Mix { other, lambda }) => {
                    let y = EndowmentProfile::from_rows(other.clone()).unwrap();
                    assert_eq!(y.aggregate(), t.profile.aggregate());
                    assert!((0.0..=1.0).contains(lambda));
                }
                (
                    AxiomId::AA | AxiomId::OA | AxiomId::FP | AxiomId::FPstar | AxiomId::SI | AxiomId::CostConvexity,
                    other,
                ) => panic!("{axiom}: unexpected instance {other:?}"),
                _ => {}
            }
        }
    }
}

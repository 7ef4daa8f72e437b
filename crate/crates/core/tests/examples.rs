//! Worked examples for each public operation, with hand-derived expected
//! values.

mod common;

use approx::assert_abs_diff_eq;
use common::*;
use famdiv::scenarios::*;
use famdiv::*;

fn cd2(alpha: f64) -> UtilityFunction {
    UtilityFunction::cobb_douglas2(alpha)
}

fn b(y: f64, z: f64) -> Bundle {
    Bundle::new(vec![y, z])
}

fn two_singles(endowment: [f64; 2], a: f64, c: f64) -> Economy {
    economy(endowment, vec![vec![cd2(a)], vec![cd2(c)]])
}

#[test]
fn parses_three_family_document() {
    let text = r#"{
      "goods": 2,
      "endowment": [3, 3],
      "families": [
        {"id": "f", "members": [
          {"id": "h", "utility": {"kind": "cobb_douglas", "weights": [0.3333333333333333, 0.6666666666666667]}},
          {"id": "w", "utility": {"kind": "cobb_douglas", "weights": [0.6666666666666667, 0.3333333333333333]}}]},
        {"id": "s", "members": [{"id": "s", "utility": {"kind": "cobb_douglas", "weights": [0.3333333333333333, 0.6666666666666667]}}]},
        {"id": "s'", "members": [{"id": "s'", "utility": {"kind": "cobb_douglas", "weights": [0.6666666666666667, 0.3333333333333333]}}]}
      ]
    }"#;
    let econ = parse_economy(text).unwrap();
    assert_eq!(econ.family_count(), 3);
    assert_eq!(econ.individual_count(), 4);
}

#[test]
fn rejects_invalid_documents() {
    let zero_endowment = r#"{"goods": 2, "endowment": [0, 1], "families": [
        {"id": "f", "members": [{"id": "a", "utility": {"kind": "linear", "coefficients": [1, 1]}}]}]}"#;
    let err = parse_economy(zero_endowment).unwrap_err();
    assert!(err.to_string().contains("endowment must be strictly positive"), "{err}");

    let empty_family = r#"{"goods": 2, "endowment": [1, 1], "families": [{"id": "f", "members": []}]}"#;
    assert!(matches!(parse_economy(empty_family), Err(Error::Validation(_))));

    assert!(matches!(parse_economy("{\"goods\": 2"), Err(Error::Parse { .. })));
}

#[test]
fn evaluates_utilities() {
    let u = UtilityFunction::cobb_douglas(vec![1.0 / 3.0, 2.0 / 3.0]);
    assert_abs_diff_eq!(evaluate_utility(&u, &b(1.0, 1.0)).unwrap(), 1.0, epsilon = 1e-15);
    let v = evaluate_utility(&cd2(0.6), &b(0.9, 0.1)).unwrap();
    assert_abs_diff_eq!(v, 0.9f64.powf(0.6) * 0.1f64.powf(0.4), epsilon = 1e-15);
    assert_abs_diff_eq!(v, 0.3737, epsilon = 5e-5);
    let lin = UtilityFunction::linear(vec![1.0, 1.0]);
    assert_abs_diff_eq!(evaluate_utility(&lin, &b(0.25, 0.75)).unwrap(), 1.0, epsilon = 1e-15);
    assert!(matches!(
        evaluate_utility(&lin, &Bundle::new(vec![1.0, 1.0, 1.0])),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn normalizes_utilities() {
    let econ = two_singles([2.0, 2.0], 0.5, 0.5);
    assert_eq!(normalized_utility(&cd2(0.5), &b(1.0, 1.0), &econ).unwrap(), 0.0);

    let econ = negative_ceei_economy();
    let u = cd2(1.0 / 3.0);
    assert_eq!(normalized_utility(&u, &econ.fair_share(), &econ).unwrap(), 0.0);
    assert_abs_diff_eq!(normalized_utility(&u, &b(2.0, 2.0), &econ).unwrap(), 1.0 / 3.0, epsilon = 1e-10);
}

#[test]
fn computes_marginal_rates() {
    let u = cd2(1.0 / 3.0);
    assert_abs_diff_eq!(mrs(&u, &b(0.654, 1.308)).unwrap(), 1.0, epsilon = 1e-12);
    let lin = UtilityFunction::linear(vec![1.0, 1.0]);
    assert_eq!(mrs(&lin, &b(0.3, 2.0)).unwrap(), 1.0);
    assert_abs_diff_eq!(mrs(&cd2(2.0 / 3.0), &b(1.0381, 1.0381)).unwrap(), 2.0, epsilon = 1e-12);
    assert!(mrs(&u, &b(0.0, 1.0)).is_err());
}

#[test]
fn fair_shares() {
    assert_eq!(fair_share(&negative_ceei_economy()).0, vec![1.0, 1.0]);
    assert_eq!(fair_share(&negative_ceei_fs_economy()).0, vec![0.5, 0.5]);
    let share = fair_share(&negative_family_ee_economy());
    assert_abs_diff_eq!(share.0[0], 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(share.0[1], 0.5, epsilon = 1e-15);
}

#[test]
fn feasibility() {
    let econ = two_singles([3.0, 3.0], 0.4, 0.6);
    let exact = Allocation::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
    assert!(check_feasible(&econ, &exact, 0.0).unwrap().feasible);
    let over = Allocation::from_rows(&[&[2.0, 2.0], &[2.0, 2.0]]);
    let report = check_feasible(&econ, &over, 1e-9).unwrap();
    assert!(!report.feasible);
    assert_eq!(report.violated_good, Some(0));

    let econ = negative_ceei_economy();
    let x = solve_negative_ceei().unwrap();
    assert!(check_feasible(&econ, &x, 1e-3).unwrap().feasible);
}

#[test]
fn family_relation_examples() {
    let econ = economy([3.0, 3.0], vec![vec![cd2(1.0 / 3.0), cd2(2.0 / 3.0)], vec![cd2(0.5)]]);
    let any = b(0.7, 1.9);
    assert_eq!(compare_family(&econ, "f0", &any, &any, 1e-9).unwrap(), FamilyRelation::Indifferent);
    assert_eq!(
        compare_family(&econ, "f0", &b(2.0, 0.5), &b(1.0, 1.0), 1e-9).unwrap(),
        FamilyRelation::Incomparable
    );
    assert_eq!(
        compare_family(&econ, "f1", &b(2.0, 2.0), &b(1.0, 1.0), 1e-9).unwrap(),
        FamilyRelation::StrictlyPrefersFirst
    );
    assert!(matches!(
        compare_family(&econ, "nobody", &any, &any, 1e-9),
        Err(Error::UnknownFamily(_))
    ));
}

#[test]
fn equal_split_passes_every_fairness_test() {
    let econ = negative_pone_economy();
    let x = econ.equal_split();
    let share = econ.fair_share();
    for c in FairnessCriterion::ALL {
        let reference = c.needs_reference().then_some(&share);
        let report = check_fairness(&econ, &x, c, reference, 1e-9).unwrap();
        assert!(report.holds, "{c:?}");
        assert!(report.witnesses.is_empty());
    }
    assert_eq!(democratic_ne_fraction(&econ, &x, 1e-9).unwrap(), 1.0);
    let found = find_ee_reference(&econ, &x, EeMode::Family, 32, 1e-9).unwrap().unwrap();
    assert_abs_diff_eq!(found.0[0], share.0[0], epsilon = 1e-8);
    assert_abs_diff_eq!(found.0[1], share.0[1], epsilon = 1e-8);
}

#[test]
fn envy_free_three_family_allocation() {
    let econ = negative_ceei_economy();
    let x = solve_negative_ceei().unwrap();
    assert!(check_fairness(&econ, &x, FairnessCriterion::IndividualNe, None, 1e-9).unwrap().holds);
    assert!(pareto_test_mrs(&econ, &x, 1e-9).unwrap().is_optimal());
}

#[test]
fn wives_prefer_the_fair_share() {
    let econ = negative_ceei_fs_economy();
    let x = negative_ceei_fs_triple(&econ).allocation;
    let report = check_fairness(&econ, &x, FairnessCriterion::IndividualFs, None, 1e-9).unwrap();
    assert!(!report.holds);
    let mut who = report.witness_ids();
    who.sort();
    assert_eq!(who, vec!["w", "w'"]);
    assert_abs_diff_eq!(democratic_ne_fraction(&econ, &x, 1e-9).unwrap(), 1.0);
}

#[test]
fn egalitarian_equivalence_examples() {
    let econ = negative_family_ee_economy();
    let x = negative_family_ee_candidate();
    let half = b(0.5, 0.5);
    let report = check_individual_ee(&econ, &x, &half, 1e-9).unwrap();
    assert!(!report.holds);
    let who = report.witness_ids();
    assert!(who.contains(&"w") && who.contains(&"w'"), "{who:?}");

    assert!(!check_family_ee(&econ, &x, &b(0.3, 0.7), 1e-9).unwrap().holds);
    assert_eq!(find_ee_reference(&econ, &x, EeMode::Family, 200, 1e-9).unwrap(), None);

    let single = economy([2.0, 1.0], vec![vec![cd2(0.3)]]);
    let all = Allocation::new(vec![single.endowment_bundle()]);
    assert!(check_individual_ee(&single, &all, &single.endowment_bundle(), 1e-12).unwrap().holds);
}

#[test]
fn dominance_examples() {
    let econ = two_singles([2.0, 2.0], 0.5, 0.5);
    let half = Allocation::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let full = econ.equal_split();
    assert!(!dominates(&econ, &full, &full, 1e-9).unwrap());
    assert!(dominates(&econ, &full, &half, 1e-9).unwrap());
    assert!(!dominates(&econ, &half, &full, 1e-9).unwrap());
}

#[test]
fn mrs_range_examples() {
    let econ = economy(
        [3.0, 3.0],
        vec![
            vec![cd2(1.0 / 3.0), cd2(2.0 / 3.0)],
            vec![cd2(0.5)],
            vec![UtilityFunction::linear(vec![1.0, 1.0]), UtilityFunction::linear(vec![2.0, 1.0])],
        ],
    );
    let range = mrs_range(&econ, "f0", &b(1.0381, 1.0381)).unwrap();
    assert_abs_diff_eq!(range.low, 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(range.high, 2.0, epsilon = 1e-12);
    let single = mrs_range(&econ, "f1", &b(0.4, 1.3)).unwrap();
    assert_eq!(single.low, single.high);
    let linear = mrs_range(&econ, "f2", &b(0.4, 1.3)).unwrap();
    assert_eq!((linear.low, linear.high), (1.0, 2.0));
}

#[test]
fn mrs_test_examples() {
    let econ = two_singles([3.0, 3.0], 1.0 / 3.0, 2.0 / 3.0);
    match pareto_test_mrs(&econ, &econ.equal_split(), 1e-9).unwrap() {
        ParetoVerdict::NotOptimal { mrs_gap: Some(gap), .. } => assert_abs_diff_eq!(gap, 1.5, epsilon = 1e-12),
        other => panic!("unexpected verdict {other:?}"),
    }
    let boundary = Allocation::from_rows(&[&[3.0, 0.0], &[0.0, 3.0]]);
    assert!(matches!(
        pareto_test_mrs(&econ, &boundary, 1e-9).unwrap(),
        ParetoVerdict::Inapplicable { .. }
    ));
}

#[test]
fn oracle_examples() {
    let single = economy([2.0, 3.0], vec![vec![cd2(0.3), cd2(0.8)]]);
    let all = Allocation::new(vec![single.endowment_bundle()]);
    assert_eq!(pareto_oracle_grid(&single, &all, 16, 1e-9).unwrap(), None);

    let econ = two_singles([3.0, 3.0], 1.0 / 3.0, 2.0 / 3.0);
    let x = econ.equal_split();
    let dominator = pareto_oracle_grid(&econ, &x, 8, 1e-9).unwrap().expect("a dominator");
    assert!(dominates(&econ, &dominator, &x, 1e-9).unwrap());
}

#[test]
fn oracle_respects_budget() {
    let econ = economy([1.0, 1.0], vec![vec![cd2(0.5)]; 4]);
    let x = econ.equal_split();
    assert!(matches!(
        pareto_oracle_grid(&econ, &x, 1_000, 1e-9),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn maximin_examples() {
    let cfg = SolveConfig::default();
    let none = Default::default();
    let single = economy([2.0, 3.0], vec![vec![cd2(0.3)]]);
    let (x, value) = maximin(&single, ObjectiveSet::IndividualNormalized, &none, Region::All, &cfg).unwrap();
    assert_abs_diff_eq!(value, 0.0, epsilon = 1e-6);
    assert_abs_diff_eq!(x.bundles[0].0[0], 2.0, epsilon = 1e-6);

    let twins = two_singles([2.0, 2.0], 0.5, 0.5);
    let (x, value) = maximin(&twins, ObjectiveSet::IndividualNormalized, &none, Region::All, &cfg).unwrap();
    assert_abs_diff_eq!(value, 0.0, epsilon = 1e-6);
    for bundle in &x.bundles {
        assert_abs_diff_eq!(bundle.0[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(bundle.0[1], 1.0, epsilon = 1e-4);
    }

    let econ = two_singles([3.0, 3.0], 1.0 / 3.0, 2.0 / 3.0);
    let (x, value) = maximin(&econ, ObjectiveSet::IndividualNormalized, &none, Region::All, &cfg).unwrap();
    assert!(value > 0.0);
    // Both singles reach the same utility on the contract curve.
    let u0 = econ.families[0].members[0].utility.value(&x.bundles[0].0);
    let u1 = econ.families[1].members[0].utility.value(&x.bundles[1].0);
    assert_abs_diff_eq!(u0, u1, epsilon = 1e-6);
    assert!(pareto_test_mrs(&econ, &x, 1e-6).unwrap().is_optimal());
}

#[test]
fn leximin_is_fair_share_and_undominated() {
    let cfg = SolveConfig::default();
    let econ = negative_pone_economy();
    let out = leximin(&econ, ObjectiveSet::IndividualNormalized, Region::All, &cfg).unwrap();
    assert!(out.objectives.iter().all(|&v| v >= -1e-6), "{:?}", out.objectives);
    assert_eq!(pareto_oracle_grid(&econ, &out.allocation, 32, 1e-6).unwrap(), None);

    let twins = two_singles([2.0, 3.0], 0.3, 0.3);
    let out = leximin(&twins, ObjectiveSet::IndividualNormalized, Region::All, &cfg).unwrap();
    for bundle in &out.allocation.bundles {
        assert_abs_diff_eq!(bundle.0[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(bundle.0[1], 1.5, epsilon = 1e-4);
    }
}

#[test]
fn welfare_maximum_examples() {
    let cfg = SolveConfig::default();
    let econ = economy([2.0, 2.0], vec![vec![cd2(1.0 / 3.0), cd2(2.0 / 3.0)], vec![cd2(0.5)]]);
    let out = fs_welfare_max(&econ, &cfg).unwrap();
    assert!(check_fairness(&econ, &out.allocation, FairnessCriterion::IndividualFs, None, 1e-6).unwrap().holds);
    assert!(check_fairness(&econ, &out.allocation, FairnessCriterion::IndividualNe, None, 1e-6).unwrap().holds);
    assert_eq!(pareto_oracle_grid(&econ, &out.allocation, 32, 1e-6).unwrap(), None);

    let single = economy([2.0, 3.0], vec![vec![cd2(0.3), cd2(0.6)]]);
    let out = fs_welfare_max(&single, &cfg).unwrap();
    assert_eq!(out.allocation.bundles[0], single.endowment_bundle());
}

#[test]
fn family_ee_examples() {
    let cfg = SolveConfig::default();
    let twins = two_singles([2.0, 2.0], 0.5, 0.5);
    let sol = family_ee_solve(&twins, &cfg).unwrap();
    assert_abs_diff_eq!(sol.level, 0.0, epsilon = 1e-6);
    assert_abs_diff_eq!(sol.reference.0[0], 1.0, epsilon = 1e-6);
    for bundle in &sol.allocation.bundles {
        assert_abs_diff_eq!(bundle.0[0], 1.0, epsilon = 1e-4);
    }

    let econ = negative_ceei_economy();
    let sol = family_ee_solve(&econ, &cfg).unwrap();
    assert!(check_family_ee(&econ, &sol.allocation, &sol.reference, 1e-5).unwrap().holds);
    assert!(check_fairness(&econ, &sol.allocation, FairnessCriterion::IndividualFs, None, 1e-5).unwrap().holds);
    assert_eq!(pareto_oracle_grid(&econ, &sol.allocation, 32, 1e-6).unwrap(), None);
}

#[test]
fn certificates_on_fair_efficient_and_impossible_economies() {
    let ne_po = [Criterion::Fairness(FairnessCriterion::IndividualNe), Criterion::ParetoOptimal];
    let cert = certify_nonexistence(&negative_pone_economy(), &ne_po, 24, 1e-6).unwrap();
    assert!(cert.min_joint_violation > 0.0);
    assert_eq!(cert.history.len(), 2);
    assert!(cert.history[1].min_joint_violation <= cert.history[0].min_joint_violation);

    let ee_po = [Criterion::Fairness(FairnessCriterion::IndividualEe), Criterion::ParetoOptimal];
    let cert = certify_nonexistence(&negative_poee_economy(), &ee_po, 24, 1e-6).unwrap();
    assert!(cert.min_joint_violation > 0.0);

    // A two-family economy has an envy-free optimum; here the equal split
    // is one and lies on every grid.
    let econ = economy([2.0, 2.0], vec![vec![cd2(1.0 / 3.0), cd2(2.0 / 3.0)], vec![cd2(0.5)]]);
    let cert = certify_nonexistence(&econ, &ne_po, 16, 1e-6).unwrap();
    assert!(cert.history.iter().all(|h| h.min_joint_violation <= 1e-9), "{:?}", cert.history);
    let best = fs_welfare_max(&econ, &SolveConfig::default()).unwrap();
    assert!(joint_violation(&econ, &best.allocation, &ne_po, 1e-6).unwrap() <= 1e-5);
}

#[test]
fn equilibrium_verification_examples() {
    let econ = negative_ceei_fs_economy();
    let trip = negative_ceei_fs_triple(&econ);
    assert!(verify_equilibrium(&econ, &trip, EquilibriumKind::Standard, 1e-9).unwrap().valid);

    let econ = two_singles([3.0, 3.0], 1.0 / 3.0, 2.0 / 3.0);
    let demand = EquilibriumTriple {
        prices: vec![0.5, 0.5],
        allocation: Allocation::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]),
        initial_endowment: econ.equal_split(),
    };
    assert!(verify_equilibrium(&econ, &demand, EquilibriumKind::Standard, 1e-9).unwrap().valid);
    let swapped = EquilibriumTriple {
        allocation: Allocation::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]),
        ..demand
    };
    let report = verify_equilibrium(&econ, &swapped, EquilibriumKind::Standard, 1e-9).unwrap();
    assert!(!report.valid);
    assert!(report.witnesses.iter().any(Option::is_some));
}

#[test]
fn tatonnement_examples() {
    let cfg = EquilibriumConfig::default();
    let econ = two_singles([3.0, 3.0], 1.0 / 3.0, 2.0 / 3.0);
    let out = tatonnement(&econ, &econ.equal_split(), &cfg).unwrap();
    let trip = out.triple.expect("converged");
    assert_abs_diff_eq!(trip.prices[0], 0.5, epsilon = 1e-5);
    assert_abs_diff_eq!(trip.allocation.bundles[0].0[0], 1.0, epsilon = 1e-4);
    assert_abs_diff_eq!(trip.allocation.bundles[0].0[1], 2.0, epsilon = 1e-4);

    let econ = negative_ceei_fs_economy();
    let first_member = EquilibriumConfig {
        rule: ResponseRule::FirstMember,
        ..EquilibriumConfig::default()
    };
    let trip = tatonnement(&econ, &econ.equal_split(), &first_member).unwrap().triple.expect("converged");
    assert!(verify_equilibrium(&econ, &trip, EquilibriumKind::Standard, 1e-5).unwrap().valid);
    assert!(!check_fairness(&econ, &trip.allocation, FairnessCriterion::IndividualFs, None, 1e-6).unwrap().holds);

    let single = economy([2.0, 3.0], vec![vec![cd2(0.3), cd2(0.6)]]);
    let trip = tatonnement(&single, &single.equal_split(), &cfg).unwrap().triple.expect("converged");
    assert_abs_diff_eq!(trip.allocation.bundles[0].0[0], 2.0, epsilon = 1e-6);
    assert_abs_diff_eq!(trip.allocation.bundles[0].0[1], 3.0, epsilon = 1e-6);
}

#[test]
fn restricted_equilibrium_is_family_fair() {
    let cfg = EquilibriumConfig::default();
    for econ in [negative_ceei_economy(), negative_pone_economy(), negative_ceei_fs_economy()] {
        let out = restricted_equilibrium(&econ, &cfg).unwrap();
        assert_eq!(out.fair, Some(true), "{:?}", out.diagnostics);
        let trip = out.triple.unwrap();
        assert!(verify_equilibrium(&econ, &trip, EquilibriumKind::Restricted, 1e-5).unwrap().valid);
    }
}

#[test]
fn every_scenario_passes() {
    let cfg = ScenarioConfig::default();
    for name in SCENARIOS {
        let report = run_scenario(name, &cfg).unwrap();
        assert!(report.passed, "{report}");
    }
}

//! Pinned reproduction scenarios.
//!
//! Each scenario builds a small economy, runs the checkers and solvers on
//! it and records every assertion together with the numbers behind it.
//! Free parameters (Cobb-Douglas weights, endowments, grid resolutions) are
//! fixed here and echoed in the report so that runs are reproducible.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::economy::{Allocation, Economy, Family, Individual, Member};
use crate::equilibrium::{
    restricted_equilibrium, tatonnement, verify_equilibrium, EquilibriumConfig, EquilibriumKind,
    EquilibriumTriple, ResponseRule,
};
use crate::error::{Error, Result};
use crate::fairness::{
    check_family_ee, check_fairness, check_individual_ee, democratic_ne_fraction,
    find_ee_reference, EeMode, FairnessCriterion,
};
use crate::pareto::{dominates, mrs_range, pareto_oracle_grid, pareto_test_mrs, ParetoVerdict};
use crate::solvers::{
    certify_nonexistence, family_ee_solve, fs_welfare_max, leximin, Criterion, ObjectiveSet,
    Region, SolveConfig,
};
use crate::utility::UtilityFunction;

/// Registered scenario names, in the order `--all` runs them.
pub const SCENARIOS: [&str; 10] = [
    "negative_pone",
    "negative_ceei",
    "negative_ceei_fs",
    "positive_family_ne",
    "negative_poee",
    "positive_family_ee",
    "negative_family_ee_a",
    "negative_family_ee_b",
    "grouping_three_couples",
    "democratic_fraction_demo",
];

/// Residual bound for the Newton solve in [`solve_negative_ceei`].
const NEWTON_RESIDUAL: f64 = 1e-12;
const NEWTON_MAX_STEPS: usize = 100;

/// Optional knobs shared by all scenarios.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Grid resolution for certificates and grid oracles; each scenario
    /// has its own default.
    pub grid_n: Option<usize>,
    /// Indifference band for fairness checks; defaults to `1e-6`.
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub parameters: Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        writeln!(f, "{} ... {verdict}", self.scenario)?;
        for check in &self.checks {
            let mark = if check.passed { "ok  " } else { "FAIL" };
            writeln!(f, "  [{mark}] {}", check.name)?;
        }
        Ok(())
    }
}

struct Recorder {
    scenario: &'static str,
    parameters: Value,
    checks: Vec<Check>,
}

impl Recorder {
    fn new(scenario: &'static str, parameters: Value) -> Self {
        Recorder {
            scenario,
            parameters,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: Value) -> bool {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
        passed
    }

    fn finish(self) -> ScenarioReport {
        let passed = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        ScenarioReport {
            scenario: self.scenario.to_string(),
            parameters: self.parameters,
            checks: self.checks,
            passed,
        }
    }
}

/// Runs one registered scenario. Errors only for unknown names or invalid
/// configuration; solver failures inside a scenario become failed checks.
pub fn run_scenario(name: &str, cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    if let Some(eps) = cfg.eps {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::validation("eps must be finite and non-negative"));
        }
    }
    if cfg.grid_n == Some(0) {
        return Err(Error::validation("grid resolution must be positive"));
    }
    let eps = cfg.eps.unwrap_or(1e-6);
    let report = match name {
        "negative_pone" => negative_pone(cfg.grid_n.unwrap_or(32), eps),
        "negative_ceei" => negative_ceei(eps),
        "negative_ceei_fs" => negative_ceei_fs(eps),
        "positive_family_ne" => positive_family_ne(eps),
        "negative_poee" => negative_poee(cfg.grid_n.unwrap_or(64), eps),
        "positive_family_ee" => positive_family_ee(cfg.grid_n.unwrap_or(32), eps),
        "negative_family_ee_a" => negative_family_ee_a(cfg.grid_n.unwrap_or(400), eps),
        "negative_family_ee_b" => negative_family_ee_b(cfg.grid_n.unwrap_or(48), eps),
        "grouping_three_couples" => grouping_three_couples(cfg.grid_n.unwrap_or(16), eps),
        "democratic_fraction_demo" => democratic_fraction_demo(eps),
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(report)
}

fn cd(id: &str, alpha: f64) -> Individual {
    Individual::new(id, UtilityFunction::cobb_douglas2(alpha))
}

fn linear(id: &str) -> Individual {
    Individual::new(id, UtilityFunction::linear(vec![1.0, 1.0]))
}

fn build(endowment: f64, families: Vec<Family>) -> Economy {
    Economy::new(2, vec![endowment, endowment], families).expect("scenario economies are valid")
}

/// A couple `{h: 0.2, w: 0.8}` and singles `s: 0.6`, `s': 0.4`, so that
/// both singles' marginal rates lie strictly between the spouses'.
pub fn negative_pone_economy() -> Economy {
    build(
        3.0,
        vec![
            Family::new("f", vec![cd("h", 0.2), cd("w", 0.8)]),
            Family::new("s", vec![cd("s", 0.6)]),
            Family::new("s'", vec![cd("s'", 0.4)]),
        ],
    )
}

/// A couple `{h: 1/3, w: 2/3}` and singles sharing the spouses'
/// preferences, `s: 1/3` and `s': 2/3`, over three units of each good.
pub fn negative_ceei_economy() -> Economy {
    build(
        3.0,
        vec![
            Family::new("s", vec![cd("s", 1.0 / 3.0)]),
            Family::new("s'", vec![cd("s'", 2.0 / 3.0)]),
            Family::new("f", vec![cd("h", 1.0 / 3.0), cd("w", 2.0 / 3.0)]),
        ],
    )
}

/// Couples `{h: 0.9, w: 0.6}` and `{h': 0.1, w': 0.4}` over one unit of
/// each good.
pub fn negative_ceei_fs_economy() -> Economy {
    build(
        1.0,
        vec![
            Family::new("f", vec![cd("h", 0.9), cd("w", 0.6)]),
            Family::new("f'", vec![cd("h'", 0.1), cd("w'", 0.4)]),
        ],
    )
}

/// Couples `{w: 0.2, h: 0.4}` and `{h': 0.6, w': 0.8}`: marginal rates are
/// ordered `w < h < h' < w'` at every bundle.
pub fn negative_poee_economy() -> Economy {
    build(
        2.0,
        vec![
            Family::new("f", vec![cd("w", 0.2), cd("h", 0.4)]),
            Family::new("f'", vec![cd("h'", 0.6), cd("w'", 0.8)]),
        ],
    )
}

/// Husbands and a single with `y + z`, wives with Cobb-Douglas weights
/// `1/4` and `3/4`, over 3/2 units of each good.
pub fn negative_family_ee_economy() -> Economy {
    build(
        1.5,
        vec![
            Family::new("f", vec![linear("h"), cd("w", 0.25)]),
            Family::new("f'", vec![linear("h'"), cd("w'", 0.75)]),
            Family::new("s", vec![linear("s")]),
        ],
    )
}

/// Three assortatively matched couples with weights
/// `m1 < m2 < w1 < m3 < w2 < w3`.
pub fn grouping_economy() -> Economy {
    build(
        3.0,
        vec![
            Family::new("f1", vec![cd("m1", 0.15), cd("w1", 0.45)]),
            Family::new("f2", vec![cd("m2", 0.3), cd("w2", 0.7)]),
            Family::new("f3", vec![cd("m3", 0.55), cd("w3", 0.85)]),
        ],
    )
}

/// The same six individuals paired by rank: the two highest weights, the
/// two middle ones and the two lowest.
pub fn regrouped_economy() -> Economy {
    build(
        3.0,
        vec![
            Family::new("g1", vec![cd("m1", 0.15), cd("m2", 0.3)]),
            Family::new("g2", vec![cd("w1", 0.45), cd("m3", 0.55)]),
            Family::new("g3", vec![cd("w2", 0.7), cd("w3", 0.85)]),
        ],
    )
}

/// Solves the square system that places the two singles on the spouses'
/// indifference curves through the family bundle, equates the singles'
/// marginal rates and imposes `y_f = z_f`. Unknowns are
/// `(y_s, z_s, y_s', z_s', y_f, z_f)`; damped Newton from all ones.
/// Returns the allocation in the order `s`, `s'`, `f` of
/// [`negative_ceei_economy`].
pub fn solve_negative_ceei() -> Result<Allocation> {
    const A: f64 = 1.0 / 3.0;
    const B: f64 = 2.0 / 3.0;
    let residual = |v: &[f64]| -> DVector<f64> {
        let [ys, zs, ysp, zsp, yf, zf] = [v[0], v[1], v[2], v[3], v[4], v[5]];
        DVector::from_vec(vec![
            ys + ysp + yf - 3.0,
            zs + zsp + zf - 3.0,
            ys.powf(A) * zs.powf(B) - yf.powf(A) * zf.powf(B),
            ysp.powf(B) * zsp.powf(A) - yf.powf(B) * zf.powf(A),
            0.5 * zs / ys - 2.0 * zsp / ysp,
            yf - zf,
        ])
    };
    let jacobian = |v: &[f64]| -> DMatrix<f64> {
        let [ys, zs, ysp, zsp, yf, zf] = [v[0], v[1], v[2], v[3], v[4], v[5]];
        let gs = ys.powf(A) * zs.powf(B);
        let gf1 = yf.powf(A) * zf.powf(B);
        let gsp = ysp.powf(B) * zsp.powf(A);
        let gf2 = yf.powf(B) * zf.powf(A);
        #[rustfmt::skip]
        let rows = [
            1.0, 0.0, 1.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 1.0, 0.0, 1.0,
            A * gs / ys, B * gs / zs, 0.0, 0.0, -A * gf1 / yf, -B * gf1 / zf,
            0.0, 0.0, B * gsp / ysp, A * gsp / zsp, -B * gf2 / yf, -A * gf2 / zf,
            -0.5 * zs / (ys * ys), 0.5 / ys, 2.0 * zsp / (ysp * ysp), -2.0 / ysp, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0, -1.0,
        ];
        DMatrix::from_row_slice(6, 6, &rows)
    };

    let mut v = vec![1.0; 6];
    let mut f = residual(&v);
    for _ in 0..NEWTON_MAX_STEPS {
        if f.amax() <= NEWTON_RESIDUAL {
            return Ok(Allocation::from_rows(&[&v[0..2], &v[2..4], &v[4..6]]));
        }
        let step = jacobian(&v)
            .lu()
            .solve(&(-&f))
            .ok_or(Error::NewtonDivergence { residual: f.amax() })?;
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(step.iter()).map(|(a, d)| a + damping * d).collect();
            if trial.iter().all(|t| *t > 0.0) {
                let ft = residual(&trial);
                if ft.amax() < f.amax() || damping < 1e-10 {
                    v = trial;
                    f = ft;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-12 {
                return Err(Error::NewtonDivergence { residual: f.amax() });
            }
        }
    }
    if f.amax() <= NEWTON_RESIDUAL {
        Ok(Allocation::from_rows(&[&v[0..2], &v[2..4], &v[4..6]]))
    } else {
        Err(Error::NewtonDivergence { residual: f.amax() })
    }
}

fn rows(x: &Allocation) -> Value {
    json!(x.bundles.iter().map(|b| b.0.clone()).collect::<Vec<_>>())
}

fn error_detail(e: &Error) -> Value {
    json!({ "error": e.to_string() })
}

fn max_abs_diff(a: &Allocation, b: &Allocation) -> f64 {
    a.bundles
        .iter()
        .zip(&b.bundles)
        .flat_map(|(p, q)| p.0.iter().zip(&q.0).map(|(u, v)| (u - v).abs()))
        .fold(0.0, f64::max)
}

fn fairness_check(rec: &mut Recorder, name: &str, econ: &Economy, x: &Allocation, c: FairnessCriterion, eps: f64, expect: bool) {
    match check_fairness(econ, x, c, None, eps) {
        Ok(report) => {
            let detail = json!({ "holds": report.holds, "witnesses": report.witness_ids() });
            rec.check(name, report.holds == expect, detail);
        }
        Err(e) => {
            rec.check(name, false, error_detail(&e));
        }
    }
}

fn certificate_checks(rec: &mut Recorder, econ: &Economy, criteria: &[Criterion], grid_n: usize, eps: f64) -> Option<f64> {
    match certify_nonexistence(econ, criteria, grid_n, eps) {
        Ok(cert) => {
            let coarse = cert.history[0].min_joint_violation;
            let fine = cert.history[1].min_joint_violation;
            let detail = json!({
                "grid_n": grid_n,
                "min_joint_violation": coarse,
                "refined_grid_n": cert.history[1].grid_n,
                "refined_min_joint_violation": fine,
                "argmin": rows(&cert.argmin),
            });
            rec.check("certificate: min joint violation is positive", coarse > 0.0, detail.clone());
            let mut detail = detail;
            detail["relative_decrease"] = json!(1.0 - fine / coarse);
            rec.check("certificate: gap stays positive on the refined grid", fine > 0.0, detail);
            Some(coarse)
        }
        Err(e) => {
            rec.check("certificate: min joint violation is positive", false, error_detail(&e));
            None
        }
    }
}

fn negative_pone(grid_n: usize, eps: f64) -> ScenarioReport {
    let econ = negative_pone_economy();
    let mut rec = Recorder::new(
        "negative_pone",
        json!({
            "endowment": econ.endowment,
            "weights": { "h": 0.2, "w": 0.8, "s": 0.6, "s'": 0.4 },
            "families": [["h", "w"], ["s"], ["s'"]],
            "criteria": ["individual-ne", "pareto"],
            "grid_n": grid_n,
            "eps": eps,
        }),
    );
    // The singles' marginal rates lie strictly inside the couple's range.
    let r = econ.fair_share();
    let ranges: Result<Vec<_>> = ["f", "s", "s'"].iter().map(|id| mrs_range(&econ, id, &r)).collect();
    match ranges {
        Ok(ranges) => {
            let inside = (1..3).all(|k| ranges[0].low < ranges[k].low && ranges[k].high < ranges[0].high);
            rec.check(
                "singles' MRS lies strictly between the spouses' at the fair share",
                inside,
                json!({ "ranges": ranges.iter().map(|m| [m.low, m.high]).collect::<Vec<_>>() }),
            );
        }
        Err(e) => {
            rec.check("singles' MRS lies strictly between the spouses' at the fair share", false, error_detail(&e));
        }
    }
    certificate_checks(
        &mut rec,
        &econ,
        &[Criterion::Fairness(FairnessCriterion::IndividualNe), Criterion::ParetoOptimal],
        grid_n,
        eps,
    );
    rec.finish()
}

fn negative_ceei(eps: f64) -> ScenarioReport {
    let econ = negative_ceei_economy();
    let mut rec = Recorder::new(
        "negative_ceei",
        json!({
            "endowment": econ.endowment,
            "weights": { "s": 1.0 / 3.0, "s'": 2.0 / 3.0, "h": 1.0 / 3.0, "w": 2.0 / 3.0 },
            "families": [["s"], ["s'"], ["h", "w"]],
            "newton_residual": NEWTON_RESIDUAL,
            "eps": eps,
        }),
    );
    let expected = Allocation::from_rows(&[&[0.654, 1.308], &[1.308, 0.654], &[1.0381, 1.0381]]);
    let x = match solve_negative_ceei() {
        Ok(x) => x,
        Err(e) => {
            rec.check("newton solve converges", false, error_detail(&e));
            return rec.finish();
        }
    };
    let diff = max_abs_diff(&x, &expected);
    rec.check(
        "solution matches the reported bundles within 1e-3",
        diff <= 1e-3,
        json!({ "allocation": rows(&x), "max_abs_difference": diff }),
    );
    fairness_check(&mut rec, "solution is individual-NE", &econ, &x, FairnessCriterion::IndividualNe, 1e-9, true);
    match pareto_test_mrs(&econ, &x, 1e-9) {
        Ok(v) => {
            rec.check("solution passes the MRS Pareto test", v.is_optimal(), json!(v));
        }
        Err(e) => {
            rec.check("solution passes the MRS Pareto test", false, error_detail(&e));
        }
    }

    // Supporting the solution by prices equal to the singles' common
    // marginal rate leaves the family's bundle unaffordable from the fair
    // share.
    let m = econ.individual(Member { family: 0, index: 0 }).utility.mrs(&x.bundles[0].0);
    if let Ok(m) = m {
        let prices = vec![m / (1.0 + m), 1.0 / (1.0 + m)];
        let trip = EquilibriumTriple {
            prices: prices.clone(),
            allocation: x.clone(),
            initial_endowment: econ.equal_split(),
        };
        match verify_equilibrium(&econ, &trip, EquilibriumKind::Standard, eps) {
            Ok(report) => {
                rec.check(
                    "supporting prices leave the family bundle unaffordable",
                    !report.budget_ok[2] && !report.valid,
                    json!({ "prices": prices, "budget_ok": report.budget_ok }),
                );
            }
            Err(e) => {
                rec.check("supporting prices leave the family bundle unaffordable", false, error_detail(&e));
            }
        }
    }

    // A market equilibrium from equal endowments exists but is not
    // individual-NE.
    let cfg = EquilibriumConfig::default();
    match tatonnement(&econ, &econ.equal_split(), &cfg) {
        Ok(out) => match out.triple {
            Some(trip) => {
                let valid = verify_equilibrium(&econ, &trip, EquilibriumKind::Standard, 1e-5)
                    .map(|r| r.valid)
                    .unwrap_or(false);
                rec.check(
                    "tatonnement from equal endowments reaches a verified equilibrium",
                    valid,
                    json!({ "prices": trip.prices, "allocation": rows(&trip.allocation), "iterations": out.iterations }),
                );
                fairness_check(
                    &mut rec,
                    "that equilibrium is not individual-NE",
                    &econ,
                    &trip.allocation,
                    FairnessCriterion::IndividualNe,
                    eps,
                    false,
                );
            }
            None => {
                rec.check(
                    "tatonnement from equal endowments reaches a verified equilibrium",
                    false,
                    json!({ "residual": out.residual, "diagnostics": out.diagnostics }),
                );
            }
        },
        Err(e) => {
            rec.check("tatonnement from equal endowments reaches a verified equilibrium", false, error_detail(&e));
        }
    }
    rec.finish()
}

/// The equilibrium triple with prices `(1/2, 1/2)` in which each husband
/// receives his demand.
pub fn negative_ceei_fs_triple(econ: &Economy) -> EquilibriumTriple {
    EquilibriumTriple {
        prices: vec![0.5, 0.5],
        allocation: Allocation::from_rows(&[&[0.9, 0.1], &[0.1, 0.9]]),
        initial_endowment: econ.equal_split(),
    }
}

fn negative_ceei_fs(eps: f64) -> ScenarioReport {
    let econ = negative_ceei_fs_economy();
    let trip = negative_ceei_fs_triple(&econ);
    let mut rec = Recorder::new(
        "negative_ceei_fs",
        json!({
            "endowment": econ.endowment,
            "weights": { "h": 0.9, "w": 0.6, "h'": 0.1, "w'": 0.4 },
            "families": [["h", "w"], ["h'", "w'"]],
            "prices": trip.prices,
            "allocation": rows(&trip.allocation),
            "eps": eps,
        }),
    );
    match verify_equilibrium(&econ, &trip, EquilibriumKind::Standard, eps) {
        Ok(report) => {
            rec.check("triple is a market equilibrium from equal endowments", report.valid, json!(report));
        }
        Err(e) => {
            rec.check("triple is a market equilibrium from equal endowments", false, error_detail(&e));
        }
    }
    match check_fairness(&econ, &trip.allocation, FairnessCriterion::IndividualFs, None, eps) {
        Ok(report) => {
            let mut ids = report.witness_ids();
            ids.sort_unstable();
            rec.check(
                "individual-FS fails with exactly the two wives as witnesses",
                !report.holds && ids == ["w", "w'"],
                json!({ "witnesses": ids }),
            );
        }
        Err(e) => {
            rec.check("individual-FS fails with exactly the two wives as witnesses", false, error_detail(&e));
        }
    }
    let wife = UtilityFunction::cobb_douglas2(0.6);
    let at_bundle = wife.value(&[0.9, 0.1]);
    let at_fair = wife.value(&[0.5, 0.5]);
    rec.check(
        "wife utility at her bundle is about 0.3737, below 0.5 at the fair share",
        (at_bundle - 0.3737).abs() < 1e-4 && at_bundle < at_fair,
        json!({ "own": at_bundle, "fair_share": at_fair }),
    );
    // The triple arises from tatonnement when each family follows the
    // husband's demand.
    let cfg = EquilibriumConfig {
        rule: ResponseRule::FirstMember,
        ..EquilibriumConfig::default()
    };
    match tatonnement(&econ, &econ.equal_split(), &cfg) {
        Ok(out) => {
            let close = out
                .triple
                .as_ref()
                .map(|t| max_abs_diff(&t.allocation, &trip.allocation) < 1e-4)
                .unwrap_or(false);
            rec.check(
                "husband-led tatonnement reaches the same triple",
                close,
                json!({ "prices": out.prices, "residual": out.residual, "allocation": out.triple.map(|t| rows(&t.allocation)) }),
            );
        }
        Err(e) => {
            rec.check("husband-led tatonnement reaches the same triple", false, error_detail(&e));
        }
    }
    rec.finish()
}

fn positive_family_ne(eps: f64) -> ScenarioReport {
    let cfg = EquilibriumConfig::default();
    let mut rec = Recorder::new(
        "positive_family_ne",
        json!({
            "economies": ["negative_ceei_fs", "negative_pone", "negative_ceei"],
            "step": cfg.step,
            "tolerance": cfg.tolerance,
            "eps": eps,
        }),
    );
    let economies = [
        ("negative_ceei_fs", negative_ceei_fs_economy()),
        ("negative_pone", negative_pone_economy()),
        ("negative_ceei", negative_ceei_economy()),
    ];
    for (label, econ) in &economies {
        match restricted_equilibrium(econ, &cfg) {
            Ok(out) => {
                let Some(trip) = out.triple else {
                    rec.check(
                        format!("{label}: restricted equilibrium converges"),
                        false,
                        json!({ "residual": out.residual, "diagnostics": out.diagnostics }),
                    );
                    continue;
                };
                let verified = verify_equilibrium(econ, &trip, EquilibriumKind::Restricted, 1e-5)
                    .map(|r| r.valid)
                    .unwrap_or(false);
                rec.check(
                    format!("{label}: restricted equilibrium converges and verifies"),
                    verified,
                    json!({ "prices": trip.prices, "allocation": rows(&trip.allocation), "iterations": out.iterations }),
                );
                fairness_check(&mut rec, &format!("{label}: family-NE"), econ, &trip.allocation, FairnessCriterion::FamilyNe, 1e-5, true);
                fairness_check(&mut rec, &format!("{label}: individual-FS"), econ, &trip.allocation, FairnessCriterion::IndividualFs, 1e-5, true);
                match pareto_test_mrs(econ, &trip.allocation, 1e-4) {
                    Ok(v) => {
                        rec.check(format!("{label}: passes the MRS Pareto test"), v.is_optimal(), json!(v));
                    }
                    Err(e) => {
                        rec.check(format!("{label}: passes the MRS Pareto test"), false, error_detail(&e));
                    }
                }
            }
            Err(e) => {
                rec.check(format!("{label}: restricted equilibrium converges"), false, error_detail(&e));
            }
        }
    }
    rec.finish()
}

fn negative_poee(grid_n: usize, eps: f64) -> ScenarioReport {
    let econ = negative_poee_economy();
    let delta = 0.05;
    let mut rec = Recorder::new(
        "negative_poee",
        json!({
            "endowment": econ.endowment,
            "weights": { "w": 0.2, "h": 0.4, "h'": 0.6, "w'": 0.8 },
            "families": [["w", "h"], ["h'", "w'"]],
            "criteria": ["individual-ee", "pareto"],
            "grid_n": grid_n,
            "delta": delta,
            "eps": eps,
        }),
    );
    let r = econ.fair_share();
    let same = Allocation::new(vec![r.clone(), r.clone()]);
    let ee = check_individual_ee(&econ, &same, &r, eps).map(|rep| rep.holds).unwrap_or(false);
    rec.check("(r, r) is individual-EE with reference r", ee, json!({ "r": r.0 }));
    match pareto_test_mrs(&econ, &same, eps) {
        Ok(v) => {
            rec.check("(r, r) fails the MRS Pareto test", matches!(v, ParetoVerdict::NotOptimal { .. }), json!(v));
        }
        Err(e) => {
            rec.check("(r, r) fails the MRS Pareto test", false, error_detail(&e));
        }
    }
    // The lower-MRS family trades good y for good z.
    let improved = Allocation::from_rows(&[&[r[0] - delta, r[1] + delta], &[r[0] + delta, r[1] - delta]]);
    let dom = dominates(&econ, &improved, &same, eps).unwrap_or(false);
    rec.check("trading delta along the MRS gap Pareto-improves (r, r)", dom, json!({ "improvement": rows(&improved) }));
    certificate_checks(
        &mut rec,
        &econ,
        &[Criterion::Fairness(FairnessCriterion::IndividualEe), Criterion::ParetoOptimal],
        grid_n,
        eps,
    );
    rec.finish()
}

fn undominated(econ: &Economy, x: &Allocation, grid_n: usize, eps: f64) -> (bool, Value) {
    match pareto_oracle_grid(econ, x, grid_n, eps) {
        Ok(None) => (true, json!({ "grid_n": grid_n, "dominator": null })),
        Ok(Some(d)) => (false, json!({ "grid_n": grid_n, "dominator": rows(&d) })),
        Err(e) => (false, error_detail(&e)),
    }
}

fn positive_family_ee(grid_n: usize, eps: f64) -> ScenarioReport {
    let cfg = SolveConfig::default();
    let mut rec = Recorder::new(
        "positive_family_ee",
        json!({
            "economies": ["negative_ceei", "negative_ceei_fs", "negative_poee"],
            "grid_n": grid_n,
            "eps": eps,
            "tolerance": cfg.tolerance,
        }),
    );
    let economies = [
        ("negative_ceei", negative_ceei_economy()),
        ("negative_ceei_fs", negative_ceei_fs_economy()),
        ("negative_poee", negative_poee_economy()),
    ];
    let check_eps = eps.max(1e-5);
    for (label, econ) in &economies {
        let sol = match family_ee_solve(econ, &cfg) {
            Ok(sol) => sol,
            Err(e) => {
                rec.check(format!("{label}: family-EE solve succeeds"), false, error_detail(&e));
                continue;
            }
        };
        let ee = check_family_ee(econ, &sol.allocation, &sol.reference, check_eps)
            .map(|r| r.holds)
            .unwrap_or(false);
        rec.check(
            format!("{label}: family-EE with the returned reference"),
            ee,
            json!({
                "allocation": rows(&sol.allocation),
                "level": sol.level,
                "t": sol.t,
                "reference": sol.reference.0,
            }),
        );
        fairness_check(&mut rec, &format!("{label}: individual-FS"), econ, &sol.allocation, FairnessCriterion::IndividualFs, check_eps, true);
        let (ok, detail) = undominated(econ, &sol.allocation, grid_n, check_eps);
        rec.check(format!("{label}: no grid dominator"), ok, detail);
    }
    rec.finish()
}

/// The unique allocation that is individual-FS for the single and both
/// husbands and passes the MRS test.
pub fn negative_family_ee_candidate() -> Allocation {
    Allocation::from_rows(&[&[0.25, 0.75], &[0.75, 0.25], &[0.5, 0.5]])
}

fn negative_family_ee_a(grid_n: usize, eps: f64) -> ScenarioReport {
    let econ = negative_family_ee_economy();
    let x = negative_family_ee_candidate();
    let oracle_grid = 48;
    let mut rec = Recorder::new(
        "negative_family_ee_a",
        json!({
            "endowment": econ.endowment,
            "families": [["h", "w"], ["h'", "w'"], ["s"]],
            "utilities": { "h": "y + z", "h'": "y + z", "s": "y + z", "w": "cd(1/4)", "w'": "cd(3/4)" },
            "candidate": rows(&x),
            "reference_grid_n": grid_n,
            "oracle_grid_n": oracle_grid,
            "eps": eps,
        }),
    );
    fairness_check(&mut rec, "candidate is individual-FS", &econ, &x, FairnessCriterion::IndividualFs, eps, true);
    match pareto_test_mrs(&econ, &x, eps) {
        Ok(v) => {
            rec.check("candidate passes the MRS Pareto test", v.is_optimal(), json!(v));
        }
        Err(e) => {
            rec.check("candidate passes the MRS Pareto test", false, error_detail(&e));
        }
    }
    let (ok, detail) = undominated(&econ, &x, oracle_grid, eps);
    rec.check("candidate has no grid dominator", ok, detail);
    match find_ee_reference(&econ, &x, EeMode::Family, grid_n, eps) {
        Ok(found) => {
            rec.check(
                "no family-EE reference exists on the ray or the grid",
                found.is_none(),
                json!({ "reference": found.map(|b| b.0) }),
            );
        }
        Err(e) => {
            rec.check("no family-EE reference exists on the ray or the grid", false, error_detail(&e));
        }
    }
    // The family-EE solver cannot deliver all three properties here.
    let cfg = SolveConfig::default();
    let detail = match family_ee_solve(&econ, &cfg) {
        Ok(sol) => {
            let ee = check_family_ee(&econ, &sol.allocation, &sol.reference, 1e-5)
                .map(|r| r.holds)
                .unwrap_or(false);
            let fs = check_fairness(&econ, &sol.allocation, FairnessCriterion::IndividualFs, None, 1e-5)
                .map(|r| r.holds)
                .unwrap_or(false);
            let (po, _) = undominated(&econ, &sol.allocation, oracle_grid, 1e-5);
            (!(ee && fs && po), json!({
                "allocation": rows(&sol.allocation),
                "reference": sol.reference.0,
                "family_ee": ee,
                "individual_fs": fs,
                "grid_undominated": po,
            }))
        }
        Err(e) => (true, error_detail(&e)),
    };
    rec.check("family-EE solver output fails at least one of the three checks", detail.0, detail.1);
    rec.finish()
}

fn negative_family_ee_b(grid_n: usize, eps: f64) -> ScenarioReport {
    let econ = negative_family_ee_economy();
    let cfg = SolveConfig::default();
    let check_eps = eps.max(1e-5);
    let mut rec = Recorder::new(
        "negative_family_ee_b",
        json!({
            "endowment": econ.endowment,
            "families": [["h", "w"], ["h'", "w'"], ["s"]],
            "oracle_grid_n": grid_n,
            "eps": check_eps,
        }),
    );

    // Pareto optimal and individual-FS: leximin over normalized utilities.
    match leximin(&econ, ObjectiveSet::IndividualNormalized, Region::All, &cfg) {
        Ok(out) => {
            let x = out.allocation;
            fairness_check(&mut rec, "individual leximin is individual-FS", &econ, &x, FairnessCriterion::IndividualFs, check_eps, true);
            let (ok, mut detail) = undominated(&econ, &x, grid_n, check_eps);
            detail["allocation"] = rows(&x);
            rec.check("individual leximin has no grid dominator", ok, detail);
        }
        Err(e) => {
            rec.check("individual leximin succeeds", false, error_detail(&e));
        }
    }

    // Pareto optimal and family-EE: leximin over family utility sums.
    match leximin(&econ, ObjectiveSet::FamilySum, Region::All, &cfg) {
        Ok(out) => {
            let x = out.allocation;
            let (ok, mut detail) = undominated(&econ, &x, grid_n, check_eps);
            detail["allocation"] = rows(&x);
            rec.check("family-sum leximin has no grid dominator", ok, detail);
            match find_ee_reference(&econ, &x, EeMode::Family, 400, check_eps) {
                Ok(found) => {
                    let ok = match &found {
                        Some(r) => check_family_ee(&econ, &x, r, check_eps).map(|r| r.holds).unwrap_or(false),
                        None => false,
                    };
                    rec.check("family-sum leximin is family-EE", ok, json!({ "reference": found.map(|b| b.0) }));
                }
                Err(e) => {
                    rec.check("family-sum leximin is family-EE", false, error_detail(&e));
                }
            }
        }
        Err(e) => {
            rec.check("family-sum leximin succeeds", false, error_detail(&e));
        }
    }

    // Individual-FS and family-EE: the equal split with the fair share as
    // reference.
    let x = econ.equal_split();
    fairness_check(&mut rec, "equal split is individual-FS", &econ, &x, FairnessCriterion::IndividualFs, check_eps, true);
    let fair = econ.fair_share();
    let ee = check_family_ee(&econ, &x, &fair, check_eps).map(|r| r.holds).unwrap_or(false);
    rec.check("equal split is family-EE with the fair share as reference", ee, json!({ "reference": fair.0 }));
    let (ok, detail) = undominated(&econ, &x, grid_n, check_eps);
    rec.check("equal split has a grid dominator", !ok, detail);
    rec.finish()
}

fn grouping_three_couples(grid_n: usize, eps: f64) -> ScenarioReport {
    let econ = grouping_economy();
    let mut rec = Recorder::new(
        "grouping_three_couples",
        json!({
            "endowment": econ.endowment,
            "weights": { "m1": 0.15, "m2": 0.3, "w1": 0.45, "m3": 0.55, "w2": 0.7, "w3": 0.85 },
            "families": [["m1", "w1"], ["m2", "w2"], ["m3", "w3"]],
            "regrouped": [["m1", "m2"], ["w1", "m3"], ["w2", "w3"]],
            "criteria": ["individual-ne", "pareto"],
            "grid_n": grid_n,
            "eps": eps,
        }),
    );
    let criteria = [Criterion::Fairness(FairnessCriterion::IndividualNe), Criterion::ParetoOptimal];
    let assortative = certificate_checks(&mut rec, &econ, &criteria, grid_n, eps);
    if let Some(gap) = assortative {
        match certify_nonexistence(&regrouped_economy(), &criteria, grid_n, eps) {
            Ok(cert) => {
                rec.check(
                    "grouping by rank yields a smaller grid gap",
                    cert.min_joint_violation < gap,
                    json!({ "assortative": gap, "by_rank": cert.min_joint_violation }),
                );
            }
            Err(e) => {
                rec.check("grouping by rank yields a smaller grid gap", false, error_detail(&e));
            }
        }
    }
    rec.finish()
}

/// An allocation of the [`negative_pone_economy`] in which the wife envies
/// a single while everyone else is envy-free.
pub fn democratic_demo_allocation() -> Allocation {
    Allocation::from_rows(&[&[0.9, 1.1], &[1.2, 0.8], &[0.9, 1.1]])
}

fn democratic_fraction_demo(eps: f64) -> ScenarioReport {
    let econ = negative_pone_economy();
    let x = democratic_demo_allocation();
    let mut rec = Recorder::new(
        "democratic_fraction_demo",
        json!({
            "economy": "negative_pone",
            "allocation": rows(&x),
            "eps": eps,
        }),
    );
    match democratic_ne_fraction(&econ, &x, eps) {
        Ok(h) => {
            rec.check("democratic no-envy fraction is exactly 1/2", h == 0.5, json!({ "fraction": h }));
        }
        Err(e) => {
            rec.check("democratic no-envy fraction is exactly 1/2", false, error_detail(&e));
        }
    }
    fairness_check(&mut rec, "allocation is not individual-NE", &econ, &x, FairnessCriterion::IndividualNe, eps, false);

    let econ_fs = negative_ceei_fs_economy();
    let trip = negative_ceei_fs_triple(&econ_fs);
    match democratic_ne_fraction(&econ_fs, &trip.allocation, eps) {
        Ok(h) => {
            rec.check("equilibrium of the two couples is fully envy-free", h == 1.0, json!({ "fraction": h }));
        }
        Err(e) => {
            rec.check("equilibrium of the two couples is fully envy-free", false, error_detail(&e));
        }
    }
    fairness_check(&mut rec, "that equilibrium is individual-NE", &econ_fs, &trip.allocation, FairnessCriterion::IndividualNe, eps, true);

    // Welfare maximization over the fair-share region, as a reference point.
    match fs_welfare_max(&econ, &SolveConfig::default()) {
        Ok(out) => {
            let h = democratic_ne_fraction(&econ, &out.allocation, 1e-5).unwrap_or(f64::NAN);
            rec.check(
                "fair-share welfare optimum reports a fraction in [0, 1]",
                (0.0..=1.0).contains(&h),
                json!({ "allocation": rows(&out.allocation), "fraction": h }),
            );
        }
        Err(e) => {
            rec.check("fair-share welfare optimum reports a fraction in [0, 1]", false, error_detail(&e));
        }
    }
    rec.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_system_converges_to_positive_solution() {
        let x = solve_negative_ceei().unwrap();
        assert!(x.bundles.iter().all(|b| b.0.iter().all(|v| *v > 0.0)));
        let totals = x.totals();
        assert!((totals[0] - 3.0).abs() < 1e-12 && (totals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_scenario_is_an_error() {
        assert!(matches!(
            run_scenario("unknown", &ScenarioConfig::default()),
            Err(Error::UnknownScenario(_))
        ));
    }

    #[test]
    fn scenario_names_are_unique() {
        let mut names = SCENARIOS.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), SCENARIOS.len());
    }

    #[test]
    fn fixed_bundles_are_feasible() {
        let econ = negative_pone_economy();
        assert_eq!(democratic_demo_allocation().totals(), econ.endowment);
        let econ = negative_family_ee_economy();
        assert_eq!(negative_family_ee_candidate().totals(), econ.endowment);
    }
}

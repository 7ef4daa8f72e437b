//! Browser bindings for the famdiv demo page.
//!
//! Every exported function takes JSON text and returns JSON text so the page
//! can stay plain JavaScript. The pure `*_json` functions are also usable
//! natively, which is how the tests exercise them.

use famdiv::{
    check_fairness, democratic_ne_fraction, find_ee_reference, fs_welfare_max, joint_violation,
    leximin, mrs_range, pareto_test_mrs, restricted_equilibrium, Allocation, Criterion, EeMode,
    Economy, EquilibriumConfig, FairnessCriterion, ObjectiveSet, ParetoVerdict, Region, SolveConfig,
    UtilityFunction,
};
use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Points per indifference curve.
const CURVE_POINTS: usize = 48;
/// Largest gap-map resolution accepted from the page.
const MAX_GAP_MAP: usize = 120;
const EPS: f64 = 1e-6;

type Result<T> = std::result::Result<T, String>;

fn parse(text: &str) -> Result<Economy> {
    famdiv::parse_economy(text).map_err(|e| e.to_string())
}

fn parse_allocation(econ: &Economy, text: &str) -> Result<Allocation> {
    econ.parse_allocation(text).map_err(|e| e.to_string())
}

fn criterion(name: &str) -> Result<Criterion> {
    if name == "pareto" {
        return Ok(Criterion::ParetoOptimal);
    }
    FairnessCriterion::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .map(Criterion::Fairness)
        .ok_or_else(|| format!("unknown criterion {name:?}"))
}

#[derive(Deserialize)]
struct SolveRequest {
    method: String,
    #[serde(default)]
    objectives: Option<String>,
}

/// Runs one of the solvers and returns the allocation with its diagnostics.
pub fn solve_json(economy: &str, request: &str) -> Result<String> {
    let econ = parse(economy)?;
    let req: SolveRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    let cfg = SolveConfig::default();
    let (x, extra) = match req.method.as_str() {
        "leximin" => {
            let set = match req.objectives.as_deref().unwrap_or("individual") {
                "individual" => ObjectiveSet::IndividualNormalized,
                "family-product" => ObjectiveSet::FamilyProduct,
                "family-gm" => ObjectiveSet::FamilyGeometricMean,
                "family-sum" => ObjectiveSet::FamilySum,
                other => return Err(format!("unknown objective set {other:?}")),
            };
            let out = leximin(&econ, set, Region::All, &cfg).map_err(|e| e.to_string())?;
            (out.allocation, json!({ "objectives": out.objectives }))
        }
        "fs-welfare" => {
            let out = fs_welfare_max(&econ, &cfg).map_err(|e| e.to_string())?;
            (out.allocation, json!({ "objectives": out.objectives }))
        }
        "family-ee" => {
            let sol = famdiv::family_ee_solve(&econ, &cfg).map_err(|e| e.to_string())?;
            (sol.allocation, json!({ "V": sol.level, "t": sol.t, "reference": sol.reference }))
        }
        "restricted-equilibrium" => {
            let out = restricted_equilibrium(&econ, &EquilibriumConfig::default()).map_err(|e| e.to_string())?;
            let trip = out
                .triple
                .ok_or_else(|| format!("prices did not converge: {}", out.diagnostics.join("; ")))?;
            (trip.allocation, json!({ "prices": trip.prices, "fair": out.fair }))
        }
        other => return Err(format!("unknown method {other:?}")),
    };
    let mut doc = econ.allocation_document(&x);
    doc["details"] = extra;
    Ok(doc.to_string())
}

/// Points `(y, z)` on the indifference curve of `u` through `level`, sampled
/// over `y` in `(0, ey]` and clipped to the box height `ez`.
fn indifference_curve(u: &UtilityFunction, level: f64, ey: f64, ez: f64) -> Vec<[f64; 2]> {
    let mut points = Vec::new();
    for k in 1..=CURVE_POINTS {
        let y = ey * k as f64 / CURVE_POINTS as f64;
        if u.value(&[y, ez]) < level {
            continue;
        }
        // Utility increases in z, so bisection finds the unique crossing.
        let (mut lo, mut hi) = (0.0, ez);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if u.value(&[y, mid]) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        points.push([y, hi]);
    }
    points
}

/// Verdicts, MRS ranges and indifference curves for one allocation.
pub fn inspect_json(economy: &str, allocation: &str) -> Result<String> {
    let econ = parse(economy)?;
    let x = parse_allocation(&econ, allocation)?;
    let err = |e: famdiv::Error| e.to_string();

    let mut verdicts = serde_json::Map::new();
    for c in [
        FairnessCriterion::IndividualFs,
        FairnessCriterion::FamilyFs,
        FairnessCriterion::IndividualNe,
        FairnessCriterion::FamilyNe,
    ] {
        let report = check_fairness(&econ, &x, c, None, EPS).map_err(err)?;
        verdicts.insert(c.name().into(), json!({ "holds": report.holds, "witnesses": report.witness_ids() }));
    }
    for (c, mode) in [
        (FairnessCriterion::IndividualEe, EeMode::Individual),
        (FairnessCriterion::FamilyEe, EeMode::Family),
    ] {
        let reference = find_ee_reference(&econ, &x, mode, 32, EPS).map_err(err)?;
        verdicts.insert(c.name().into(), json!({ "holds": reference.is_some(), "reference": reference }));
    }
    let pareto = if econ.goods == 2 {
        match pareto_test_mrs(&econ, &x, EPS).map_err(err)? {
            ParetoVerdict::Optimal => json!({ "verdict": "optimal" }),
            ParetoVerdict::NotOptimal { mrs_gap, .. } => json!({ "verdict": "not optimal", "mrs_gap": mrs_gap }),
            ParetoVerdict::Inapplicable { reason } => json!({ "verdict": "undecided", "reason": reason }),
        }
    } else {
        json!({ "verdict": "undecided", "reason": "the MRS test needs two goods" })
    };

    let mut families = Vec::new();
    for (f, family) in econ.families.iter().enumerate() {
        let bundle = x.bundle(f);
        let range = if econ.goods == 2 {
            mrs_range(&econ, &family.id, bundle).ok().map(|r| [r.low, r.high])
        } else {
            None
        };
        let members: Vec<Value> = family
            .members
            .iter()
            .map(|m| {
                let utility = m.utility.value(&bundle.0);
                let normalized = famdiv::normalized_utility(&m.utility, bundle, &econ).ok();
                let curve = (econ.goods == 2)
                    .then(|| indifference_curve(&m.utility, utility, econ.endowment[0], econ.endowment[1]));
                json!({ "id": m.id, "utility": utility, "normalized": normalized, "curve": curve })
            })
            .collect();
        families.push(json!({ "id": family.id, "bundle": bundle, "mrs_range": range, "members": members }));
    }

    Ok(json!({
        "verdicts": verdicts,
        "pareto": pareto,
        "democratic_fraction": democratic_ne_fraction(&econ, &x, EPS).map_err(err)?,
        "families": families,
    })
    .to_string())
}

#[derive(Deserialize)]
struct GapMapRequest {
    n: usize,
    criteria: Vec<String>,
}

/// Joint violation over the Edgeworth box of a two-family, two-good
/// economy: cell `(i, j)` gives the first family `(i ey / n, j ez / n)` and
/// the second family the rest.
pub fn gap_map_json(economy: &str, request: &str) -> Result<String> {
    let econ = parse(economy)?;
    if econ.goods != 2 || econ.family_count() != 2 {
        return Err("the gap map needs two families and two goods".into());
    }
    let req: GapMapRequest = serde_json::from_str(request).map_err(|e| e.to_string())?;
    if req.n == 0 || req.n > MAX_GAP_MAP {
        return Err(format!("resolution must be between 1 and {MAX_GAP_MAP}"));
    }
    let criteria = req.criteria.iter().map(|c| criterion(c)).collect::<Result<Vec<_>>>()?;
    let [ey, ez] = [econ.endowment[0], econ.endowment[1]];
    let n = req.n as f64;
    let mut values = Vec::with_capacity((req.n + 1) * (req.n + 1));
    let mut best = (f64::INFINITY, [0.0, 0.0]);
    for i in 0..=req.n {
        for j in 0..=req.n {
            let mine = [ey * i as f64 / n, ez * j as f64 / n];
            let x = Allocation::from_rows(&[&mine, &[ey - mine[0], ez - mine[1]]]);
            let v = joint_violation(&econ, &x, &criteria, EPS).map_err(|e| e.to_string())?;
            if v < best.0 {
                best = (v, mine);
            }
            values.push(v);
        }
    }
    Ok(json!({ "n": req.n, "values": values, "min": best.0, "argmin": best.1 }).to_string())
}

fn to_js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(economy: &str, request: &str) -> std::result::Result<String, JsError> {
    to_js(solve_json(economy, request))
}

#[wasm_bindgen]
pub fn inspect(economy: &str, allocation: &str) -> std::result::Result<String, JsError> {
    to_js(inspect_json(economy, allocation))
}

#[wasm_bindgen]
pub fn gap_map(economy: &str, request: &str) -> std::result::Result<String, JsError> {
    to_js(gap_map_json(economy, request))
}

//! Economies of families, bundles, allocations and the per-individual
//! quantities every other module builds on.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::utility::UtilityFunction;

/// Default feasibility tolerance for hand-written allocations.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Default feasibility tolerance for solver outputs.
pub const SOLVER_FEASIBILITY_TOL: f64 = 1e-6;

const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bundle(pub Vec<f64>);

impl Bundle {
    pub fn new(quantities: impl Into<Vec<f64>>) -> Self {
        Bundle(quantities.into())
    }

    pub fn zeros(goods: usize) -> Self {
        Bundle(vec![0.0; goods])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, t: f64) -> Bundle {
        Bundle(self.0.iter().map(|x| x * t).collect())
    }

    pub fn is_interior(&self, floor: f64) -> bool {
        self.0.iter().all(|x| *x > floor)
    }
}

impl From<Vec<f64>> for Bundle {
    fn from(v: Vec<f64>) -> Self {
        Bundle(v)
    }
}

impl std::ops::Index<usize> for Bundle {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: String,
    pub utility: UtilityFunction,
}

impl Individual {
    pub fn new(id: impl Into<String>, utility: UtilityFunction) -> Self {
        Individual {
            id: id.into(),
            utility,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub id: String,
    pub members: Vec<Individual>,
}

impl Family {
    pub fn new(id: impl Into<String>, members: Vec<Individual>) -> Self {
        Family {
            id: id.into(),
            members,
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// A validated economy. Construct through [`Economy::new`] or
/// [`parse_economy`]; the fields are public for reading only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Economy {
    pub goods: usize,
    pub endowment: Vec<f64>,
    pub families: Vec<Family>,
    #[serde(skip)]
    endowment_utility: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct EconomyDocument {
    goods: usize,
    endowment: Vec<f64>,
    families: Vec<Family>,
}

/// Location of an individual inside an economy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Member {
    pub family: usize,
    pub index: usize,
}

impl Economy {
    pub fn new(goods: usize, endowment: Vec<f64>, families: Vec<Family>) -> Result<Self> {
        if goods == 0 {
            return Err(Error::validation("goods must be a positive integer"));
        }
        if endowment.len() != goods {
            return Err(Error::Dimension {
                expected: goods,
                actual: endowment.len(),
            });
        }
        if endowment.iter().any(|e| !e.is_finite() || *e <= 0.0) {
            return Err(Error::validation("endowment must be strictly positive"));
        }
        if families.is_empty() {
            return Err(Error::validation("economy needs at least one family"));
        }
        let mut family_ids = HashSet::new();
        let mut individual_ids = HashSet::new();
        for family in &families {
            if family.members.is_empty() {
                return Err(Error::validation(format!(
                    "family `{}` has no members",
                    family.id
                )));
            }
            if !family_ids.insert(family.id.as_str()) {
                return Err(Error::validation(format!(
                    "duplicate family id `{}`",
                    family.id
                )));
            }
            for member in &family.members {
                if !individual_ids.insert(member.id.as_str()) {
                    return Err(Error::validation(format!(
                        "duplicate individual id `{}`",
                        member.id
                    )));
                }
                member.utility.validate(goods).map_err(|e| match e {
                    Error::Validation(msg) => {
                        Error::Validation(format!("individual `{}`: {msg}", member.id))
                    }
                    other => other,
                })?;
            }
        }
        let endowment_utility = families
            .iter()
            .map(|f| {
                f.members
                    .iter()
                    .map(|m| m.utility.value(&endowment))
                    .collect()
            })
            .collect();
        Ok(Economy {
            goods,
            endowment,
            families,
            endowment_utility,
        })
    }

    pub fn family_count(&self) -> usize {
        self.families.len()
    }

    pub fn individual_count(&self) -> usize {
        self.families.iter().map(Family::size).sum()
    }

    pub fn family_index(&self, id: &str) -> Result<usize> {
        self.families
            .iter()
            .position(|f| f.id == id)
            .ok_or_else(|| Error::UnknownFamily(id.to_string()))
    }

    /// All individuals in family order.
    pub fn members(&self) -> impl Iterator<Item = (Member, &Individual)> + '_ {
        self.families.iter().enumerate().flat_map(|(f, family)| {
            family
                .members
                .iter()
                .enumerate()
                .map(move |(i, ind)| (Member { family: f, index: i }, ind))
        })
    }

    pub fn individual(&self, m: Member) -> &Individual {
        &self.families[m.family].members[m.index]
    }

    pub fn fair_share(&self) -> Bundle {
        let n = self.family_count() as f64;
        Bundle(self.endowment.iter().map(|e| e / n).collect())
    }

    pub fn endowment_bundle(&self) -> Bundle {
        Bundle(self.endowment.clone())
    }

    pub fn equal_split(&self) -> Allocation {
        Allocation::new(vec![self.fair_share(); self.family_count()])
    }

    /// `u_i(e)`, cached at construction.
    pub fn endowment_utility(&self, m: Member) -> f64 {
        self.endowment_utility[m.family][m.index]
    }

    /// Normalized utility via the degree-one homogeneity of every supported
    /// variant: `u(b) / u(e) - 1/|F|`. Agrees with [`normalized_utility`].
    pub fn normalized(&self, m: Member, b: &[f64]) -> f64 {
        let u = &self.individual(m).utility;
        u.value(b) / self.endowment_utility(m) - 1.0 / self.family_count() as f64
    }

    pub fn check_bundle(&self, b: &Bundle) -> Result<()> {
        if b.len() != self.goods {
            return Err(Error::Dimension {
                expected: self.goods,
                actual: b.len(),
            });
        }
        Ok(())
    }

    pub fn check_shape(&self, x: &Allocation) -> Result<()> {
        if x.bundles.len() != self.family_count() {
            return Err(Error::validation(format!(
                "allocation has {} bundles for {} families",
                x.bundles.len(),
                self.family_count()
            )));
        }
        for b in &x.bundles {
            self.check_bundle(b)?;
            if b.0.iter().any(|q| !q.is_finite() || *q < 0.0) {
                return Err(Error::validation(
                    "bundle quantities must be finite and non-negative",
                ));
            }
        }
        Ok(())
    }

    /// Parses an allocation document against this economy.
    pub fn parse_allocation(&self, text: &str) -> Result<Allocation> {
        let doc: AllocationDocument = serde_json::from_str(text).map_err(parse_error)?;
        self.allocation_from_map(doc.bundles)
    }

    pub fn allocation_from_map(&self, mut bundles: BTreeMap<String, Vec<f64>>) -> Result<Allocation> {
        if let Some(unknown) = bundles
            .keys()
            .find(|id| self.families.iter().all(|f| &f.id != *id))
        {
            return Err(Error::UnknownFamily(unknown.clone()));
        }
        let ordered = self
            .families
            .iter()
            .map(|f| {
                bundles
                    .remove(&f.id)
                    .map(Bundle)
                    .ok_or_else(|| Error::validation(format!("no bundle for family `{}`", f.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let x = Allocation::new(ordered);
        self.check_shape(&x)?;
        Ok(x)
    }

    pub fn allocation_document(&self, x: &Allocation) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .families
            .iter()
            .zip(&x.bundles)
            .map(|(f, b)| (f.id.clone(), serde_json::json!(b.0)))
            .collect();
        serde_json::json!({ "bundles": map })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("economy serializes")
    }
}

/// One bundle per family, in the economy's family order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn new(bundles: Vec<Bundle>) -> Self {
        Allocation { bundles }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        Allocation::new(rows.iter().map(|r| Bundle(r.to_vec())).collect())
    }

    pub fn bundle(&self, family: usize) -> &Bundle {
        &self.bundles[family]
    }

    pub fn totals(&self) -> Vec<f64> {
        let goods = self.bundles.first().map_or(0, Bundle::len);
        (0..goods)
            .map(|g| self.bundles.iter().map(|b| b.0[g]).sum())
            .collect()
    }
}

#[derive(Deserialize)]
struct AllocationDocument {
    bundles: BTreeMap<String, Vec<f64>>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_economy(text: &str) -> Result<Economy> {
    let doc: EconomyDocument = serde_json::from_str(text).map_err(parse_error)?;
    Economy::new(doc.goods, doc.endowment, doc.families)
}

pub fn evaluate_utility(u: &UtilityFunction, b: &Bundle) -> Result<f64> {
    if u.goods() != b.len() {
        return Err(Error::Dimension {
            expected: u.goods(),
            actual: b.len(),
        });
    }
    Ok(u.value(&b.0))
}

/// `t - 1/|F|` where `u(t e) = u(b)`, with `t` found by bisection.
pub fn normalized_utility(u: &UtilityFunction, b: &Bundle, econ: &Economy) -> Result<f64> {
    econ.check_bundle(b)?;
    let inv_f = 1.0 / econ.family_count() as f64;
    if *b == econ.fair_share() {
        return Ok(0.0);
    }
    let e = &econ.endowment;
    let on_ray = |t: f64| -> Vec<f64> { e.iter().map(|x| x * t).collect() };
    let target = u.value(&b.0);
    if target <= u.value(&on_ray(0.0)) {
        return Ok(-inv_f);
    }
    let mut hi = 1.0;
    let mut doublings = 0;
    while u.value(&on_ray(hi)) < target {
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 {
            return Err(Error::NonMonotoneOnRay);
        }
    }
    let mut lo = 0.0;
    while hi - lo > NORMALIZATION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if u.value(&on_ray(mid)) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) - inv_f)
}

pub fn mrs(u: &UtilityFunction, b: &Bundle) -> Result<f64> {
    u.mrs(&b.0)
}

pub fn fair_share(econ: &Economy) -> Bundle {
    econ.fair_share()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// First good whose total exceeds the endowment by more than the tolerance.
    pub violated_good: Option<usize>,
    pub excess: f64,
}

pub fn check_feasible(econ: &Economy, x: &Allocation, tol: f64) -> Result<Feasibility> {
    econ.check_shape(x)?;
    let totals = x.totals();
    let mut worst = f64::NEG_INFINITY;
    let mut violated = None;
    for (g, (t, e)) in totals.iter().zip(&econ.endowment).enumerate() {
        let excess = t - e;
        worst = worst.max(excess);
        if excess > tol && violated.is_none() {
            violated = Some(g);
        }
    }
    Ok(Feasibility {
        feasible: violated.is_none(),
        violated_good: violated,
        excess: worst,
    })
}

pub(crate) fn require_feasible(econ: &Economy, x: &Allocation, tol: f64) -> Result<()> {
    let report = check_feasible(econ, x, tol)?;
    match report.violated_good {
        None => Ok(()),
        Some(good) => Err(Error::Infeasible {
            good,
            total: x.totals()[good],
            endowment: econ.endowment[good],
        }),
    }
}

//! The family preference relation and the fair-share, no-envy and
//! egalitarian-equivalence predicates.
//!
//! A family weakly prefers one bundle to another when every member does, so
//! families whose members disagree cannot rank the two bundles. Strictness is
//! judged on raw utility differences against an indifference band `eps`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::economy::{require_feasible, Allocation, Bundle, Economy, SOLVER_FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::parallel;

/// Number of bisection halvings used to locate ray references.
const RAY_BISECTIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyRelation {
    StrictlyPrefersFirst,
    StrictlyPrefersSecond,
    Indifferent,
    Incomparable,
}

impl FamilyRelation {
    /// The relation with the two bundles exchanged.
    pub fn swapped(self) -> Self {
        match self {
            FamilyRelation::StrictlyPrefersFirst => FamilyRelation::StrictlyPrefersSecond,
            FamilyRelation::StrictlyPrefersSecond => FamilyRelation::StrictlyPrefersFirst,
            other => other,
        }
    }

    /// Classifies per-member utility differences `u_i(first) - u_i(second)`.
    pub fn from_differences(diffs: impl IntoIterator<Item = f64>, eps: f64) -> Self {
        let (mut up, mut down) = (false, false);
        for d in diffs {
            up |= d > eps;
            down |= d < -eps;
        }
        match (up, down) {
            (false, false) => FamilyRelation::Indifferent,
            (true, false) => FamilyRelation::StrictlyPrefersFirst,
            (false, true) => FamilyRelation::StrictlyPrefersSecond,
            (true, true) => FamilyRelation::Incomparable,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(
            self,
            FamilyRelation::StrictlyPrefersFirst | FamilyRelation::StrictlyPrefersSecond
        )
    }
}

pub fn compare_family(
    econ: &Economy,
    family: &str,
    b1: &Bundle,
    b2: &Bundle,
    eps: f64,
) -> Result<FamilyRelation> {
    let f = econ.family_index(family)?;
    econ.check_bundle(b1)?;
    econ.check_bundle(b2)?;
    Ok(compare_at(econ, f, &b1.0, &b2.0, eps))
}

pub(crate) fn compare_at(econ: &Economy, f: usize, b1: &[f64], b2: &[f64], eps: f64) -> FamilyRelation {
    FamilyRelation::from_differences(
        econ.families[f]
            .members
            .iter()
            .map(|m| m.utility.value(b1) - m.utility.value(b2)),
        eps,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessCriterion {
    IndividualFs,
    FamilyFs,
    IndividualNe,
    FamilyNe,
    IndividualEe,
    FamilyEe,
}

impl FairnessCriterion {
    pub const ALL: [FairnessCriterion; 6] = [
        FairnessCriterion::IndividualFs,
        FairnessCriterion::FamilyFs,
        FairnessCriterion::IndividualNe,
        FairnessCriterion::FamilyNe,
        FairnessCriterion::IndividualEe,
        FairnessCriterion::FamilyEe,
    ];

    pub fn needs_reference(self) -> bool {
        matches!(self, FairnessCriterion::IndividualEe | FairnessCriterion::FamilyEe)
    }

    pub fn name(self) -> &'static str {
        match self {
            FairnessCriterion::IndividualFs => "individual-fs",
            FairnessCriterion::FamilyFs => "family-fs",
            FairnessCriterion::IndividualNe => "individual-ne",
            FairnessCriterion::FamilyNe => "family-ne",
            FairnessCriterion::IndividualEe => "individual-ee",
            FairnessCriterion::FamilyEe => "family-ee",
        }
    }
}

impl fmt::Display for FairnessCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FairnessCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let canonical = s.trim().to_ascii_lowercase().replace('_', "-");
        FairnessCriterion::ALL
            .into_iter()
            .find(|c| c.name() == canonical)
            .ok_or_else(|| Error::validation(format!("unknown fairness criterion `{s}`")))
    }
}

/// What a witness is compared against: another family's bundle, the fair
/// share, or an egalitarian reference bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Against {
    Family(String),
    Bundle(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Individual id for individual criteria, family id for family criteria.
    pub who: String,
    pub against: Against,
    /// Largest raw utility difference behind the violation.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub criterion: FairnessCriterion,
    pub holds: bool,
    pub witnesses: Vec<Witness>,
}

impl FairnessReport {
    fn new(criterion: FairnessCriterion, mut witnesses: Vec<Witness>) -> Self {
        // Stable sort keeps economy order among equal gaps.
        witnesses.sort_by(|a, b| b.gap.total_cmp(&a.gap));
        FairnessReport {
            criterion,
            holds: witnesses.is_empty(),
            witnesses,
        }
    }

    pub fn witness_ids(&self) -> Vec<&str> {
        self.witnesses.iter().map(|w| w.who.as_str()).collect()
    }
}

/// Checks one criterion. Egalitarian criteria need `reference`.
pub fn check_fairness(
    econ: &Economy,
    x: &Allocation,
    criterion: FairnessCriterion,
    reference: Option<&Bundle>,
    eps: f64,
) -> Result<FairnessReport> {
    require_feasible(econ, x, SOLVER_FEASIBILITY_TOL)?;
    let fair = econ.fair_share();
    let mut witnesses = Vec::new();
    match criterion {
        FairnessCriterion::IndividualFs => {
            for (m, ind) in econ.members() {
                let gap = ind.utility.value(&fair.0) - ind.utility.value(&x.bundles[m.family].0);
                if gap > eps {
                    witnesses.push(Witness {
                        who: ind.id.clone(),
                        against: Against::Bundle(fair.0.clone()),
                        gap,
                    });
                }
            }
        }
        FairnessCriterion::FamilyFs => {
            for (f, family) in econ.families.iter().enumerate() {
                let own = &x.bundles[f].0;
                if compare_at(econ, f, &fair.0, own, eps) == FamilyRelation::StrictlyPrefersFirst {
                    witnesses.push(Witness {
                        who: family.id.clone(),
                        against: Against::Bundle(fair.0.clone()),
                        gap: max_difference(econ, f, &fair.0, own),
                    });
                }
            }
        }
        FairnessCriterion::IndividualNe => {
            for (m, ind) in econ.members() {
                let own = ind.utility.value(&x.bundles[m.family].0);
                for (g, other) in econ.families.iter().enumerate() {
                    if g == m.family {
                        continue;
                    }
                    let gap = ind.utility.value(&x.bundles[g].0) - own;
                    if gap > eps {
                        witnesses.push(Witness {
                            who: ind.id.clone(),
                            against: Against::Family(other.id.clone()),
                            gap,
                        });
                    }
                }
            }
        }
        FairnessCriterion::FamilyNe => {
            for (f, family) in econ.families.iter().enumerate() {
                let own = &x.bundles[f].0;
                for (g, other) in econ.families.iter().enumerate() {
                    if g == f {
                        continue;
                    }
                    let theirs = &x.bundles[g].0;
                    if compare_at(econ, f, theirs, own, eps) == FamilyRelation::StrictlyPrefersFirst {
                        witnesses.push(Witness {
                            who: family.id.clone(),
                            against: Against::Family(other.id.clone()),
                            gap: max_difference(econ, f, theirs, own),
                        });
                    }
                }
            }
        }
        FairnessCriterion::IndividualEe => {
            let r = reference.ok_or(Error::MissingReference("individual-ee"))?;
            return check_individual_ee(econ, x, r, eps);
        }
        FairnessCriterion::FamilyEe => {
            let r = reference.ok_or(Error::MissingReference("family-ee"))?;
            return check_family_ee(econ, x, r, eps);
        }
    }
    Ok(FairnessReport::new(criterion, witnesses))
}

fn max_difference(econ: &Economy, f: usize, b1: &[f64], b2: &[f64]) -> f64 {
    econ.families[f]
        .members
        .iter()
        .map(|m| m.utility.value(b1) - m.utility.value(b2))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Individual egalitarian equivalence: every individual is indifferent
/// between the family bundle and `r`.
pub fn check_individual_ee(
    econ: &Economy,
    x: &Allocation,
    r: &Bundle,
    eps: f64,
) -> Result<FairnessReport> {
    require_feasible(econ, x, SOLVER_FEASIBILITY_TOL)?;
    econ.check_bundle(r)?;
    let witnesses = econ
        .members()
        .filter_map(|(m, ind)| {
            let gap = (ind.utility.value(&x.bundles[m.family].0) - ind.utility.value(&r.0)).abs();
            (gap > eps).then(|| Witness {
                who: ind.id.clone(),
                against: Against::Bundle(r.0.clone()),
                gap,
            })
        })
        .collect();
    Ok(FairnessReport::new(FairnessCriterion::IndividualEe, witnesses))
}

/// Family egalitarian equivalence: no family strictly ranks its bundle
/// against `r` in either direction.
pub fn check_family_ee(
    econ: &Economy,
    x: &Allocation,
    r: &Bundle,
    eps: f64,
) -> Result<FairnessReport> {
    require_feasible(econ, x, SOLVER_FEASIBILITY_TOL)?;
    econ.check_bundle(r)?;
    let witnesses = econ
        .families
        .iter()
        .enumerate()
        .filter_map(|(f, family)| {
            let own = &x.bundles[f].0;
            compare_at(econ, f, own, &r.0, eps).is_strict().then(|| Witness {
                who: family.id.clone(),
                against: Against::Bundle(r.0.clone()),
                gap: max_difference(econ, f, own, &r.0)
                    .abs()
                    .max(max_difference(econ, f, &r.0, own).abs()),
            })
        })
        .collect();
    Ok(FairnessReport::new(FairnessCriterion::FamilyEe, witnesses))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EeMode {
    Individual,
    Family,
}

/// Counts of units (individuals or families) that strictly prefer their own
/// share to `r`, and that strictly prefer `r` to their own share.
fn ray_counts(econ: &Economy, x: &Allocation, mode: EeMode, r: &[f64], eps: f64) -> (usize, usize) {
    let (mut above, mut below) = (0, 0);
    match mode {
        EeMode::Individual => {
            for (m, ind) in econ.members() {
                let d = ind.utility.value(&x.bundles[m.family].0) - ind.utility.value(r);
                above += usize::from(d > eps);
                below += usize::from(d < -eps);
            }
        }
        EeMode::Family => {
            for f in 0..econ.family_count() {
                match compare_at(econ, f, &x.bundles[f].0, r, eps) {
                    FamilyRelation::StrictlyPrefersFirst => above += 1,
                    FamilyRelation::StrictlyPrefersSecond => below += 1,
                    _ => {}
                }
            }
        }
    }
    (above, below)
}

/// Searches for an egalitarian reference bundle: first on the ray
/// `{t e : t in [0, 1]}`, then over the rectangular grid with `grid_n`
/// steps per good. Returns the first bundle passing the check for `mode`.
///
/// Along the ray the number of units strictly preferring their share to
/// `t e` is non-increasing in `t` and the number strictly preferring `t e`
/// is non-decreasing, so both thresholds are located by bisection and any
/// `t` between them is a reference.
pub fn find_ee_reference(
    econ: &Economy,
    x: &Allocation,
    mode: EeMode,
    grid_n: usize,
    eps: f64,
) -> Result<Option<Bundle>> {
    require_feasible(econ, x, SOLVER_FEASIBILITY_TOL)?;
    let e = econ.endowment_bundle();
    let counts = |t: f64| ray_counts(econ, x, mode, &e.scaled(t).0, eps);

    let t_low = {
        if counts(1.0).0 > 0 {
            None
        } else if counts(0.0).0 == 0 {
            Some(0.0)
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..RAY_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                if counts(mid).0 > 0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(hi)
        }
    };
    let t_high = {
        if counts(0.0).1 > 0 {
            None
        } else if counts(1.0).1 == 0 {
            Some(1.0)
        } else {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..RAY_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                if counts(mid).1 > 0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(lo)
        }
    };
    if let (Some(lo), Some(hi)) = (t_low, t_high) {
        if lo <= hi {
            for t in [0.5 * (lo + hi), lo, hi] {
                if counts(t) == (0, 0) {
                    return Ok(Some(e.scaled(t)));
                }
            }
        }
    }

    let Ok(grid) = Grid::new(grid_n, econ.goods) else {
        return Ok(None);
    };
    let hit = parallel::find_first(grid.cells, |c| {
        let r = grid.bundle(&grid.coords(c), &econ.endowment);
        (ray_counts(econ, x, mode, &r, eps) == (0, 0)).then_some(r)
    });
    Ok(hit.map(|(_, r)| Bundle(r)))
}

/// The smallest, over families, share of members who envy no other family.
pub fn democratic_ne_fraction(econ: &Economy, x: &Allocation, eps: f64) -> Result<f64> {
    require_feasible(econ, x, SOLVER_FEASIBILITY_TOL)?;
    let mut worst: f64 = 1.0;
    for (f, family) in econ.families.iter().enumerate() {
        let content = family
            .members
            .iter()
            .filter(|m| {
                let own = m.utility.value(&x.bundles[f].0);
                (0..econ.family_count())
                    .filter(|g| *g != f)
                    .all(|g| m.utility.value(&x.bundles[g].0) <= own + eps)
            })
            .count();
        worst = worst.min(content as f64 / family.size() as f64);
    }
    Ok(worst)
}

//! Pareto dominance, the two-good MRS-range optimality test, and an
//! exhaustive grid oracle for dominating allocations.
//!
//! An interior two-good allocation is Pareto optimal exactly when the MRS
//! ranges of all families share a common point; each family's range spans
//! the smallest to the largest marginal rate of substitution among its
//! members at the family bundle.

use serde::{Deserialize, Serialize};

use crate::economy::{require_feasible, Allocation, Bundle, Economy, SOLVER_FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::grid::{Grid, UtilityTables};
use crate::parallel;

/// Default cap on the number of exhaustive grid allocations the oracle may
/// enumerate.
pub const ORACLE_BUDGET: u128 = 2_000_000_000;

/// Smallest tolerance used when deciding that an allocation exhausts the
/// endowment.
const EXHAUSTION_FLOOR: f64 = 1e-9;

/// `x_new` gives nobody less (beyond `eps`) and somebody more (beyond `eps`).
pub fn dominates(econ: &Economy, x_new: &Allocation, x_old: &Allocation, eps: f64) -> Result<bool> {
    econ.check_shape(x_new)?;
    econ.check_shape(x_old)?;
    let mut strict = false;
    for (m, ind) in econ.members() {
        let d = ind.utility.value(&x_new.bundles[m.family].0)
            - ind.utility.value(&x_old.bundles[m.family].0);
        if d < -eps {
            return Ok(false);
        }
        strict |= d > eps;
    }
    Ok(strict)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrsRange {
    pub low: f64,
    pub high: f64,
}

impl MrsRange {
    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.high
    }
}

pub fn mrs_range(econ: &Economy, family: &str, b: &Bundle) -> Result<MrsRange> {
    let f = econ.family_index(family)?;
    econ.check_bundle(b)?;
    mrs_range_at(econ, f, &b.0)
}

pub(crate) fn mrs_range_at(econ: &Economy, f: usize, b: &[f64]) -> Result<MrsRange> {
    let mut range = MrsRange {
        low: f64::INFINITY,
        high: f64::NEG_INFINITY,
    };
    for m in &econ.families[f].members {
        let v = m.utility.mrs(b)?;
        range.low = range.low.min(v);
        range.high = range.high.max(v);
    }
    Ok(range)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ParetoVerdict {
    Optimal,
    NotOptimal {
        /// `max_f low_f - min_f high_f` when the MRS test decided.
        #[serde(skip_serializing_if = "Option::is_none")]
        mrs_gap: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        dominator: Option<Allocation>,
    },
    Inapplicable {
        reason: String,
    },
}

impl ParetoVerdict {
    pub fn is_optimal(&self) -> bool {
        matches!(self, ParetoVerdict::Optimal)
    }

    pub fn mrs_gap(&self) -> Option<f64> {
        match self {
            ParetoVerdict::NotOptimal { mrs_gap, .. } => *mrs_gap,
            _ => None,
        }
    }
}

/// The MRS-range test. Applies to two-good allocations that are interior
/// (every coordinate above `eps`) and exhaust the endowment; anything else
/// is reported as inapplicable.
pub fn pareto_test_mrs(econ: &Economy, x: &Allocation, eps: f64) -> Result<ParetoVerdict> {
    econ.check_shape(x)?;
    if econ.goods != 2 {
        return Ok(ParetoVerdict::Inapplicable {
            reason: format!("the MRS test needs two goods, economy has {}", econ.goods),
        });
    }
    if let Some((f, b)) = x
        .bundles
        .iter()
        .enumerate()
        .find(|(_, b)| !b.is_interior(eps))
    {
        return Ok(ParetoVerdict::Inapplicable {
            reason: format!(
                "bundle of family `{}` ({:?}) is on the boundary",
                econ.families[f].id, b.0
            ),
        });
    }
    let slack = eps.max(EXHAUSTION_FLOOR);
    if let Some((g, t)) = x
        .totals()
        .iter()
        .enumerate()
        .find(|(g, t)| (*t - econ.endowment[*g]).abs() > slack)
    {
        return Ok(ParetoVerdict::Inapplicable {
            reason: format!(
                "allocation does not exhaust good {g} (total {t}, endowment {})",
                econ.endowment[g]
            ),
        });
    }
    let mut max_low = f64::NEG_INFINITY;
    let mut min_high = f64::INFINITY;
    for (f, b) in x.bundles.iter().enumerate() {
        let range = mrs_range_at(econ, f, &b.0)?;
        max_low = max_low.max(range.low);
        min_high = min_high.min(range.high);
    }
    if max_low <= min_high + eps {
        Ok(ParetoVerdict::Optimal)
    } else {
        Ok(ParetoVerdict::NotOptimal {
            mrs_gap: Some(max_low - min_high),
            dominator: None,
        })
    }
}

/// Enumerates exhaustive allocations on the per-good grid `{k e_g / grid_n}`
/// and returns the lexicographically first one that dominates `x`.
pub fn pareto_oracle_grid(
    econ: &Economy,
    x: &Allocation,
    grid_n: usize,
    eps: f64,
) -> Result<Option<Allocation>> {
    pareto_oracle_grid_with_budget(econ, x, grid_n, eps, ORACLE_BUDGET)
}

pub fn pareto_oracle_grid_with_budget(
    econ: &Economy,
    x: &Allocation,
    grid_n: usize,
    eps: f64,
    budget: u128,
) -> Result<Option<Allocation>> {
    require_feasible(econ, x, SOLVER_FEASIBILITY_TOL)?;
    let grid = Grid::new(grid_n, econ.goods)?;
    let size = grid.allocation_count(econ.family_count());
    if size > budget {
        return Err(Error::BudgetExceeded { size, budget });
    }
    let tables = UtilityTables::new(econ, &grid);
    let search = DominanceSearch::new(econ, x, &grid, &tables, eps);
    let full = grid.full();

    if econ.family_count() == 1 {
        return Ok(search
            .complete(&[], &full)
            .map(|cells| search.allocation(&cells)));
    }
    let first: Vec<Vec<usize>> = grid.cells_below(&full).collect();
    let hit = parallel::find_first(first.len(), |j| search.from_first(&first[j], &full));
    Ok(hit.map(|(_, cells)| search.allocation(&cells)))
}

/// Depth-first enumeration of grid allocations, pruned by the requirement
/// that nobody may lose more than `eps`.
struct DominanceSearch<'a> {
    econ: &'a Economy,
    grid: &'a Grid,
    tables: &'a UtilityTables,
    /// Member flat indices per family.
    members: Vec<Vec<usize>>,
    /// Utility floors `u_i(x) - eps` and strict thresholds `u_i(x) + eps`.
    floor: Vec<f64>,
    ceiling: Vec<f64>,
}

impl<'a> DominanceSearch<'a> {
    fn new(
        econ: &'a Economy,
        x: &Allocation,
        grid: &'a Grid,
        tables: &'a UtilityTables,
        eps: f64,
    ) -> Self {
        let mut members = vec![Vec::new(); econ.family_count()];
        let mut floor = Vec::new();
        let mut ceiling = Vec::new();
        for (flat, (m, ind)) in econ.members().enumerate() {
            members[m.family].push(flat);
            let u = ind.utility.value(&x.bundles[m.family].0);
            floor.push(u - eps);
            ceiling.push(u + eps);
        }
        DominanceSearch {
            econ,
            grid,
            tables,
            members,
            floor,
            ceiling,
        }
    }

    fn acceptable(&self, f: usize, cell: usize) -> bool {
        self.members[f]
            .iter()
            .all(|&i| self.tables.values[i][cell] >= self.floor[i])
    }

    fn improves(&self, f: usize, cell: usize) -> bool {
        self.members[f]
            .iter()
            .any(|&i| self.tables.values[i][cell] > self.ceiling[i])
    }

    /// Later families can only shrink what remains; if one of them is not
    /// satisfied even by everything left, no completion works.
    fn remaining_viable(&self, from: usize, remaining: &[usize]) -> bool {
        let cell = self.grid.index(remaining);
        (from..self.econ.family_count()).all(|f| self.acceptable(f, cell))
    }

    fn from_first(&self, k: &[usize], full: &[usize]) -> Option<Vec<usize>> {
        let cell = self.grid.index(k);
        if !self.acceptable(0, cell) {
            return None;
        }
        let remaining: Vec<usize> = full.iter().zip(k).map(|(a, b)| a - b).collect();
        if !self.remaining_viable(1, &remaining) {
            return None;
        }
        let mut chosen = vec![cell];
        self.descend(1, &remaining, self.improves(0, cell), &mut chosen)
            .then_some(chosen)
    }

    fn descend(&self, f: usize, remaining: &[usize], improved: bool, chosen: &mut Vec<usize>) -> bool {
        let last = self.econ.family_count() - 1;
        if f == last {
            let cell = self.grid.index(remaining);
            if self.acceptable(f, cell) && (improved || self.improves(f, cell)) {
                chosen.push(cell);
                return true;
            }
            return false;
        }
        for k in self.grid.cells_below(remaining) {
            let cell = self.grid.index(&k);
            if !self.acceptable(f, cell) {
                continue;
            }
            let rest: Vec<usize> = remaining.iter().zip(&k).map(|(a, b)| a - b).collect();
            if !self.remaining_viable(f + 1, &rest) {
                continue;
            }
            chosen.push(cell);
            if self.descend(f + 1, &rest, improved || self.improves(f, cell), chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    fn complete(&self, prefix: &[usize], full: &[usize]) -> Option<Vec<usize>> {
        let mut chosen = prefix.to_vec();
        self.descend(prefix.len(), full, false, &mut chosen)
            .then_some(chosen)
    }

    fn allocation(&self, cells: &[usize]) -> Allocation {
        Allocation::new(
            cells
                .iter()
                .map(|c| Bundle(self.grid.bundle(&self.grid.coords(*c), &self.econ.endowment)))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{Family, Individual};
    use crate::utility::UtilityFunction;

    fn singles(alphas: &[f64], e: f64) -> Economy {
        Economy::new(
            2,
            vec![e, e],
            alphas
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    Family::new(
                        format!("f{k}"),
                        vec![Individual::new(format!("i{k}"), UtilityFunction::cobb_douglas2(*a))],
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn dominance_examples() {
        let econ = singles(&[0.5, 0.5], 2.0);
        let big = Allocation::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let small = Allocation::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(dominates(&econ, &big, &small, 1e-9).unwrap());
        assert!(!dominates(&econ, &small, &big, 1e-9).unwrap());
        assert!(!dominates(&econ, &big, &big, 1e-9).unwrap());
    }

    #[test]
    fn mrs_range_examples() {
        let econ = Economy::new(
            2,
            vec![3.0, 3.0],
            vec![
                Family::new(
                    "f",
                    vec![
                        Individual::new("h", UtilityFunction::cobb_douglas2(1.0 / 3.0)),
                        Individual::new("w", UtilityFunction::cobb_douglas2(2.0 / 3.0)),
                    ],
                ),
                Family::new(
                    "l",
                    vec![
                        Individual::new("a", UtilityFunction::linear(vec![1.0, 1.0])),
                        Individual::new("b", UtilityFunction::linear(vec![2.0, 1.0])),
                    ],
                ),
            ],
        )
        .unwrap();
        let r = mrs_range(&econ, "f", &Bundle::new(vec![1.0381, 1.0381])).unwrap();
        assert!((r.low - 0.5).abs() < 1e-12 && (r.high - 2.0).abs() < 1e-12);
        let r = mrs_range(&econ, "l", &Bundle::new(vec![0.3, 2.0])).unwrap();
        assert_eq!((r.low, r.high), (1.0, 2.0));
        assert!(matches!(
            mrs_range(&econ, "f", &Bundle::new(vec![0.0, 1.0])),
            Err(Error::BoundaryBundle { .. })
        ));
    }

    #[test]
    fn equal_split_of_distinct_singles_is_not_optimal() {
        let econ = singles(&[1.0 / 3.0, 2.0 / 3.0], 3.0);
        let verdict = pareto_test_mrs(&econ, &econ.equal_split(), 1e-9).unwrap();
        let gap = verdict.mrs_gap().unwrap();
        assert!((gap - 1.5).abs() < 1e-12);
        let dominator = pareto_oracle_grid(&econ, &econ.equal_split(), 8, 1e-9)
            .unwrap()
            .expect("grid dominator");
        assert!(dominates(&econ, &dominator, &econ.equal_split(), 1e-9).unwrap());
    }

    #[test]
    fn single_family_owning_everything_is_undominated() {
        let econ = singles(&[0.3], 2.0);
        let x = Allocation::from_rows(&[&[2.0, 2.0]]);
        assert_eq!(pareto_oracle_grid(&econ, &x, 16, 1e-9).unwrap(), None);
        let half = Allocation::from_rows(&[&[1.0, 2.0]]);
        assert!(pareto_oracle_grid(&econ, &half, 16, 1e-9).unwrap().is_some());
    }

    #[test]
    fn boundary_allocation_is_inapplicable() {
        let econ = singles(&[0.4, 0.6], 2.0);
        let x = Allocation::from_rows(&[&[0.0, 1.0], &[2.0, 1.0]]);
        assert!(matches!(
            pareto_test_mrs(&econ, &x, 1e-9).unwrap(),
            ParetoVerdict::Inapplicable { .. }
        ));
    }

    #[test]
    fn oracle_budget_is_enforced() {
        let econ = singles(&[0.2, 0.4, 0.6, 0.8], 2.0);
        let err = pareto_oracle_grid_with_budget(&econ, &econ.equal_split(), 64, 1e-9, 1000);
        assert!(matches!(err, Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn verdict_serializes_with_tag() {
        let v = ParetoVerdict::NotOptimal {
            mrs_gap: Some(1.5),
            dominator: None,
        };
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["verdict"], "not_optimal");
        assert_eq!(json["mrs_gap"], 1.5);
    }
}

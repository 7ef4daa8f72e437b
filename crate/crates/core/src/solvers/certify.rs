//! Grid certificates of non-existence.
//!
//! For a set of criteria the joint violation of an allocation is the largest
//! of its per-criterion gaps, each zero exactly when (or, for boundary
//! efficiency, whenever it cannot be ruled out that) the criterion holds. A
//! certificate reports the smallest joint violation over every exhaustive
//! allocation of a grid; a strictly positive value is numerical evidence
//! that no allocation meets all criteria at once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::economy::{Allocation, Bundle, Economy};
use crate::error::{Error, Result};
use crate::fairness::FairnessCriterion;
use crate::grid::{Grid, UtilityTables};
use crate::pareto::{pareto_test_mrs, ParetoVerdict, ORACLE_BUDGET};
use crate::parallel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Fairness(FairnessCriterion),
    ParetoOptimal,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Fairness(c) => c.fmt(f),
            Criterion::ParetoOptimal => f.write_str("pareto"),
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "pareto" | "po" | "pareto-optimal" => Ok(Criterion::ParetoOptimal),
            other => other.parse().map(Criterion::Fairness),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub grid_n: usize,
    pub min_joint_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub grid_n: usize,
    pub criteria: Vec<Criterion>,
    pub min_joint_violation: f64,
    pub argmin: Allocation,
    /// Results at `grid_n` and `2 grid_n`; the finer grid contains the
    /// coarser one, so the values never increase.
    pub history: Vec<HistoryEntry>,
}

/// Economy-level data shared by every joint-violation evaluation.
struct Context {
    family_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// `u_i(fair share)`.
    fair: Vec<f64>,
    /// `u_i(e)`; by homogeneity `u_i(t e) = t u_i(e)`.
    full: Vec<f64>,
    criteria: Vec<Criterion>,
    eps: f64,
}

impl Context {
    fn new(econ: &Economy, criteria: &[Criterion], eps: f64) -> Self {
        let fair_share = econ.fair_share();
        let mut members = vec![Vec::new(); econ.family_count()];
        let mut family_of = Vec::new();
        let mut fair = Vec::new();
        let mut full = Vec::new();
        for (flat, (m, ind)) in econ.members().enumerate() {
            members[m.family].push(flat);
            family_of.push(m.family);
            fair.push(ind.utility.value(&fair_share.0));
            full.push(econ.endowment_utility(m));
        }
        let mut criteria = criteria.to_vec();
        criteria.dedup();
        Context {
            family_of,
            members,
            fair,
            full,
            criteria,
            eps,
        }
    }

    /// `util(i, f) = u_i(x_f)`; `mrs(i)` is the MRS of `i` at its family's
    /// bundle; `interior` tells whether the MRS test applies.
    #[inline]
    fn joint<U, M>(&self, util: U, mrs: M, interior: bool) -> f64
    where
        U: Fn(usize, usize) -> f64,
        M: Fn(usize) -> f64,
    {
        let own = |i: usize| util(i, self.family_of[i]);
        let families = self.members.len();
        let mut worst: f64 = 0.0;
        for criterion in &self.criteria {
            let gap = match criterion {
                Criterion::Fairness(FairnessCriterion::IndividualFs) => (0..self.fair.len())
                    .map(|i| self.fair[i] - own(i))
                    .fold(0.0, f64::max),
                Criterion::Fairness(FairnessCriterion::FamilyFs) => self
                    .members
                    .iter()
                    .map(|ms| ms.iter().map(|&i| self.fair[i] - own(i)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max),
                Criterion::Fairness(FairnessCriterion::IndividualNe) => {
                    let mut g: f64 = 0.0;
                    for i in 0..self.fair.len() {
                        let o = own(i);
                        for f in 0..families {
                            g = g.max(util(i, f) - o);
                        }
                    }
                    g
                }
                Criterion::Fairness(FairnessCriterion::FamilyNe) => {
                    let mut g: f64 = 0.0;
                    for (f, ms) in self.members.iter().enumerate() {
                        for other in (0..families).filter(|o| *o != f) {
                            let m = ms
                                .iter()
                                .map(|&i| util(i, other) - own(i))
                                .fold(f64::INFINITY, f64::min);
                            g = g.max(m);
                        }
                    }
                    g
                }
                Criterion::Fairness(FairnessCriterion::IndividualEe) => self.individual_ee_gap(&own),
                Criterion::Fairness(FairnessCriterion::FamilyEe) => self.family_ee_gap(&own),
                Criterion::ParetoOptimal => {
                    if interior {
                        let mut max_low = f64::NEG_INFINITY;
                        let mut min_high = f64::INFINITY;
                        for ms in &self.members {
                            let (lo, hi) = ms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                                let v = mrs(i);
                                (lo.min(v), hi.max(v))
                            });
                            max_low = max_low.max(lo);
                            min_high = min_high.min(hi);
                        }
                        let gap = max_low - min_high;
                        if gap <= self.eps {
                            0.0
                        } else {
                            gap
                        }
                    } else {
                        // Boundary: only domination by the equal split is
                        // certain, so use its margin as a lower bound.
                        (0..self.fair.len())
                            .map(|i| self.fair[i] - own(i))
                            .fold(f64::INFINITY, f64::min)
                            .max(0.0)
                    }
                }
            };
            worst = worst.max(gap);
        }
        worst
    }

    /// `min_{t >= 0} max_i |u_i(x) - t u_i(e)|`, attained where a decreasing
    /// and an increasing branch cross.
    fn individual_ee_gap(&self, own: &impl Fn(usize) -> f64) -> f64 {
        let n = self.full.len();
        let value = |t: f64| (0..n).map(|i| (own(i) - t * self.full[i]).abs()).fold(0.0, f64::max);
        let mut best = value(0.0);
        for i in 0..n {
            for j in i..n {
                let t = (own(i) + own(j)) / (self.full[i] + self.full[j]);
                if t >= 0.0 {
                    best = best.min(value(t));
                }
            }
        }
        best
    }

    /// `min_{t >= 0} max_f v_f(t)` where `v_f` is the amount by which every
    /// member of `f` is above (or every member below) the reference `t e`.
    /// The objective is piecewise linear, so a minimizer lies at a crossing
    /// of two of the lines `+-(u_i(x) - t u_i(e))` or of one with zero.
    fn family_ee_gap(&self, own: &impl Fn(usize) -> f64) -> f64 {
        let n = self.full.len();
        let value = |t: f64| {
            self.members
                .iter()
                .map(|ms| {
                    let (mut above, mut below) = (f64::INFINITY, f64::INFINITY);
                    for &i in ms {
                        let d = own(i) - t * self.full[i];
                        above = above.min(d);
                        below = below.min(-d);
                    }
                    above.max(below).max(0.0)
                })
                .fold(0.0, f64::max)
        };
        let mut best = value(0.0);
        let mut consider = |t: f64| {
            if t.is_finite() && t >= 0.0 {
                best = best.min(value(t));
            }
        };
        for i in 0..n {
            consider(own(i) / self.full[i]);
            for j in (i + 1)..n {
                consider((own(i) + own(j)) / (self.full[i] + self.full[j]));
                consider((own(i) - own(j)) / (self.full[i] - self.full[j]));
            }
        }
        best
    }
}

/// Joint violation of `criteria` at an arbitrary allocation. The efficiency
/// part uses the MRS test when it applies (interior, exhaustive, two goods)
/// and the equal-split domination margin otherwise.
pub fn joint_violation(econ: &Economy, x: &Allocation, criteria: &[Criterion], eps: f64) -> Result<f64> {
    econ.check_shape(x)?;
    if econ.goods != 2 && criteria.contains(&Criterion::ParetoOptimal) {
        return Err(Error::TwoGoodsOnly("efficiency gap"));
    }
    let ctx = Context::new(econ, criteria, eps);
    let individuals: Vec<_> = econ.members().map(|(_, ind)| ind).collect();
    let interior = econ.goods == 2
        && !matches!(pareto_test_mrs(econ, x, eps)?, ParetoVerdict::Inapplicable { .. });
    Ok(ctx.joint(
        |i, f| individuals[i].utility.value(&x.bundles[f].0),
        |i| {
            individuals[i]
                .utility
                .mrs(&x.bundles[ctx.family_of[i]].0)
                .unwrap_or(f64::NAN)
        },
        interior,
    ))
}

/// Minimum joint violation over all exhaustive allocations on the grids
/// with `grid_n` and `2 grid_n` steps per good.
pub fn certify_nonexistence(
    econ: &Economy,
    criteria: &[Criterion],
    grid_n: usize,
    eps: f64,
) -> Result<GapCertificate> {
    if econ.goods != 2 {
        return Err(Error::TwoGoodsOnly("non-existence certificate"));
    }
    if criteria.is_empty() {
        return Err(Error::validation("certificate needs at least one criterion"));
    }
    let coarse = grid_minimum(econ, criteria, grid_n, eps)?;
    let fine = grid_minimum(econ, criteria, 2 * grid_n, eps)?;
    Ok(GapCertificate {
        grid_n,
        criteria: criteria.to_vec(),
        min_joint_violation: coarse.0,
        argmin: coarse.1,
        history: vec![
            HistoryEntry {
                grid_n,
                min_joint_violation: coarse.0,
            },
            HistoryEntry {
                grid_n: 2 * grid_n,
                min_joint_violation: fine.0,
            },
        ],
    })
}

struct GridSearch<'a> {
    ctx: Context,
    grid: Grid,
    tables: UtilityTables,
    /// MRS per individual per cell; NaN on the boundary.
    mrs: Vec<Vec<f64>>,
    interior: Vec<bool>,
    families: usize,
    econ: &'a Economy,
}

impl GridSearch<'_> {
    fn evaluate(&self, cells: &[usize]) -> f64 {
        let interior = cells.iter().all(|c| self.interior[*c]);
        self.ctx.joint(
            |i, f| self.tables.values[i][cells[f]],
            |i| self.mrs[i][cells[self.ctx.family_of[i]]],
            interior,
        )
    }

    fn descend(&self, f: usize, remaining: [usize; 2], cells: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
        if f + 1 == self.families {
            cells.push(self.grid.index(&remaining));
            let v = self.evaluate(cells);
            if v < best.0 {
                *best = (v, cells.clone());
            }
            cells.pop();
            return;
        }
        for a in 0..=remaining[0] {
            for b in 0..=remaining[1] {
                cells.push(self.grid.index(&[a, b]));
                self.descend(f + 1, [remaining[0] - a, remaining[1] - b], cells, best);
                cells.pop();
            }
        }
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

fn grid_minimum(econ: &Economy, criteria: &[Criterion], n: usize, eps: f64) -> Result<(f64, Allocation)> {
    let grid = Grid::new(n, 2)?;
    let size = grid.allocation_count(econ.family_count());
    if size > ORACLE_BUDGET {
        return Err(Error::BudgetExceeded {
            size,
            budget: ORACLE_BUDGET,
        });
    }
    let tables = UtilityTables::new(econ, &grid);
    let mut mrs = Vec::new();
    for (_, ind) in econ.members() {
        mrs.push(
            (0..grid.cells)
                .map(|c| {
                    let b = grid.bundle(&grid.coords(c), &econ.endowment);
                    ind.utility.mrs(&b).unwrap_or(f64::NAN)
                })
                .collect::<Vec<_>>(),
        );
    }
    let interior = (0..grid.cells)
        .map(|c| grid.coords(c).iter().all(|k| *k > 0))
        .collect();
    let search = GridSearch {
        ctx: Context::new(econ, criteria, eps),
        grid,
        tables,
        mrs,
        interior,
        families: econ.family_count(),
        econ,
    };

    if search.families == 1 {
        let cells = vec![search.grid.index(&[n, n])];
        return Ok((search.evaluate(&cells), search.allocation(&cells)));
    }
    let first: Vec<[usize; 2]> = (0..=n).flat_map(|a| (0..=n).map(move |b| [a, b])).collect();
    let partial = parallel::map(first.len(), |j| {
        let [a, b] = first[j];
        let mut best = (f64::INFINITY, Vec::new());
        let mut cells = vec![search.grid.index(&[a, b])];
        search.descend(1, [n - a, n - b], &mut cells, &mut best);
        best
    });
    // Index-ordered reduction: the earliest allocation wins ties.
    let (value, cells) = partial
        .into_iter()
        .fold((f64::INFINITY, Vec::new()), |acc, p| if p.0 < acc.0 { p } else { acc });
    Ok((value, search.allocation(&cells)))
}

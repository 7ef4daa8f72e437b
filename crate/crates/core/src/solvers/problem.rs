//! Allocation programs for the barrier method.
//!
//! The decision vector holds the bundles of all families but the last,
//! followed (optionally) by an epigraph level `s`; the last family receives
//! whatever remains of the endowment, so every iterate exhausts it. All
//! constraints are concave functions of a single family's bundle plus a
//! multiple of `s`.

use nalgebra::{DMatrix, DVector};

use super::barrier::{BarrierProblem, Eval};
use crate::economy::{Allocation, Bundle, Economy};

/// A concave function of one family's bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum FamilyFn {
    /// Quantity of one good.
    Coordinate(usize),
    /// Normalized utility of the member at this index within the family.
    Normalized(usize),
    /// Mean normalized utility of the family's members.
    NormalizedMean,
    /// `scale * sum_i log(normalized_i + shift)`.
    LogShifted { shift: f64, scale: f64 },
    /// Sum of the members' raw utilities.
    RawSum,
}

pub(crate) struct Local {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl FamilyFn {
    /// Value and (optionally) derivatives at `x`; `None` outside the domain
    /// of a logarithm.
    pub fn evaluate(self, econ: &Economy, f: usize, x: &[f64], derivatives: bool) -> Option<Local> {
        let g = x.len();
        let family = &econ.families[f];
        let inv_f = 1.0 / econ.family_count() as f64;
        let mut out = Local {
            value: 0.0,
            grad: DVector::zeros(if derivatives { g } else { 0 }),
            hess: DMatrix::zeros(if derivatives { g } else { 0 }, if derivatives { g } else { 0 }),
        };
        let normalized = |k: usize| {
            let u = &family.members[k].utility;
            let ue = econ.endowment_utility(crate::economy::Member { family: f, index: k });
            (u, ue, u.value(x) / ue - inv_f)
        };
        match self {
            FamilyFn::Coordinate(c) => {
                out.value = x[c];
                if derivatives {
                    out.grad[c] = 1.0;
                }
            }
            FamilyFn::Normalized(k) => {
                let (u, ue, v) = normalized(k);
                out.value = v;
                if derivatives {
                    out.grad = u.gradient(x) / ue;
                    out.hess = u.hessian(x) / ue;
                }
            }
            FamilyFn::NormalizedMean => {
                let w = 1.0 / family.size() as f64;
                for k in 0..family.size() {
                    let (u, ue, v) = normalized(k);
                    out.value += w * v;
                    if derivatives {
                        out.grad += u.gradient(x) * (w / ue);
                        out.hess += u.hessian(x) * (w / ue);
                    }
                }
            }
            FamilyFn::LogShifted { shift, scale } => {
                for k in 0..family.size() {
                    let (u, ue, v) = normalized(k);
                    let a = v + shift;
                    if a <= 0.0 {
                        return None;
                    }
                    out.value += scale * a.ln();
                    if derivatives {
                        let gk = u.gradient(x) / ue;
                        out.hess += (u.hessian(x) / ue) * (scale / a) - (&gk * gk.transpose()) * (scale / (a * a));
                        out.grad += gk * (scale / a);
                    }
                }
            }
            FamilyFn::RawSum => {
                for m in &family.members {
                    out.value += m.utility.value(x);
                    if derivatives {
                        out.grad += m.utility.gradient(x);
                        out.hess += m.utility.hessian(x);
                    }
                }
            }
        }
        Some(out)
    }
}

/// `func(x_family) + level_coef * s - offset > 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Constraint {
    pub family: usize,
    pub func: FamilyFn,
    pub level_coef: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    /// Maximize the epigraph level `s`.
    Level,
    /// Maximize the sum over families of the raw member utility sums.
    Welfare,
}

pub(crate) struct AllocationProblem<'a> {
    pub econ: &'a Economy,
    pub constraints: Vec<Constraint>,
    pub goal: Goal,
}

impl<'a> AllocationProblem<'a> {
    pub fn new(econ: &'a Economy, goal: Goal) -> Self {
        let mut constraints = Vec::new();
        for f in 0..econ.family_count() {
            for g in 0..econ.goods {
                constraints.push(Constraint {
                    family: f,
                    func: FamilyFn::Coordinate(g),
                    level_coef: 0.0,
                    offset: 0.0,
                });
            }
        }
        AllocationProblem {
            econ,
            constraints,
            goal,
        }
    }

    fn free_families(&self) -> usize {
        self.econ.family_count() - 1
    }

    fn level_index(&self) -> Option<usize> {
        (self.goal == Goal::Level).then(|| self.free_families() * self.econ.goods)
    }

    pub fn bundles(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let g = self.econ.goods;
        let free = self.free_families();
        let mut bundles: Vec<Vec<f64>> = (0..free).map(|f| z[f * g..(f + 1) * g].to_vec()).collect();
        let last = (0..g)
            .map(|k| self.econ.endowment[k] - bundles.iter().map(|b| b[k]).sum::<f64>())
            .collect();
        bundles.push(last);
        bundles
    }

    pub fn allocation(&self, z: &[f64]) -> Allocation {
        Allocation::new(self.bundles(z).into_iter().map(Bundle).collect())
    }

    pub fn level(&self, z: &[f64]) -> Option<f64> {
        self.level_index().map(|i| z[i])
    }

    /// Encodes an allocation (and level) as a decision vector.
    pub fn encode(&self, x: &Allocation, level: f64) -> Vec<f64> {
        let mut z: Vec<f64> = x.bundles[..self.free_families()]
            .iter()
            .flat_map(|b| b.0.iter().copied())
            .collect();
        if self.goal == Goal::Level {
            z.push(level);
        }
        z
    }

    /// Embeds a family-local gradient (plus a level coefficient) into the
    /// decision space.
    fn lift(&self, f: usize, local: &DVector<f64>, level: f64, n: usize) -> DVector<f64> {
        let g = self.econ.goods;
        let mut w = DVector::zeros(n);
        if f < self.free_families() {
            w.rows_mut(f * g, g).copy_from(local);
        } else {
            for k in 0..self.free_families() {
                w.rows_mut(k * g, g).copy_from(&(-local));
            }
        }
        if let Some(li) = self.level_index() {
            w[li] = level;
        }
        w
    }

    fn add_lifted_hessian(&self, f: usize, local: &DMatrix<f64>, coef: f64, out: &mut DMatrix<f64>) {
        let g = self.econ.goods;
        let free = self.free_families();
        let blocks: Vec<usize> = if f < free { vec![f] } else { (0..free).collect() };
        // The last family's bundle is affine with coefficient -I in every
        // block, so its Hessian appears in every block pair with sign (+).
        for &a in &blocks {
            for &b in &blocks {
                let mut view = out.view_mut((a * g, b * g), (g, g));
                view += local * coef;
            }
        }
    }
}

impl BarrierProblem for AllocationProblem<'_> {
    fn dim(&self) -> usize {
        self.free_families() * self.econ.goods + usize::from(self.goal == Goal::Level)
    }

    fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    fn evaluate(&self, z: &[f64], t: f64, derivatives: bool) -> Option<Eval> {
        let n = self.dim();
        let bundles = self.bundles(z);
        if bundles.iter().flatten().any(|v| *v <= 0.0 || !v.is_finite()) {
            return None;
        }
        let s = self.level(z).unwrap_or(0.0);
        let mut ev = Eval::zeros(if derivatives { n } else { 0 });
        match self.goal {
            Goal::Level => {
                ev.value = -t * s;
                if derivatives {
                    ev.grad[n - 1] = -t;
                }
            }
            Goal::Welfare => {
                for (f, b) in bundles.iter().enumerate() {
                    let local = FamilyFn::RawSum.evaluate(self.econ, f, b, derivatives)?;
                    ev.value -= t * local.value;
                    if derivatives {
                        ev.grad -= self.lift(f, &local.grad, 0.0, n) * t;
                        self.add_lifted_hessian(f, &local.hess, -t, &mut ev.hess);
                    }
                }
            }
        }
        for c in &self.constraints {
            let local = c.func.evaluate(self.econ, c.family, &bundles[c.family], derivatives)?;
            let value = local.value + c.level_coef * s - c.offset;
            if value <= 0.0 || !value.is_finite() {
                return None;
            }
            ev.value -= value.ln();
            if derivatives {
                let w = self.lift(c.family, &local.grad, c.level_coef, n);
                ev.grad -= &w / value;
                ev.hess += (&w * w.transpose()) / (value * value);
                self.add_lifted_hessian(c.family, &local.hess, -1.0 / value, &mut ev.hess);
            }
        }
        Some(ev)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{Family, Individual};
    use crate::utility::UtilityFunction;

    fn economy() -> Economy {
        Economy::new(
            2,
            vec![3.0, 2.0],
            vec![
                Family::new(
                    "a",
                    vec![
                        Individual::new("a1", UtilityFunction::cobb_douglas2(0.3)),
                        Individual::new("a2", UtilityFunction::ces(vec![0.6, 0.4], -0.5)),
                    ],
                ),
                Family::new("b", vec![Individual::new("b1", UtilityFunction::linear(vec![1.0, 2.0]))]),
                Family::new("c", vec![Individual::new("c1", UtilityFunction::cobb_douglas2(0.7))]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn barrier_derivatives_match_finite_differences() {
        let econ = economy();
        let mut problem = AllocationProblem::new(&econ, Goal::Level);
        for (family, func) in [
            (0, FamilyFn::Normalized(1)),
            (2, FamilyFn::LogShifted { shift: 0.5, scale: 1.0 }),
            (0, FamilyFn::NormalizedMean),
            (1, FamilyFn::Normalized(0)),
        ] {
            problem.constraints.push(Constraint {
                family,
                func,
                level_coef: -1.0,
                offset: -1.0,
            });
        }
        let z = vec![1.1, 0.6, 0.9, 0.7, -0.2];
        let t = 3.0;
        let ev = problem.evaluate(&z, t, true).unwrap();
        let h = 1e-6;
        for k in 0..z.len() {
            let mut hi = z.clone();
            let mut lo = z.clone();
            hi[k] += h;
            lo[k] -= h;
            let fd = (problem.evaluate(&hi, t, false).unwrap().value
                - problem.evaluate(&lo, t, false).unwrap().value)
                / (2.0 * h);
            assert!((ev.grad[k] - fd).abs() < 1e-5 * (1.0 + fd.abs()), "grad {k}");
            let dg = (problem.evaluate(&hi, t, true).unwrap().grad
                - problem.evaluate(&lo, t, true).unwrap().grad)
                / (2.0 * h);
            for j in 0..z.len() {
                assert!(
                    (ev.hess[(j, k)] - dg[j]).abs() < 1e-4 * (1.0 + dg[j].abs()),
                    "hess {j},{k}: {} vs {}",
                    ev.hess[(j, k)],
                    dg[j]
                );
            }
        }
    }

    #[test]
    fn welfare_derivatives_match_finite_differences() {
        let econ = economy();
        let problem = AllocationProblem::new(&econ, Goal::Welfare);
        let z = vec![1.1, 0.6, 0.9, 0.7];
        let ev = problem.evaluate(&z, 2.0, true).unwrap();
        let h = 1e-6;
        for k in 0..z.len() {
            let mut hi = z.clone();
            let mut lo = z.clone();
            hi[k] += h;
            lo[k] -= h;
            let fd = (problem.evaluate(&hi, 2.0, false).unwrap().value
                - problem.evaluate(&lo, 2.0, false).unwrap().value)
                / (2.0 * h);
            assert!((ev.grad[k] - fd).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn last_family_gets_the_remainder() {
        let econ = economy();
        let problem = AllocationProblem::new(&econ, Goal::Level);
        let x = problem.allocation(&[1.0, 0.5, 1.5, 0.5, 0.0]);
        assert_eq!(x.bundles[2].0, vec![0.5, 1.0]);
        assert_eq!(problem.encode(&x, 0.0), vec![1.0, 0.5, 1.5, 0.5, 0.0]);
    }
}

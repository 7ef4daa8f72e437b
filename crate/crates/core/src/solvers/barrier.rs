//! A small dense log-barrier interior-point method.
//!
//! Problems maximize a concave objective subject to concave constraints
//! `c_j(z) > 0`. For a barrier weight `t` the centering step minimizes
//! `-t * objective(z) - sum_j log c_j(z)` with damped Newton steps and a
//! backtracking line search that never leaves the strict interior; `t` then
//! grows geometrically until the duality-gap bound `m / t` is small.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Centering stops once half the squared Newton decrement falls below this.
const NEWTON_TOL: f64 = 1e-10;
/// Armijo sufficient-decrease fraction.
const ARMIJO: f64 = 0.25;
/// Smallest line-search step before a centering pass is declared stalled.
const MIN_STEP: f64 = 1e-14;
/// Newton steps allowed per centering pass.
const STEPS_PER_CENTERING: usize = 200;

pub(crate) struct Eval {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Eval {
    pub fn zeros(n: usize) -> Self {
        Eval {
            value: 0.0,
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
        }
    }
}

pub(crate) trait BarrierProblem {
    fn dim(&self) -> usize;
    fn constraint_count(&self) -> usize;
    /// `-t * objective(z) - sum_j log c_j(z)`, with gradient and Hessian when
    /// `derivatives` is set; `None` outside the strict interior.
    fn evaluate(&self, z: &[f64], t: f64, derivatives: bool) -> Option<Eval>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierSettings {
    pub gap_tolerance: f64,
    pub growth: f64,
    pub max_newton_steps: usize,
    pub initial_t: f64,
    /// Reported in non-convergence errors.
    pub stage: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome {
    pub z: Vec<f64>,
    pub newton_steps: usize,
}

pub(crate) fn solve<P: BarrierProblem>(
    problem: &P,
    z0: Vec<f64>,
    settings: &BarrierSettings,
) -> Result<BarrierOutcome> {
    let m = problem.constraint_count().max(1) as f64;
    let mut z = z0;
    let mut t = settings.initial_t;
    if problem.evaluate(&z, t, false).is_none() {
        return Err(Error::NoInterior(format!(
            "stage {} start point violates a constraint",
            settings.stage
        )));
    }
    let mut steps = 0;
    loop {
        for _ in 0..STEPS_PER_CENTERING {
            let ev = problem
                .evaluate(&z, t, true)
                .expect("iterate stays strictly feasible");
            let Some(dir) = newton_direction(&ev.hess, &ev.grad) else {
                break;
            };
            let slope = ev.grad.dot(&dir);
            if -slope / 2.0 <= NEWTON_TOL {
                break;
            }
            steps += 1;
            if steps > settings.max_newton_steps {
                return Err(Error::NonConvergence {
                    stage: settings.stage,
                    iterations: steps,
                    gap: m / t,
                });
            }
            let mut step = 1.0;
            let mut accepted = false;
            while step >= MIN_STEP {
                let trial: Vec<f64> = z.iter().zip(dir.iter()).map(|(a, d)| a + step * d).collect();
                if let Some(v) = problem.evaluate(&trial, t, false) {
                    if v.value <= ev.value + ARMIJO * step * slope {
                        z = trial;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                // Rounding limits further progress at this barrier weight.
                break;
            }
        }
        let gap = m / t;
        if gap <= settings.gap_tolerance {
            return Ok(BarrierOutcome {
                z,
                newton_steps: steps,
            });
        }
        t *= settings.growth;
    }
}

/// Solves `H d = -g` by Cholesky, adding a growing ridge when `H` is not
/// numerically positive definite.
fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = hess.diagonal().iter().fold(0.0f64, |a, d| a.max(d.abs())).max(1e-300);
    let mut ridge = 0.0;
    for _ in 0..30 {
        let mut h = hess.clone();
        if ridge > 0.0 {
            for i in 0..h.nrows() {
                h[(i, i)] += ridge;
            }
        }
        if let Some(chol) = h.cholesky() {
            let dir = chol.solve(&(-grad));
            if dir.iter().all(|v| v.is_finite()) {
                return Some(dir);
            }
        }
        ridge = if ridge == 0.0 { scale * 1e-14 } else { ridge * 100.0 };
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Maximize `x + y` subject to `1 - x^2 - y^2 > 0`.
    struct Disc;

    impl BarrierProblem for Disc {
        fn dim(&self) -> usize {
            2
        }
        fn constraint_count(&self) -> usize {
            1
        }
        fn evaluate(&self, z: &[f64], t: f64, derivatives: bool) -> Option<Eval> {
            let c = 1.0 - z[0] * z[0] - z[1] * z[1];
            if c <= 0.0 {
                return None;
            }
            let mut ev = Eval::zeros(2);
            ev.value = -t * (z[0] + z[1]) - c.ln();
            if derivatives {
                let gc = DVector::from_vec(vec![-2.0 * z[0], -2.0 * z[1]]);
                ev.grad = DVector::from_element(2, -t) - &gc / c;
                ev.hess = &gc * gc.transpose() / (c * c) + DMatrix::identity(2, 2) * (2.0 / c);
            }
            Some(ev)
        }
    }

    #[test]
    fn solves_linear_objective_over_disc() {
        let settings = BarrierSettings {
            gap_tolerance: 1e-10,
            growth: 8.0,
            max_newton_steps: 10_000,
            initial_t: 1.0,
            stage: 1,
        };
        let out = solve(&Disc, vec![0.0, 0.0], &settings).unwrap();
        let target = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.z[0] - target).abs() < 1e-6, "{:?}", out.z);
        assert!((out.z[1] - target).abs() < 1e-6);
    }

    #[test]
    fn infeasible_start_is_reported() {
        let settings = BarrierSettings {
            gap_tolerance: 1e-10,
            growth: 8.0,
            max_newton_steps: 100,
            initial_t: 1.0,
            stage: 3,
        };
        assert!(matches!(
            solve(&Disc, vec![2.0, 0.0], &settings),
            Err(Error::NoInterior(_))
        ));
    }
}

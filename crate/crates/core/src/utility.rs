//! Parametric utility functions.
//!
//! All three variants are continuous, strictly monotonic and homogeneous of
//! degree one on the non-negative orthant. Gradients and Hessians are only
//! meaningful on strictly positive bundles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityFunction {
    /// `prod_g b_g^{w_g}` with weights in (0, 1] summing to one.
    CobbDouglas { weights: Vec<f64> },
    /// `sum_g c_g b_g` with strictly positive coefficients.
    Linear { coefficients: Vec<f64> },
    /// `(sum_g w_g b_g^rho)^{1/rho}` with `rho < 1`, `rho != 0`.
    Ces { weights: Vec<f64>, rho: f64 },
}

impl UtilityFunction {
    pub fn cobb_douglas(weights: impl Into<Vec<f64>>) -> Self {
        UtilityFunction::CobbDouglas {
            weights: weights.into(),
        }
    }

    /// Two-good Cobb-Douglas `y^alpha z^(1-alpha)`.
    pub fn cobb_douglas2(alpha: f64) -> Self {
        UtilityFunction::CobbDouglas {
            weights: vec![alpha, 1.0 - alpha],
        }
    }

    pub fn linear(coefficients: impl Into<Vec<f64>>) -> Self {
        UtilityFunction::Linear {
            coefficients: coefficients.into(),
        }
    }

    pub fn ces(weights: impl Into<Vec<f64>>, rho: f64) -> Self {
        UtilityFunction::Ces {
            weights: weights.into(),
            rho,
        }
    }

    pub fn goods(&self) -> usize {
        match self {
            UtilityFunction::CobbDouglas { weights } => weights.len(),
            UtilityFunction::Linear { coefficients } => coefficients.len(),
            UtilityFunction::Ces { weights, .. } => weights.len(),
        }
    }

    /// Strict convexity of the represented preference. Linear preferences
    /// are convex but not strictly so.
    pub fn is_strictly_convex(&self) -> bool {
        !matches!(self, UtilityFunction::Linear { .. })
    }

    pub fn validate(&self, goods: usize) -> Result<()> {
        if self.goods() != goods {
            return Err(Error::Dimension {
                expected: goods,
                actual: self.goods(),
            });
        }
        match self {
            UtilityFunction::CobbDouglas { weights } => check_weights("cobb_douglas", weights),
            UtilityFunction::Linear { coefficients } => {
                if coefficients.iter().all(|c| c.is_finite() && *c > 0.0) {
                    Ok(())
                } else {
                    Err(Error::validation(
                        "linear coefficients must be finite and strictly positive",
                    ))
                }
            }
            UtilityFunction::Ces { weights, rho } => {
                check_weights("ces", weights)?;
                if !rho.is_finite() || *rho >= 1.0 || *rho == 0.0 {
                    return Err(Error::validation(format!(
                        "ces rho must be finite, below 1 and non-zero (got {rho})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Utility of a bundle. The caller guarantees matching dimension.
    pub fn value(&self, b: &[f64]) -> f64 {
        match self {
            UtilityFunction::CobbDouglas { weights } => weights
                .iter()
                .zip(b)
                .map(|(w, x)| x.max(0.0).powf(*w))
                .product(),
            UtilityFunction::Linear { coefficients } => {
                coefficients.iter().zip(b).map(|(c, x)| c * x).sum()
            }
            UtilityFunction::Ces { weights, rho } => {
                let s: f64 = weights
                    .iter()
                    .zip(b)
                    .map(|(w, x)| w * x.max(0.0).powf(*rho))
                    .sum();
                if s.is_infinite() {
                    // rho < 0 with a zero coordinate: continuous extension.
                    0.0
                } else {
                    s.powf(1.0 / rho)
                }
            }
        }
    }

    pub fn gradient(&self, b: &[f64]) -> DVector<f64> {
        let g = b.len();
        match self {
            UtilityFunction::CobbDouglas { weights } => {
                let u = self.value(b);
                DVector::from_fn(g, |k, _| weights[k] * u / b[k])
            }
            UtilityFunction::Linear { coefficients } => DVector::from_column_slice(coefficients),
            UtilityFunction::Ces { weights, rho } => {
                let (u, s, a) = ces_parts(weights, *rho, b);
                DVector::from_fn(g, |k, _| u * a[k] / s)
            }
        }
    }

    pub fn hessian(&self, b: &[f64]) -> DMatrix<f64> {
        let g = b.len();
        match self {
            UtilityFunction::CobbDouglas { weights } => {
                let u = self.value(b);
                DMatrix::from_fn(g, g, |i, j| {
                    let diag = if i == j { weights[i] } else { 0.0 };
                    u * (weights[i] * weights[j] - diag) / (b[i] * b[j])
                })
            }
            UtilityFunction::Linear { .. } => DMatrix::zeros(g, g),
            UtilityFunction::Ces { weights, rho } => {
                let (u, s, a) = ces_parts(weights, *rho, b);
                DMatrix::from_fn(g, g, |i, j| {
                    let mut h = u * (1.0 - rho) * a[i] * a[j] / (s * s);
                    if i == j {
                        h += u * (rho - 1.0) * weights[i] * b[i].powf(rho - 2.0) / s;
                    }
                    h
                })
            }
        }
    }

    /// Marginal rate of substitution of good 0 for good 1.
    pub fn mrs(&self, b: &[f64]) -> Result<f64> {
        if b.len() != 2 || self.goods() != 2 {
            return Err(Error::TwoGoodsOnly("marginal rate of substitution"));
        }
        if !matches!(self, UtilityFunction::Linear { .. }) {
            if let Some((k, v)) = b.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                return Err(Error::BoundaryBundle {
                    coordinate: k,
                    value: *v,
                });
            }
        }
        Ok(match self {
            UtilityFunction::CobbDouglas { weights } => (weights[0] / weights[1]) * (b[1] / b[0]),
            UtilityFunction::Linear { coefficients } => coefficients[0] / coefficients[1],
            UtilityFunction::Ces { weights, rho } => {
                (weights[0] / weights[1]) * (b[0] / b[1]).powf(rho - 1.0)
            }
        })
    }
}

fn check_weights(kind: &str, weights: &[f64]) -> Result<()> {
    if weights
        .iter()
        .any(|w| !w.is_finite() || *w <= 0.0 || *w > 1.0)
    {
        return Err(Error::validation(format!(
            "{kind} weights must lie in (0, 1]"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::validation(format!(
            "{kind} weights must sum to 1 (got {sum})"
        )));
    }
    Ok(())
}

fn ces_parts(weights: &[f64], rho: f64, b: &[f64]) -> (f64, f64, Vec<f64>) {
    let s: f64 = weights.iter().zip(b).map(|(w, x)| w * x.powf(rho)).sum();
    let u = s.powf(1.0 / rho);
    let a = weights
        .iter()
        .zip(b)
        .map(|(w, x)| w * x.powf(rho - 1.0))
        .collect();
    (u, s, a)
}

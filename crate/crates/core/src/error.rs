use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid economy: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected} goods, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("allocation is infeasible: good {good} total {total} exceeds endowment {endowment}")]
    Infeasible {
        good: usize,
        total: f64,
        endowment: f64,
    },

    #[error("bundle is on the boundary of the consumption set (coordinate {coordinate} = {value})")]
    BoundaryBundle { coordinate: usize, value: f64 },

    #[error("{0} requires exactly two goods")]
    TwoGoodsOnly(&'static str),

    #[error("criterion {0} needs a reference bundle")]
    MissingReference(&'static str),

    #[error("utility is not increasing along the endowment ray")]
    NonMonotoneOnRay,

    #[error("grid of {size} points exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("solver did not converge in stage {stage} after {iterations} iterations (gap {gap:e})")]
    NonConvergence {
        stage: usize,
        iterations: usize,
        gap: f64,
    },

    #[error("no strictly feasible starting point: {0}")]
    NoInterior(String),

    #[error("family objectives disagree at the leximin optimum: spread {spread:e} exceeds {tolerance:e}")]
    UnequalFamilyObjectives { spread: f64, tolerance: f64 },

    #[error("Newton iteration failed to converge (residual {residual:e})")]
    NewtonDivergence { residual: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

//! Constructive solvers and non-existence certificates.
//!
//! Every optimization stage is a concave program over allocations solved by
//! a log-barrier interior-point method; see [`leximin`] for the objectives
//! and [`certify`] for grid certificates.

pub(crate) mod barrier;
pub mod certify;
pub mod leximin;
mod problem;

pub use certify::{certify_nonexistence, joint_violation, Criterion, GapCertificate, HistoryEntry};
pub use leximin::{
    family_ee_solve, family_minima, fs_welfare_max, leximin, maximin, normalized_profile,
    objective_values, FamilyEeSolution, ObjectiveSet, Region, SolveConfig, SolveOutcome, StageLog,
};

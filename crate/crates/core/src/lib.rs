//! Fair and Pareto-efficient division of divisible goods among families.
//!
//! A family is a group of individuals who consume one shared bundle while
//! holding different preferences. The crate provides
//!
//! - the economy model with Cobb-Douglas, linear and CES utilities
//!   ([`economy`], [`utility`]);
//! - the incomplete family preference relation and the fair-share, no-envy
//!   and egalitarian-equivalence predicates at individual and family level
//!   ([`fairness`]);
//! - Pareto dominance, the two-good marginal-rate-of-substitution test and an
//!   exhaustive grid oracle ([`pareto`]);
//! - interior-point leximin, welfare and family-EE solvers together with grid
//!   non-existence certificates ([`solvers`]);
//! - market-equilibrium verification and tatonnement ([`equilibrium`]);
//! - a registry of pinned reproduction scenarios ([`scenarios`]).

pub mod economy;
pub mod equilibrium;
pub mod error;
pub mod fairness;
mod grid;
mod parallel;
pub mod pareto;
pub mod scenarios;
pub mod solvers;
pub mod utility;

pub use economy::{
    check_feasible, evaluate_utility, fair_share, mrs, normalized_utility, parse_economy,
    Allocation, Bundle, Economy, Family, Feasibility, Individual, Member,
};
pub use equilibrium::{
    restricted_equilibrium, tatonnement, verify_equilibrium, EquilibriumConfig,
    EquilibriumKind, EquilibriumReport, EquilibriumTriple, ResponseRule, TatonnementOutcome,
};
pub use error::{Error, Result};
pub use fairness::{
    check_family_ee, check_fairness, check_individual_ee, compare_family,
    democratic_ne_fraction, find_ee_reference, Against, EeMode, FairnessCriterion,
    FairnessReport, FamilyRelation, Witness,
};
pub use pareto::{
    dominates, mrs_range, pareto_oracle_grid, pareto_test_mrs, MrsRange, ParetoVerdict,
    ORACLE_BUDGET,
};
pub use solvers::{
    certify_nonexistence, family_ee_solve, fs_welfare_max, joint_violation, leximin, maximin,
    Criterion, FamilyEeSolution, GapCertificate, ObjectiveSet, Region, SolveConfig,
    SolveOutcome, StageLog,
};
pub use utility::UtilityFunction;

//! Maximin, leximin, fair-share-constrained welfare maximization and the
//! family-EE construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::barrier::{self, BarrierSettings};
use super::problem::{AllocationProblem, Constraint, FamilyFn, Goal};
use crate::economy::{Allocation, Bundle, Economy, Member};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveSet {
    /// One objective per individual: normalized utility.
    IndividualNormalized,
    /// One per family: product of the members' normalized utilities.
    FamilyProduct,
    /// One per family: geometric mean of the members' normalized utilities.
    FamilyGeometricMean,
    /// One per family: mean of the members' normalized utilities.
    FamilySum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    All,
    /// Every individual's normalized utility is at least `-tolerance`.
    IndividualFsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Slack `tau` for frozen objectives and for the fair-share region, and
    /// the band within which objectives are frozen together.
    pub tolerance: f64,
    /// Bound on the duality gap `m / t` at which a stage stops.
    pub gap_tolerance: f64,
    /// Newton steps allowed per stage.
    pub max_iterations: usize,
    /// Factor applied to the barrier weight between centering passes.
    pub barrier_growth: f64,
    /// Shift added to normalized utilities inside logarithmic (product and
    /// geometric-mean) objectives. Keeping it equal to `tolerance` makes
    /// the shifted objective vanish exactly at the edge of the fair-share
    /// region, so families cannot hide a member on that edge behind a
    /// healthy geometric mean.
    pub log_shift: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tolerance: 1e-7,
            gap_tolerance: 1e-10,
            max_iterations: 20_000,
            barrier_growth: 8.0,
            log_shift: 1e-7,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.tolerance) || !positive(self.gap_tolerance) {
            return Err(Error::validation("solver tolerances must be positive"));
        }
        if self.barrier_growth <= 1.0 || self.max_iterations == 0 {
            return Err(Error::validation(
                "barrier growth must exceed 1 and the iteration cap must be positive",
            ));
        }
        if self.log_shift.is_nan() || self.log_shift < self.tolerance {
            return Err(Error::validation("log shift must be at least the tolerance"));
        }
        Ok(())
    }

    fn settings(&self, stage: usize) -> BarrierSettings {
        BarrierSettings {
            gap_tolerance: self.gap_tolerance,
            growth: self.barrier_growth,
            max_newton_steps: self.max_iterations,
            initial_t: 1.0,
            stage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub stage: usize,
    /// Minimum over the stage's free objectives at its output.
    pub value: f64,
    /// Objectives frozen at the end of this stage.
    pub frozen: Vec<usize>,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub allocation: Allocation,
    pub objectives: Vec<f64>,
    pub stages: Vec<StageLog>,
}

/// Objective `k` as a family-local function, in the "level" units the
/// barrier works in (logarithmic for product and geometric mean).
struct ObjectiveSpec {
    family: usize,
    func: FamilyFn,
}

fn objective_specs(econ: &Economy, set: ObjectiveSet, cfg: &SolveConfig) -> Vec<ObjectiveSpec> {
    match set {
        ObjectiveSet::IndividualNormalized => econ
            .members()
            .map(|(m, _)| ObjectiveSpec {
                family: m.family,
                func: FamilyFn::Normalized(m.index),
            })
            .collect(),
        _ => econ
            .families
            .iter()
            .enumerate()
            .map(|(f, family)| ObjectiveSpec {
                family: f,
                func: match set {
                    ObjectiveSet::FamilySum => FamilyFn::NormalizedMean,
                    ObjectiveSet::FamilyProduct => FamilyFn::LogShifted {
                        shift: cfg.log_shift,
                        scale: 1.0,
                    },
                    _ => FamilyFn::LogShifted {
                        shift: cfg.log_shift,
                        scale: 1.0 / family.size() as f64,
                    },
                },
            })
            .collect(),
    }
}

/// Converts an objective value to barrier level units; `None` when the
/// value lies below the domain of the logarithm.
fn to_level(set: ObjectiveSet, value: f64, cfg: &SolveConfig) -> Option<f64> {
    match set {
        ObjectiveSet::IndividualNormalized | ObjectiveSet::FamilySum => Some(value),
        ObjectiveSet::FamilyGeometricMean => {
            let a = value + cfg.log_shift;
            (a > 0.0).then(|| a.ln())
        }
        ObjectiveSet::FamilyProduct => (value > 0.0).then(|| value.ln()),
    }
}

fn from_level(set: ObjectiveSet, level: f64, cfg: &SolveConfig) -> f64 {
    match set {
        ObjectiveSet::IndividualNormalized | ObjectiveSet::FamilySum => level,
        ObjectiveSet::FamilyGeometricMean => level.exp() - cfg.log_shift,
        ObjectiveSet::FamilyProduct => level.exp(),
    }
}

/// Objective values of `x`. Geometric means and products are taken over the
/// shifted normalized utilities, with the shift removed again from the
/// geometric mean so that it reads in normalized-utility units.
pub fn objective_values(econ: &Economy, set: ObjectiveSet, x: &Allocation, cfg: &SolveConfig) -> Vec<f64> {
    objective_specs(econ, set, cfg)
        .iter()
        .map(|spec| {
            let b = &x.bundles[spec.family].0;
            match spec.func.evaluate(econ, spec.family, b, false) {
                Some(local) => from_level(set, local.value, cfg),
                None => match set {
                    ObjectiveSet::FamilyGeometricMean => -cfg.log_shift,
                    _ => 0.0,
                },
            }
        })
        .collect()
}

fn base_problem<'a>(econ: &'a Economy, goal: Goal, region: Region, cfg: &SolveConfig) -> AllocationProblem<'a> {
    let mut problem = AllocationProblem::new(econ, goal);
    if region == Region::IndividualFsOnly {
        for (m, _) in econ.members() {
            problem.constraints.push(Constraint {
                family: m.family,
                func: FamilyFn::Normalized(m.index),
                level_coef: 0.0,
                offset: -cfg.tolerance,
            });
        }
    }
    problem
}

struct StageResult {
    allocation: Allocation,
    newton_steps: usize,
}

/// Maximizes the minimum of the `active` objectives with frozen objectives
/// held at `value - tolerance`, starting from `start`.
fn stage(
    econ: &Economy,
    set: ObjectiveSet,
    region: Region,
    frozen: &BTreeMap<usize, f64>,
    active: &[usize],
    start: &Allocation,
    cfg: &SolveConfig,
    stage_no: usize,
) -> Result<StageResult> {
    let specs = objective_specs(econ, set, cfg);
    let mut problem = base_problem(econ, Goal::Level, region, cfg);
    for (&k, &v) in frozen {
        if let Some(level) = to_level(set, v - cfg.tolerance, cfg) {
            problem.constraints.push(Constraint {
                family: specs[k].family,
                func: specs[k].func,
                level_coef: 0.0,
                offset: level,
            });
        }
    }
    let mut start_level = f64::INFINITY;
    for &k in active {
        let spec = &specs[k];
        let local = spec
            .func
            .evaluate(econ, spec.family, &start.bundles[spec.family].0, false)
            .ok_or_else(|| Error::NoInterior(format!("objective {k} undefined at the start point")))?;
        start_level = start_level.min(local.value);
        problem.constraints.push(Constraint {
            family: spec.family,
            func: spec.func,
            level_coef: -1.0,
            offset: 0.0,
        });
    }
    let z0 = problem.encode(start, start_level - 1.0);
    let out = barrier::solve(&problem, z0, &cfg.settings(stage_no))?;
    Ok(StageResult {
        allocation: problem.allocation(&out.z),
        newton_steps: out.newton_steps,
    })
}

/// Maximizes the smallest non-frozen objective subject to the frozen ones
/// staying within `tolerance` of their values. Starts from the equal split.
pub fn maximin(
    econ: &Economy,
    set: ObjectiveSet,
    frozen: &BTreeMap<usize, f64>,
    region: Region,
    cfg: &SolveConfig,
) -> Result<(Allocation, f64)> {
    cfg.validate()?;
    let count = objective_specs(econ, set, cfg).len();
    if let Some(k) = frozen.keys().find(|k| **k >= count) {
        return Err(Error::validation(format!("objective index {k} out of range")));
    }
    let active: Vec<usize> = (0..count).filter(|k| !frozen.contains_key(k)).collect();
    if active.is_empty() {
        return Err(Error::validation("every objective is frozen"));
    }
    let out = stage(econ, set, region, frozen, &active, &econ.equal_split(), cfg, 1)?;
    let values = objective_values(econ, set, &out.allocation, cfg);
    let value = active.iter().map(|k| values[*k]).fold(f64::INFINITY, f64::min);
    Ok((out.allocation, value))
}

/// Iterated maximin: after each stage every free objective within
/// `tolerance` of the stage minimum is frozen at its attained value.
pub fn leximin(econ: &Economy, set: ObjectiveSet, region: Region, cfg: &SolveConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let count = objective_specs(econ, set, cfg).len();
    let mut frozen = BTreeMap::new();
    let mut x = econ.equal_split();
    let mut stages = Vec::new();
    while frozen.len() < count {
        let active: Vec<usize> = (0..count).filter(|k| !frozen.contains_key(k)).collect();
        let stage_no = stages.len() + 1;
        let out = stage(econ, set, region, &frozen, &active, &x, cfg, stage_no)?;
        x = out.allocation;
        let values = objective_values(econ, set, &x, cfg);
        let value = active.iter().map(|k| values[*k]).fold(f64::INFINITY, f64::min);
        let newly: Vec<usize> = active
            .iter()
            .copied()
            .filter(|k| values[*k] <= value + cfg.tolerance)
            .collect();
        for &k in &newly {
            frozen.insert(k, values[k]);
        }
        stages.push(StageLog {
            stage: stage_no,
            value,
            frozen: newly,
            newton_steps: out.newton_steps,
        });
    }
    let objectives = objective_values(econ, set, &x, cfg);
    Ok(SolveOutcome {
        allocation: x,
        objectives,
        stages,
    })
}

/// Maximizes the sum of all individuals' raw utilities over allocations in
/// which every normalized utility is at least `-tolerance`.
pub fn fs_welfare_max(econ: &Economy, cfg: &SolveConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let welfare = |x: &Allocation| -> f64 {
        econ.members()
            .map(|(m, ind)| ind.utility.value(&x.bundles[m.family].0))
            .sum()
    };
    if econ.family_count() == 1 {
        let x = Allocation::new(vec![econ.endowment_bundle()]);
        return Ok(SolveOutcome {
            objectives: vec![welfare(&x)],
            allocation: x,
            stages: Vec::new(),
        });
    }
    let problem = base_problem(econ, Goal::Welfare, Region::IndividualFsOnly, cfg);
    let z0 = problem.encode(&econ.equal_split(), 0.0);
    let out = barrier::solve(&problem, z0, &cfg.settings(1))?;
    let x = problem.allocation(&out.z);
    let value = welfare(&x);
    Ok(SolveOutcome {
        stages: vec![StageLog {
            stage: 1,
            value,
            frozen: Vec::new(),
            newton_steps: out.newton_steps,
        }],
        objectives: vec![value],
        allocation: x,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEeSolution {
    pub allocation: Allocation,
    /// Common geometric-mean level `V` of the families.
    pub level: f64,
    /// Ray coordinate `t = V + 1/|F|` of the reference bundle.
    pub t: f64,
    pub reference: Bundle,
    pub objectives: Vec<f64>,
    pub stages: Vec<StageLog>,
}

/// Leximin over per-family geometric means of normalized utilities within
/// the fair-share region. All families end at a common level `V`; inside
/// each family the members' normalized utilities then straddle `V`, so the
/// bundle `(V + 1/|F|) e` — whose normalized utility is `V` for everybody —
/// is a family-EE reference.
pub fn family_ee_solve(econ: &Economy, cfg: &SolveConfig) -> Result<FamilyEeSolution> {
    let out = leximin(econ, ObjectiveSet::FamilyGeometricMean, Region::IndividualFsOnly, cfg)?;
    let lo = out.objectives.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = out.objectives.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo > cfg.tolerance {
        return Err(Error::UnequalFamilyObjectives {
            spread: hi - lo,
            tolerance: cfg.tolerance,
        });
    }
    let t = lo + 1.0 / econ.family_count() as f64;
    Ok(FamilyEeSolution {
        reference: econ.endowment_bundle().scaled(t),
        allocation: out.allocation,
        level: lo,
        t,
        objectives: out.objectives,
        stages: out.stages,
    })
}

/// Normalized utilities of every individual in flat member order.
pub fn normalized_profile(econ: &Economy, x: &Allocation) -> Vec<f64> {
    econ.members()
        .map(|(m, _)| econ.normalized(m, &x.bundles[m.family].0))
        .collect()
}

/// Smallest normalized utility within each family.
pub fn family_minima(econ: &Economy, x: &Allocation) -> Vec<f64> {
    (0..econ.family_count())
        .map(|f| {
            (0..econ.families[f].size())
                .map(|k| econ.normalized(Member { family: f, index: k }, &x.bundles[f].0))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
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
    fn single_family_takes_everything() {
        let econ = singles(&[0.4], 2.0);
        let (x, v) = maximin(
            &econ,
            ObjectiveSet::IndividualNormalized,
            &BTreeMap::new(),
            Region::All,
            &SolveConfig::default(),
        )
        .unwrap();
        assert_eq!(x.bundles[0].0, vec![2.0, 2.0]);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn symmetric_singles_split_equally() {
        let econ = singles(&[0.5, 0.5], 2.0);
        let (x, v) = maximin(
            &econ,
            ObjectiveSet::IndividualNormalized,
            &BTreeMap::new(),
            Region::All,
            &SolveConfig::default(),
        )
        .unwrap();
        assert!(v.abs() < 1e-8);
        for b in &x.bundles {
            assert!((b[0] - 1.0).abs() < 1e-4 && (b[1] - 1.0).abs() < 1e-4, "{x:?}");
        }
    }

    #[test]
    fn opposite_singles_trade_towards_equal_income_demands() {
        let econ = singles(&[1.0 / 3.0, 2.0 / 3.0], 3.0);
        let (x, v) = maximin(
            &econ,
            ObjectiveSet::IndividualNormalized,
            &BTreeMap::new(),
            Region::All,
            &SolveConfig::default(),
        )
        .unwrap();
        assert!(v > 0.0);
        assert!(x.bundles[0][1] > x.bundles[0][0]);
        assert!(x.bundles[1][0] > x.bundles[1][1]);
    }

    #[test]
    fn frozen_index_out_of_range_is_rejected() {
        let econ = singles(&[0.5, 0.5], 2.0);
        let frozen = BTreeMap::from([(7, 0.0)]);
        assert!(maximin(
            &econ,
            ObjectiveSet::IndividualNormalized,
            &frozen,
            Region::All,
            &SolveConfig::default()
        )
        .is_err());
    }

    #[test]
    fn family_ee_on_symmetric_singles_returns_fair_share() {
        let econ = singles(&[0.5, 0.5], 2.0);
        let sol = family_ee_solve(&econ, &SolveConfig::default()).unwrap();
        assert!(sol.level.abs() < 1e-6, "{}", sol.level);
        assert!((sol.reference[0] - 1.0).abs() < 1e-5);
        for b in &sol.allocation.bundles {
            assert!((b[0] - 1.0).abs() < 1e-3 && (b[1] - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = SolveConfig {
            tolerance: 0.0,
            ..SolveConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}

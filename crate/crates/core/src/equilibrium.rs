//! Market equilibria from equal endowments: verification, tatonnement and
//! the fair-share-restricted variant.
//!
//! A family's "demand" under its incomplete preference is taken to be the
//! bundle maximizing the smallest normalized utility among its members
//! within the budget set. Such a bundle admits no affordable alternative
//! that every member strictly prefers, which is the equilibrium condition
//! for families.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::economy::{check_feasible, Allocation, Bundle, Economy, SOLVER_FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::fairness::{check_fairness, FairnessCriterion};
use crate::parallel;
use crate::solvers::barrier::{self, BarrierProblem, BarrierSettings, Eval};
use crate::utility::UtilityFunction;

/// Sample points along a two-good budget frontier before golden-section
/// refinement.
const FRONTIER_SAMPLES: usize = 64;
/// Golden-section iterations; the bracket shrinks below `1e-13` of its
/// initial width.
const GOLDEN_ITERATIONS: usize = 70;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumTriple {
    /// Prices on the unit simplex.
    pub prices: Vec<f64>,
    pub allocation: Allocation,
    pub initial_endowment: Allocation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    /// Budget sets `{x >= 0 : p x <= p x0_f}`.
    Standard,
    /// Budget sets additionally capped at the endowment: `x <= e`.
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseRule {
    /// Maximize the smallest normalized member utility.
    MaxMin,
    /// Demand of the family's first member.
    FirstMember,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub budget_ok: Vec<bool>,
    pub no_affordable_improvement: Vec<bool>,
    /// Affordable bundle that every member of the family prefers by more
    /// than `eps`, where one exists.
    pub witnesses: Vec<Option<Bundle>>,
    /// Best achievable `min_i (u_i(x') - u_i(x_f))` over the budget set.
    pub best_improvement: Vec<f64>,
    pub market_clearing_residual: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumConfig {
    /// Step size on relative excess demand.
    pub step: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the sup-norm of excess demand.
    pub tolerance: f64,
    pub rule: ResponseRule,
    /// Starting prices; uniform when absent.
    pub initial_prices: Option<Vec<f64>>,
    /// Indifference band used when judging fairness of the result.
    pub eps: f64,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        EquilibriumConfig {
            step: 0.05,
            max_iterations: 100_000,
            tolerance: 1e-6,
            rule: ResponseRule::MaxMin,
            initial_prices: None,
            eps: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TatonnementOutcome {
    pub triple: Option<EquilibriumTriple>,
    pub iterations: usize,
    pub residual: f64,
    pub prices: Vec<f64>,
    /// Fair-share and family no-envy verdict of a converged restricted
    /// equilibrium.
    pub fair: Option<bool>,
    pub diagnostics: Vec<String>,
}

/// Euclidean projection onto the unit simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closed-form utility-maximizing demand at prices `p` (all positive) and
/// income `m`.
pub fn demand(u: &UtilityFunction, p: &[f64], m: f64) -> Vec<f64> {
    match u {
        UtilityFunction::CobbDouglas { weights } => weights.iter().zip(p).map(|(w, p)| w * m / p).collect(),
        UtilityFunction::Ces { weights, rho } => {
            let sigma = 1.0 / (1.0 - rho);
            let denom: f64 = weights.iter().zip(p).map(|(w, p)| p * (w / p).powf(sigma)).sum();
            weights.iter().zip(p).map(|(w, p)| m * (w / p).powf(sigma) / denom).collect()
        }
        UtilityFunction::Linear { coefficients } => {
            let best = (0..p.len())
                .max_by(|a, b| (coefficients[*a] / p[*a]).total_cmp(&(coefficients[*b] / p[*b])).then(b.cmp(a)))
                .expect("at least one good");
            let mut x = vec![0.0; p.len()];
            x[best] = m / p[best];
            x
        }
    }
}

/// Terms `coef_i u_i(x) - offset_i` whose minimum is maximized.
struct Terms<'a> {
    utilities: Vec<&'a UtilityFunction>,
    coef: Vec<f64>,
    offset: Vec<f64>,
}

impl Terms<'_> {
    fn min_at(&self, x: &[f64]) -> f64 {
        self.utilities
            .iter()
            .zip(&self.coef)
            .zip(&self.offset)
            .map(|((u, c), o)| c * u.value(x) - o)
            .fold(f64::INFINITY, f64::min)
    }
}

enum Frontier {
    Point(Vec<f64>),
    Segment(Vec<f64>, Vec<f64>),
    /// A free good without a cap: the budget set is unbounded.
    Unbounded,
}

/// Efficient boundary of `{0 <= x <= cap, p x <= m}` for two goods.
fn frontier2(p: &[f64], m: f64, cap: &[f64]) -> Frontier {
    for g in 0..2 {
        if p[g] <= 0.0 {
            if !cap[g].is_finite() {
                return Frontier::Unbounded;
            }
            let h = 1 - g;
            let mut x = vec![0.0; 2];
            x[g] = cap[g];
            x[h] = if p[h] > 0.0 { (m / p[h]).min(cap[h]) } else { cap[h] };
            return Frontier::Point(x);
        }
    }
    if cap.iter().all(|c| c.is_finite()) && dot(p, cap) <= m {
        return Frontier::Point(cap.to_vec());
    }
    let lo = if cap[1].is_finite() {
        ((m - p[1] * cap[1]) / p[0]).max(0.0)
    } else {
        0.0
    };
    let hi = (m / p[0]).min(cap[0]);
    let point = |x0: f64| vec![x0, ((m - p[0] * x0) / p[1]).max(0.0)];
    Frontier::Segment(point(lo), point(hi))
}

/// Maximizes a concave function along the segment `a -> b`.
fn maximize_on_segment(a: &[f64], b: &[f64], f: impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let at = |theta: f64| -> Vec<f64> { a.iter().zip(b).map(|(a, b)| a + theta * (b - a)).collect() };
    let eval = |theta: f64| f(&at(theta));
    let mut best = (0, f64::NEG_INFINITY);
    for j in 0..=FRONTIER_SAMPLES {
        let v = eval(j as f64 / FRONTIER_SAMPLES as f64);
        if v > best.1 {
            best = (j, v);
        }
    }
    let step = 1.0 / FRONTIER_SAMPLES as f64;
    let mut lo = (best.0 as f64 - 1.0).max(0.0) * step;
    let mut hi = (best.0 as f64 + 1.0).min(FRONTIER_SAMPLES as f64) * step;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = eval(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = eval(d);
        }
    }
    let mut candidates = [(best.0 as f64 * step, best.1), (c, fc), (d, fd)];
    candidates.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
    let theta = candidates[0].0;
    (at(theta), candidates[0].1)
}

/// Maximize `min_i terms_i(x)` over `{0 < x < cap, p x < m}` for any
/// number of goods, with the level `s` as last variable.
struct BudgetProblem<'a> {
    terms: &'a Terms<'a>,
    prices: &'a [f64],
    income: f64,
    cap: &'a [f64],
}

impl BarrierProblem for BudgetProblem<'_> {
    fn dim(&self) -> usize {
        self.prices.len() + 1
    }

    fn constraint_count(&self) -> usize {
        self.terms.utilities.len() + 1 + self.prices.len() + self.cap.iter().filter(|c| c.is_finite()).count()
    }

    fn evaluate(&self, z: &[f64], t: f64, derivatives: bool) -> Option<Eval> {
        let g = self.prices.len();
        let n = g + 1;
        let (x, s) = (&z[..g], z[g]);
        let mut ev = Eval::zeros(if derivatives { n } else { 0 });
        ev.value = -t * s;
        if derivatives {
            ev.grad[g] = -t;
        }
        let linear = |value: f64, w: DVector<f64>, ev: &mut Eval| -> Option<()> {
            if value <= 0.0 {
                return None;
            }
            ev.value -= value.ln();
            if derivatives {
                ev.grad -= &w / value;
                ev.hess += (&w * w.transpose()) / (value * value);
            }
            Some(())
        };
        for k in 0..g {
            let mut w = DVector::zeros(if derivatives { n } else { 0 });
            if derivatives {
                w[k] = 1.0;
            }
            linear(x[k], w.clone(), &mut ev)?;
            if self.cap[k].is_finite() {
                linear(self.cap[k] - x[k], -w, &mut ev)?;
            }
        }
        let mut w = DVector::zeros(if derivatives { n } else { 0 });
        if derivatives {
            for k in 0..g {
                w[k] = -self.prices[k];
            }
        }
        linear(self.income - dot(self.prices, x), w, &mut ev)?;
        for ((u, c), o) in self.terms.utilities.iter().zip(&self.terms.coef).zip(&self.terms.offset) {
            let value = c * u.value(x) - o - s;
            if value <= 0.0 || !value.is_finite() {
                return None;
            }
            ev.value -= value.ln();
            if derivatives {
                let mut w = DVector::zeros(n);
                w.rows_mut(0, g).copy_from(&(u.gradient(x) * *c));
                w[g] = -1.0;
                ev.grad -= &w / value;
                ev.hess += (&w * w.transpose()) / (value * value);
                let h = u.hessian(x) * (*c / value);
                let mut block = ev.hess.view_mut((0, 0), (g, g));
                block -= h;
            }
        }
        Some(ev)
    }
}

/// Best bundle for `min_i terms_i` within the budget set, and its value.
/// `None` when the budget set is unbounded.
fn maximize_min(terms: &Terms, p: &[f64], m: f64, cap: &[f64]) -> Result<Option<(Vec<f64>, f64)>> {
    if p.len() == 2 {
        return Ok(match frontier2(p, m, cap) {
            Frontier::Unbounded => None,
            Frontier::Point(x) => {
                let v = terms.min_at(&x);
                Some((x, v))
            }
            Frontier::Segment(a, b) => Some(maximize_on_segment(&a, &b, |x| terms.min_at(x))),
        });
    }
    if p.iter().zip(cap).any(|(p, c)| *p <= 0.0 && !c.is_finite()) {
        return Ok(None);
    }
    if m <= 0.0 {
        let x = vec![0.0; p.len()];
        let v = terms.min_at(&x);
        return Ok(Some((x, v)));
    }
    let g = p.len();
    let mut z: Vec<f64> = (0..g)
        .map(|k| {
            let by_budget = if p[k] > 0.0 { m / (2.0 * g as f64 * p[k]) } else { f64::INFINITY };
            by_budget.min(cap[k] / 2.0)
        })
        .collect();
    z.push(terms.min_at(&z) - 1.0);
    let problem = BudgetProblem {
        terms,
        prices: p,
        income: m,
        cap,
    };
    let settings = BarrierSettings {
        gap_tolerance: 1e-11,
        growth: 8.0,
        max_newton_steps: 5_000,
        initial_t: 1.0,
        stage: 1,
    };
    let out = barrier::solve(&problem, z, &settings)?;
    let x = out.z[..g].to_vec();
    let v = terms.min_at(&x);
    Ok(Some((x, v)))
}

/// A family's response at prices `p` with income `m`, capped at `cap`.
fn family_response(
    econ: &Economy,
    f: usize,
    p: &[f64],
    m: f64,
    cap: &[f64],
    rule: ResponseRule,
) -> Result<Vec<f64>> {
    let family = &econ.families[f];
    let members: Vec<usize> = match rule {
        ResponseRule::MaxMin => (0..family.size()).collect(),
        ResponseRule::FirstMember => vec![0],
    };
    if members.len() == 1 && p.iter().all(|v| *v > 0.0) {
        let x = demand(&family.members[members[0]].utility, p, m);
        if x.iter().zip(cap).all(|(x, c)| x <= c) {
            return Ok(x);
        }
    }
    let inv_f = 1.0 / econ.family_count() as f64;
    let terms = Terms {
        utilities: members.iter().map(|k| &family.members[*k].utility).collect(),
        coef: members
            .iter()
            .map(|k| 1.0 / econ.endowment_utility(crate::economy::Member { family: f, index: *k }))
            .collect(),
        offset: vec![inv_f; members.len()],
    };
    maximize_min(&terms, p, m, cap)?
        .map(|(x, _)| x)
        .ok_or_else(|| Error::validation("unbounded budget set in family response"))
}

/// Checks the budget, no-affordable-improvement and market-clearing
/// conditions. The improvement search maximizes the smallest member gain
/// `u_i(x') - u_i(x_f)` over the budget set; a value above `eps` yields a
/// witness every member strictly prefers.
pub fn verify_equilibrium(
    econ: &Economy,
    trip: &EquilibriumTriple,
    kind: EquilibriumKind,
    eps: f64,
) -> Result<EquilibriumReport> {
    econ.check_shape(&trip.allocation)?;
    econ.check_shape(&trip.initial_endowment)?;
    if trip.prices.len() != econ.goods {
        return Err(Error::Dimension {
            expected: econ.goods,
            actual: trip.prices.len(),
        });
    }
    if trip.prices.iter().any(|p| *p < 0.0 || !p.is_finite()) {
        return Err(Error::validation("prices must be finite and non-negative"));
    }
    let p = &trip.prices;
    let cap: Vec<f64> = match kind {
        EquilibriumKind::Standard => vec![f64::INFINITY; econ.goods],
        EquilibriumKind::Restricted => econ.endowment.clone(),
    };
    let mut report = EquilibriumReport {
        kind,
        budget_ok: Vec::new(),
        no_affordable_improvement: Vec::new(),
        witnesses: Vec::new(),
        best_improvement: Vec::new(),
        market_clearing_residual: trip
            .allocation
            .totals()
            .iter()
            .zip(&econ.endowment)
            .map(|(t, e)| (t - e).abs())
            .fold(0.0, f64::max),
        valid: false,
    };
    for (f, family) in econ.families.iter().enumerate() {
        let x_f = &trip.allocation.bundles[f].0;
        let income = dot(p, &trip.initial_endowment.bundles[f].0);
        report.budget_ok.push(dot(p, x_f) <= income + eps);
        let terms = Terms {
            utilities: family.members.iter().map(|m| &m.utility).collect(),
            coef: vec![1.0; family.size()],
            offset: family.members.iter().map(|m| m.utility.value(x_f)).collect(),
        };
        match maximize_min(&terms, p, income, &cap)? {
            None => {
                // A free, uncapped good: add one unit of it.
                let g = (0..econ.goods).find(|g| p[*g] <= 0.0).expect("free good");
                let mut w = x_f.to_vec();
                w[g] += 1.0;
                report.best_improvement.push(f64::INFINITY);
                report.no_affordable_improvement.push(false);
                report.witnesses.push(Some(Bundle(w)));
            }
            Some((x, v)) => {
                report.best_improvement.push(v);
                let improves = v > eps;
                report.no_affordable_improvement.push(!improves);
                report.witnesses.push(improves.then_some(Bundle(x)));
            }
        }
    }
    report.valid = report.budget_ok.iter().all(|b| *b)
        && report.no_affordable_improvement.iter().all(|b| *b)
        && report.market_clearing_residual <= eps;
    Ok(report)
}

fn run_tatonnement(
    econ: &Economy,
    x0: &Allocation,
    cap: &[f64],
    cfg: &EquilibriumConfig,
) -> Result<TatonnementOutcome> {
    econ.check_shape(x0)?;
    let g = econ.goods;
    let mut p = match &cfg.initial_prices {
        Some(p) if p.len() == g => project_simplex(p),
        Some(p) => {
            return Err(Error::Dimension {
                expected: g,
                actual: p.len(),
            })
        }
        None => vec![1.0 / g as f64; g],
    };
    let mut residual = f64::INFINITY;
    for it in 0..cfg.max_iterations {
        let responses = parallel::map(econ.family_count(), |f| {
            let income = dot(&p, &x0.bundles[f].0);
            family_response(econ, f, &p, income, cap, cfg.rule)
        });
        let bundles = responses.into_iter().collect::<Result<Vec<_>>>()?;
        let excess: Vec<f64> = (0..g)
            .map(|k| bundles.iter().map(|b| b[k]).sum::<f64>() - econ.endowment[k])
            .collect();
        residual = excess.iter().fold(0.0, |a, z| a.max(z.abs()));
        if residual <= cfg.tolerance {
            return Ok(TatonnementOutcome {
                triple: Some(EquilibriumTriple {
                    prices: p.clone(),
                    allocation: Allocation::new(bundles.into_iter().map(Bundle).collect()),
                    initial_endowment: x0.clone(),
                }),
                iterations: it,
                residual,
                prices: p,
                fair: None,
                diagnostics: Vec::new(),
            });
        }
        let moved: Vec<f64> = (0..g)
            .map(|k| p[k] + cfg.step * excess[k] / econ.endowment[k])
            .collect();
        p = project_simplex(&moved);
    }
    Ok(TatonnementOutcome {
        triple: None,
        iterations: cfg.max_iterations,
        residual,
        prices: p,
        fair: None,
        diagnostics: vec![format!(
            "excess demand {residual:e} above {:e} after {} iterations",
            cfg.tolerance, cfg.max_iterations
        )],
    })
}

/// Price adjustment `p <- proj(p + step * excess / e)` from endowments `x0`.
/// Family responses are capped at twice the endowment so that demand stays
/// bounded when a price reaches zero.
pub fn tatonnement(econ: &Economy, x0: &Allocation, cfg: &EquilibriumConfig) -> Result<TatonnementOutcome> {
    let cap: Vec<f64> = econ.endowment.iter().map(|e| 2.0 * e).collect();
    run_tatonnement(econ, x0, &cap, cfg)
}

/// Tatonnement from the equal split in which every family's response is
/// the max-min choice among bundles below the endowment. Because the fair
/// share is always affordable, every response is individually fair-share;
/// the converged allocation is additionally checked for family no-envy.
pub fn restricted_equilibrium(econ: &Economy, cfg: &EquilibriumConfig) -> Result<TatonnementOutcome> {
    let cfg = EquilibriumConfig {
        rule: ResponseRule::MaxMin,
        ..cfg.clone()
    };
    let x0 = econ.equal_split();
    let mut out = run_tatonnement(econ, &x0, &econ.endowment, &cfg)?;
    if let Some(trip) = &out.triple {
        if !check_feasible(econ, &trip.allocation, SOLVER_FEASIBILITY_TOL)?.feasible {
            out.diagnostics.push("converged allocation exceeds the endowment".into());
            out.fair = Some(false);
            return Ok(out);
        }
        let fs = check_fairness(econ, &trip.allocation, FairnessCriterion::IndividualFs, None, cfg.eps)?;
        let ne = check_fairness(econ, &trip.allocation, FairnessCriterion::FamilyNe, None, cfg.eps)?;
        if !fs.holds {
            out.diagnostics.push(format!("individual-fs fails: {:?}", fs.witness_ids()));
        }
        if !ne.holds {
            out.diagnostics.push(format!("family-ne fails: {:?}", ne.witness_ids()));
        }
        out.fair = Some(fs.holds && ne.holds);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{Family, Individual};

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
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.3, 0.3, 0.9]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn ces_demand_exhausts_budget_and_matches_first_order_condition() {
        let u = UtilityFunction::ces(vec![0.3, 0.7], -0.5);
        let p = [0.4, 0.6];
        let x = demand(&u, &p, 2.0);
        assert!((dot(&p, &x) - 2.0).abs() < 1e-12);
        let mrs = u.mrs(&x).unwrap();
        assert!((mrs - p[0] / p[1]).abs() < 1e-10);
    }

    #[test]
    fn verifies_equal_income_cobb_douglas_equilibrium() {
        let econ = singles(&[1.0 / 3.0, 2.0 / 3.0], 3.0);
        let good = EquilibriumTriple {
            prices: vec![0.5, 0.5],
            allocation: Allocation::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]),
            initial_endowment: econ.equal_split(),
        };
        assert!(verify_equilibrium(&econ, &good, EquilibriumKind::Standard, 1e-6).unwrap().valid);
        let bad = EquilibriumTriple {
            allocation: Allocation::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]),
            ..good
        };
        let report = verify_equilibrium(&econ, &bad, EquilibriumKind::Standard, 1e-6).unwrap();
        assert!(!report.valid);
        assert!(report.witnesses.iter().all(Option::is_some));
    }

    #[test]
    fn free_good_yields_automatic_witness() {
        let econ = singles(&[0.5], 1.0);
        let trip = EquilibriumTriple {
            prices: vec![1.0, 0.0],
            allocation: Allocation::from_rows(&[&[1.0, 1.0]]),
            initial_endowment: Allocation::from_rows(&[&[1.0, 1.0]]),
        };
        let report = verify_equilibrium(&econ, &trip, EquilibriumKind::Standard, 1e-6).unwrap();
        assert!(!report.valid);
        assert_eq!(report.witnesses[0], Some(Bundle::new(vec![1.0, 2.0])));
    }

    #[test]
    fn tatonnement_single_family_consumes_endowment() {
        let econ = singles(&[0.3], 2.0);
        let out = tatonnement(&econ, &econ.equal_split(), &EquilibriumConfig::default()).unwrap();
        let trip = out.triple.expect("converges");
        assert!((trip.allocation.bundles[0][0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn three_good_response_uses_barrier() {
        let econ = Economy::new(
            3,
            vec![1.0, 2.0, 3.0],
            vec![Family::new(
                "f",
                vec![
                    Individual::new("a", UtilityFunction::cobb_douglas(vec![0.2, 0.3, 0.5])),
                    Individual::new("b", UtilityFunction::cobb_douglas(vec![0.6, 0.2, 0.2])),
                ],
            )],
        )
        .unwrap();
        let p = [0.2, 0.3, 0.5];
        let x = family_response(&econ, 0, &p, 1.0, &[10.0, 10.0, 10.0], ResponseRule::MaxMin).unwrap();
        assert!((dot(&p, &x) - 1.0).abs() < 1e-6, "{x:?}");
    }
}

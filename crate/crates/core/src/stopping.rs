//! Ideal problem-solving cessation: how long to let an anytime strategy
//! refine its answer before acting.
//!
//! For a fixed (non-partitioned) value profile and a delay cost, interior
//! optima of comprehensive utility sit where the marginal value of another
//! instant of execution equals the marginal cost of the delay it adds.
//! The exponential and inverse-power families have closed forms; a
//! marginal-gap sign scan plus bisection covers everything else.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{comprehensive_utility, CostModel, MetaMetaCost, PerformanceProfile, Wrt};
use crate::oracle::OracleConfig;

/// Bisection target for marginal-condition roots, in seconds.
pub const TOL_TIME: f64 = 1e-9;
/// Acceptable first-order-condition residual, in utility per second.
pub const TOL_FOC: f64 = 1e-8;

/// How a solution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ClosedForm,
    MarginalSearch,
    FixedPoint,
    Grid2d,
}

/// Optimal stopping schedule for a fixed value profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingSolution {
    /// Ideal execution time before halting, seconds.
    pub exec_time: f64,
    /// Total time including the scheduling overhead: `exec_time + t_mm`.
    pub total_time: f64,
    /// Comprehensive utility at the optimum.
    pub utility: f64,
    /// True when the optimum clamps to `t_e = 0` (marginal cost dominates
    /// from the start).
    pub at_boundary: bool,
    /// Sign check of the local second derivative at the returned point.
    pub second_order_ok: bool,
    pub method: SolveMethod,
}

fn new_solution(
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    exec_time: f64,
    at_boundary: bool,
    method: SolveMethod,
) -> Result<StoppingSolution> {
    let utility = comprehensive_utility(profile, cost, t_mm, 0.0, exec_time)?;
    let second_order_ok =
        if exec_time > 0.0 || matches!(profile, PerformanceProfile::Exponential { .. }) {
            let curvature = profile.second_partials(0.0, exec_time)?.exec_exec
                - cost.second_deriv(exec_time + t_mm.seconds())?;
            curvature < 0.0
        } else {
            true
        };
    Ok(StoppingSolution {
        exec_time,
        total_time: exec_time + t_mm.seconds(),
        utility,
        at_boundary,
        second_order_ok,
        method,
    })
}

/// Closed-form stopping time for `u_o = 1 - exp(-k t_e)` with linear cost
/// rate `c`: `t_e* = ln(k/c) / k`, clamped to the `t_e = 0` boundary when
/// `c >= k` (the marginal value `k e^{-k t}` never exceeds `c`).
pub fn solve_stop_exponential(k: f64, c: f64, t_mm: MetaMetaCost) -> Result<StoppingSolution> {
    let profile = PerformanceProfile::Exponential { k };
    profile.validate()?;
    let cost = CostModel::Linear { c };
    cost.validate()?;
    if c >= k {
        return new_solution(&profile, &cost, t_mm, 0.0, true, SolveMethod::ClosedForm);
    }
    let exec_time = (k / c).ln() / k;
    new_solution(
        &profile,
        &cost,
        t_mm,
        exec_time,
        false,
        SolveMethod::ClosedForm,
    )
}

/// Closed-form stopping time for `u_o = 1 - 1/(k t_e^a)` with linear cost
/// rate `c`: `t_e* = (a / (k c))^(1/(a+1))`. Always interior — the
/// marginal value diverges as `t_e -> 0`.
pub fn solve_stop_inverse_power(
    k: f64,
    a: f64,
    c: f64,
    t_mm: MetaMetaCost,
) -> Result<StoppingSolution> {
    let profile = PerformanceProfile::InversePower { k, a };
    profile.validate()?;
    let cost = CostModel::Linear { c };
    cost.validate()?;
    let exec_time = (a / (k * c)).powf(1.0 / (a + 1.0));
    new_solution(
        &profile,
        &cost,
        t_mm,
        exec_time,
        false,
        SolveMethod::ClosedForm,
    )
}

/// Characteristic time scale used to seed the search bracket.
fn rate_scale(profile: &PerformanceProfile) -> f64 {
    match profile {
        PerformanceProfile::Exponential { k } => 1.0 / k,
        PerformanceProfile::InversePower { k, a } => (a / k).powf(1.0 / (a + 1.0)),
        _ => 1.0,
    }
}

/// Stopping solve for any non-partitioned profile and any cost model.
///
/// Locates every sign change of the marginal gap
/// `u_o'(t) - cost'(t + t_mm)` on an adaptively doubled bracket, refines
/// each by bisection, then compares comprehensive utility across the
/// refined candidates and the `t_e = 0` boundary. Ties resolve to the
/// smallest time.
pub fn solve_stop_generic(
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    search: &OracleConfig,
) -> Result<StoppingSolution> {
    profile.validate()?;
    cost.validate()?;
    search.validate()?;
    if profile.is_partitioned() {
        return Err(Error::Parameter(
            "solve_stop_generic needs a non-partitioned profile; use the partition solvers".into(),
        ));
    }

    let gap = |t: f64| -> f64 {
        let value = profile.deriv(0.0, t, Wrt::ExecTime).unwrap_or(f64::NAN);
        let delay = cost.deriv(t + t_mm.seconds()).unwrap_or(f64::NAN);
        value - delay
    };

    // Double the bracket end until marginal cost dominates there.
    let mut hi = match search.bracket_hint {
        Some((_, h)) => h,
        None => rate_scale(profile),
    };
    if search.bracket_hint.is_none() {
        let mut doublings = 0;
        while !(gap(hi) < 0.0) {
            hi *= 2.0;
            doublings += 1;
            if doublings > search.max_doublings {
                return Err(Error::Bracket(format!(
                    "marginal gap still nonnegative after {} doublings (t = {hi})",
                    search.max_doublings
                )));
            }
        }
    }

    let boundary_ok = !matches!(profile, PerformanceProfile::InversePower { .. });
    let scan_start = if boundary_ok { 0.0 } else { hi * 1e-12 };

    // Scan for sign changes of the marginal gap and bisect each.
    let n = 4096;
    let mut candidates: Vec<f64> = Vec::new();
    let mut prev_t = scan_start;
    let mut prev_g = gap(prev_t);
    for i in 1..=n {
        let t = hi * (i as f64) / (n as f64);
        let g = gap(t);
        if prev_g.is_finite() && g.is_finite() && (prev_g >= 0.0) != (g >= 0.0) {
            candidates.push(bisect_gap(&gap, prev_t, t, prev_g));
        } else if g == 0.0 {
            candidates.push(t);
        }
        prev_t = t;
        prev_g = g;
    }
    if boundary_ok {
        candidates.push(0.0);
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut best: Option<(f64, f64)> = None;
    for &t in &candidates {
        if let Ok(u) = comprehensive_utility(profile, cost, t_mm, 0.0, t) {
            if u.is_finite() && best.is_none_or(|(_, bu)| u > bu) {
                best = Some((t, u));
            }
        }
    }
    let (exec_time, _) = best.ok_or_else(|| {
        Error::Bracket("no finite stopping candidate found on the bracket".into())
    })?;
    new_solution(
        profile,
        cost,
        t_mm,
        exec_time,
        exec_time == 0.0,
        SolveMethod::MarginalSearch,
    )
}

/// Dispatches to the closed forms for linear cost, the marginal search
/// otherwise.
pub fn solve_stop(
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    search: &OracleConfig,
) -> Result<StoppingSolution> {
    match (profile, cost) {
        (PerformanceProfile::Exponential { k }, CostModel::Linear { c }) => {
            solve_stop_exponential(*k, *c, t_mm)
        }
        (PerformanceProfile::InversePower { k, a }, CostModel::Linear { c }) => {
            solve_stop_inverse_power(*k, *a, *c, t_mm)
        }
        _ => solve_stop_generic(profile, cost, t_mm, search),
    }
}

/// Sign-change bisection run to floating-point convergence.
fn bisect_gap(gap: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
    let lo_positive = g_lo >= 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = gap(mid);
        if g == 0.0 {
            return mid;
        }
        if (g >= 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

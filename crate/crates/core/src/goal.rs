//! Goal-directed scheduling: minimize the total time to a predefined
//! result instead of maximizing utility.
//!
//! Planning for `t_m` seconds raises the refinement rate `K(t_m)`, which
//! shortens the execution time needed to reach a target fraction `f` of
//! the complete value:
//!
//! ```text
//! t_e = -ln(1 - f) / K(t_m)
//! total(t_m) = t_e + t_m + t_mm
//! ```
//!
//! Interior minima satisfy `K(t_m)^2 / K'(t_m) = -ln(1 - f)`; for linear
//! efficacy that pins the optimal rate at `sqrt(-l ln(1 - f))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{MetaEfficacy, MetaMetaCost};
use crate::oracle::OracleConfig;

/// A goal-directed scheduling problem: reach value fraction `f` in the
/// least total time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSpec {
    /// Target fraction of the complete value, strictly inside (0, 1);
    /// `f = 1` needs unbounded execution time.
    pub f: f64,
    pub efficacy: MetaEfficacy,
    #[serde(default)]
    pub t_mm: MetaMetaCost,
}

impl GoalSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.f.is_finite() || self.f <= 0.0 || self.f >= 1.0 {
            return Err(Error::Parameter(format!(
                "f must lie strictly inside (0, 1), got {}",
                self.f
            )));
        }
        self.efficacy.validate()
    }
}

/// Minimal-total-time schedule for a goal-directed problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalSolution {
    /// Ideal solution-planning time, seconds.
    pub plan_time: f64,
    /// Execution time needed after planning, seconds.
    pub exec_time: f64,
    /// `plan_time + exec_time + t_mm`.
    pub total_time: f64,
    /// True when the optimum clamps to `t_m = 0`.
    pub at_boundary: bool,
    /// Positivity of the total-time second derivative at the solution.
    pub second_order_ok: bool,
}

/// Execution time needed to reach fraction `f` after `t_m` of planning:
/// `-ln(1 - f) / K(t_m)`. Strictly decreasing in `t_m` while `K` rises.
pub fn problem_reduction_time(efficacy: &MetaEfficacy, f: f64, t_m: f64) -> Result<f64> {
    if !f.is_finite() || f <= 0.0 || f >= 1.0 {
        return Err(Error::Parameter(format!(
            "f must lie strictly inside (0, 1), got {f}"
        )));
    }
    let rate = efficacy.rate(t_m)?;
    if !(rate > 0.0) {
        return Err(Error::Domain(format!(
            "efficacy rate must be > 0 to reach the goal, got K({t_m}) = {rate}"
        )));
    }
    Ok(-(1.0 - f).ln() / rate)
}

fn build_solution(
    efficacy: &MetaEfficacy,
    f: f64,
    t_mm: MetaMetaCost,
    plan_time: f64,
    at_boundary: bool,
) -> Result<GoalSolution> {
    let exec_time = problem_reduction_time(efficacy, f, plan_time)?;
    // Positive total-time curvature: deficit * (2 K'^2 / K^3 - K'' / K^2).
    let rate = efficacy.rate(plan_time)?;
    let slope = efficacy.rate_deriv(plan_time)?;
    let curve = efficacy.rate_second_deriv(plan_time)?;
    let deficit = -(1.0 - f).ln();
    let second = deficit * (2.0 * slope * slope / rate.powi(3) - curve / (rate * rate));
    Ok(GoalSolution {
        plan_time,
        exec_time,
        total_time: plan_time + exec_time + t_mm.seconds(),
        at_boundary,
        second_order_ok: at_boundary || second > 0.0,
    })
}

/// Closed-form goal solve for linear efficacy `K = k_o + l t_m`:
/// the stationary rate is `sqrt(-l ln(1 - f))`, so
/// `t_m* = (sqrt(-l ln(1 - f)) - k_o) / l`, clamped to the `t_m = 0`
/// boundary when negative.
pub fn solve_goal_linear(k_o: f64, l: f64, f: f64, t_mm: MetaMetaCost) -> Result<GoalSolution> {
    if !k_o.is_finite() || k_o < 0.0 {
        return Err(Error::Parameter(format!(
            "k_o must be finite and >= 0, got {k_o}"
        )));
    }
    if !l.is_finite() || l <= 0.0 {
        return Err(Error::Parameter(format!(
            "l must be finite and > 0, got {l}"
        )));
    }
    let efficacy = MetaEfficacy::Linear { k_o, l };
    let spec = GoalSpec {
        f,
        efficacy: efficacy.clone(),
        t_mm,
    };
    spec.validate()?;

    let stationary_rate = (-l * (1.0 - f).ln()).sqrt();
    if stationary_rate <= k_o {
        return build_solution(&efficacy, f, t_mm, 0.0, true);
    }
    let plan_time = (stationary_rate - k_o) / l;
    build_solution(&efficacy, f, t_mm, plan_time, false)
}

/// Stationary planning time from the first-order condition for linear
/// efficacy, without boundary clamping: `(sqrt(-l ln(1-f)) - k_o) / l`.
pub fn linear_stationary_plan_time(k_o: f64, l: f64, f: f64) -> f64 {
    ((-l * (1.0 - f).ln()).sqrt() - k_o) / l
}

/// Alternative closed form that folds the base rate into the radicand:
/// `(sqrt(k_o^2 - l (k_o^2 + ln(1-f))) - k_o) / l`. It coincides with
/// [`linear_stationary_plan_time`] only when `l = 1` (or `k_o = 0`) and
/// is reported for side-by-side inspection; the numerical minimizer of
/// total time sides with the first-order form.
pub fn linear_variant_plan_time(k_o: f64, l: f64, f: f64) -> f64 {
    ((k_o * k_o - l * (k_o * k_o + (1.0 - f).ln())).sqrt() - k_o) / l
}

/// Goal solve for any monotone efficacy: scans for roots of
/// `d total / d t_m = 1 - deficit * K'/K^2`, bisects each, and compares
/// candidates with the `t_m = 0` boundary on total time. A flat efficacy
/// degenerates to the boundary.
pub fn solve_goal_generic(spec: &GoalSpec, search: &OracleConfig) -> Result<GoalSolution> {
    spec.validate()?;
    search.validate()?;
    let efficacy = &spec.efficacy;
    let deficit = -(1.0 - spec.f).ln();

    let slope_of_total = |t_m: f64| -> f64 {
        let rate = efficacy.rate(t_m).unwrap_or(f64::NAN);
        let slope = efficacy.rate_deriv(t_m).unwrap_or(f64::NAN);
        if !(rate > 0.0) {
            return f64::NAN;
        }
        1.0 - deficit * slope / (rate * rate)
    };

    // Expand until total time is rising (and keeps rising) out there.
    let mut hi = search.bracket_hint.map_or(1.0, |(_, h)| h);
    if search.bracket_hint.is_none() {
        let mut run = 0;
        let mut doublings = 0;
        loop {
            let g = slope_of_total(hi);
            if g > 0.0 || g.is_nan() {
                run += 1;
                if run >= 3 {
                    break;
                }
            } else {
                run = 0;
            }
            hi *= 2.0;
            doublings += 1;
            if doublings > search.max_doublings {
                return Err(Error::Bracket(format!(
                    "total time still falling after {} doublings",
                    search.max_doublings
                )));
            }
        }
    }

    let n = 2048;
    let mut candidates: Vec<f64> = vec![0.0];
    let mut prev_t = 0.0;
    let mut prev_g = slope_of_total(prev_t);
    for i in 1..=n {
        let t = hi * (i as f64) / (n as f64);
        let g = slope_of_total(t);
        if prev_g.is_finite() && g.is_finite() && (prev_g >= 0.0) != (g >= 0.0) {
            candidates.push(bisect_slope(&slope_of_total, prev_t, t, prev_g));
        }
        prev_t = t;
        prev_g = g;
    }

    let mut best: Option<(f64, f64)> = None;
    for &t_m in &candidates {
        let Ok(exec) = problem_reduction_time(efficacy, spec.f, t_m) else {
            continue;
        };
        let total = t_m + exec + spec.t_mm.seconds();
        if total.is_finite() && best.is_none_or(|(_, bt)| total < bt) {
            best = Some((t_m, total));
        }
    }
    let (plan_time, _) = best.ok_or_else(|| {
        Error::DegenerateEfficacy("efficacy never reaches a positive rate".into())
    })?;
    build_solution(efficacy, spec.f, spec.t_mm, plan_time, plan_time == 0.0)
}

fn bisect_slope(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, g_lo: f64) -> f64 {
    let lo_positive = g_lo >= 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            return mid;
        }
        if (v >= 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dispatches to the closed form for linear efficacy with positive slope,
/// the generic solver otherwise.
pub fn solve_goal(spec: &GoalSpec, search: &OracleConfig) -> Result<GoalSolution> {
    spec.validate()?;
    match &spec.efficacy {
        MetaEfficacy::Linear { k_o, l } if *l > 0.0 => {
            solve_goal_linear(*k_o, *l, spec.f, spec.t_mm)
        }
        _ => solve_goal_generic(spec, search),
    }
}

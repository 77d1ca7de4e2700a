//! The metareasoning-partition problem: jointly choose planning time and
//! execution time to maximize comprehensive utility for a profile whose
//! refinement rate improves with planning.
//!
//! At an interior optimum the two marginal conditions share the cost
//! derivative, which couples the optimal execution time to the planning
//! time:
//!
//! ```text
//! t_e* = a K(t_m) / (b K'(t_m))
//! ```
//!
//! Substituting the coupling back into the execution condition leaves a
//! one-variable stationarity residual in `t_m`,
//!
//! ```text
//! K(t_m) = ( (b K'(t_m))^(a+1) / (a^a cost'(T)) )^(1/(a+b+1)),   T = t_m + t_e* + t_mm
//! ```
//!
//! which has a closed form for linear efficacy with linear cost and is
//! otherwise solved by sign scan plus bisection. A 2-D grid fallback
//! covers profiles with no such structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    comprehensive_utility, CostModel, MetaEfficacy, MetaMetaCost, PerformanceProfile,
};
use crate::oracle::{grid_max_2d, OracleConfig};
use crate::stopping::{solve_stop_generic, solve_stop_inverse_power, SolveMethod};

/// Optimal planning/execution split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSolution {
    /// Ideal solution-planning time, seconds.
    pub plan_time: f64,
    /// Ideal execution time, seconds.
    pub exec_time: f64,
    /// `plan_time + exec_time + t_mm`.
    pub total_time: f64,
    /// Comprehensive utility at the optimum.
    pub utility: f64,
    /// True when the optimum clamps to `t_m = 0` and the residual
    /// stopping problem was solved with the base rate.
    pub at_boundary: bool,
    /// Negative-semidefiniteness of the utility Hessian at an interior
    /// solution; the one-variable second-order check at a boundary.
    pub hessian_ok: bool,
    pub method: SolveMethod,
}

/// Hessian of comprehensive utility at a point, with its eigenvalues and
/// the negative-semidefiniteness verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HessianCheck {
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: (f64, f64),
    pub ok: bool,
}

fn build_solution(
    plan_time: f64,
    exec_time: f64,
    utility: f64,
    t_mm: MetaMetaCost,
    at_boundary: bool,
    hessian_ok: bool,
    method: SolveMethod,
) -> PartitionSolution {
    PartitionSolution {
        plan_time,
        exec_time,
        total_time: plan_time + exec_time + t_mm.seconds(),
        utility,
        at_boundary,
        hessian_ok,
        method,
    }
}

/// Execution time coupled to a planning time at an interior optimum:
/// `a K(t_m) / (b K'(t_m))`.
pub fn execution_time_given_planning(
    a: f64,
    b: f64,
    efficacy: &MetaEfficacy,
    t_m: f64,
) -> Result<f64> {
    require_exponent("a", a)?;
    require_exponent("b", b)?;
    efficacy.validate()?;
    let slope = efficacy.rate_deriv(t_m)?;
    if !(slope > 0.0) {
        return Err(Error::DegenerateEfficacy(format!(
            "K'({t_m}) = {slope}; no interior coupling exists, fall back to a stopping-only solve"
        )));
    }
    Ok(a * efficacy.rate(t_m)? / (b * slope))
}

fn require_exponent(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Parameter(format!(
            "{name} must be finite and > 0, got {v}"
        )));
    }
    Ok(())
}

/// Closed-form partition for the inverse-power profile with linear
/// efficacy `K = k_o + l t_m` and linear cost rate `c`:
///
/// ```text
/// t_m* = ( ((b l)^(a+1) / (c a^a))^(1/(a+b+1)) - k_o ) / l
/// t_e* = (a/b) (k_o / l + t_m*)
/// ```
///
/// A negative bracket means planning cannot reach the stationary rate;
/// the solve clamps to `t_m = 0` and re-solves the residual stopping
/// problem at the base rate.
pub fn solve_partition_closed_form(
    a: f64,
    b: f64,
    k_o: f64,
    l: f64,
    c: f64,
    t_mm: MetaMetaCost,
) -> Result<PartitionSolution> {
    require_exponent("a", a)?;
    require_exponent("b", b)?;
    require_exponent("l", l)?;
    require_exponent("c", c)?;
    if !k_o.is_finite() || k_o < 0.0 {
        return Err(Error::Parameter(format!(
            "k_o must be finite and >= 0, got {k_o}"
        )));
    }

    let rate_star = ((b * l).powf(a + 1.0) / (c * a.powf(a))).powf(1.0 / (a + b + 1.0));
    if rate_star <= k_o {
        // Boundary: the base rate already exceeds the stationary rate.
        let stop = solve_stop_inverse_power(k_o.powf(b), a, c, t_mm)?;
        return Ok(build_solution(
            0.0,
            stop.exec_time,
            stop.utility,
            t_mm,
            true,
            stop.second_order_ok,
            SolveMethod::ClosedForm,
        ));
    }

    let plan_time = (rate_star - k_o) / l;
    let exec_time = (a / b) * (k_o / l + plan_time);
    let efficacy = MetaEfficacy::Linear { k_o, l };
    let profile = PerformanceProfile::PartitionedInversePower { efficacy, b, a };
    let cost = CostModel::Linear { c };
    let utility = comprehensive_utility(&profile, &cost, t_mm, plan_time, exec_time)?;
    let hessian = check_hessian(&profile, &cost, t_mm, plan_time, exec_time)?;
    Ok(build_solution(
        plan_time,
        exec_time,
        utility,
        t_mm,
        false,
        hessian.ok,
        SolveMethod::ClosedForm,
    ))
}

/// Partition solve for inverse-power profiles with arbitrary monotone
/// efficacy and cost.
///
/// Finds planning times where the rate matches the stationarity residual
/// (sign scan plus bisection along the coupled execution-time curve),
/// evaluates comprehensive utility at every candidate and at the
/// `t_m = 0` boundary, and returns the global maximizer.
pub fn solve_partition_fixed_point(
    a: f64,
    b: f64,
    efficacy: &MetaEfficacy,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    search: &OracleConfig,
) -> Result<PartitionSolution> {
    require_exponent("a", a)?;
    require_exponent("b", b)?;
    efficacy.validate()?;
    cost.validate()?;
    search.validate()?;

    let profile = PerformanceProfile::PartitionedInversePower {
        efficacy: efficacy.clone(),
        b,
        a,
    };

    // residual(t_m) = K(t_m) - RHS(t_m); NaN where the coupling is undefined.
    let residual = |t_m: f64| -> f64 {
        let slope = efficacy.rate_deriv(t_m).unwrap_or(f64::NAN);
        if !(slope > 0.0) {
            return f64::NAN;
        }
        let rate = efficacy.rate(t_m).unwrap_or(f64::NAN);
        let exec = a * rate / (b * slope);
        let marginal_cost = cost.deriv(t_m + exec + t_mm.seconds()).unwrap_or(f64::NAN);
        if !(marginal_cost > 0.0) {
            return f64::NAN;
        }
        let rhs =
            ((b * slope).powf(a + 1.0) / (a.powf(a) * marginal_cost)).powf(1.0 / (a + b + 1.0));
        rate - rhs
    };

    // Expand until the residual stays positive (or undefined) out there.
    let mut hi = search.bracket_hint.map_or(1.0, |(_, h)| h);
    if search.bracket_hint.is_none() {
        let mut run = 0;
        let mut doublings = 0;
        loop {
            let r = residual(hi);
            if r > 0.0 || r.is_nan() {
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
                    "stationarity residual never settled positive after {} doublings",
                    search.max_doublings
                )));
            }
        }
    }

    // Scan for sign changes and bisect each to a root.
    let n = 2048;
    let mut roots: Vec<f64> = Vec::new();
    let mut all_nan = true;
    let mut prev_t = 0.0;
    let mut prev_r = residual(prev_t);
    for i in 1..=n {
        let t = hi * (i as f64) / (n as f64);
        let r = residual(t);
        if r.is_finite() {
            all_nan = false;
        }
        if prev_r.is_finite() && r.is_finite() && (prev_r >= 0.0) != (r >= 0.0) {
            roots.push(bisect_residual(&residual, prev_t, t, prev_r));
        }
        prev_t = t;
        prev_r = r;
    }

    if all_nan {
        return Err(Error::DegenerateEfficacy(
            "K' vanishes everywhere on the bracket; no planning/execution coupling exists".into(),
        ));
    }

    let mut candidates: Vec<(f64, f64, f64, bool)> = Vec::new(); // (t_m, t_e, u, second_order)
    for t_m in roots {
        let Ok(t_e) = execution_time_given_planning(a, b, efficacy, t_m) else {
            continue;
        };
        let Ok(u) = comprehensive_utility(&profile, cost, t_mm, t_m, t_e) else {
            continue;
        };
        if u.is_finite() {
            let hessian_ok = check_hessian(&profile, cost, t_mm, t_m, t_e)
                .map(|h| h.ok)
                .unwrap_or(false);
            candidates.push((t_m, t_e, u, hessian_ok));
        }
    }

    // The t_m = 0 boundary is a stopping-only solve at the base rate.
    let base_rate = efficacy.rate(0.0)?;
    if base_rate > 0.0 {
        let base = PerformanceProfile::InversePower {
            k: base_rate.powf(b),
            a,
        };
        if let Ok(stop) = solve_stop_generic(&base, cost, t_mm, search) {
            candidates.push((0.0, stop.exec_time, stop.utility, stop.second_order_ok));
        }
    }

    if candidates.is_empty() {
        return Err(Error::Bracket("no finite partition candidate found".into()));
    }

    candidates.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut best = candidates[0];
    for &cand in &candidates[1..] {
        if cand.2 > best.2 {
            best = cand;
        }
    }
    let (plan_time, exec_time, utility, second_order) = best;
    Ok(build_solution(
        plan_time,
        exec_time,
        utility,
        t_mm,
        plan_time == 0.0,
        second_order,
        SolveMethod::FixedPoint,
    ))
}

fn bisect_residual(residual: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, r_lo: f64) -> f64 {
    let lo_positive = r_lo >= 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual(mid);
        if r == 0.0 {
            return mid;
        }
        if (r >= 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Partition solve by the 2-D grid-refinement oracle, for partitioned
/// profiles with no exploitable stationarity structure.
pub fn solve_partition_grid(
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    search: &OracleConfig,
) -> Result<PartitionSolution> {
    profile.validate()?;
    cost.validate()?;
    if !profile.is_partitioned() {
        return Err(Error::Parameter(
            "solve_partition_grid needs a partitioned profile".into(),
        ));
    }

    let objective = |t_m: f64, t_e: f64| {
        comprehensive_utility(profile, cost, t_mm, t_m, t_e).unwrap_or(f64::NAN)
    };
    let opt = grid_max_2d(objective, search)?;
    let (plan_time, exec_time) = (opt.args[0], opt.args[1]);

    let hessian_ok = if plan_time > 0.0 && exec_time > 0.0 {
        check_hessian(profile, cost, t_mm, plan_time, exec_time)?.ok
    } else if exec_time > 0.0 {
        let curvature = profile.second_partials(plan_time, exec_time)?.exec_exec
            - cost.second_deriv(plan_time + exec_time + t_mm.seconds())?;
        curvature < 0.0
    } else {
        true
    };
    Ok(build_solution(
        plan_time,
        exec_time,
        opt.value,
        t_mm,
        plan_time == 0.0,
        hessian_ok,
        SolveMethod::Grid2d,
    ))
}

/// Fast partition solve for the exponential profile with a linear cost
/// rate: the inner stopping problem has a closed form for every planning
/// time, leaving a one-variable marginal search over `t_m`.
///
/// For linear efficacy interior maxima satisfy
/// `l ln(K/c) = K^2`, whose descending root is bisected directly; the
/// `t_m = 0` boundary is always compared so planning can never lose to
/// the stopping-only policy.
pub fn solve_partition_exponential(
    efficacy: &MetaEfficacy,
    c: f64,
    t_mm: MetaMetaCost,
    search: &OracleConfig,
) -> Result<PartitionSolution> {
    require_exponent("c", c)?;
    efficacy.validate()?;
    let profile = PerformanceProfile::PartitionedExponential {
        efficacy: efficacy.clone(),
    };
    let cost = CostModel::Linear { c };

    // Closed-form inner stopping time at rate K.
    let inner_exec = |rate: f64| {
        if rate > c {
            (rate / c).ln() / rate
        } else {
            0.0
        }
    };
    let value_at = |t_m: f64| -> Result<f64> {
        let t_e = inner_exec(efficacy.rate(t_m)?);
        comprehensive_utility(&profile, &cost, t_mm, t_m, t_e)
    };

    let mut candidates: Vec<f64> = vec![0.0];
    match efficacy {
        MetaEfficacy::Linear { k_o, l } => {
            if *l > 0.0 {
                // phi(K) = l ln(K/c) - K^2 is unimodal with peak at sqrt(l/2);
                // the descending root bounds the interior maximum of value.
                let phi = |rate: f64| l * (rate / c).ln() - rate * rate;
                let peak = (l / 2.0).sqrt();
                let start = peak.max(*k_o);
                if start > c && phi(start) > 0.0 {
                    let mut hi = start * 2.0;
                    let mut doublings = 0;
                    while phi(hi) > 0.0 {
                        hi *= 2.0;
                        doublings += 1;
                        if doublings > search.max_doublings {
                            return Err(Error::Bracket(
                                "marginal planning benefit never fell below cost".into(),
                            ));
                        }
                    }
                    let root = bisect_residual(&phi, start, hi, phi(start));
                    if root > *k_o {
                        candidates.push((root - k_o) / l);
                    }
                }
            }
        }
        MetaEfficacy::Tabulated { .. } => {
            // No algebraic structure; locate the outer maximum by grid.
            let outer = |t_m: f64| value_at(t_m).unwrap_or(f64::NAN);
            let cfg = OracleConfig {
                coarse_points: 1024,
                ..search.clone()
            };
            let opt = crate::oracle::grid_max_1d(outer, &cfg)?;
            candidates.push(opt.args[0]);
        }
    }

    let mut best: Option<(f64, f64)> = None;
    for &t_m in &candidates {
        let Ok(u) = value_at(t_m) else { continue };
        if u.is_finite() && best.is_none_or(|(_, bu)| u > bu) {
            best = Some((t_m, u));
        }
    }
    let (plan_time, utility) =
        best.ok_or_else(|| Error::Bracket("no finite planning candidate".into()))?;
    let exec_time = inner_exec(efficacy.rate(plan_time)?);

    let hessian_ok = if plan_time > 0.0 && exec_time > 0.0 {
        check_hessian(&profile, &cost, t_mm, plan_time, exec_time)?.ok
    } else if exec_time > 0.0 {
        profile.second_partials(plan_time, exec_time)?.exec_exec < 0.0
    } else {
        true
    };
    Ok(build_solution(
        plan_time,
        exec_time,
        utility,
        t_mm,
        plan_time == 0.0,
        hessian_ok,
        SolveMethod::MarginalSearch,
    ))
}

/// Dispatches a partitioned profile to the strongest applicable solver.
pub fn solve_partition(
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    search: &OracleConfig,
) -> Result<PartitionSolution> {
    profile.validate()?;
    cost.validate()?;
    match profile {
        PerformanceProfile::PartitionedInversePower { efficacy, b, a } => match (efficacy, cost) {
            (MetaEfficacy::Linear { k_o, l }, CostModel::Linear { c }) if *l > 0.0 => {
                solve_partition_closed_form(*a, *b, *k_o, *l, *c, t_mm)
            }
            (MetaEfficacy::Linear { k_o, l }, _) if *l == 0.0 => {
                degenerate_boundary_inverse_power(*a, *b, *k_o, cost, t_mm, search)
            }
            _ => solve_partition_fixed_point(*a, *b, efficacy, cost, t_mm, search),
        },
        PerformanceProfile::PartitionedExponential { efficacy } => {
            if let (MetaEfficacy::Linear { k_o, l }, CostModel::Linear { c }) = (efficacy, cost) {
                if *l == 0.0 {
                    let stop = crate::stopping::solve_stop_exponential(*k_o, *c, t_mm)?;
                    return Ok(build_solution(
                        0.0,
                        stop.exec_time,
                        stop.utility,
                        t_mm,
                        true,
                        stop.second_order_ok,
                        SolveMethod::ClosedForm,
                    ));
                }
            }
            let cfg = if search.coarse_points > 256 {
                OracleConfig::two_dim()
            } else {
                search.clone()
            };
            solve_partition_grid(profile, cost, t_mm, &cfg)
        }
        _ => Err(Error::Parameter(
            "solve_partition needs a partitioned profile; use the stopping solvers".into(),
        )),
    }
}

/// Planning has no effect: clamp to `t_m = 0` and solve the residual
/// stopping problem at the base rate.
fn degenerate_boundary_inverse_power(
    a: f64,
    b: f64,
    k_o: f64,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    search: &OracleConfig,
) -> Result<PartitionSolution> {
    if !(k_o > 0.0) {
        return Err(Error::DegenerateEfficacy(
            "zero efficacy slope with zero base rate leaves no usable profile".into(),
        ));
    }
    let base = PerformanceProfile::InversePower { k: k_o.powf(b), a };
    let stop = solve_stop_generic(&base, cost, t_mm, search)?;
    Ok(build_solution(
        0.0,
        stop.exec_time,
        stop.utility,
        t_mm,
        true,
        stop.second_order_ok,
        SolveMethod::ClosedForm,
    ))
}

/// Hessian of comprehensive utility at `(t_m, t_e)`, with the
/// negative-semidefiniteness verdict used to confirm interior maxima.
///
/// Analytic second partials for the parametric families; finite
/// differences when a tabulated efficacy or cost is involved (their
/// second derivatives vanish almost everywhere, so differencing the
/// utility itself is the honest check).
pub fn check_hessian(
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    t_m: f64,
    t_e: f64,
) -> Result<HessianCheck> {
    let tabulated = matches!(cost, CostModel::Tabulated { .. })
        || matches!(
            profile,
            PerformanceProfile::PartitionedExponential {
                efficacy: MetaEfficacy::Tabulated { .. }
            } | PerformanceProfile::PartitionedInversePower {
                efficacy: MetaEfficacy::Tabulated { .. },
                ..
            }
        );

    let (matrix, tol) = if tabulated {
        let f = |tm: f64, te: f64| {
            comprehensive_utility(profile, cost, t_mm, tm, te).unwrap_or(f64::NAN)
        };
        let h_m = (1e-5 * t_m.abs().max(1.0)).min(if t_m > 0.0 { t_m / 2.0 } else { f64::MAX });
        let h_e = (1e-5 * t_e.abs().max(1.0)).min(if t_e > 0.0 { t_e / 2.0 } else { f64::MAX });
        let center = f(t_m, t_e);
        let dmm = (f(t_m + h_m, t_e) - 2.0 * center + f(t_m - h_m, t_e)) / (h_m * h_m);
        let dee = (f(t_m, t_e + h_e) - 2.0 * center + f(t_m, t_e - h_e)) / (h_e * h_e);
        let dme = (f(t_m + h_m, t_e + h_e) - f(t_m + h_m, t_e - h_e) - f(t_m - h_m, t_e + h_e)
            + f(t_m - h_m, t_e - h_e))
            / (4.0 * h_m * h_e);
        if !dmm.is_finite() || !dee.is_finite() || !dme.is_finite() {
            return Err(Error::Domain(format!(
                "Hessian stencil around ({t_m}, {t_e}) left the model domain"
            )));
        }
        let m = [[dmm, dme], [dme, dee]];
        let scale = dmm.abs().max(dee.abs()).max(dme.abs());
        (m, 1e-10 + 1e-6 * scale)
    } else {
        let sp = profile.second_partials(t_m, t_e)?;
        let cdd = cost.second_deriv(t_m + t_e + t_mm.seconds())?;
        (
            [
                [sp.plan_plan - cdd, sp.plan_exec - cdd],
                [sp.plan_exec - cdd, sp.exec_exec - cdd],
            ],
            1e-10,
        )
    };

    let mean = 0.5 * (matrix[0][0] + matrix[1][1]);
    let spread = (0.25 * (matrix[0][0] - matrix[1][1]).powi(2) + matrix[0][1].powi(2)).sqrt();
    let eigenvalues = (mean - spread, mean + spread);
    Ok(HessianCheck {
        matrix,
        eigenvalues,
        ok: eigenvalues.1 <= tol,
    })
}

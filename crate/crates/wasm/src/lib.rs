//! Browser demo bindings: JSON-in/JSON-out views over the core solvers,
//! small enough to wire straight to sliders and a canvas.
//!
//! Each exported function takes a JSON request string and returns a JSON
//! response with the solved schedule and the curve data the page plots.
//! Build with `wasm-pack build crates/wasm --target web`; the same
//! functions run natively, which is how the tests exercise them.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use deliberate::{
    comprehensive_utility, solve_goal_linear, solve_partition, solve_stop, CostModel, Error,
    MetaEfficacy, MetaMetaCost, OracleConfig, PerformanceProfile, SolveMethod,
};

fn err_to_js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

// ---------------------------------------------------------------------------
// Stopping: the economics of halting a refinement
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct StoppingRequest {
    profile: PerformanceProfile,
    cost: CostModel,
    #[serde(default)]
    t_mm: f64,
    t_max: f64,
    #[serde(default = "default_points")]
    points: usize,
}

fn default_points() -> usize {
    240
}

#[derive(Serialize)]
struct StoppingResponse {
    exec_time: f64,
    total_time: f64,
    utility: f64,
    at_boundary: bool,
    method: SolveMethod,
    /// Rows of `(t_e, value, cost, utility)` for the decomposition plot.
    curve: Vec<[f64; 4]>,
}

fn stopping_view_impl(request: &str) -> Result<String, Error> {
    let req: StoppingRequest =
        serde_json::from_str(request).map_err(|e| Error::config("request", e.to_string()))?;
    let t_mm = MetaMetaCost::new(req.t_mm)?;
    let sol = solve_stop(&req.profile, &req.cost, t_mm, &OracleConfig::one_dim())?;

    let n = req.points.clamp(2, 4096);
    let mut curve = Vec::with_capacity(n);
    for i in 0..n {
        let t_e = req.t_max * i as f64 / (n - 1) as f64;
        let value = req.profile.value(0.0, t_e).unwrap_or(f64::NAN);
        let cost = req.cost.value(t_e + req.t_mm).unwrap_or(f64::NAN);
        curve.push([t_e, value, cost, value - cost]);
    }
    let response = StoppingResponse {
        exec_time: sol.exec_time,
        total_time: sol.total_time,
        utility: sol.utility,
        at_boundary: sol.at_boundary,
        method: sol.method,
        curve,
    };
    serde_json::to_string(&response).map_err(|e| Error::config("response", e.to_string()))
}

/// Solve a stopping problem and return the value/cost/utility curves.
#[wasm_bindgen]
pub fn stopping_view(request: &str) -> Result<String, JsError> {
    stopping_view_impl(request).map_err(err_to_js)
}

// ---------------------------------------------------------------------------
// Partition: splitting time between planning and execution
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct PartitionRequest {
    a: f64,
    b: f64,
    k_o: f64,
    l: f64,
    c: f64,
    #[serde(default)]
    t_mm: f64,
    #[serde(default = "default_points")]
    points: usize,
}

#[derive(Serialize)]
struct PartitionResponse {
    plan_time: f64,
    exec_time: f64,
    total_time: f64,
    utility: f64,
    at_boundary: bool,
    hessian_ok: bool,
    /// `(t_m, utility)` with execution fixed at its optimum.
    plan_slice: Vec<[f64; 2]>,
    /// `(t_e, utility)` with planning fixed at its optimum.
    exec_slice: Vec<[f64; 2]>,
}

fn partition_view_impl(request: &str) -> Result<String, Error> {
    let req: PartitionRequest =
        serde_json::from_str(request).map_err(|e| Error::config("request", e.to_string()))?;
    let t_mm = MetaMetaCost::new(req.t_mm)?;
    let profile = PerformanceProfile::PartitionedInversePower {
        efficacy: MetaEfficacy::Linear {
            k_o: req.k_o,
            l: req.l,
        },
        b: req.b,
        a: req.a,
    };
    let cost = CostModel::Linear { c: req.c };
    let sol = solve_partition(&profile, &cost, t_mm, &OracleConfig::two_dim())?;

    let n = req.points.clamp(2, 4096);
    let span = |center: f64| {
        let hi = (2.5 * center).max(1.0);
        let lo = hi * 1e-3;
        (lo, hi)
    };
    let slice = |along_plan: bool| -> Vec<[f64; 2]> {
        let (lo, hi) = span(if along_plan {
            sol.plan_time
        } else {
            sol.exec_time
        });
        (0..n)
            .map(|i| {
                let v = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let (t_m, t_e) = if along_plan {
                    (v, sol.exec_time)
                } else {
                    (sol.plan_time, v)
                };
                let u = comprehensive_utility(&profile, &cost, t_mm, t_m, t_e).unwrap_or(f64::NAN);
                [v, u]
            })
            .collect()
    };
    let response = PartitionResponse {
        plan_time: sol.plan_time,
        exec_time: sol.exec_time,
        total_time: sol.total_time,
        utility: sol.utility,
        at_boundary: sol.at_boundary,
        hessian_ok: sol.hessian_ok,
        plan_slice: slice(true),
        exec_slice: slice(false),
    };
    serde_json::to_string(&response).map_err(|e| Error::config("response", e.to_string()))
}

/// Solve a planning/execution partition and return the two utility
/// slices through the optimum.
#[wasm_bindgen]
pub fn partition_view(request: &str) -> Result<String, JsError> {
    partition_view_impl(request).map_err(err_to_js)
}

// ---------------------------------------------------------------------------
// Goal: minimal total time to a target quality
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct GoalRequest {
    k_o: f64,
    l: f64,
    f: f64,
    #[serde(default)]
    t_mm: f64,
    #[serde(default = "default_points")]
    points: usize,
}

#[derive(Serialize)]
struct GoalResponse {
    plan_time: f64,
    exec_time: f64,
    total_time: f64,
    at_boundary: bool,
    /// Rows of `(f, plan_time, exec_time, total_time)` swept over the
    /// target fraction.
    curve: Vec<[f64; 4]>,
}

fn goal_view_impl(request: &str) -> Result<String, Error> {
    let req: GoalRequest =
        serde_json::from_str(request).map_err(|e| Error::config("request", e.to_string()))?;
    let t_mm = MetaMetaCost::new(req.t_mm)?;
    let sol = solve_goal_linear(req.k_o, req.l, req.f, t_mm)?;

    let n = req.points.clamp(2, 4096);
    let (lo, hi) = (0.02, 0.99);
    let mut curve = Vec::with_capacity(n);
    for i in 0..n {
        let f = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let point = solve_goal_linear(req.k_o, req.l, f, t_mm)?;
        curve.push([f, point.plan_time, point.exec_time, point.total_time]);
    }
    let response = GoalResponse {
        plan_time: sol.plan_time,
        exec_time: sol.exec_time,
        total_time: sol.total_time,
        at_boundary: sol.at_boundary,
        curve,
    };
    serde_json::to_string(&response).map_err(|e| Error::config("response", e.to_string()))
}

/// Solve a goal-directed split and return the schedule curves over the
/// target fraction.
#[wasm_bindgen]
pub fn goal_view(request: &str) -> Result<String, JsError> {
    goal_view_impl(request).map_err(err_to_js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stopping_view_returns_the_reference_solution_and_curve() {
        let response = stopping_view_impl(
            r#"{
                "profile": {"type": "exponential", "k": 0.1},
                "cost": {"type": "linear", "c": 0.04},
                "t_mm": 0.01,
                "t_max": 30.0,
                "points": 121
            }"#,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&response).unwrap();
        assert!((v["exec_time"].as_f64().unwrap() - 9.163).abs() <= 1e-2);
        assert!((v["utility"].as_f64().unwrap() - 0.233).abs() <= 1e-3);
        let curve = v["curve"].as_array().unwrap();
        assert_eq!(curve.len(), 121);
        // Decomposition holds on every row.
        for row in curve {
            let row = row.as_array().unwrap();
            let (value, cost, utility) = (
                row[1].as_f64().unwrap(),
                row[2].as_f64().unwrap(),
                row[3].as_f64().unwrap(),
            );
            assert!((utility - (value - cost)).abs() <= 1e-12);
        }
    }

    #[test]
    fn partition_view_slices_peak_at_the_optimum() {
        let response = partition_view_impl(
            r#"{"a": 1.0, "b": 1.0, "k_o": 0.0, "l": 1.0, "c": 0.01, "points": 301}"#,
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&response).unwrap();
        let plan = v["plan_time"].as_f64().unwrap();
        assert!((plan - 100f64.cbrt()).abs() <= 1e-9);

        let slice = v["plan_slice"].as_array().unwrap();
        let (mut best_t, mut best_u) = (f64::NAN, f64::NEG_INFINITY);
        for row in slice {
            let row = row.as_array().unwrap();
            let (t, u) = (row[0].as_f64().unwrap(), row[1].as_f64().unwrap());
            if u > best_u {
                best_u = u;
                best_t = t;
            }
        }
        let spacing = 2.5 * plan / 300.0;
        assert!(
            (best_t - plan).abs() <= spacing,
            "slice peak {best_t} vs optimum {plan}"
        );
    }

    #[test]
    fn goal_view_total_time_curve_is_nondecreasing() {
        let response = goal_view_impl(r#"{"k_o": 0.1, "l": 1.0, "f": 0.9, "points": 80}"#).unwrap();
        let v: serde_json::Value = serde_json::from_str(&response).unwrap();
        assert!((v["plan_time"].as_f64().unwrap() - 1.4174).abs() <= 1e-4);
        let curve = v["curve"].as_array().unwrap();
        let totals: Vec<f64> = curve
            .iter()
            .map(|row| row.as_array().unwrap()[3].as_f64().unwrap())
            .collect();
        for pair in totals.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12);
        }
    }

    #[test]
    fn malformed_requests_are_rejected() {
        assert!(stopping_view_impl("{}").is_err());
        assert!(partition_view_impl(r#"{"a": -1, "b": 1, "k_o": 0, "l": 1, "c": 0.01}"#).is_err());
        assert!(goal_view_impl(r#"{"k_o": 0.1, "l": 1.0, "f": 1.5}"#).is_err());
    }
}

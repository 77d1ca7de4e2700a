//! End-to-end checks of the `deliberate` binary: exit-status contract,
//! report contents, sweep shape, and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use deliberate::config::Report;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_deliberate")
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout should be utf-8")
}

fn write_temp_config(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("deliberate-test-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn stopping_example_reproduces_the_reference_numbers() {
    let output = run_cli(&[
        "solve-stopping",
        "--config",
        config_path("stopping_example.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report: Report = serde_json::from_str(&stdout_of(&output)).unwrap();
    let Report::Stopping {
        exec_time,
        utility,
        at_boundary,
        ..
    } = report
    else {
        panic!("expected stopping report");
    };
    assert!((exec_time - 9.16).abs() <= 0.01);
    assert!((utility - 0.23).abs() <= 0.005);
    assert!(!at_boundary);
}

#[test]
fn text_report_prints_the_headline_numbers() {
    let output = run_cli(&[
        "solve-stopping",
        "--config",
        config_path("stopping_double_cost.json").to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let text = stdout_of(&output);
    assert!(text.contains("stopping solution"));
    assert!(text.contains("2.23"), "text was:\n{text}");
}

#[test]
fn boundary_configuration_is_flagged() {
    let path = write_temp_config(
        "boundary.json",
        r#"{
            "model": {
                "profile": {"type": "exponential", "k": 0.1},
                "cost": {"type": "linear", "c": 0.2}
            },
            "task": {"type": "stopping"}
        }"#,
    );
    let output = run_cli(&[
        "solve-stopping",
        "--config",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let report: Report = serde_json::from_str(&stdout_of(&output)).unwrap();
    let Report::Stopping {
        exec_time,
        at_boundary,
        ..
    } = report
    else {
        panic!()
    };
    assert_eq!(exec_time, 0.0);
    assert!(at_boundary);
}

#[test]
fn cost_sweep_emits_monotone_rows() {
    let output = run_cli(&[
        "solve-stopping",
        "--config",
        config_path("stopping_cost_sweep.json").to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let csv = stdout_of(&output);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("c,exec_time,total_time,utility,at_boundary")
    );
    let execs: Vec<f64> = lines
        .map(|line| line.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(execs.len(), 50);
    for pair in execs.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-12,
            "execution time must not rise with cost"
        );
    }
}

#[test]
fn partition_example_matches_the_closed_form() {
    let output = run_cli(&[
        "solve-partition",
        "--config",
        config_path("partition_example.json").to_str().unwrap(),
        "--format",
        "json",
        "--verbose",
    ]);
    assert!(output.status.success());
    let report: Report = serde_json::from_str(&stdout_of(&output)).unwrap();
    let Report::Partition {
        plan_time,
        exec_time,
        utility,
        diagnostics,
        ..
    } = report
    else {
        panic!()
    };
    let s = 100f64.cbrt();
    assert!((plan_time - s).abs() <= 1e-9);
    assert!((exec_time - s).abs() <= 1e-9);
    assert!((utility - 0.8607).abs() <= 1e-4);
    let diag = diagnostics.expect("verbose run carries diagnostics");
    assert!(diag.coupling_residual.unwrap().abs() <= 1e-9);
}

#[test]
fn degenerate_efficiency_reports_a_boundary() {
    let output = run_cli(&[
        "solve-partition",
        "--config",
        config_path("partition_degenerate.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let report: Report = serde_json::from_str(&stdout_of(&output)).unwrap();
    let Report::Partition {
        plan_time,
        at_boundary,
        ..
    } = report
    else {
        panic!()
    };
    assert_eq!(plan_time, 0.0);
    assert!(at_boundary);
}

#[test]
fn goal_example_and_verbose_formula_comparison() {
    let output = run_cli(&[
        "solve-goal",
        "--config",
        config_path("goal_example.json").to_str().unwrap(),
        "--format",
        "json",
        "--verbose",
    ]);
    assert!(output.status.success());
    let report: Report = serde_json::from_str(&stdout_of(&output)).unwrap();
    let Report::Goal {
        plan_time,
        exec_time,
        diagnostics,
        ..
    } = report
    else {
        panic!()
    };
    assert!((plan_time - 1.417).abs() <= 1e-3);
    assert!((exec_time - 1.517).abs() <= 1e-3);
    let diag = diagnostics.unwrap();
    // Unit slope: both closed forms agree.
    let first = diag.plan_time_first_order.unwrap();
    let variant = diag.plan_time_variant.unwrap();
    assert!((first - variant).abs() <= 1e-12);
}

#[test]
fn goal_sweep_total_time_is_nondecreasing() {
    let output = run_cli(&[
        "solve-goal",
        "--config",
        config_path("goal_quality_sweep.json").to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let csv = stdout_of(&output);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("f,plan_time,exec_time,total_time,at_boundary")
    );
    let totals: Vec<f64> = lines
        .map(|line| line.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .collect();
    assert_eq!(totals.len(), 60);
    for pair in totals.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12);
    }
}

#[test]
fn invalid_target_fraction_exits_2_naming_the_field() {
    let path = write_temp_config(
        "bad-goal.json",
        r#"{
            "model": {"efficacy": {"type": "linear", "k_o": 0.1, "l": 1.0}},
            "task": {"type": "goal", "f": 1.5}
        }"#,
    );
    let output = run_cli(&["solve-goal", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("task.f"), "stderr was: {stderr}");
}

#[test]
fn mismatched_subcommand_exits_2() {
    let output = run_cli(&[
        "solve-partition",
        "--config",
        config_path("stopping_example.json").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn flat_tabulated_efficacy_exits_3() {
    let path = write_temp_config(
        "flat-efficacy.json",
        r#"{
            "model": {
                "profile": {"type": "partitioned_inverse_power", "a": 1.0, "b": 1.0},
                "efficacy": {"type": "tabulated", "points": [[0.0, 1.0], [1.0, 1.0]]},
                "cost": {"type": "linear", "c": 0.01}
            },
            "task": {"type": "partition"}
        }"#,
    );
    let output = run_cli(&["solve-partition", "--config", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("degenerate"), "stderr was: {stderr}");
}

#[test]
fn identical_agents_value_exactly_zero() {
    let path = write_temp_config(
        "identical-agents.json",
        r#"{
            "task": {
                "type": "environment",
                "distribution": {"type": "discrete", "instances": [{"c": 0.04, "k": 0.1, "p": 1.0}]},
                "frequency": 1.0,
                "lifetime": 1.0,
                "agent1": {"kind": "reflection_only", "shape": {"type": "exponential"}, "t_mm": 0.01},
                "agent2": {"kind": "reflection_only", "shape": {"type": "exponential"}, "t_mm": 0.01}
            }
        }"#,
    );
    let output = run_cli(&[
        "eval-environment",
        "--config",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let report: Report = serde_json::from_str(&stdout_of(&output)).unwrap();
    let Report::Environment { value, .. } = report else {
        panic!()
    };
    assert_eq!(value, 0.0);
}

#[test]
fn discrete_environment_matches_the_hand_expansion() {
    let output = run_cli(&[
        "eval-environment",
        "--config",
        config_path("environment_discrete.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let report: Report = serde_json::from_str(&stdout_of(&output)).unwrap();
    let Report::Environment { value, .. } = report else {
        panic!()
    };
    // 200 * (p1*d1 + p2*d2), recomputed through the library.
    let policy = |planning: bool| {
        if planning {
            deliberate::AgentPolicy::ReflectionAndPlanning {
                shape: deliberate::ProfileShape::Exponential,
                efficacy_slope: 0.5,
                t_mm: deliberate::MetaMetaCost::new(0.01).unwrap(),
            }
        } else {
            deliberate::AgentPolicy::ReflectionOnly {
                shape: deliberate::ProfileShape::Exponential,
                t_mm: deliberate::MetaMetaCost::new(0.01).unwrap(),
            }
        }
    };
    let d = |c: f64, k: f64| {
        let instance = deliberate::ProblemInstance {
            cost_rate: c,
            solution_rate: k,
        };
        deliberate::instance_optimal_utility(&policy(true), &instance).unwrap()
            - deliberate::instance_optimal_utility(&policy(false), &instance).unwrap()
    };
    let expected = 200.0 * (0.25 * d(0.04, 0.1) + 0.75 * d(0.02, 0.5));
    assert!((value - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    assert!(value >= 0.0);
}

#[test]
fn monte_carlo_output_is_byte_identical_per_seed() {
    let config = config_path("environment_log_uniform.json");
    let args = [
        "eval-environment",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
        "--seed",
        "99",
        "--samples",
        "2000",
    ];
    let first = run_cli(&args);
    let second = run_cli(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let report: Report = serde_json::from_str(&stdout_of(&first)).unwrap();
    let Report::Environment {
        std_error, samples, ..
    } = report
    else {
        panic!()
    };
    assert_eq!(samples, Some(2000));
    assert!(std_error.unwrap() > 0.0);
}

#[test]
fn output_path_writes_the_rendered_file() {
    let destination =
        std::env::temp_dir().join(format!("deliberate-test-{}-curve.csv", std::process::id()));
    let output = run_cli(&[
        "solve-stopping",
        "--config",
        config_path("stopping_economics_curve.json")
            .to_str()
            .unwrap(),
        "--output",
        destination.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    assert!(stdout_of(&output).is_empty());
    let written = std::fs::read_to_string(&destination).unwrap();
    assert!(written.starts_with("t_e,value,cost,utility\n"));
    assert_eq!(written.lines().count(), 302);
    std::fs::remove_file(destination).ok();
}

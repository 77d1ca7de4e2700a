//! JSON run configuration, solution reports, and sweep emission — the
//! machinery shared by the command-line front end and the browser demo.
//!
//! A run configuration names one task (stopping, partition, goal, or
//! environment), a model section where the task needs one, an optional
//! sweep over a named parameter, and an output preference. Reports
//! serialize to JSON that re-parses under the same types; sweeps emit CSV
//! with a header row and 12-significant-digit decimals.

use serde::{Deserialize, Serialize};

use crate::environment::{
    value_of_metareasoning, AgentPolicy, Environment, InstanceDistribution, IntegrandKind,
    Valuation, ValuationMethod,
};
use crate::error::{Error, Result};
use crate::goal::{
    linear_stationary_plan_time, linear_variant_plan_time, solve_goal, GoalSolution, GoalSpec,
};
use crate::models::{
    comprehensive_utility, CostModel, MetaEfficacy, MetaMetaCost, PerformanceProfile, Wrt,
};
use crate::oracle::OracleConfig;
use crate::partition::{execution_time_given_planning, solve_partition, PartitionSolution};
use crate::stopping::{solve_stop, SolveMethod, StoppingSolution};

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    pub task: TaskSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

/// Model ingredients; which ones are required depends on the task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficacy: Option<MetaEfficacy>,
    #[serde(default)]
    pub t_mm: f64,
}

/// Profile selector; partitioned variants pull the efficacy function from
/// the model section's `efficacy` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProfileSpec {
    Exponential { k: f64 },
    InversePower { k: f64, a: f64 },
    PartitionedExponential,
    PartitionedInversePower { a: f64, b: f64 },
}

impl ProfileSpec {
    fn build(&self, efficacy: Option<&MetaEfficacy>) -> Result<PerformanceProfile> {
        let need_efficacy = || {
            efficacy.cloned().ok_or_else(|| {
                Error::config(
                    "model.efficacy",
                    "partitioned profiles need an efficacy function",
                )
            })
        };
        Ok(match self {
            Self::Exponential { k } => PerformanceProfile::Exponential { k: *k },
            Self::InversePower { k, a } => PerformanceProfile::InversePower { k: *k, a: *a },
            Self::PartitionedExponential => PerformanceProfile::PartitionedExponential {
                efficacy: need_efficacy()?,
            },
            Self::PartitionedInversePower { a, b } => PerformanceProfile::PartitionedInversePower {
                efficacy: need_efficacy()?,
                b: *b,
                a: *a,
            },
        })
    }

    fn is_partitioned(&self) -> bool {
        matches!(
            self,
            Self::PartitionedExponential | Self::PartitionedInversePower { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TaskSection {
    Stopping,
    Partition,
    Goal {
        f: f64,
    },
    Environment {
        distribution: InstanceDistribution,
        frequency: f64,
        lifetime: f64,
        agent1: AgentPolicy,
        agent2: AgentPolicy,
        #[serde(default)]
        method: EnvMethod,
        #[serde(default = "default_quadrature_order")]
        quadrature_order: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        integrand: IntegrandKind,
    },
}

fn default_quadrature_order() -> usize {
    32
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvMethod {
    #[default]
    Quadrature,
    MonteCarlo,
}

/// Task discriminant, used by the front end to match subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Stopping,
    Partition,
    Goal,
    Environment,
}

impl TaskSection {
    pub fn kind(&self) -> TaskKind {
        match self {
            Self::Stopping => TaskKind::Stopping,
            Self::Partition => TaskKind::Partition,
            Self::Goal { .. } => TaskKind::Goal,
            Self::Environment { .. } => TaskKind::Environment,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    pub parameter: String,
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    /// Destination path; `-` or absent means standard output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Front-end overrides applied on top of the parsed configuration.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub verbose: bool,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

pub fn parse_config(json: &str) -> Result<RunConfig> {
    serde_json::from_str(json).map_err(|e| Error::config("config", e.to_string()))
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Report {
    Stopping {
        exec_time: f64,
        total_time: f64,
        utility: f64,
        at_boundary: bool,
        second_order_ok: bool,
        method: SolveMethod,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagnostics: Option<StoppingDiagnostics>,
    },
    Partition {
        plan_time: f64,
        exec_time: f64,
        total_time: f64,
        utility: f64,
        at_boundary: bool,
        hessian_ok: bool,
        method: SolveMethod,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagnostics: Option<PartitionDiagnostics>,
    },
    Goal {
        plan_time: f64,
        exec_time: f64,
        total_time: f64,
        at_boundary: bool,
        second_order_ok: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagnostics: Option<GoalDiagnostics>,
    },
    Environment {
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        std_error: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
        method: EnvMethod,
    },
}

/// First-order residual printed in verbose mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingDiagnostics {
    /// `u_o'(t_e*) - cost'(t_e* + t_mm)`.
    pub foc_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDiagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_foc_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exec_foc_residual: Option<f64>,
    /// Relative gap between the returned execution time and the coupled
    /// value implied by the planning time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hessian_eigenvalues: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalDiagnostics {
    /// `K(t_m*)^2 / K'(t_m*) + ln(1 - f)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationarity_residual: Option<f64>,
    /// Stationary planning time from the first-order condition (linear
    /// efficacy only), before boundary clamping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_time_first_order: Option<f64>,
    /// The alternative closed form, reported side by side; it matches the
    /// first-order value only at unit efficiency slope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_time_variant: Option<f64>,
}

// ---------------------------------------------------------------------------
// Sweep output
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: SweepRows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepRows {
    /// One full re-solve per swept value.
    Solver(Vec<SolverRow>),
    /// Utility along one time axis with the other fixed at its optimum.
    Slice(Vec<SliceRow>),
    /// Value/cost/utility decomposition over execution time.
    Economics(Vec<EconomicsRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverRow {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_time: Option<f64>,
    pub exec_time: f64,
    pub total_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<f64>,
    pub at_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub value: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicsRow {
    pub exec_time: f64,
    pub value: f64,
    pub cost: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskOutput {
    Report(Box<Report>),
    Sweep(SweepTable),
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

impl RunConfig {
    /// Full validation with field-named errors; runs before any solve.
    pub fn validate(&self) -> Result<()> {
        match &self.task {
            TaskSection::Stopping => {
                let model = self.require_model()?;
                let spec = model.profile.as_ref().ok_or_else(|| {
                    Error::config("model.profile", "stopping task needs a profile")
                })?;
                if spec.is_partitioned() {
                    return Err(Error::config(
                        "model.profile",
                        "stopping task needs a non-partitioned profile",
                    ));
                }
                let profile = spec.build(model.efficacy.as_ref())?;
                profile
                    .validate()
                    .map_err(|e| Error::config("model.profile", e.to_string()))?;
                self.require_cost(model)?;
                self.check_t_mm(model)?;
            }
            TaskSection::Partition => {
                let model = self.require_model()?;
                let spec = model.profile.as_ref().ok_or_else(|| {
                    Error::config("model.profile", "partition task needs a profile")
                })?;
                if !spec.is_partitioned() {
                    return Err(Error::config(
                        "model.profile",
                        "partition task needs a partitioned profile",
                    ));
                }
                let profile = spec.build(model.efficacy.as_ref())?;
                profile
                    .validate()
                    .map_err(|e| Error::config("model.profile", e.to_string()))?;
                self.require_cost(model)?;
                self.check_t_mm(model)?;
            }
            TaskSection::Goal { f } => {
                let model = self.require_model()?;
                let efficacy = model.efficacy.as_ref().ok_or_else(|| {
                    Error::config("model.efficacy", "goal task needs an efficacy function")
                })?;
                efficacy
                    .validate()
                    .map_err(|e| Error::config("model.efficacy", e.to_string()))?;
                if !f.is_finite() || *f <= 0.0 || *f >= 1.0 {
                    return Err(Error::config(
                        "task.f",
                        format!("target fraction must lie strictly inside (0, 1), got {f}"),
                    ));
                }
                self.check_t_mm(model)?;
            }
            TaskSection::Environment {
                distribution,
                frequency,
                lifetime,
                agent1,
                agent2,
                quadrature_order,
                samples,
                ..
            } => {
                distribution
                    .validate()
                    .map_err(|e| Error::config("task.distribution", e.to_string()))?;
                if !(*frequency > 0.0 && frequency.is_finite()) {
                    return Err(Error::config("task.frequency", "must be finite and > 0"));
                }
                if !(*lifetime > 0.0 && lifetime.is_finite()) {
                    return Err(Error::config("task.lifetime", "must be finite and > 0"));
                }
                agent1
                    .validate()
                    .map_err(|e| Error::config("task.agent1", e.to_string()))?;
                agent2
                    .validate()
                    .map_err(|e| Error::config("task.agent2", e.to_string()))?;
                if *quadrature_order == 0 {
                    return Err(Error::config("task.quadrature_order", "must be positive"));
                }
                if *samples < 2 {
                    return Err(Error::config("task.samples", "must be at least 2"));
                }
                if self.sweep.is_some() {
                    return Err(Error::config(
                        "sweep",
                        "sweeps apply to the stopping, partition, and goal tasks only",
                    ));
                }
            }
        }

        if let Some(sweep) = &self.sweep {
            if sweep.points < 2 {
                return Err(Error::config("sweep.points", "need at least 2 points"));
            }
            if !sweep.from.is_finite() || !sweep.to.is_finite() || sweep.from >= sweep.to {
                return Err(Error::config(
                    "sweep",
                    "range must satisfy from < to, both finite",
                ));
            }
            self.check_sweep_parameter(sweep)?;
        }
        Ok(())
    }

    fn require_model(&self) -> Result<&ModelSection> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::config("model", "this task needs a model section"))
    }

    fn require_cost(&self, model: &ModelSection) -> Result<()> {
        let cost = model
            .cost
            .as_ref()
            .ok_or_else(|| Error::config("model.cost", "this task needs a cost model"))?;
        cost.validate()
            .map_err(|e| Error::config("model.cost", e.to_string()))
    }

    fn check_t_mm(&self, model: &ModelSection) -> Result<()> {
        MetaMetaCost::new(model.t_mm)
            .map(|_| ())
            .map_err(|e| Error::config("model.t_mm", e.to_string()))
    }

    /// The sweep parameter must exist in the configured model/task.
    fn check_sweep_parameter(&self, sweep: &SweepSection) -> Result<()> {
        let model = self.model.as_ref();
        let profile = model.and_then(|m| m.profile.as_ref());
        let cost = model.and_then(|m| m.cost.as_ref());
        let efficacy = model.and_then(|m| m.efficacy.as_ref());
        let kind = self.task.kind();

        let ok = match sweep.parameter.as_str() {
            "k" => matches!(
                profile,
                Some(ProfileSpec::Exponential { .. }) | Some(ProfileSpec::InversePower { .. })
            ),
            "a" => matches!(
                profile,
                Some(ProfileSpec::InversePower { .. })
                    | Some(ProfileSpec::PartitionedInversePower { .. })
            ),
            "b" => matches!(profile, Some(ProfileSpec::PartitionedInversePower { .. })),
            "c" => matches!(
                cost,
                Some(CostModel::Linear { .. }) | Some(CostModel::Power { .. })
            ),
            "p" => matches!(cost, Some(CostModel::Power { .. })),
            "k_o" | "l" => {
                matches!(efficacy, Some(MetaEfficacy::Linear { .. }))
                    && matches!(kind, TaskKind::Partition | TaskKind::Goal)
            }
            "t_mm" => model.is_some(),
            "f" => kind == TaskKind::Goal,
            "t_e" => matches!(kind, TaskKind::Stopping | TaskKind::Partition),
            "t_m" => kind == TaskKind::Partition,
            other => {
                return Err(Error::config(
                    "sweep.parameter",
                    format!("unknown sweep parameter `{other}`"),
                ))
            }
        };
        if !ok {
            return Err(Error::config(
                "sweep.parameter",
                format!(
                    "parameter `{}` does not exist in the configured model/task",
                    sweep.parameter
                ),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// Validates and executes a run configuration.
pub fn run(config: &RunConfig, options: &RunOptions) -> Result<TaskOutput> {
    config.validate()?;
    match &config.sweep {
        None => run_single(config, options).map(|r| TaskOutput::Report(Box::new(r))),
        Some(sweep) => run_sweep(config, sweep).map(TaskOutput::Sweep),
    }
}

fn built_model(model: &ModelSection) -> Result<(PerformanceProfile, CostModel, MetaMetaCost)> {
    let profile = model
        .profile
        .as_ref()
        .ok_or_else(|| Error::config("model.profile", "missing profile"))?
        .build(model.efficacy.as_ref())?;
    let cost = model
        .cost
        .as_ref()
        .ok_or_else(|| Error::config("model.cost", "missing cost"))?
        .clone();
    let t_mm = MetaMetaCost::new(model.t_mm)?;
    Ok((profile, cost, t_mm))
}

fn run_single(config: &RunConfig, options: &RunOptions) -> Result<Report> {
    match &config.task {
        TaskSection::Stopping => {
            let model = config.model.as_ref().expect("validated");
            let (profile, cost, t_mm) = built_model(model)?;
            let sol = solve_stop(&profile, &cost, t_mm, &OracleConfig::one_dim())?;
            Ok(stopping_report(
                &sol,
                &profile,
                &cost,
                t_mm,
                options.verbose,
            ))
        }
        TaskSection::Partition => {
            let model = config.model.as_ref().expect("validated");
            let (profile, cost, t_mm) = built_model(model)?;
            let sol = solve_partition(&profile, &cost, t_mm, &OracleConfig::two_dim())?;
            Ok(partition_report(
                &sol,
                &profile,
                &cost,
                t_mm,
                options.verbose,
            ))
        }
        TaskSection::Goal { f } => {
            let model = config.model.as_ref().expect("validated");
            let efficacy = model.efficacy.clone().expect("validated");
            let t_mm = MetaMetaCost::new(model.t_mm)?;
            let spec = GoalSpec {
                f: *f,
                efficacy,
                t_mm,
            };
            let sol = solve_goal(&spec, &OracleConfig::one_dim())?;
            Ok(goal_report(&sol, &spec, options.verbose))
        }
        TaskSection::Environment {
            distribution,
            frequency,
            lifetime,
            agent1,
            agent2,
            method,
            quadrature_order,
            seed,
            samples,
            integrand,
        } => {
            let env = Environment {
                distribution: distribution.clone(),
                frequency: *frequency,
                lifetime: *lifetime,
            };
            // Seed/sample overrides force the Monte Carlo path.
            let effective = if options.seed.is_some() || options.samples.is_some() {
                EnvMethod::MonteCarlo
            } else {
                *method
            };
            let method = match effective {
                EnvMethod::Quadrature => ValuationMethod::Quadrature {
                    order: *quadrature_order,
                },
                EnvMethod::MonteCarlo => ValuationMethod::MonteCarlo {
                    seed: options.seed.unwrap_or(*seed),
                    samples: options.samples.unwrap_or(*samples),
                },
            };
            let Valuation {
                value,
                std_error,
                samples,
            } = value_of_metareasoning(&env, agent1, agent2, &method, *integrand)?;
            Ok(Report::Environment {
                value,
                std_error,
                samples,
                method: effective,
            })
        }
    }
}

fn stopping_report(
    sol: &StoppingSolution,
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    verbose: bool,
) -> Report {
    let diagnostics = verbose.then(|| {
        let gain = profile
            .deriv(0.0, sol.exec_time, Wrt::ExecTime)
            .unwrap_or(f64::NAN);
        let pay = cost
            .deriv(sol.exec_time + t_mm.seconds())
            .unwrap_or(f64::NAN);
        StoppingDiagnostics {
            foc_residual: gain - pay,
        }
    });
    Report::Stopping {
        exec_time: sol.exec_time,
        total_time: sol.total_time,
        utility: sol.utility,
        at_boundary: sol.at_boundary,
        second_order_ok: sol.second_order_ok,
        method: sol.method,
        diagnostics,
    }
}

fn partition_report(
    sol: &PartitionSolution,
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    verbose: bool,
) -> Report {
    let diagnostics = verbose.then(|| {
        let total = sol.plan_time + sol.exec_time + t_mm.seconds();
        let marginal_cost = cost.deriv(total).ok();
        let plan_foc_residual = profile
            .deriv(sol.plan_time, sol.exec_time, Wrt::PlanTime)
            .ok()
            .zip(marginal_cost)
            .map(|(g, p)| g - p);
        let exec_foc_residual = profile
            .deriv(sol.plan_time, sol.exec_time, Wrt::ExecTime)
            .ok()
            .zip(marginal_cost)
            .map(|(g, p)| g - p);
        let coupling_residual = match profile {
            PerformanceProfile::PartitionedInversePower { efficacy, b, a } => {
                execution_time_given_planning(*a, *b, efficacy, sol.plan_time)
                    .ok()
                    .map(|coupled| (sol.exec_time - coupled) / coupled.abs().max(f64::MIN_POSITIVE))
            }
            _ => None,
        };
        let hessian_eigenvalues = (sol.plan_time > 0.0 && sol.exec_time > 0.0)
            .then(|| {
                crate::partition::check_hessian(profile, cost, t_mm, sol.plan_time, sol.exec_time)
                    .ok()
                    .map(|h| h.eigenvalues)
            })
            .flatten();
        PartitionDiagnostics {
            plan_foc_residual,
            exec_foc_residual,
            coupling_residual,
            hessian_eigenvalues,
        }
    });
    Report::Partition {
        plan_time: sol.plan_time,
        exec_time: sol.exec_time,
        total_time: sol.total_time,
        utility: sol.utility,
        at_boundary: sol.at_boundary,
        hessian_ok: sol.hessian_ok,
        method: sol.method,
        diagnostics,
    }
}

fn goal_report(sol: &GoalSolution, spec: &GoalSpec, verbose: bool) -> Report {
    let diagnostics = verbose.then(|| {
        let stationarity_residual = (!sol.at_boundary)
            .then(|| {
                let rate = spec.efficacy.rate(sol.plan_time).ok()?;
                let slope = spec.efficacy.rate_deriv(sol.plan_time).ok()?;
                (slope > 0.0).then(|| rate * rate / slope + (1.0 - spec.f).ln())
            })
            .flatten();
        let (plan_time_first_order, plan_time_variant) = match &spec.efficacy {
            MetaEfficacy::Linear { k_o, l } if *l > 0.0 => {
                let first = linear_stationary_plan_time(*k_o, *l, spec.f);
                let variant = linear_variant_plan_time(*k_o, *l, spec.f);
                (Some(first), variant.is_finite().then_some(variant))
            }
            _ => (None, None),
        };
        GoalDiagnostics {
            stationarity_residual,
            plan_time_first_order,
            plan_time_variant,
        }
    });
    Report::Goal {
        plan_time: sol.plan_time,
        exec_time: sol.exec_time,
        total_time: sol.total_time,
        at_boundary: sol.at_boundary,
        second_order_ok: sol.second_order_ok,
        diagnostics,
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            if i + 1 == points {
                to
            } else {
                from + (to - from) * (i as f64) / ((points - 1) as f64)
            }
        })
        .collect()
}

fn run_sweep(config: &RunConfig, sweep: &SweepSection) -> Result<SweepTable> {
    let values = linspace(sweep.from, sweep.to, sweep.points);
    let model = config.model.as_ref().expect("validated");

    let rows = match (config.task.kind(), sweep.parameter.as_str()) {
        // Value/cost/utility decomposition over execution time.
        (TaskKind::Stopping, "t_e") => {
            let (profile, cost, t_mm) = built_model(model)?;
            let mut rows = Vec::with_capacity(values.len());
            for &t_e in &values {
                let value = profile.value(0.0, t_e)?;
                let delay = cost.value(t_e + t_mm.seconds())?;
                rows.push(EconomicsRow {
                    exec_time: t_e,
                    value,
                    cost: delay,
                    utility: value - delay,
                });
            }
            SweepRows::Economics(rows)
        }
        // Utility slices through the solved partition optimum.
        (TaskKind::Partition, "t_m") | (TaskKind::Partition, "t_e") => {
            let (profile, cost, t_mm) = built_model(model)?;
            let sol = solve_partition(&profile, &cost, t_mm, &OracleConfig::two_dim())?;
            let mut rows = Vec::with_capacity(values.len());
            for &v in &values {
                let (t_m, t_e) = if sweep.parameter == "t_m" {
                    (v, sol.exec_time)
                } else {
                    (sol.plan_time, v)
                };
                let utility =
                    comprehensive_utility(&profile, &cost, t_mm, t_m, t_e).unwrap_or(f64::NAN);
                rows.push(SliceRow { value: v, utility });
            }
            SweepRows::Slice(rows)
        }
        // Re-solve per swept value.
        (kind, name) => {
            let mut rows = Vec::with_capacity(values.len());
            for &v in &values {
                let patched = patch_model(model, name, v)?;
                let task_f = match &config.task {
                    TaskSection::Goal { f } => Some(if name == "f" { v } else { *f }),
                    _ => None,
                };
                rows.push(solve_row(kind, &patched, task_f, v)?);
            }
            SweepRows::Solver(rows)
        }
    };

    Ok(SweepTable {
        parameter: sweep.parameter.clone(),
        rows,
    })
}

/// Clones the model section with one named parameter replaced.
fn patch_model(model: &ModelSection, name: &str, v: f64) -> Result<ModelSection> {
    let mut patched = model.clone();
    match name {
        "f" => {}
        "t_mm" => patched.t_mm = v,
        "k" => match &mut patched.profile {
            Some(ProfileSpec::Exponential { k }) | Some(ProfileSpec::InversePower { k, .. }) => {
                *k = v
            }
            _ => return Err(Error::config("sweep.parameter", "no `k` in the profile")),
        },
        "a" => match &mut patched.profile {
            Some(ProfileSpec::InversePower { a, .. })
            | Some(ProfileSpec::PartitionedInversePower { a, .. }) => *a = v,
            _ => return Err(Error::config("sweep.parameter", "no `a` in the profile")),
        },
        "b" => match &mut patched.profile {
            Some(ProfileSpec::PartitionedInversePower { b, .. }) => *b = v,
            _ => return Err(Error::config("sweep.parameter", "no `b` in the profile")),
        },
        "c" => match &mut patched.cost {
            Some(CostModel::Linear { c }) | Some(CostModel::Power { c, .. }) => *c = v,
            _ => return Err(Error::config("sweep.parameter", "no `c` in the cost model")),
        },
        "p" => match &mut patched.cost {
            Some(CostModel::Power { p, .. }) => *p = v,
            _ => return Err(Error::config("sweep.parameter", "no `p` in the cost model")),
        },
        "k_o" => match &mut patched.efficacy {
            Some(MetaEfficacy::Linear { k_o, .. }) => *k_o = v,
            _ => return Err(Error::config("sweep.parameter", "no `k_o` in the efficacy")),
        },
        "l" => match &mut patched.efficacy {
            Some(MetaEfficacy::Linear { l, .. }) => *l = v,
            _ => return Err(Error::config("sweep.parameter", "no `l` in the efficacy")),
        },
        other => {
            return Err(Error::config(
                "sweep.parameter",
                format!("unknown parameter `{other}`"),
            ))
        }
    }
    Ok(patched)
}

fn solve_row(
    kind: TaskKind,
    model: &ModelSection,
    task_f: Option<f64>,
    swept: f64,
) -> Result<SolverRow> {
    match kind {
        TaskKind::Stopping => {
            let (profile, cost, t_mm) = built_model(model)?;
            let sol = solve_stop(&profile, &cost, t_mm, &OracleConfig::one_dim())?;
            Ok(SolverRow {
                value: swept,
                plan_time: None,
                exec_time: sol.exec_time,
                total_time: sol.total_time,
                utility: Some(sol.utility),
                at_boundary: sol.at_boundary,
            })
        }
        TaskKind::Partition => {
            let (profile, cost, t_mm) = built_model(model)?;
            let sol = solve_partition(&profile, &cost, t_mm, &OracleConfig::two_dim())?;
            Ok(SolverRow {
                value: swept,
                plan_time: Some(sol.plan_time),
                exec_time: sol.exec_time,
                total_time: sol.total_time,
                utility: Some(sol.utility),
                at_boundary: sol.at_boundary,
            })
        }
        TaskKind::Goal => {
            let efficacy = model
                .efficacy
                .clone()
                .ok_or_else(|| Error::config("model.efficacy", "goal task needs an efficacy"))?;
            let spec = GoalSpec {
                f: task_f.expect("goal sweep provides f"),
                efficacy,
                t_mm: MetaMetaCost::new(model.t_mm)?,
            };
            let sol = solve_goal(&spec, &OracleConfig::one_dim())?;
            Ok(SolverRow {
                value: swept,
                plan_time: Some(sol.plan_time),
                exec_time: sol.exec_time,
                total_time: sol.total_time,
                utility: None,
                at_boundary: sol.at_boundary,
            })
        }
        TaskKind::Environment => Err(Error::config(
            "sweep",
            "environment task does not support sweeps",
        )),
    }
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Decimal with 12 significant digits, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string()
    }
}

/// CSV with a header row; every number carries 12 significant digits.
pub fn to_csv(table: &SweepTable) -> String {
    let mut out = String::new();
    match &table.rows {
        SweepRows::Solver(rows) => {
            let with_plan = rows.first().is_some_and(|r| r.plan_time.is_some());
            let with_utility = rows.first().is_some_and(|r| r.utility.is_some());
            out.push_str(&table.parameter);
            if with_plan {
                out.push_str(",plan_time");
            }
            out.push_str(",exec_time,total_time");
            if with_utility {
                out.push_str(",utility");
            }
            out.push_str(",at_boundary\n");
            for r in rows {
                out.push_str(&fmt_sig(r.value));
                if let Some(p) = r.plan_time {
                    out.push(',');
                    out.push_str(&fmt_sig(p));
                }
                out.push(',');
                out.push_str(&fmt_sig(r.exec_time));
                out.push(',');
                out.push_str(&fmt_sig(r.total_time));
                if let Some(u) = r.utility {
                    out.push(',');
                    out.push_str(&fmt_sig(u));
                }
                out.push(',');
                out.push_str(if r.at_boundary { "true" } else { "false" });
                out.push('\n');
            }
        }
        SweepRows::Slice(rows) => {
            out.push_str(&format!("{},utility\n", table.parameter));
            for r in rows {
                out.push_str(&format!("{},{}\n", fmt_sig(r.value), fmt_sig(r.utility)));
            }
        }
        SweepRows::Economics(rows) => {
            out.push_str("t_e,value,cost,utility\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_sig(r.exec_time),
                    fmt_sig(r.value),
                    fmt_sig(r.cost),
                    fmt_sig(r.utility)
                ));
            }
        }
    }
    out
}

/// Human-readable report summary.
pub fn render_text(report: &Report) -> String {
    let flag = |b: bool| if b { "yes" } else { "no" };
    match report {
        Report::Stopping {
            exec_time,
            total_time,
            utility,
            at_boundary,
            second_order_ok,
            method,
            diagnostics,
        } => {
            let mut s = format!(
                "stopping solution ({method:?})\n  execution time   {exec_time:.9} s\n  total time       {total_time:.9} s\n  utility          {utility:.9}\n  at boundary      {}\n  second-order ok  {}\n",
                flag(*at_boundary),
                flag(*second_order_ok),
            );
            if let Some(d) = diagnostics {
                s.push_str(&format!("  foc residual     {:e}\n", d.foc_residual));
            }
            s
        }
        Report::Partition {
            plan_time,
            exec_time,
            total_time,
            utility,
            at_boundary,
            hessian_ok,
            method,
            diagnostics,
        } => {
            let mut s = format!(
                "partition solution ({method:?})\n  planning time    {plan_time:.9} s\n  execution time   {exec_time:.9} s\n  total time       {total_time:.9} s\n  utility          {utility:.9}\n  at boundary      {}\n  hessian ok       {}\n",
                flag(*at_boundary),
                flag(*hessian_ok),
            );
            if let Some(d) = diagnostics {
                if let Some(r) = d.plan_foc_residual {
                    s.push_str(&format!("  plan foc         {r:e}\n"));
                }
                if let Some(r) = d.exec_foc_residual {
                    s.push_str(&format!("  exec foc         {r:e}\n"));
                }
                if let Some(r) = d.coupling_residual {
                    s.push_str(&format!("  coupling         {r:e}\n"));
                }
                if let Some((lo, hi)) = d.hessian_eigenvalues {
                    s.push_str(&format!("  hessian eigs     {lo:e}, {hi:e}\n"));
                }
            }
            s
        }
        Report::Goal {
            plan_time,
            exec_time,
            total_time,
            at_boundary,
            second_order_ok,
            diagnostics,
        } => {
            let mut s = format!(
                "goal solution\n  planning time    {plan_time:.9} s\n  execution time   {exec_time:.9} s\n  total time       {total_time:.9} s\n  at boundary      {}\n  second-order ok  {}\n",
                flag(*at_boundary),
                flag(*second_order_ok),
            );
            if let Some(d) = diagnostics {
                if let Some(r) = d.stationarity_residual {
                    s.push_str(&format!("  stationarity      {r:e}\n"));
                }
                if let (Some(a), Some(b)) = (d.plan_time_first_order, d.plan_time_variant) {
                    s.push_str(&format!(
                        "  plan time (first-order form)  {a:.9} s\n  plan time (variant form)      {b:.9} s\n"
                    ));
                }
            }
            s
        }
        Report::Environment {
            value,
            std_error,
            samples,
            method,
        } => {
            let mut s =
                format!("environment valuation ({method:?})\n  value            {value:.9}\n");
            if let Some(se) = std_error {
                s.push_str(&format!("  std error        {se:.9}\n"));
            }
            if let Some(n) = samples {
                s.push_str(&format!("  samples          {n}\n"));
            }
            s
        }
    }
}

/// Renders a task output in the requested format. Reports default to the
/// text rendering; sweeps default to CSV.
pub fn render_output(output: &TaskOutput, format: Option<OutputFormat>) -> Result<String> {
    match output {
        TaskOutput::Report(report) => match format {
            None => Ok(render_text(report)),
            Some(OutputFormat::Json) => serde_json::to_string_pretty(report)
                .map(|mut s| {
                    s.push('\n');
                    s
                })
                .map_err(|e| Error::config("output", e.to_string())),
            Some(OutputFormat::Csv) => Ok(report_csv(report)),
        },
        TaskOutput::Sweep(table) => match format {
            None | Some(OutputFormat::Csv) => Ok(to_csv(table)),
            Some(OutputFormat::Json) => serde_json::to_string_pretty(table)
                .map(|mut s| {
                    s.push('\n');
                    s
                })
                .map_err(|e| Error::config("output", e.to_string())),
        },
    }
}

/// One-row CSV for a single solve.
fn report_csv(report: &Report) -> String {
    match report {
        Report::Stopping {
            exec_time,
            total_time,
            utility,
            at_boundary,
            ..
        } => format!(
            "exec_time,total_time,utility,at_boundary\n{},{},{},{}\n",
            fmt_sig(*exec_time),
            fmt_sig(*total_time),
            fmt_sig(*utility),
            at_boundary
        ),
        Report::Partition {
            plan_time,
            exec_time,
            total_time,
            utility,
            at_boundary,
            ..
        } => {
            format!(
                "plan_time,exec_time,total_time,utility,at_boundary\n{},{},{},{},{}\n",
                fmt_sig(*plan_time),
                fmt_sig(*exec_time),
                fmt_sig(*total_time),
                fmt_sig(*utility),
                at_boundary
            )
        }
        Report::Goal {
            plan_time,
            exec_time,
            total_time,
            at_boundary,
            ..
        } => format!(
            "plan_time,exec_time,total_time,at_boundary\n{},{},{},{}\n",
            fmt_sig(*plan_time),
            fmt_sig(*exec_time),
            fmt_sig(*total_time),
            at_boundary
        ),
        Report::Environment {
            value,
            std_error,
            samples,
            ..
        } => format!(
            "value,std_error,samples\n{},{},{}\n",
            fmt_sig(*value),
            std_error.map_or(String::new(), fmt_sig),
            samples.map_or(String::new(), |n| n.to_string())
        ),
    }
}

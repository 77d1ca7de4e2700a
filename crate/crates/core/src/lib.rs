//! Deliberation scheduling for anytime computation.
//!
//! An anytime problem solver refines its answer monotonically while the
//! clock runs, and every second of delay costs utility. This crate
//! computes the schedules that make that trade ideally:
//!
//! - [`stopping`] — how long to execute before acting, for a fixed value
//!   profile (closed forms for the exponential and inverse-power families,
//!   marginal search otherwise);
//! - [`partition`] — how to split a budget between planning a solution
//!   (which raises the refinement rate) and executing it;
//! - [`goal`] — the planning split that minimizes total time to a fixed
//!   target quality instead of maximizing utility;
//! - [`environment`] — the lifetime value of a planning capability across
//!   a distribution of problem instances;
//! - [`oracle`] — the brute-force grid optimizer every closed form is
//!   validated against;
//! - [`config`] — the JSON run-configuration schema, reports, and sweep
//!   emission behind the CLI and the browser demo.
//!
//! All types are immutable after construction and every operation is a
//! pure function; concurrent use needs no synchronization.

// `!(x > 0.0)` deliberately rejects NaN alongside nonpositive values;
// the un-negated forms would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod environment;
pub mod error;
pub mod goal;
pub mod models;
pub mod oracle;
pub mod partition;
mod quad;
pub mod stopping;

pub use error::{Error, Result};
pub use models::{
    comprehensive_utility, CostModel, MetaEfficacy, MetaMetaCost, PerformanceProfile,
    SecondPartials, Wrt,
};
pub use oracle::{
    finite_diff, grid_max_1d, grid_max_2d, grid_min_1d, ArgOpt, DiffOrder, OracleConfig,
};
pub use partition::{
    check_hessian, execution_time_given_planning, solve_partition, solve_partition_closed_form,
    solve_partition_exponential, solve_partition_fixed_point, solve_partition_grid, HessianCheck,
    PartitionSolution,
};
pub use stopping::{
    solve_stop, solve_stop_exponential, solve_stop_generic, solve_stop_inverse_power, SolveMethod,
    StoppingSolution,
};

pub use environment::{
    instance_measure, instance_optimal_utility, value_of_metareasoning, AgentPolicy, Environment,
    InstanceDistribution, IntegrandKind, ProblemInstance, ProfileShape, Valuation, ValuationMethod,
    WeightedInstance,
};
pub use goal::{
    problem_reduction_time, solve_goal, solve_goal_generic, solve_goal_linear, GoalSolution,
    GoalSpec,
};

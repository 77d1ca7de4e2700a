//! Value of metareasoning over an agent lifetime: the expected utility
//! gain of a planning-capable agent over a stopping-only agent across a
//! distribution of problem instances.
//!
//! Challenges are independent — solutions do not interact — so the
//! lifetime value is `lifetime * frequency * E[u*(agent1) - u*(agent2)]`
//! under the instance distribution. The expectation is computed either by
//! tensor Gauss–Legendre quadrature after a log transform (product
//! families; exact summation for discrete distributions) or by seeded,
//! reproducible Monte Carlo with a reported standard error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{MetaEfficacy, MetaMetaCost, PerformanceProfile};
use crate::oracle::OracleConfig;
use crate::partition::{solve_partition_closed_form, solve_partition_exponential};
use crate::quad::gauss_legendre;
use crate::stopping::{solve_stop_exponential, solve_stop_inverse_power};

/// One problem challenge: a linear delay-cost rate and a base solution
/// rate. Harder problems have smaller rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    /// Linear cost of delay, utility per second.
    #[serde(rename = "c")]
    pub cost_rate: f64,
    /// Base refinement rate of the instance.
    #[serde(rename = "k")]
    pub solution_rate: f64,
}

/// A problem instance with its probability in a discrete distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedInstance {
    #[serde(flatten)]
    pub instance: ProblemInstance,
    pub p: f64,
}

/// Distribution over problem instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InstanceDistribution {
    Discrete {
        instances: Vec<WeightedInstance>,
    },
    /// Independent log-uniform cost and rate: `ln c ~ U`, `ln k ~ U`.
    #[serde(rename = "log_uniform")]
    ProductLogUniform {
        c_range: (f64, f64),
        k_range: (f64, f64),
    },
    /// Independent log-normal cost and rate, parameterized by the location
    /// and scale of the log.
    #[serde(rename = "log_normal")]
    ProductLogNormal {
        c_location: f64,
        c_scale: f64,
        k_location: f64,
        k_scale: f64,
    },
}

impl InstanceDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Discrete { instances } => {
                if instances.is_empty() {
                    return Err(Error::Parameter(
                        "discrete distribution needs instances".into(),
                    ));
                }
                let mut total = 0.0;
                for (i, w) in instances.iter().enumerate() {
                    if !(w.instance.cost_rate > 0.0) || !(w.instance.solution_rate > 0.0) {
                        return Err(Error::Parameter(format!(
                            "instances[{i}] must have c > 0 and k > 0"
                        )));
                    }
                    if !(w.p >= 0.0) || !w.p.is_finite() {
                        return Err(Error::Parameter(format!("instances[{i}].p must be >= 0")));
                    }
                    total += w.p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Parameter(format!(
                        "instance probabilities must sum to 1 (got {total})"
                    )));
                }
                Ok(())
            }
            Self::ProductLogUniform { c_range, k_range } => {
                for (name, (lo, hi)) in [("c_range", c_range), ("k_range", k_range)] {
                    if !(0.0 < *lo && *lo < *hi && hi.is_finite()) {
                        return Err(Error::Parameter(format!(
                            "{name} must satisfy 0 < low < high, got ({lo}, {hi})"
                        )));
                    }
                }
                Ok(())
            }
            Self::ProductLogNormal {
                c_location,
                c_scale,
                k_location,
                k_scale,
            } => {
                for (name, v) in [("c_location", c_location), ("k_location", k_location)] {
                    if !v.is_finite() {
                        return Err(Error::Parameter(format!("{name} must be finite")));
                    }
                }
                for (name, v) in [("c_scale", c_scale), ("k_scale", k_scale)] {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(Error::Parameter(format!("{name} must be > 0")));
                    }
                }
                Ok(())
            }
        }
    }
}

/// An environment: a distribution over challenges, the frequency at which
/// they arrive, and the agent's lifetime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub distribution: InstanceDistribution,
    /// Challenges per second.
    pub frequency: f64,
    /// Seconds of exposure.
    pub lifetime: f64,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::Parameter("frequency must be > 0".into()));
        }
        if !(self.lifetime > 0.0 && self.lifetime.is_finite()) {
            return Err(Error::Parameter("lifetime must be > 0".into()));
        }
        Ok(())
    }
}

/// Shared value-profile shape of an agent's solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProfileShape {
    Exponential,
    InversePower { a: f64, b: f64 },
}

/// What an agent can schedule: stopping only, or planning plus stopping.
/// A reflection-only agent is behaviorally identical to a planning agent
/// with its planning time forced to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentPolicy {
    ReflectionOnly {
        shape: ProfileShape,
        #[serde(default)]
        t_mm: MetaMetaCost,
    },
    ReflectionAndPlanning {
        shape: ProfileShape,
        /// Linear efficacy slope: planning raises the rate as `k + l t_m`.
        efficacy_slope: f64,
        #[serde(default)]
        t_mm: MetaMetaCost,
    },
}

impl AgentPolicy {
    pub fn validate(&self) -> Result<()> {
        let shape = match self {
            Self::ReflectionOnly { shape, .. } => shape,
            Self::ReflectionAndPlanning {
                shape,
                efficacy_slope,
                ..
            } => {
                if !(efficacy_slope.is_finite() && *efficacy_slope >= 0.0) {
                    return Err(Error::Parameter("efficacy_slope must be >= 0".into()));
                }
                shape
            }
        };
        if let ProfileShape::InversePower { a, b } = shape {
            if !(*a > 0.0 && a.is_finite() && *b > 0.0 && b.is_finite()) {
                return Err(Error::Parameter("shape exponents a, b must be > 0".into()));
            }
        }
        Ok(())
    }

    fn t_mm(&self) -> MetaMetaCost {
        match self {
            Self::ReflectionOnly { t_mm, .. } | Self::ReflectionAndPlanning { t_mm, .. } => *t_mm,
        }
    }
}

/// Which quantity the lifetime integrand measures. The gap between the
/// agents is precisely delay cost, so comprehensive utility is the
/// default; the object-level reading evaluates the attained value alone
/// at each agent's own optimal schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandKind {
    #[default]
    ComprehensiveUtility,
    ObjectLevelValue,
}

/// How to take the expectation over instances.
#[derive(Debug, Clone, PartialEq)]
pub enum ValuationMethod {
    Quadrature { order: usize },
    MonteCarlo { seed: u64, samples: usize },
}

/// A lifetime valuation: the expected gain, with sampling metadata when
/// it came from Monte Carlo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Valuation {
    pub value: f64,
    pub std_error: Option<f64>,
    pub samples: Option<usize>,
}

/// Optimal utility an agent extracts from one problem instance.
///
/// Reflection-only agents solve the stopping problem at the instance's
/// base rate; planning agents solve the partition problem with the base
/// rate as `k_o`.
pub fn instance_optimal_utility(policy: &AgentPolicy, instance: &ProblemInstance) -> Result<f64> {
    instance_measure(policy, instance, IntegrandKind::ComprehensiveUtility)
}

/// As [`instance_optimal_utility`], but measuring the configured
/// integrand at the agent's utility-optimal schedule.
pub fn instance_measure(
    policy: &AgentPolicy,
    instance: &ProblemInstance,
    integrand: IntegrandKind,
) -> Result<f64> {
    policy.validate()?;
    let c = instance.cost_rate;
    let k = instance.solution_rate;
    let t_mm = policy.t_mm();

    let (plan_time, exec_time, utility) = match policy {
        AgentPolicy::ReflectionOnly { shape, .. } => match shape {
            ProfileShape::Exponential => {
                let sol = solve_stop_exponential(k, c, t_mm)?;
                (0.0, sol.exec_time, sol.utility)
            }
            ProfileShape::InversePower { a, b } => {
                let sol = solve_stop_inverse_power(k.powf(*b), *a, c, t_mm)?;
                (0.0, sol.exec_time, sol.utility)
            }
        },
        AgentPolicy::ReflectionAndPlanning {
            shape,
            efficacy_slope,
            ..
        } => {
            let efficacy = MetaEfficacy::Linear {
                k_o: k,
                l: *efficacy_slope,
            };
            match shape {
                ProfileShape::Exponential => {
                    let sol =
                        solve_partition_exponential(&efficacy, c, t_mm, &OracleConfig::one_dim())?;
                    (sol.plan_time, sol.exec_time, sol.utility)
                }
                ProfileShape::InversePower { a, b } => {
                    if *efficacy_slope > 0.0 {
                        let sol = solve_partition_closed_form(*a, *b, k, *efficacy_slope, c, t_mm)?;
                        (sol.plan_time, sol.exec_time, sol.utility)
                    } else {
                        let sol = solve_stop_inverse_power(k.powf(*b), *a, c, t_mm)?;
                        (0.0, sol.exec_time, sol.utility)
                    }
                }
            }
        }
    };

    match integrand {
        IntegrandKind::ComprehensiveUtility => Ok(utility),
        IntegrandKind::ObjectLevelValue => {
            let profile = match policy {
                AgentPolicy::ReflectionOnly { shape, .. }
                | AgentPolicy::ReflectionAndPlanning { shape, .. } => match shape {
                    ProfileShape::Exponential => PerformanceProfile::PartitionedExponential {
                        efficacy: planning_efficacy(policy, k),
                    },
                    ProfileShape::InversePower { a, b } => {
                        PerformanceProfile::PartitionedInversePower {
                            efficacy: planning_efficacy(policy, k),
                            b: *b,
                            a: *a,
                        }
                    }
                },
            };
            if exec_time == 0.0 {
                // Nothing executed, nothing attained.
                return Ok(0.0);
            }
            profile.value(plan_time, exec_time)
        }
    }
}

fn planning_efficacy(policy: &AgentPolicy, k: f64) -> MetaEfficacy {
    match policy {
        AgentPolicy::ReflectionOnly { .. } => MetaEfficacy::Linear { k_o: k, l: 0.0 },
        AgentPolicy::ReflectionAndPlanning { efficacy_slope, .. } => MetaEfficacy::Linear {
            k_o: k,
            l: *efficacy_slope,
        },
    }
}

/// Lifetime expected gain of `agent1` over `agent2`:
/// `lifetime * frequency * E[measure(agent1, I) - measure(agent2, I)]`.
///
/// Monte Carlo is deterministic for a fixed seed (samples reduce in index
/// order) and reports the standard error of the estimate.
pub fn value_of_metareasoning(
    env: &Environment,
    agent1: &AgentPolicy,
    agent2: &AgentPolicy,
    method: &ValuationMethod,
    integrand: IntegrandKind,
) -> Result<Valuation> {
    env.validate()?;
    agent1.validate()?;
    agent2.validate()?;

    let gain = |instance: &ProblemInstance| -> Result<f64> {
        Ok(instance_measure(agent1, instance, integrand)?
            - instance_measure(agent2, instance, integrand)?)
    };
    let scale = env.lifetime * env.frequency;

    match method {
        ValuationMethod::Quadrature { order } => {
            if *order == 0 {
                return Err(Error::Parameter("quadrature order must be positive".into()));
            }
            let mean = match &env.distribution {
                InstanceDistribution::Discrete { instances } => {
                    let mut total = 0.0;
                    for w in instances {
                        total += w.p * gain(&w.instance)?;
                    }
                    total
                }
                InstanceDistribution::ProductLogUniform { c_range, k_range } => {
                    let (nodes, weights) = gauss_legendre(*order);
                    let c_axis = log_uniform_axis(*c_range, &nodes, &weights);
                    let k_axis = log_uniform_axis(*k_range, &nodes, &weights);
                    tensor_mean(&c_axis, &k_axis, &gain)?
                }
                InstanceDistribution::ProductLogNormal {
                    c_location,
                    c_scale,
                    k_location,
                    k_scale,
                } => {
                    let (nodes, weights) = gauss_legendre(*order);
                    let c_axis = log_normal_axis(*c_location, *c_scale, &nodes, &weights);
                    let k_axis = log_normal_axis(*k_location, *k_scale, &nodes, &weights);
                    tensor_mean(&c_axis, &k_axis, &gain)?
                }
            };
            Ok(Valuation {
                value: scale * mean,
                std_error: None,
                samples: None,
            })
        }
        ValuationMethod::MonteCarlo { seed, samples } => {
            if *samples < 2 {
                return Err(Error::Parameter(
                    "monte carlo needs at least 2 samples".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for i in 0..*samples {
                let instance = draw_instance(&env.distribution, &mut rng)?;
                let d = gain(&instance)?;
                // Welford update, reduced strictly in draw order.
                let delta = d - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (d - mean);
            }
            let n = *samples as f64;
            let std_error = (m2 / (n * (n - 1.0))).sqrt();
            Ok(Valuation {
                value: scale * mean,
                std_error: Some(scale * std_error),
                samples: Some(*samples),
            })
        }
    }
}

/// Quadrature abscissas (as instance values) and normalized weights for a
/// log-uniform axis.
fn log_uniform_axis((lo, hi): (f64, f64), nodes: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    let (log_lo, log_hi) = (lo.ln(), hi.ln());
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let log_v = log_lo + 0.5 * (x + 1.0) * (log_hi - log_lo);
            // Uniform density over the log interval: weights sum to 1.
            (log_v.exp(), 0.5 * w)
        })
        .collect()
}

/// As [`log_uniform_axis`] for a log-normal axis, integrating the normal
/// density over +-8.5 scales and normalizing the truncated weights.
fn log_normal_axis(location: f64, scale: f64, nodes: &[f64], weights: &[f64]) -> Vec<(f64, f64)> {
    const SPAN: f64 = 8.5;
    let half = SPAN * scale;
    let mut axis: Vec<(f64, f64)> = nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let log_v = location + x * half;
            let z = (log_v - location) / scale;
            let density = (-0.5 * z * z).exp() / (scale * (2.0 * std::f64::consts::PI).sqrt());
            (log_v.exp(), w * half * density)
        })
        .collect();
    let total: f64 = axis.iter().map(|(_, w)| w).sum();
    for pair in &mut axis {
        pair.1 /= total;
    }
    axis
}

fn tensor_mean(
    c_axis: &[(f64, f64)],
    k_axis: &[(f64, f64)],
    gain: &impl Fn(&ProblemInstance) -> Result<f64>,
) -> Result<f64> {
    let mut total = 0.0;
    for &(c, wc) in c_axis {
        for &(k, wk) in k_axis {
            let instance = ProblemInstance {
                cost_rate: c,
                solution_rate: k,
            };
            total += wc * wk * gain(&instance)?;
        }
    }
    Ok(total)
}

fn draw_instance(
    distribution: &InstanceDistribution,
    rng: &mut ChaCha8Rng,
) -> Result<ProblemInstance> {
    let instance = match distribution {
        InstanceDistribution::Discrete { instances } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = instances[instances.len() - 1].instance;
            for w in instances {
                acc += w.p;
                if u < acc {
                    chosen = w.instance;
                    break;
                }
            }
            chosen
        }
        InstanceDistribution::ProductLogUniform { c_range, k_range } => {
            let c = sample_log_uniform(*c_range, rng);
            let k = sample_log_uniform(*k_range, rng);
            ProblemInstance {
                cost_rate: c,
                solution_rate: k,
            }
        }
        InstanceDistribution::ProductLogNormal {
            c_location,
            c_scale,
            k_location,
            k_scale,
        } => {
            let c = (c_location + c_scale * standard_normal(rng)).exp();
            let k = (k_location + k_scale * standard_normal(rng)).exp();
            ProblemInstance {
                cost_rate: c,
                solution_rate: k,
            }
        }
    };
    if !(instance.cost_rate > 0.0)
        || !(instance.solution_rate > 0.0)
        || !instance.cost_rate.is_finite()
        || !instance.solution_rate.is_finite()
    {
        return Err(Error::Sampling(format!(
            "drawn instance violates positivity: c = {}, k = {}",
            instance.cost_rate, instance.solution_rate
        )));
    }
    Ok(instance)
}

fn sample_log_uniform((lo, hi): (f64, f64), rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    (lo.ln() + u * (hi.ln() - lo.ln())).exp()
}

/// Box–Muller transform: two uniforms in, one standard normal out.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_reflection(t_mm: f64) -> AgentPolicy {
        AgentPolicy::ReflectionOnly {
            shape: ProfileShape::Exponential,
            t_mm: MetaMetaCost::new(t_mm).unwrap(),
        }
    }

    fn exp_planning(l: f64, t_mm: f64) -> AgentPolicy {
        AgentPolicy::ReflectionAndPlanning {
            shape: ProfileShape::Exponential,
            efficacy_slope: l,
            t_mm: MetaMetaCost::new(t_mm).unwrap(),
        }
    }

    #[test]
    fn reflection_only_reference_instance() {
        let policy = exp_reflection(0.01);
        let instance = ProblemInstance {
            cost_rate: 0.04,
            solution_rate: 0.1,
        };
        let u = instance_optimal_utility(&policy, &instance).unwrap();
        assert!((u - 0.233).abs() <= 5e-4, "u = {u}");
    }

    #[test]
    fn vanishing_slope_matches_reflection_only() {
        let instance = ProblemInstance {
            cost_rate: 0.04,
            solution_rate: 0.1,
        };
        let reflect = instance_optimal_utility(&exp_reflection(0.01), &instance).unwrap();
        let plan = instance_optimal_utility(&exp_planning(1e-12, 0.01), &instance).unwrap();
        assert!((plan - reflect).abs() <= 1e-9);
    }

    #[test]
    fn inverse_power_planning_reference_instance() {
        let policy = AgentPolicy::ReflectionAndPlanning {
            shape: ProfileShape::InversePower { a: 1.0, b: 1.0 },
            efficacy_slope: 1.0,
            t_mm: MetaMetaCost::ZERO,
        };
        let instance = ProblemInstance {
            cost_rate: 0.01,
            solution_rate: 0.0,
        };
        // Zero base rate: planning supplies the whole capability.
        let u = instance_measure(&policy, &instance, IntegrandKind::ComprehensiveUtility).unwrap();
        assert!((u - 0.8607).abs() <= 1e-4, "u = {u}");
    }

    fn one_point_env() -> Environment {
        Environment {
            distribution: InstanceDistribution::Discrete {
                instances: vec![WeightedInstance {
                    instance: ProblemInstance {
                        cost_rate: 0.04,
                        solution_rate: 0.1,
                    },
                    p: 1.0,
                }],
            },
            frequency: 1.0,
            lifetime: 1.0,
        }
    }

    #[test]
    fn identical_agents_have_exactly_zero_value() {
        let env = one_point_env();
        let a = exp_planning(0.5, 0.01);
        let v = value_of_metareasoning(
            &env,
            &a,
            &a.clone(),
            &ValuationMethod::Quadrature { order: 8 },
            IntegrandKind::ComprehensiveUtility,
        )
        .unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn planning_weakly_dominates_on_a_single_instance() {
        let env = one_point_env();
        let v = value_of_metareasoning(
            &env,
            &exp_planning(0.5, 0.01),
            &exp_reflection(0.01),
            &ValuationMethod::Quadrature { order: 8 },
            IntegrandKind::ComprehensiveUtility,
        )
        .unwrap();
        assert!(v.value >= 0.0);
        // Exact value is the difference of the two solver calls.
        let instance = ProblemInstance {
            cost_rate: 0.04,
            solution_rate: 0.1,
        };
        let expected = instance_optimal_utility(&exp_planning(0.5, 0.01), &instance).unwrap()
            - instance_optimal_utility(&exp_reflection(0.01), &instance).unwrap();
        assert_eq!(v.value, expected);
    }

    #[test]
    fn two_point_distribution_expands_by_hand() {
        let i1 = ProblemInstance {
            cost_rate: 0.04,
            solution_rate: 0.1,
        };
        let i2 = ProblemInstance {
            cost_rate: 0.02,
            solution_rate: 0.5,
        };
        let env = Environment {
            distribution: InstanceDistribution::Discrete {
                instances: vec![
                    WeightedInstance {
                        instance: i1,
                        p: 0.25,
                    },
                    WeightedInstance {
                        instance: i2,
                        p: 0.75,
                    },
                ],
            },
            frequency: 2.0,
            lifetime: 100.0,
        };
        let a1 = exp_planning(0.5, 0.01);
        let a2 = exp_reflection(0.01);
        let v = value_of_metareasoning(
            &env,
            &a1,
            &a2,
            &ValuationMethod::Quadrature { order: 8 },
            IntegrandKind::ComprehensiveUtility,
        )
        .unwrap();
        let d1 = instance_optimal_utility(&a1, &i1).unwrap()
            - instance_optimal_utility(&a2, &i1).unwrap();
        let d2 = instance_optimal_utility(&a1, &i2).unwrap()
            - instance_optimal_utility(&a2, &i2).unwrap();
        let expected = 200.0 * (0.25 * d1 + 0.75 * d2);
        assert!((v.value - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }

    #[test]
    fn value_is_exactly_linear_in_frequency_and_lifetime() {
        let mut env = one_point_env();
        let a1 = exp_planning(0.5, 0.01);
        let a2 = exp_reflection(0.01);
        let method = ValuationMethod::Quadrature { order: 8 };
        let base = value_of_metareasoning(&env, &a1, &a2, &method, IntegrandKind::default())
            .unwrap()
            .value;

        env.frequency = 2.0;
        let doubled = value_of_metareasoning(&env, &a1, &a2, &method, IntegrandKind::default())
            .unwrap()
            .value;
        assert_eq!(doubled, 2.0 * base);

        env.frequency = 1.0;
        env.lifetime = 4.0;
        let quadrupled = value_of_metareasoning(&env, &a1, &a2, &method, IntegrandKind::default())
            .unwrap()
            .value;
        assert_eq!(quadrupled, 4.0 * base);
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let env = Environment {
            distribution: InstanceDistribution::ProductLogUniform {
                c_range: (0.01, 0.1),
                k_range: (0.05, 0.5),
            },
            frequency: 1.0,
            lifetime: 1.0,
        };
        let a1 = exp_planning(0.5, 0.01);
        let a2 = exp_reflection(0.01);
        let method = ValuationMethod::MonteCarlo {
            seed: 42,
            samples: 500,
        };
        let x = value_of_metareasoning(&env, &a1, &a2, &method, IntegrandKind::default()).unwrap();
        let y = value_of_metareasoning(&env, &a1, &a2, &method, IntegrandKind::default()).unwrap();
        assert_eq!(x, y);
        assert!(x.std_error.unwrap() > 0.0);
        assert_eq!(x.samples, Some(500));
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let env = Environment {
            distribution: InstanceDistribution::ProductLogUniform {
                c_range: (0.01, 0.1),
                k_range: (0.05, 0.5),
            },
            frequency: 1.0,
            lifetime: 1.0,
        };
        let a1 = exp_planning(0.5, 0.01);
        let a2 = exp_reflection(0.01);
        let quad = value_of_metareasoning(
            &env,
            &a1,
            &a2,
            &ValuationMethod::Quadrature { order: 32 },
            IntegrandKind::default(),
        )
        .unwrap();
        let mc = value_of_metareasoning(
            &env,
            &a1,
            &a2,
            &ValuationMethod::MonteCarlo {
                seed: 7,
                samples: 20_000,
            },
            IntegrandKind::default(),
        )
        .unwrap();
        let gap = (mc.value - quad.value).abs();
        assert!(
            gap <= 4.0 * mc.std_error.unwrap(),
            "gap {gap} vs se {}",
            mc.std_error.unwrap()
        );
    }

    #[test]
    fn log_normal_quadrature_matches_monte_carlo() {
        let env = Environment {
            distribution: InstanceDistribution::ProductLogNormal {
                c_location: -3.0,
                c_scale: 0.4,
                k_location: -1.5,
                k_scale: 0.4,
            },
            frequency: 1.0,
            lifetime: 1.0,
        };
        let a1 = exp_planning(0.3, 0.0);
        let a2 = exp_reflection(0.0);
        let quad = value_of_metareasoning(
            &env,
            &a1,
            &a2,
            &ValuationMethod::Quadrature { order: 32 },
            IntegrandKind::default(),
        )
        .unwrap();
        let mc = value_of_metareasoning(
            &env,
            &a1,
            &a2,
            &ValuationMethod::MonteCarlo {
                seed: 3,
                samples: 20_000,
            },
            IntegrandKind::default(),
        )
        .unwrap();
        let gap = (mc.value - quad.value).abs();
        assert!(
            gap <= 4.0 * mc.std_error.unwrap(),
            "gap {gap} vs se {}",
            mc.std_error.unwrap()
        );
    }

    #[test]
    fn object_level_reading_is_available() {
        let instance = ProblemInstance {
            cost_rate: 0.04,
            solution_rate: 0.1,
        };
        let policy = exp_reflection(0.01);
        let value = instance_measure(&policy, &instance, IntegrandKind::ObjectLevelValue).unwrap();
        // At the reference optimum the attained object-level value is
        // 1 - c/k = 0.6.
        assert!((value - 0.6).abs() <= 1e-9, "value = {value}");
    }

    #[test]
    fn distribution_validation_catches_bad_probabilities() {
        let d = InstanceDistribution::Discrete {
            instances: vec![WeightedInstance {
                instance: ProblemInstance {
                    cost_rate: 0.1,
                    solution_rate: 0.1,
                },
                p: 0.5,
            }],
        };
        assert!(d.validate().is_err());
    }
}

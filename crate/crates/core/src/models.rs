//! Parametric families for object-level value, delay cost, and
//! metareasoning efficacy, with exact first and second derivatives.
//!
//! The comprehensive utility of a run that plans for `t_m` seconds and
//! executes for `t_e` seconds is
//!
//! ```text
//! u_c(t_m, t_e) = u_o(t_m, t_e) - cost(t_m + t_e + t_mm)
//! ```
//!
//! where `u_o` is the object-level value of the partial solution, `cost`
//! is the (nonnegative) utility lost to delay, and `t_mm` is the fixed
//! overhead of running the scheduling optimization itself. Value profiles
//! are normalized so a complete solution is worth 1; other value ceilings
//! are expressed by scaling the cost rate instead.
//!
//! Everything here is immutable after construction and every operation is
//! a pure function, so concurrent evaluation needs no synchronization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable of differentiation for [`PerformanceProfile::deriv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wrt {
    /// Partial with respect to planning time `t_m`.
    PlanTime,
    /// Partial with respect to execution time `t_e`.
    ExecTime,
}

/// Second partial derivatives of the object-level value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondPartials {
    /// d2 u_o / d t_m2
    pub plan_plan: f64,
    /// d2 u_o / d t_m d t_e
    pub plan_exec: f64,
    /// d2 u_o / d t_e2
    pub exec_exec: f64,
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!(
            "{name} must be finite and >= 0, got {t}"
        )));
    }
    Ok(())
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Parameter(format!(
            "{name} must be finite and > 0, got {v}"
        )));
    }
    Ok(())
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Parameter(format!(
            "{name} must be finite and >= 0, got {v}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Performance profiles
// ---------------------------------------------------------------------------

/// Object-level value `u_o` as a function of execution time and, for the
/// partitioned families, planning time.
///
/// All variants increase monotonically in `t_e` and converge on the
/// complete-solution value 1. The partitioned variants additionally
/// increase monotonically in `t_m` through the efficacy function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PerformanceProfile {
    /// `u_o(t_e) = 1 - exp(-k t_e)`; `k` is the refinement rate in 1/s.
    Exponential { k: f64 },
    /// `u_o(t_e) = 1 - 1 / (k t_e^a)`; unbounded below as `t_e -> 0`.
    InversePower { k: f64, a: f64 },
    /// `u_o(t_m, t_e) = 1 - exp(-K(t_m) t_e)` with a plannable rate.
    PartitionedExponential { efficacy: MetaEfficacy },
    /// `u_o(t_m, t_e) = 1 - 1 / (K(t_m)^b t_e^a)`.
    PartitionedInversePower {
        efficacy: MetaEfficacy,
        b: f64,
        a: f64,
    },
}

impl PerformanceProfile {
    /// Checks the parameter constraints of the variant.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { k } => require_positive("profile.k", *k),
            Self::InversePower { k, a } => {
                require_positive("profile.k", *k)?;
                require_positive("profile.a", *a)
            }
            Self::PartitionedExponential { efficacy } => efficacy.validate(),
            Self::PartitionedInversePower { efficacy, b, a } => {
                efficacy.validate()?;
                require_positive("profile.b", *b)?;
                require_positive("profile.a", *a)
            }
        }
    }

    /// True for the variants whose rate depends on planning time.
    pub fn is_partitioned(&self) -> bool {
        matches!(
            self,
            Self::PartitionedExponential { .. } | Self::PartitionedInversePower { .. }
        )
    }

    /// Object-level value `u_o(t_m, t_e)`.
    ///
    /// `t_m` is ignored by the non-partitioned variants. The inverse-power
    /// variants reject `t_e = 0`, where the value diverges to `-inf`.
    pub fn value(&self, t_m: f64, t_e: f64) -> Result<f64> {
        check_time("t_m", t_m)?;
        check_time("t_e", t_e)?;
        match self {
            Self::Exponential { k } => Ok(1.0 - (-k * t_e).exp()),
            Self::InversePower { k, a } => {
                check_exec_positive(t_e)?;
                Ok(1.0 - 1.0 / (k * t_e.powf(*a)))
            }
            Self::PartitionedExponential { efficacy } => {
                let rate = efficacy.rate(t_m)?;
                Ok(1.0 - (-rate * t_e).exp())
            }
            Self::PartitionedInversePower { efficacy, b, a } => {
                check_exec_positive(t_e)?;
                let rate = positive_rate(efficacy, t_m)?;
                Ok(1.0 - 1.0 / (rate.powf(*b) * t_e.powf(*a)))
            }
        }
    }

    /// Analytic first partial of `u_o` with respect to `wrt`.
    ///
    /// Non-partitioned variants have zero planning-time derivative.
    pub fn deriv(&self, t_m: f64, t_e: f64, wrt: Wrt) -> Result<f64> {
        check_time("t_m", t_m)?;
        check_time("t_e", t_e)?;
        match self {
            Self::Exponential { k } => Ok(match wrt {
                Wrt::ExecTime => k * (-k * t_e).exp(),
                Wrt::PlanTime => 0.0,
            }),
            Self::InversePower { k, a } => {
                check_exec_positive(t_e)?;
                Ok(match wrt {
                    Wrt::ExecTime => a / (k * t_e.powf(a + 1.0)),
                    Wrt::PlanTime => 0.0,
                })
            }
            Self::PartitionedExponential { efficacy } => {
                let rate = efficacy.rate(t_m)?;
                let decay = (-rate * t_e).exp();
                Ok(match wrt {
                    Wrt::ExecTime => rate * decay,
                    Wrt::PlanTime => efficacy.rate_deriv(t_m)? * t_e * decay,
                })
            }
            Self::PartitionedInversePower { efficacy, b, a } => {
                check_exec_positive(t_e)?;
                let rate = positive_rate(efficacy, t_m)?;
                Ok(match wrt {
                    Wrt::ExecTime => a / (rate.powf(*b) * t_e.powf(a + 1.0)),
                    Wrt::PlanTime => {
                        b * efficacy.rate_deriv(t_m)? / (rate.powf(b + 1.0) * t_e.powf(*a))
                    }
                })
            }
        }
    }

    /// Analytic second partials of `u_o`.
    pub fn second_partials(&self, t_m: f64, t_e: f64) -> Result<SecondPartials> {
        check_time("t_m", t_m)?;
        check_time("t_e", t_e)?;
        match self {
            Self::Exponential { k } => Ok(SecondPartials {
                plan_plan: 0.0,
                plan_exec: 0.0,
                exec_exec: -k * k * (-k * t_e).exp(),
            }),
            Self::InversePower { k, a } => {
                check_exec_positive(t_e)?;
                Ok(SecondPartials {
                    plan_plan: 0.0,
                    plan_exec: 0.0,
                    exec_exec: -a * (a + 1.0) / (k * t_e.powf(a + 2.0)),
                })
            }
            Self::PartitionedExponential { efficacy } => {
                let rate = efficacy.rate(t_m)?;
                let slope = efficacy.rate_deriv(t_m)?;
                let curve = efficacy.rate_second_deriv(t_m)?;
                let decay = (-rate * t_e).exp();
                Ok(SecondPartials {
                    plan_plan: t_e * decay * (curve - t_e * slope * slope),
                    plan_exec: slope * decay * (1.0 - rate * t_e),
                    exec_exec: -rate * rate * decay,
                })
            }
            Self::PartitionedInversePower { efficacy, b, a } => {
                check_exec_positive(t_e)?;
                let rate = positive_rate(efficacy, t_m)?;
                let slope = efficacy.rate_deriv(t_m)?;
                let curve = efficacy.rate_second_deriv(t_m)?;
                let te_a = t_e.powf(*a);
                Ok(SecondPartials {
                    plan_plan: b / te_a
                        * (curve / rate.powf(b + 1.0)
                            - (b + 1.0) * slope * slope / rate.powf(b + 2.0)),
                    plan_exec: -a * b * slope / (rate.powf(b + 1.0) * t_e.powf(a + 1.0)),
                    exec_exec: -a * (a + 1.0) / (rate.powf(*b) * t_e.powf(a + 2.0)),
                })
            }
        }
    }
}

fn check_exec_positive(t_e: f64) -> Result<()> {
    if t_e == 0.0 {
        return Err(Error::Domain(
            "t_e must be > 0 for inverse-power profiles (value diverges at 0)".into(),
        ));
    }
    Ok(())
}

fn positive_rate(efficacy: &MetaEfficacy, t_m: f64) -> Result<f64> {
    let rate = efficacy.rate(t_m)?;
    if rate <= 0.0 {
        return Err(Error::Domain(format!(
            "efficacy rate must be > 0 where an inverse-power profile is evaluated, got K({t_m}) = {rate}"
        )));
    }
    Ok(rate)
}

// ---------------------------------------------------------------------------
// Cost of delay
// ---------------------------------------------------------------------------

/// Cost of delay as a nonnegative magnitude of total elapsed time.
///
/// The subtraction happens in [`comprehensive_utility`]; keeping the sign
/// out of the model eliminates double-negation mistakes. Cost is 0 at
/// `t = 0` and strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CostModel {
    /// `cost(t) = c t`.
    Linear { c: f64 },
    /// `cost(t) = c t^p` with `p >= 1`.
    Power { c: f64, p: f64 },
    /// Piecewise-linear interpolation through `(time, cost)` knots,
    /// anchored at the origin; right slope at knots, final slope beyond
    /// the last knot.
    Tabulated { points: Vec<(f64, f64)> },
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Linear { c } => require_positive("cost.c", *c),
            Self::Power { c, p } => {
                require_positive("cost.c", *c)?;
                if !p.is_finite() || *p < 1.0 {
                    return Err(Error::Parameter(format!(
                        "cost.p must be finite and >= 1, got {p}"
                    )));
                }
                Ok(())
            }
            Self::Tabulated { points } => {
                if points.is_empty() {
                    return Err(Error::Parameter("cost.points must be nonempty".into()));
                }
                let mut prev = (0.0_f64, 0.0_f64);
                for (i, &(t, c)) in points.iter().enumerate() {
                    if !t.is_finite() || !c.is_finite() || t <= prev.0 || c <= prev.1 {
                        return Err(Error::Parameter(format!(
                            "cost.points[{i}] must be strictly increasing in both coordinates from the origin"
                        )));
                    }
                    prev = (t, c);
                }
                Ok(())
            }
        }
    }

    /// Cost magnitude at total elapsed time `t`.
    pub fn value(&self, t: f64) -> Result<f64> {
        check_time("t", t)?;
        match self {
            Self::Linear { c } => Ok(c * t),
            Self::Power { c, p } => Ok(c * t.powf(*p)),
            Self::Tabulated { points } => {
                let (t0, c0, slope) = self.segment(points, t);
                Ok(c0 + slope * (t - t0))
            }
        }
    }

    /// `d cost / d t`, strictly positive for `t > 0`. Tabulated costs use
    /// the right slope at knots and extrapolate with the final slope.
    pub fn deriv(&self, t: f64) -> Result<f64> {
        check_time("t", t)?;
        match self {
            Self::Linear { c } => Ok(*c),
            Self::Power { c, p } => Ok(c * p * t.powf(p - 1.0)),
            Self::Tabulated { points } => Ok(self.segment(points, t).2),
        }
    }

    /// `d2 cost / d t2`; zero almost everywhere for tabulated costs.
    pub fn second_deriv(&self, t: f64) -> Result<f64> {
        check_time("t", t)?;
        match self {
            Self::Linear { .. } => Ok(0.0),
            Self::Power { c, p } => Ok(c * p * (p - 1.0) * t.powf(p - 2.0)),
            Self::Tabulated { .. } => Ok(0.0),
        }
    }

    /// Segment containing `t`: start time, start cost, slope.
    fn segment(&self, points: &[(f64, f64)], t: f64) -> (f64, f64, f64) {
        let mut start = (0.0, 0.0);
        for &(kt, kc) in points {
            if t < kt {
                let slope = (kc - start.1) / (kt - start.0);
                return (start.0, start.1, slope);
            }
            start = (kt, kc);
        }
        // At or beyond the last knot: final slope.
        let from = if points.len() >= 2 {
            points[points.len() - 2]
        } else {
            (0.0, 0.0)
        };
        let last = points[points.len() - 1];
        let slope = (last.1 - from.1) / (last.0 - from.0);
        (last.0, last.1, slope)
    }
}

// ---------------------------------------------------------------------------
// Metareasoning efficacy
// ---------------------------------------------------------------------------

/// Refinement rate `K(t_m)` achieved after `t_m` seconds of solution
/// planning; monotone nondecreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetaEfficacy {
    /// `K(t_m) = k_o + l t_m`.
    Linear { k_o: f64, l: f64 },
    /// Piecewise-linear through `(t_m, K)` knots. The first knot must sit
    /// at `t_m = 0`; right slope at knots, final slope beyond the last.
    Tabulated { points: Vec<(f64, f64)> },
}

impl MetaEfficacy {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Linear { k_o, l } => {
                require_nonnegative("efficacy.k_o", *k_o)?;
                require_nonnegative("efficacy.l", *l)
            }
            Self::Tabulated { points } => {
                if points.is_empty() {
                    return Err(Error::Parameter("efficacy.points must be nonempty".into()));
                }
                if points[0].0 != 0.0 {
                    return Err(Error::Parameter(
                        "efficacy.points must start at t_m = 0".into(),
                    ));
                }
                let mut prev = points[0];
                if !prev.1.is_finite() || prev.1 < 0.0 {
                    return Err(Error::Parameter(
                        "efficacy.points values must be >= 0".into(),
                    ));
                }
                for (i, &(t, k)) in points.iter().enumerate().skip(1) {
                    if !t.is_finite() || !k.is_finite() || t <= prev.0 || k < prev.1 {
                        return Err(Error::Parameter(format!(
                            "efficacy.points[{i}] must have strictly increasing times and nondecreasing rates"
                        )));
                    }
                    prev = (t, k);
                }
                Ok(())
            }
        }
    }

    /// `K(t_m)`.
    pub fn rate(&self, t_m: f64) -> Result<f64> {
        check_time("t_m", t_m)?;
        match self {
            Self::Linear { k_o, l } => Ok(k_o + l * t_m),
            Self::Tabulated { points } => {
                let (t0, k0, slope) = tab_segment(points, t_m);
                Ok(k0 + slope * (t_m - t0))
            }
        }
    }

    /// `K'(t_m)`; right slope at knots for the tabulated variant.
    pub fn rate_deriv(&self, t_m: f64) -> Result<f64> {
        check_time("t_m", t_m)?;
        match self {
            Self::Linear { l, .. } => Ok(*l),
            Self::Tabulated { points } => Ok(tab_segment(points, t_m).2),
        }
    }

    /// `K''(t_m)`; zero almost everywhere for both variants.
    pub fn rate_second_deriv(&self, t_m: f64) -> Result<f64> {
        check_time("t_m", t_m)?;
        Ok(0.0)
    }
}

fn tab_segment(points: &[(f64, f64)], t: f64) -> (f64, f64, f64) {
    debug_assert!(!points.is_empty() && points[0].0 == 0.0);
    for window in points.windows(2) {
        let (t0, k0) = window[0];
        let (t1, k1) = window[1];
        if t < t1 {
            return (t0, k0, (k1 - k0) / (t1 - t0));
        }
    }
    // At or beyond the last knot: final slope (constant when single-knot).
    if points.len() >= 2 {
        let (t0, k0) = points[points.len() - 2];
        let (t1, k1) = points[points.len() - 1];
        (t1, k1, (k1 - k0) / (t1 - t0))
    } else {
        (points[0].0, points[0].1, 0.0)
    }
}

// ---------------------------------------------------------------------------
// Meta-meta cost and comprehensive utility
// ---------------------------------------------------------------------------

/// Fixed cost, in seconds, of solving the scheduling optimization itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetaMetaCost(f64);

impl MetaMetaCost {
    pub const ZERO: Self = Self(0.0);

    pub fn new(seconds: f64) -> Result<Self> {
        if !seconds.is_finite() || seconds < 0.0 {
            return Err(Error::Parameter(format!(
                "t_mm must be finite and >= 0, got {seconds}"
            )));
        }
        Ok(Self(seconds))
    }

    pub fn seconds(self) -> f64 {
        self.0
    }
}

impl Default for MetaMetaCost {
    fn default() -> Self {
        Self::ZERO
    }
}

/// Comprehensive utility `u_c(t_m, t_e) = u_o(t_m, t_e) - cost(t_m + t_e + t_mm)`.
///
/// Additive decomposition is the fixed contract of this crate; value and
/// delay cost combine by no other rule.
pub fn comprehensive_utility(
    profile: &PerformanceProfile,
    cost: &CostModel,
    t_mm: MetaMetaCost,
    t_m: f64,
    t_e: f64,
) -> Result<f64> {
    let value = profile.value(t_m, t_e)?;
    let delay = cost.value(t_m + t_e + t_mm.seconds())?;
    Ok(value - delay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual} (tol {tol})"
        );
    }

    #[test]
    fn exponential_value_matches_direct_evaluation() {
        let profile = PerformanceProfile::Exponential { k: 0.1 };
        let direct = 1.0 - (-0.1_f64 * 9.163).exp();
        assert_close(profile.value(0.0, 9.163).unwrap(), direct, 1e-12);
        assert_close(profile.value(0.0, 9.163).unwrap(), 0.600, 5e-4);
        assert_eq!(profile.value(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_power_value_at_unit_point_is_zero() {
        let profile = PerformanceProfile::InversePower { k: 1.0, a: 1.0 };
        assert_eq!(profile.value(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn inverse_power_rejects_zero_exec_time() {
        let profile = PerformanceProfile::InversePower { k: 1.0, a: 1.0 };
        assert!(matches!(profile.value(0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            profile.deriv(0.0, 0.0, Wrt::ExecTime),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn negative_times_are_domain_errors() {
        let profile = PerformanceProfile::Exponential { k: 0.1 };
        assert!(matches!(profile.value(0.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(profile.value(-1.0, 1.0), Err(Error::Domain(_))));
        let cost = CostModel::Linear { c: 1.0 };
        assert!(matches!(cost.value(-0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_examples() {
        let exp = PerformanceProfile::Exponential { k: 0.1 };
        assert_close(exp.deriv(0.0, 0.0, Wrt::ExecTime).unwrap(), 0.1, 1e-15);

        let inv = PerformanceProfile::InversePower { k: 1.0, a: 1.0 };
        assert_close(inv.deriv(0.0, 2.0, Wrt::ExecTime).unwrap(), 0.25, 1e-15);

        let part = PerformanceProfile::PartitionedInversePower {
            efficacy: MetaEfficacy::Linear { k_o: 0.0, l: 1.0 },
            b: 1.0,
            a: 1.0,
        };
        assert_close(part.deriv(2.0, 2.0, Wrt::PlanTime).unwrap(), 0.125, 1e-15);
    }

    #[test]
    fn cost_examples() {
        let linear = CostModel::Linear { c: 0.04 };
        assert_close(linear.value(9.173).unwrap(), 0.36692, 1e-12);
        assert_eq!(linear.value(0.0).unwrap(), 0.0);

        let power = CostModel::Power { c: 1.0, p: 2.0 };
        assert_close(power.value(3.0).unwrap(), 9.0, 1e-12);
        assert_close(power.deriv(3.0).unwrap(), 6.0, 1e-12);
    }

    #[test]
    fn tabulated_cost_interpolates_with_right_slope_and_final_extrapolation() {
        let cost = CostModel::Tabulated {
            points: vec![(1.0, 2.0), (3.0, 3.0)],
        };
        cost.validate().unwrap();
        // Origin segment slope 2, then slope 0.5.
        assert_close(cost.value(0.5).unwrap(), 1.0, 1e-15);
        assert_close(cost.deriv(0.0).unwrap(), 2.0, 1e-15);
        // Right slope at the first knot.
        assert_close(cost.deriv(1.0).unwrap(), 0.5, 1e-15);
        assert_close(cost.value(2.0).unwrap(), 2.5, 1e-15);
        // Beyond the last knot: final slope.
        assert_close(cost.value(5.0).unwrap(), 4.0, 1e-15);
        assert_close(cost.deriv(5.0).unwrap(), 0.5, 1e-15);
    }

    #[test]
    fn tabulated_cost_validation_rejects_non_monotone_points() {
        let bad = CostModel::Tabulated {
            points: vec![(1.0, 2.0), (2.0, 1.5)],
        };
        assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
        let bad_t = CostModel::Tabulated {
            points: vec![(1.0, 1.0), (1.0, 2.0)],
        };
        assert!(matches!(bad_t.validate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn tabulated_efficacy_requires_leading_zero_knot() {
        let good = MetaEfficacy::Tabulated {
            points: vec![(0.0, 0.1), (1.0, 0.5)],
        };
        good.validate().unwrap();
        assert_close(good.rate(0.5).unwrap(), 0.3, 1e-15);
        assert_close(good.rate_deriv(2.0).unwrap(), 0.4, 1e-15);
        assert_close(good.rate(2.0).unwrap(), 0.9, 1e-15);

        let bad = MetaEfficacy::Tabulated {
            points: vec![(0.5, 0.1), (1.0, 0.5)],
        };
        assert!(matches!(bad.validate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn comprehensive_utility_reference_points() {
        let exp = PerformanceProfile::Exponential { k: 0.1 };
        let t_mm = MetaMetaCost::new(0.01).unwrap();

        let low =
            comprehensive_utility(&exp, &CostModel::Linear { c: 0.04 }, t_mm, 0.0, 9.163).unwrap();
        assert_close(low, 0.233, 5e-4);

        let high =
            comprehensive_utility(&exp, &CostModel::Linear { c: 0.08 }, t_mm, 0.0, 2.231).unwrap();
        assert_close(high, 0.021, 5e-4);

        let zero = comprehensive_utility(
            &exp,
            &CostModel::Linear { c: 0.04 },
            MetaMetaCost::ZERO,
            0.0,
            0.0,
        )
        .unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn meta_meta_cost_rejects_negative_values() {
        assert!(MetaMetaCost::new(-0.1).is_err());
        assert_eq!(MetaMetaCost::default().seconds(), 0.0);
    }

    #[test]
    fn models_are_send_and_sync() {
        fn check<T: Send + Sync>() {}
        check::<PerformanceProfile>();
        check::<CostModel>();
        check::<MetaEfficacy>();
        check::<MetaMetaCost>();
    }

    /// Central finite difference of a single-variable closure.
    fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    fn profile_strategies() -> impl Strategy<Value = PerformanceProfile> {
        prop_oneof![
            (0.01f64..5.0).prop_map(|k| PerformanceProfile::Exponential { k }),
            ((0.1f64..5.0), (0.3f64..3.0))
                .prop_map(|(k, a)| PerformanceProfile::InversePower { k, a }),
            ((0.05f64..2.0), (0.05f64..2.0)).prop_map(|(k_o, l)| {
                PerformanceProfile::PartitionedExponential {
                    efficacy: MetaEfficacy::Linear { k_o, l },
                }
            }),
            ((0.05f64..2.0), (0.05f64..2.0), (0.3f64..3.0), (0.3f64..3.0)).prop_map(
                |(k_o, l, a, b)| PerformanceProfile::PartitionedInversePower {
                    efficacy: MetaEfficacy::Linear { k_o, l },
                    b,
                    a,
                }
            ),
        ]
    }

    proptest! {
        // Object-level value never decreases with more execution time.
        #[test]
        fn value_monotone_in_exec_time(
            profile in profile_strategies(),
            t_m in 0.1f64..5.0,
            t1 in 0.2f64..20.0,
            extra in 0.01f64..10.0,
        ) {
            let lo = profile.value(t_m, t1).unwrap();
            let hi = profile.value(t_m, t1 + extra).unwrap();
            prop_assert!(hi >= lo, "u_o({t1}) = {lo} > u_o({}) = {hi}", t1 + extra);
        }

        // Partitioned value never decreases with more planning time.
        #[test]
        fn value_monotone_in_plan_time(
            profile in profile_strategies().prop_filter("partitioned", |p| p.is_partitioned()),
            t_e in 0.2f64..20.0,
            t1 in 0.0f64..5.0,
            extra in 0.01f64..5.0,
        ) {
            let lo = profile.value(t1, t_e).unwrap();
            let hi = profile.value(t1 + extra, t_e).unwrap();
            prop_assert!(hi >= lo);
        }

        // Analytic partials agree with central differences.
        #[test]
        fn derivatives_match_finite_differences(
            profile in profile_strategies(),
            t_m in 0.2f64..5.0,
            t_e in 0.3f64..15.0,
        ) {
            // Relative comparison floored at 1e-3: below that the finite
            // difference itself is dominated by cancellation noise.
            let h = 1e-5;
            let d_exec = profile.deriv(t_m, t_e, Wrt::ExecTime).unwrap();
            let fd_exec = central_diff(|t| profile.value(t_m, t).unwrap(), t_e, h);
            let scale = d_exec.abs().max(1e-3);
            prop_assert!((d_exec - fd_exec).abs() / scale <= 1e-6,
                "exec deriv {d_exec} vs fd {fd_exec}");

            let d_plan = profile.deriv(t_m, t_e, Wrt::PlanTime).unwrap();
            let fd_plan = central_diff(|t| profile.value(t, t_e).unwrap(), t_m, h);
            let scale = d_plan.abs().max(1e-3);
            prop_assert!((d_plan - fd_plan).abs() / scale <= 1e-6,
                "plan deriv {d_plan} vs fd {fd_plan}");
        }

        // u_c + cost recovers u_o to double-precision exactness.
        #[test]
        fn additive_decomposition_identity(
            profile in profile_strategies(),
            t_m in 0.1f64..5.0,
            t_e in 0.2f64..15.0,
            c in 0.001f64..0.5,
            t_mm in 0.0f64..0.5,
        ) {
            let cost = CostModel::Linear { c };
            let t_mm = MetaMetaCost::new(t_mm).unwrap();
            let u_o = profile.value(t_m, t_e).unwrap();
            let delay = cost.value(t_m + t_e + t_mm.seconds()).unwrap();
            let u_c = comprehensive_utility(&profile, &cost, t_mm, t_m, t_e).unwrap();
            let residual = (u_c + delay - u_o).abs();
            prop_assert!(residual <= 4e-16 * u_o.abs().max(delay.abs()).max(1.0));
        }
    }
}

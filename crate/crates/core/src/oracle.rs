//! Grid-refinement optimizer and finite-difference utilities used to
//! cross-check every closed form in this crate.
//!
//! Deliberately derivative-free and simple: a coarse scan over an
//! adaptively expanded bracket, then repeated shrink-and-rescan around the
//! incumbent. The point is independence — these routines share no code or
//! assumptions with the analytic solvers they validate. Results are pure
//! functions of their inputs; reruns are bit-identical.

use crate::error::{Error, Result};

/// Knobs for the grid optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Fixed `(low, high)` search bracket; adaptive expansion otherwise.
    pub bracket_hint: Option<(f64, f64)>,
    /// Cap on bracket doublings before giving up.
    pub max_doublings: usize,
    /// Grid points per axis on each scan.
    pub coarse_points: usize,
    /// Shrink-and-rescan rounds after the coarse scan.
    pub refinement_rounds: usize,
    /// Window shrink per refinement round.
    pub shrink_factor: f64,
}

impl OracleConfig {
    /// Defaults for one-dimensional searches.
    pub fn one_dim() -> Self {
        Self {
            bracket_hint: None,
            max_doublings: 60,
            coarse_points: 4096,
            refinement_rounds: 6,
            shrink_factor: 8.0,
        }
    }

    /// Defaults for two-dimensional searches (points are per axis).
    pub fn two_dim() -> Self {
        Self {
            coarse_points: 64,
            ..Self::one_dim()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coarse_points < 8 || self.max_doublings == 0 || self.refinement_rounds == 0 {
            return Err(Error::Parameter("oracle counts must be positive".into()));
        }
        if !(self.shrink_factor > 1.0) {
            return Err(Error::Parameter("oracle shrink_factor must be > 1".into()));
        }
        if let Some((lo, hi)) = self.bracket_hint {
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(Error::Parameter(
                    "oracle bracket_hint must satisfy low < high".into(),
                ));
            }
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self::one_dim()
    }
}

/// Located optimum: argument(s), the objective re-evaluated there, and the
/// final grid spacing. Where the objective is numerically flat at the top
/// (value ties at double precision), the resolution widens to cover the
/// tie plateau — the argument cannot be localized more finely than that.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgOpt {
    pub args: Vec<f64>,
    pub value: f64,
    pub resolution: f64,
}

fn grid_point(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
    }
}

/// Scan `n` points on `[lo, hi]`; returns values and the index of the
/// largest finite value (first wins ties), if any value is finite.
fn scan<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, n: usize) -> (Vec<f64>, Option<usize>) {
    let mut values = Vec::with_capacity(n);
    let mut best: Option<usize> = None;
    for i in 0..n {
        let v = f(grid_point(lo, hi, i, n));
        if v.is_finite() && best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
        values.push(v);
    }
    (values, best)
}

/// Width of the contiguous run of grid values indistinguishable from the
/// maximum, plus whether the run touches a window edge.
fn tie_plateau(values: &[f64], best: usize, spacing: f64) -> (f64, bool) {
    let top = values[best];
    let tol = 16.0 * f64::EPSILON * top.abs().max(1.0);
    let mut left = best;
    while left > 0 && values[left - 1].is_finite() && top - values[left - 1] <= tol {
        left -= 1;
    }
    let mut right = best;
    while right + 1 < values.len()
        && values[right + 1].is_finite()
        && top - values[right + 1] <= tol
    {
        right += 1;
    }
    let width = (right - left) as f64 * spacing;
    let touches = width > 0.0 && (left == 0 || right + 1 == values.len());
    (width, touches)
}

/// Expands `hi` by doubling until the objective has not increased for
/// three consecutive doublings (an overshoot past any peak).
fn expand_bracket_1d<F: Fn(f64) -> f64>(f: &F, lo: f64, max_doublings: usize) -> Result<f64> {
    let mut hi = if lo > 0.0 { lo * 2.0 } else { 1.0 };
    let mut prev = f(hi);
    let mut run = 0;
    for _ in 0..max_doublings {
        hi *= 2.0;
        let cur = f(hi);
        if !cur.is_finite() || cur <= prev {
            run += 1;
            if run >= 3 {
                return Ok(hi);
            }
        } else {
            run = 0;
        }
        prev = cur;
    }
    Err(Error::Bracket(format!(
        "objective still rising after {max_doublings} doublings (hi = {hi})"
    )))
}

/// Maximizes a one-variable objective by coarse scan plus grid refinement.
///
/// The bracket comes from `config.bracket_hint` or adaptive doubling from
/// `[0, 1]`. Non-finite objective values are skipped as candidates. For
/// unimodal objectives the returned argument is within `resolution` of the
/// true maximizer; otherwise it is within `resolution` of the best grid
/// point. Ties resolve to the smallest argument.
pub fn grid_max_1d<F: Fn(f64) -> f64>(f: F, config: &OracleConfig) -> Result<ArgOpt> {
    config.validate()?;
    let (lo0, hi0) = match config.bracket_hint {
        Some(pair) => pair,
        None => (0.0, expand_bracket_1d(&f, 0.0, config.max_doublings)?),
    };

    let n = config.coarse_points;
    let (mut lo, mut hi) = (lo0, hi0);
    let mut final_scan: Option<(Vec<f64>, usize, f64, f64)> = None;
    for round in 0..=config.refinement_rounds {
        let (values, best) = scan(&f, lo, hi, n);
        let best = best.ok_or_else(|| {
            Error::Bracket(format!("objective has no finite values on [{lo}, {hi}]"))
        })?;
        let spacing = (hi - lo) / ((n - 1) as f64);
        let x_best = grid_point(lo, hi, best, n);
        if round == config.refinement_rounds {
            final_scan = Some((values, best, spacing, x_best));
            break;
        }
        let half = (hi - lo) / (2.0 * config.shrink_factor);
        lo = (x_best - half).max(lo0);
        hi = (x_best + half).min(hi0);
        if hi <= lo {
            final_scan = Some((values, best, spacing, x_best));
            break;
        }
    }

    let (values, best, spacing, x_best) = final_scan.expect("scan always runs");
    let (plateau, touches) = tie_plateau(&values, best, spacing);
    let resolution = if touches {
        hi - lo
    } else {
        2.0 * (plateau + spacing)
    };
    Ok(ArgOpt {
        args: vec![x_best],
        value: values[best],
        resolution,
    })
}

/// Minimizes a one-variable objective; the negated counterpart of
/// [`grid_max_1d`].
pub fn grid_min_1d<F: Fn(f64) -> f64>(f: F, config: &OracleConfig) -> Result<ArgOpt> {
    let mut opt = grid_max_1d(|t| -f(t), config)?;
    opt.value = -opt.value;
    Ok(opt)
}

/// Maximizes a two-variable objective over per-axis brackets.
///
/// Axes expand by doubling while the incumbent grid maximum sits against
/// an upper edge; refinement then shrinks per-axis windows around the
/// incumbent. Ties resolve to the smallest first axis, then smallest
/// second axis.
pub fn grid_max_2d<F: Fn(f64, f64) -> f64>(f: F, config: &OracleConfig) -> Result<ArgOpt> {
    config.validate()?;
    let n = config.coarse_points;
    let (lo, mut hi) = match config.bracket_hint {
        Some((l, h)) => ((l, l), (h, h)),
        None => ((0.0, 0.0), (1.0, 1.0)),
    };

    // Expand each axis until the box maximum moves off the upper edges.
    if config.bracket_hint.is_none() {
        let edge = 16;
        let mut doublings = 0;
        loop {
            let (best, _) = scan_2d(&f, lo, hi, edge)?;
            let mut grew = false;
            if best.0 + 2 >= edge {
                hi.0 *= 2.0;
                grew = true;
            }
            if best.1 + 2 >= edge {
                hi.1 *= 2.0;
                grew = true;
            }
            if !grew {
                break;
            }
            doublings += 1;
            if doublings > config.max_doublings {
                return Err(Error::Bracket(format!(
                    "box maximum still on the upper edge after {} doublings",
                    config.max_doublings
                )));
            }
        }
    }

    let (lo0, hi0) = (lo, hi);
    let (mut lo, mut hi) = (lo0, hi0);
    for _ in 0..config.refinement_rounds {
        let (best, _) = scan_2d(&f, lo, hi, n)?;
        let bx = grid_point(lo.0, hi.0, best.0, n);
        let by = grid_point(lo.1, hi.1, best.1, n);
        let half_x = (hi.0 - lo.0) / (2.0 * config.shrink_factor);
        let half_y = (hi.1 - lo.1) / (2.0 * config.shrink_factor);
        lo = ((bx - half_x).max(lo0.0), (by - half_y).max(lo0.1));
        hi = ((bx + half_x).min(hi0.0), (by + half_y).min(hi0.1));
    }

    let (best, values) = scan_2d(&f, lo, hi, n)?;
    let bx = grid_point(lo.0, hi.0, best.0, n);
    let by = grid_point(lo.1, hi.1, best.1, n);
    let spacing_x = (hi.0 - lo.0) / ((n - 1) as f64);
    let spacing_y = (hi.1 - lo.1) / ((n - 1) as f64);

    // Per-axis plateaus along the incumbent's row and column.
    let row: Vec<f64> = (0..n).map(|i| values[i * n + best.1]).collect();
    let col: Vec<f64> = (0..n).map(|j| values[best.0 * n + j]).collect();
    let (px, tx) = tie_plateau(&row, best.0, spacing_x);
    let (py, ty) = tie_plateau(&col, best.1, spacing_y);
    let res_x = if tx {
        hi.0 - lo.0
    } else {
        2.0 * (px + spacing_x)
    };
    let res_y = if ty {
        hi.1 - lo.1
    } else {
        2.0 * (py + spacing_y)
    };

    Ok(ArgOpt {
        args: vec![bx, by],
        value: values[best.0 * n + best.1],
        resolution: res_x.max(res_y),
    })
}

/// Row-major scan of an `n x n` grid; returns the argmax indices (first
/// axis outer, so ties resolve to smallest first axis then second).
fn scan_2d<F: Fn(f64, f64) -> f64>(
    f: &F,
    lo: (f64, f64),
    hi: (f64, f64),
    n: usize,
) -> Result<((usize, usize), Vec<f64>)> {
    let mut values = vec![f64::NAN; n * n];
    let mut best: Option<(usize, usize)> = None;
    let mut best_value = f64::NEG_INFINITY;
    for i in 0..n {
        let x = grid_point(lo.0, hi.0, i, n);
        for j in 0..n {
            let y = grid_point(lo.1, hi.1, j, n);
            let v = f(x, y);
            values[i * n + j] = v;
            if v.is_finite() && (best.is_none() || v > best_value) {
                best = Some((i, j));
                best_value = v;
            }
        }
    }
    let best = best.ok_or_else(|| {
        Error::Bracket(format!(
            "objective has no finite values on [{:?}, {:?}]",
            lo, hi
        ))
    })?;
    Ok((best, values))
}

/// Derivative order for [`finite_diff`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

/// Central finite difference of `f` at `t`.
///
/// The default step is `1e-5 * max(1, |t|)`. A non-finite stencil value
/// means the stencil left the objective's domain and is a domain error.
pub fn finite_diff<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    order: DiffOrder,
    step: Option<f64>,
) -> Result<f64> {
    let h = step.unwrap_or_else(|| 1e-5 * t.abs().max(1.0));
    if !(h > 0.0) || !t.is_finite() {
        return Err(Error::Parameter(format!(
            "finite_diff needs finite t and step > 0, got t={t}, step={h}"
        )));
    }
    let fp = f(t + h);
    let fm = f(t - h);
    let result = match order {
        DiffOrder::First => (fp - fm) / (2.0 * h),
        DiffOrder::Second => {
            let f0 = f(t);
            if !f0.is_finite() {
                return Err(Error::Domain(format!(
                    "stencil center {t} is outside the objective's domain"
                )));
            }
            (fp - 2.0 * f0 + fm) / (h * h)
        }
    };
    if !fp.is_finite() || !fm.is_finite() || !result.is_finite() {
        return Err(Error::Domain(format!(
            "finite-difference stencil around {t} left the objective's domain"
        )));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{comprehensive_utility, CostModel, MetaMetaCost, PerformanceProfile};
    use proptest::prelude::*;

    fn reference_objective() -> impl Fn(f64) -> f64 {
        let profile = PerformanceProfile::Exponential { k: 0.1 };
        let cost = CostModel::Linear { c: 0.04 };
        let t_mm = MetaMetaCost::new(0.01).unwrap();
        move |t| comprehensive_utility(&profile, &cost, t_mm, 0.0, t).unwrap_or(f64::NAN)
    }

    #[test]
    fn locates_the_reference_stopping_optimum() {
        let opt = grid_max_1d(reference_objective(), &OracleConfig::one_dim()).unwrap();
        let expected = (0.1f64 / 0.04).ln() / 0.1;
        assert!(
            (opt.args[0] - expected).abs() <= 1e-5,
            "argmax {} vs {expected}",
            opt.args[0]
        );
    }

    #[test]
    fn constant_objective_returns_lowest_tie() {
        let opt = grid_max_1d(|_| 1.5, &OracleConfig::one_dim()).unwrap();
        assert_eq!(opt.args[0], 0.0);
        assert_eq!(opt.value, 1.5);
    }

    #[test]
    fn known_parabola_maximum() {
        let opt = grid_max_1d(|t| -(t - 3.0) * (t - 3.0), &OracleConfig::one_dim()).unwrap();
        assert!((opt.args[0] - 3.0).abs() <= opt.resolution);
    }

    #[test]
    fn min_mirrors_max() {
        let opt = grid_min_1d(|t| (t - 3.0) * (t - 3.0), &OracleConfig::one_dim()).unwrap();
        assert!((opt.args[0] - 3.0).abs() <= opt.resolution);
        assert!(opt.value >= 0.0 && opt.value <= 1e-10);
    }

    #[test]
    fn rising_objective_is_a_bracket_error() {
        let err = grid_max_1d(
            |t| t,
            &OracleConfig {
                max_doublings: 20,
                ..OracleConfig::one_dim()
            },
        );
        assert!(matches!(err, Err(Error::Bracket(_))));
    }

    #[test]
    fn two_dim_locates_the_partition_reference_optimum() {
        let profile = PerformanceProfile::PartitionedInversePower {
            efficacy: crate::models::MetaEfficacy::Linear { k_o: 0.0, l: 1.0 },
            b: 1.0,
            a: 1.0,
        };
        let cost = CostModel::Linear { c: 0.01 };
        let f = move |t_m: f64, t_e: f64| {
            comprehensive_utility(&profile, &cost, MetaMetaCost::ZERO, t_m, t_e).unwrap_or(f64::NAN)
        };
        let opt = grid_max_2d(f, &OracleConfig::two_dim()).unwrap();
        let expected = 100f64.cbrt();
        assert!(
            (opt.args[0] - expected).abs() <= 1e-4,
            "t_m {}",
            opt.args[0]
        );
        assert!(
            (opt.args[1] - expected).abs() <= 1e-4,
            "t_e {}",
            opt.args[1]
        );
    }

    #[test]
    fn separable_objective_matches_per_axis_argmaxes() {
        let f = |x: f64, y: f64| -(x - 2.0) * (x - 2.0) - (y - 5.0) * (y - 5.0);
        let opt = grid_max_2d(f, &OracleConfig::two_dim()).unwrap();
        assert!((opt.args[0] - 2.0).abs() <= opt.resolution);
        assert!((opt.args[1] - 5.0).abs() <= opt.resolution);
    }

    #[test]
    fn constant_axis_resolves_to_zero() {
        let f = |x: f64, _y: f64| -(x - 2.0) * (x - 2.0);
        let opt = grid_max_2d(f, &OracleConfig::two_dim()).unwrap();
        assert!((opt.args[0] - 2.0).abs() <= opt.resolution);
        assert_eq!(opt.args[1], 0.0);
    }

    #[test]
    fn finite_diff_examples() {
        let d = finite_diff(|t| 1.0 - (-0.1 * t).exp(), 0.0, DiffOrder::First, None).unwrap();
        assert!((d - 0.1).abs() <= 1e-7);

        let d2 = finite_diff(|t| t * t * t, 2.0, DiffOrder::Second, None).unwrap();
        assert!((d2 - 12.0).abs() <= 1e-5);

        let f = reference_objective();
        let t_star = (0.1f64 / 0.04).ln() / 0.1;
        let stationary = finite_diff(f, t_star, DiffOrder::First, None).unwrap();
        assert!(stationary.abs() <= 1e-6);
    }

    #[test]
    fn finite_diff_rejects_stencils_outside_the_domain() {
        let f = |t: f64| if t < 0.0 { f64::NAN } else { t.sqrt() };
        let err = finite_diff(f, 0.0, DiffOrder::First, None);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn reruns_are_bit_identical() {
        let a = grid_max_1d(reference_objective(), &OracleConfig::one_dim()).unwrap();
        let b = grid_max_1d(reference_objective(), &OracleConfig::one_dim()).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        // Strictly concave quadratics are localized within the reported
        // resolution.
        #[test]
        fn concave_argmax_within_resolution(peak in 0.1f64..50.0, curvature in 0.01f64..10.0) {
            let f = move |t: f64| -curvature * (t - peak) * (t - peak);
            let opt = grid_max_1d(f, &OracleConfig::one_dim()).unwrap();
            prop_assert!((opt.args[0] - peak).abs() <= opt.resolution,
                "argmax {} vs peak {peak}, resolution {}", opt.args[0], opt.resolution);
        }
    }
}

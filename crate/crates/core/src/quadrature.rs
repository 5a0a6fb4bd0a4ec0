//! Adaptive one-dimensional integration.
//!
//! Each segment is evaluated with the 7-point Gauss / 15-point Kronrod pair;
//! the segment with the largest error estimate is bisected until the summed
//! estimate falls below the absolute tolerance. Infinite domains are
//! truncated at the first point of a geometric grid where a caller-supplied
//! tail bound certifies that the neglected mass is below
//! [`QuadratureSettings::tail_mass_bound`]; that grid also seeds the
//! initial partition.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_mass_bound: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_subdivisions: 2000,
            tail_mass_bound: 1e-12,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, max_subdivisions: usize, tail_mass_bound: f64) -> Result<Self> {
        if abs_tol.is_nan()
            || abs_tol <= 0.0
            || max_subdivisions == 0
            || tail_mass_bound.is_nan()
            || tail_mass_bound <= 0.0
        {
            return Err(Error::InvalidArgument(format!(
                "quadrature settings need abs_tol > 0, max_subdivisions >= 1, tail bound > 0 \
                 (got {abs_tol}, {max_subdivisions}, {tail_mass_bound})"
            )));
        }
        Ok(Self {
            abs_tol,
            max_subdivisions,
            tail_mass_bound,
        })
    }

    /// Settings for an integral nested inside another one.
    pub fn nested(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            tail_mass_bound: self.tail_mass_bound * factor,
            ..*self
        }
    }
}

/// `tail(t)` must bound the absolute mass of the integrand beyond `t`
/// (above `t` for an upper tail, below `t` for a lower one).
pub type TailBound<'a> = &'a dyn Fn(f64) -> f64;

#[derive(Clone, Copy)]
pub enum Domain<'a> {
    Interval {
        lo: f64,
        hi: f64,
    },
    /// `[lo, +inf)`
    Upper {
        lo: f64,
        tail: TailBound<'a>,
    },
    /// `(-inf, hi]`
    Lower {
        hi: f64,
        tail: TailBound<'a>,
    },
    Line {
        lower_tail: TailBound<'a>,
        upper_tail: TailBound<'a>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error, including neglected tail mass.
    pub error: f64,
    pub subdivisions: usize,
}

pub fn integrate<F>(
    f: F,
    domain: Domain<'_>,
    kinks: &[f64],
    settings: &QuadratureSettings,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    let mut breaks: Vec<f64> = Vec::new();
    let mut tail_mass = 0.0;
    match domain {
        Domain::Interval { lo, hi } => {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidArgument(format!(
                    "integration interval [{lo}, {hi}] is not a finite ordered pair"
                )));
            }
            breaks.push(lo);
            breaks.push(hi);
        }
        Domain::Upper { lo, tail } => {
            let (grid, mass) = tail_grid(lo, 1.0, tail, settings)?;
            breaks.extend(grid);
            tail_mass += mass;
        }
        Domain::Lower { hi, tail } => {
            let (grid, mass) = tail_grid(hi, -1.0, tail, settings)?;
            breaks.extend(grid);
            tail_mass += mass;
        }
        Domain::Line {
            lower_tail,
            upper_tail,
        } => {
            let lo_anchor = kinks.iter().copied().fold(0.0_f64, f64::min);
            let hi_anchor = kinks.iter().copied().fold(0.0_f64, f64::max);
            let (lower, m1) = tail_grid(lo_anchor, -1.0, lower_tail, settings)?;
            let (upper, m2) = tail_grid(hi_anchor, 1.0, upper_tail, settings)?;
            breaks.extend(lower);
            breaks.extend(upper);
            tail_mass += m1 + m2;
        }
    }
    let (lo, hi) = (
        breaks.iter().copied().fold(f64::INFINITY, f64::min),
        breaks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    breaks.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    adaptive(&f, &breaks, settings).map(|mut r| {
        r.error += tail_mass;
        r
    })
}

/// Geometric grid from `anchor` outward in direction `dir` up to the first
/// point where the tail bound drops below the threshold.
fn tail_grid(
    anchor: f64,
    dir: f64,
    tail: TailBound<'_>,
    settings: &QuadratureSettings,
) -> Result<(Vec<f64>, f64)> {
    let mut grid = vec![anchor];
    let mut width = 1.0;
    for _ in 0..1100 {
        let cut = anchor + dir * width;
        grid.push(cut);
        let mass = tail(cut);
        if !cut.is_finite() {
            break;
        }
        if mass <= settings.tail_mass_bound {
            return Ok((grid, mass.max(0.0)));
        }
        width *= 2.0;
    }
    Err(Error::numeric(
        "tail truncation (bound never fell below threshold)",
        f64::NAN,
        f64::INFINITY,
    ))
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    settings: &QuadratureSettings,
) -> Result<Integral> {
    let mut segments = Vec::with_capacity(breaks.len() + 16);
    for w in breaks.windows(2) {
        segments.push(kronrod15(f, w[0], w[1])?);
    }
    let mut subdivisions = 0;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= settings.abs_tol {
            return Ok(Integral {
                value,
                error,
                subdivisions,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let Segment { a, b, .. } = segments[worst];
        let mid = 0.5 * (a + b);
        if subdivisions >= settings.max_subdivisions || !(mid > a && mid < b) {
            return Err(Error::numeric("adaptive quadrature", value, error));
        }
        segments[worst] = kronrod15(f, a, mid)?;
        segments.push(kronrod15(f, mid, b)?);
        subdivisions += 1;
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::numeric(
                format!("integrand is {y} at x = {x}"),
                y,
                f64::INFINITY,
            ))
        }
    };

    let fc = eval(center)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn exponential_on_half_line() {
        let tail = |b: f64| (-b).exp();
        let r = integrate(
            |x| (-x).exp(),
            Domain::Upper {
                lo: 0.0,
                tail: &tail,
            },
            &[],
            &settings(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() <= 1e-9, "{r:?}");
        assert!(r.error <= 1e-9);
    }

    #[test]
    fn standard_normal_on_line() {
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        // Mills-ratio bound: P(Z > t) <= phi(t) / t for t > 0.
        let upper = move |t: f64| {
            if t <= 0.0 {
                1.0
            } else {
                norm * (-0.5 * t * t).exp() / t
            }
        };
        let lower = move |t: f64| upper(-t);
        let r = integrate(
            |x| norm * (-0.5 * x * x).exp(),
            Domain::Line {
                lower_tail: &lower,
                upper_tail: &upper,
            },
            &[],
            &settings(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() <= 1e-9, "{r:?}");
    }

    #[test]
    fn lower_half_line_mirrors_upper() {
        let tail = |b: f64| b.exp();
        let r = integrate(
            |x| x.exp(),
            Domain::Lower {
                hi: 0.0,
                tail: &tail,
            },
            &[],
            &settings(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn linearity_on_test_integrands() {
        let s = settings();
        let dom = Domain::Interval { lo: -1.0, hi: 2.5 };
        let f = |x: f64| (3.0 * x).sin() + x * x;
        let g = |x: f64| (-x * x).exp();
        let (a, b) = (2.5, -0.75);
        let lhs = integrate(|x| a * f(x) + b * g(x), dom, &[], &s)
            .unwrap()
            .value;
        let rhs = a * integrate(f, dom, &[], &s).unwrap().value
            + b * integrate(g, dom, &[], &s).unwrap().value;
        assert!((lhs - rhs).abs() <= 2.0 * s.abs_tol);
    }

    #[test]
    fn additivity_across_kink() {
        let s = settings();
        let f = |x: f64| (x - 0.3).abs() * (1.0 + x).exp();
        let whole = integrate(f, Domain::Interval { lo: -1.0, hi: 2.0 }, &[0.3], &s).unwrap();
        let left = integrate(f, Domain::Interval { lo: -1.0, hi: 0.3 }, &[], &s).unwrap();
        let right = integrate(f, Domain::Interval { lo: 0.3, hi: 2.0 }, &[], &s).unwrap();
        assert!((whole.value - (left.value + right.value)).abs() <= 2.0 * s.abs_tol);
    }

    #[test]
    fn kink_points_become_breakpoints() {
        // A jump at 0.3 is integrated exactly when declared.
        let f = |x: f64| if x < 0.3 { 0.0 } else { 1.0 };
        let r = integrate(
            f,
            Domain::Interval { lo: 0.0, hi: 1.0 },
            &[0.3],
            &settings(),
        )
        .unwrap();
        assert!((r.value - 0.7).abs() < 1e-12);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn exhausted_budget_is_numeric_failure() {
        let s = QuadratureSettings::new(1e-12, 3, 1e-12).unwrap();
        let err = integrate(
            |x| (200.0 * x).sin(),
            Domain::Interval { lo: 0.0, hi: 10.0 },
            &[],
            &s,
        )
        .unwrap_err();
        match err {
            Error::NumericFailure {
                error_estimate,
                value,
                ..
            } => {
                assert!(error_estimate > 1e-12);
                assert!(value.is_finite());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn useless_tail_bound_is_numeric_failure() {
        let tail = |_: f64| 1.0;
        let err = integrate(
            |x| (-x).exp(),
            Domain::Upper {
                lo: 0.0,
                tail: &tail,
            },
            &[],
            &settings(),
        );
        assert!(matches!(err, Err(Error::NumericFailure { .. })));
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate(
            |x| 1.0 / x,
            Domain::Interval { lo: -1.0, hi: 1.0 },
            &[],
            &settings(),
        );
        // The 15-point rule does not hit 0 exactly, but the singularity
        // prevents convergence.
        assert!(r.is_err());
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::new(0.0, 10, 1e-12).is_err());
        assert!(QuadratureSettings::new(1e-9, 0, 1e-12).is_err());
        assert!(QuadratureSettings::new(1e-9, 1, 1e-12).is_ok());
    }
}

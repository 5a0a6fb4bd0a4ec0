//! Exponential/Erlang analytics.
//!
//! A sum of `k` i.i.d. exponential times with common rate is Erlang(`k`,
//! rate); `k = 0` is the empty sum, a point mass at zero. This module holds
//! the Erlang density and distribution functions, the exact shortage-absence
//! probability, the conditional probability `R(z | α)` of one realization
//! succeeding given the shared-element difference `z`, and the density of
//! that difference.
//!
//! `R` and the difference density each have two routes: a definitional one
//! (convolution evaluated by adaptive quadrature), which the variance
//! computation relies on, and a closed form (`*_closed_form`) expanded into
//! finite sums of Erlang survival functions. The two are cross-checked in
//! the tests.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::{AlphaPair, ExponentialPair, Scenario};
use crate::quadrature::{integrate, Domain, Integral, QuadratureSettings};

const LN_FACTORIAL_TABLE: usize = 1024;

/// `ln(n!)`, exact-summed below 1024 and Stirling beyond.
pub fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        let mut acc = 0.0_f64;
        t.push(0.0);
        for i in 1..LN_FACTORIAL_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    });
    if n < LN_FACTORIAL_TABLE {
        return table[n];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// `ln C(n, k)`, summed term by term so that huge `n` with small `k` keeps
/// full relative precision.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n, "ln_binomial({n}, {k})");
    let k = k.min(n - k);
    (0..k).map(|j| ((n - j) as f64 / (j + 1) as f64).ln()).sum()
}

/// Erlang law: sum of `stages` exponential variables with common `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangDist {
    stages: usize,
    rate: f64,
}

impl ErlangDist {
    pub fn new(stages: usize, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Erlang rate {rate} must be > 0"
            )));
        }
        Ok(Self { stages, rate })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn is_point_mass(&self) -> bool {
        self.stages == 0
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        if self.stages == 0 {
            return Err(Error::DegenerateDistribution);
        }
        Ok(self.density(x))
    }

    /// Density for `stages >= 1`.
    fn density(&self, x: f64) -> f64 {
        debug_assert!(self.stages >= 1);
        if x < 0.0 {
            return 0.0;
        }
        let k = self.stages;
        if k == 1 {
            return self.rate * (-self.rate * x).exp();
        }
        if x == 0.0 {
            return 0.0;
        }
        let ln = k as f64 * self.rate.ln() + (k - 1) as f64 * x.ln()
            - self.rate * x
            - ln_factorial(k - 1);
        ln.exp()
    }

    /// Largest value of the density.
    pub fn max_density(&self) -> Result<f64> {
        match self.stages {
            0 => Err(Error::DegenerateDistribution),
            1 => Ok(self.rate),
            k => Ok(self.density((k - 1) as f64 / self.rate)),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_sf(x).0
    }

    /// `G(x) = 1 - F(x)`.
    pub fn sf(&self, x: f64) -> f64 {
        self.cdf_sf(x).1
    }

    /// `(F(x), 1 - F(x))`, each computed directly where it is the smaller
    /// of the two so that neither loses precision to cancellation.
    fn cdf_sf(&self, x: f64) -> (f64, f64) {
        if x < 0.0 {
            return (0.0, 1.0);
        }
        let k = self.stages;
        if k == 0 {
            return (1.0, 0.0);
        }
        let t = self.rate * x;
        if t == 0.0 {
            return (0.0, 1.0);
        }
        if t.is_infinite() {
            return (1.0, 0.0);
        }
        // F(x) = P(Poisson(t) >= k), G(x) = P(Poisson(t) <= k - 1).
        if t <= k as f64 {
            let mut term = (k as f64 * t.ln() - t - ln_factorial(k)).exp();
            let mut cdf = 0.0;
            let mut i = k;
            while term > 1e-17 * cdf || i == k {
                cdf += term;
                i += 1;
                term *= t / i as f64;
                if term == 0.0 {
                    break;
                }
            }
            let cdf = cdf.min(1.0);
            (cdf, 1.0 - cdf)
        } else {
            let mut term = ((k - 1) as f64 * t.ln() - t - ln_factorial(k - 1)).exp();
            let mut sf = term;
            for i in (1..k).rev() {
                term *= i as f64 / t;
                sf += term;
                if term < 1e-17 * sf {
                    break;
                }
            }
            let sf = sf.min(1.0);
            (1.0 - sf, sf)
        }
    }
}

fn demand_sum(p: &ExponentialPair, stages: usize) -> ErlangDist {
    ErlangDist {
        stages,
        rate: p.lambda(),
    }
}

fn supply_sum(p: &ExponentialPair, stages: usize) -> ErlangDist {
    ErlangDist {
        stages,
        rate: p.nu(),
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Exact `Θ = P{D_{m_x} > S_{m_y}}` for exponential inter-event times.
///
/// Sum over `i = 0..m_x` of `ν^{m_y} λ^i / (λ+ν)^{m_y+i} · m_y(m_y+1)…(m_y+i-1) / i!`,
/// accumulated in log space.
pub fn theta_exact(p: &ExponentialPair, s: &Scenario) -> f64 {
    let (m_x, m_y) = (s.m_x(), s.m_y());
    if m_y == 0 {
        return 1.0;
    }
    let total = p.lambda() + p.nu();
    let ln_p = (p.lambda() / total).ln();
    let ln_q = (p.nu() / total).ln();
    let mut ln_terms = Vec::with_capacity(m_x);
    let mut ln_t = m_y as f64 * ln_q;
    ln_terms.push(ln_t);
    for i in 1..m_x {
        ln_t += ((m_y + i - 1) as f64 / i as f64).ln() + ln_p;
        ln_terms.push(ln_t);
    }
    let theta = log_sum_exp(&ln_terms).exp();
    assert!(
        (0.0..=1.0 + 1e-12).contains(&theta),
        "theta_exact produced {theta} outside [0, 1]"
    );
    theta.min(1.0)
}

/// `Θ = ∫_0^∞ G^X_{m_x}(y) f^Y_{m_y}(y) dy` by adaptive quadrature.
pub fn theta_quadrature(
    p: &ExponentialPair,
    s: &Scenario,
    settings: &QuadratureSettings,
) -> Result<Integral> {
    if s.m_y() == 0 {
        return Ok(Integral {
            value: 1.0,
            error: 0.0,
            subdivisions: 0,
        });
    }
    let x = demand_sum(p, s.m_x());
    let y = supply_sum(p, s.m_y());
    let tail = |b: f64| y.sf(b);
    integrate(
        |t| x.sf(t) * y.density(t),
        Domain::Upper {
            lo: 0.0,
            tail: &tail,
        },
        &[],
        settings,
    )
}

/// Branches of `R(z | α)` where at least one of the disjoint sums is empty.
fn r_degenerate(z: f64, x: &ErlangDist, y: &ErlangDist) -> Option<f64> {
    match (x.stages, y.stages) {
        (0, 0) => Some(if z > 0.0 { 1.0 } else { 0.0 }),
        (_, 0) => Some(if z >= 0.0 { 1.0 } else { x.sf(-z) }),
        (0, _) => Some(y.cdf(z)),
        _ => None,
    }
}

fn disjoint_sums(
    a: &AlphaPair,
    p: &ExponentialPair,
    s: &Scenario,
) -> Result<(ErlangDist, ErlangDist)> {
    a.check(s)?;
    Ok((
        demand_sum(p, s.m_x() - a.alpha_x),
        supply_sum(p, s.m_y() - a.alpha_y),
    ))
}

/// `R(z | α) = P{D' + z > S'}` with `D' ~ Erlang(m_x - α_x, λ)` and
/// `S' ~ Erlang(m_y - α_y, ν)` independent, by quadrature of
/// `∫ F^Y(x + z) f^X(x) dx`.
pub fn r_conditional(
    z: f64,
    a: &AlphaPair,
    p: &ExponentialPair,
    s: &Scenario,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let (x, y) = disjoint_sums(a, p, s)?;
    r_quadrature(z, &x, &y, settings)
}

fn r_quadrature(
    z: f64,
    x: &ErlangDist,
    y: &ErlangDist,
    settings: &QuadratureSettings,
) -> Result<f64> {
    if let Some(r) = r_degenerate(z, x, y) {
        return Ok(r);
    }
    let tail = |b: f64| x.sf(b);
    let r = integrate(
        |t| y.cdf(t + z) * x.density(t),
        Domain::Upper {
            lo: (-z).max(0.0),
            tail: &tail,
        },
        &[],
        settings,
    )
    .map_err(|e| e.with_context(format!("R(z = {z})")))?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Closed-form expansion of `R(z | α)` as a finite double sum of Erlang
/// survival functions with rate `λ + ν`.
pub fn r_conditional_closed_form(
    z: f64,
    a: &AlphaPair,
    p: &ExponentialPair,
    s: &Scenario,
) -> Result<f64> {
    let (x, y) = disjoint_sums(a, p, s)?;
    if let Some(r) = r_degenerate(z, &x, &y) {
        return Ok(r);
    }
    let (kx, ky) = (x.stages, y.stages);
    let (lambda, nu) = (p.lambda(), p.nu());
    let beta = lambda + nu;
    let lower = (-z).max(0.0);
    let ln_abs_z = z.abs().ln();
    let base = kx as f64 * lambda.ln() - nu * z - ln_factorial(kx - 1);
    let mut sum = 0.0;
    for i in 0..ky {
        for q in 0..=i {
            let stages = kx + i - q;
            let z_pow = if q == 0 { 0.0 } else { q as f64 * ln_abs_z };
            let ln = base + i as f64 * nu.ln() - ln_factorial(i)
                + ln_binomial(i, q)
                + z_pow
                + ln_factorial(stages - 1)
                - stages as f64 * beta.ln();
            let sign = if z < 0.0 && q % 2 == 1 { -1.0 } else { 1.0 };
            let g = ErlangDist { stages, rate: beta }.sf(lower);
            sum += sign * ln.exp() * g;
        }
    }
    Ok(1.0 - x.cdf(lower) - sum)
}

/// Density of `C_α = D_{α_x} - S_{α_y}`, the difference of the sums over
/// elements shared by two realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommonDiff {
    /// `α = (0, 0)`: nothing is shared and `C_α ≡ 0`.
    PointMassAtZero,
    Density(f64),
}

impl CommonDiff {
    pub fn density(&self) -> Option<f64> {
        match *self {
            CommonDiff::PointMassAtZero => None,
            CommonDiff::Density(d) => Some(d),
        }
    }
}

fn common_sums(a: &AlphaPair, p: &ExponentialPair) -> (ErlangDist, ErlangDist) {
    (demand_sum(p, a.alpha_x), supply_sum(p, a.alpha_y))
}

fn common_degenerate(z: f64, x: &ErlangDist, y: &ErlangDist) -> Option<CommonDiff> {
    match (x.stages, y.stages) {
        (0, 0) => Some(CommonDiff::PointMassAtZero),
        (_, 0) => Some(CommonDiff::Density(x.density(z))),
        (0, _) => Some(CommonDiff::Density(y.density(-z))),
        _ => None,
    }
}

/// `f^C(z | α) = ∫ f^X_{α_x}(x + z) f^Y_{α_y}(x) dx` by quadrature.
pub fn common_diff_density(
    z: f64,
    a: &AlphaPair,
    p: &ExponentialPair,
    settings: &QuadratureSettings,
) -> Result<CommonDiff> {
    let (x, y) = common_sums(a, p);
    common_diff_quadrature(z, &x, &y, settings)
}

fn common_diff_quadrature(
    z: f64,
    x: &ErlangDist,
    y: &ErlangDist,
    settings: &QuadratureSettings,
) -> Result<CommonDiff> {
    if let Some(c) = common_degenerate(z, x, y) {
        return Ok(c);
    }
    let (mx, my) = (x.max_density()?, y.max_density()?);
    let tail = |b: f64| (mx * y.sf(b)).min(my * x.sf(b + z));
    let r = integrate(
        |t| x.density(t + z) * y.density(t),
        Domain::Upper {
            lo: (-z).max(0.0),
            tail: &tail,
        },
        &[],
        settings,
    )
    .map_err(|e| e.with_context(format!("f^C(z = {z})")))?;
    Ok(CommonDiff::Density(r.value.max(0.0)))
}

/// Closed form of the difference density as a finite sum over the binomial
/// expansion of `(x + z)^{α_x - 1}`.
pub fn common_diff_density_closed_form(z: f64, a: &AlphaPair, p: &ExponentialPair) -> CommonDiff {
    let (x, y) = common_sums(a, p);
    if let Some(c) = common_degenerate(z, &x, &y) {
        return c;
    }
    let (ax, ay) = (a.alpha_x, a.alpha_y);
    let (lambda, nu) = (p.lambda(), p.nu());
    let beta = lambda + nu;
    let lower = (-z).max(0.0);
    let ln_abs_z = z.abs().ln();
    let base = ax as f64 * lambda.ln() + ay as f64 * nu.ln()
        - lambda * z
        - ln_factorial(ax - 1)
        - ln_factorial(ay - 1);
    let mut sum = 0.0;
    for q in 0..ax {
        let stages = ax + ay - q - 1;
        let z_pow = if q == 0 { 0.0 } else { q as f64 * ln_abs_z };
        let ln = base + ln_binomial(ax - 1, q) + z_pow + ln_factorial(stages - 1)
            - stages as f64 * beta.ln();
        let sign = if z < 0.0 && q % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * ln.exp() * ErlangDist { stages, rate: beta }.sf(lower);
    }
    CommonDiff::Density(sum.max(0.0))
}

/// Bundle of the two Erlang pairs needed to evaluate the `μ₁₁(α)` integrand.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AlphaLaws {
    pub disjoint_x: ErlangDist,
    pub disjoint_y: ErlangDist,
    pub common_x: ErlangDist,
    pub common_y: ErlangDist,
}

impl AlphaLaws {
    pub fn new(a: &AlphaPair, p: &ExponentialPair, s: &Scenario) -> Result<Self> {
        let (disjoint_x, disjoint_y) = disjoint_sums(a, p, s)?;
        let (common_x, common_y) = common_sums(a, p);
        Ok(Self {
            disjoint_x,
            disjoint_y,
            common_x,
            common_y,
        })
    }

    pub fn r(&self, z: f64, settings: &QuadratureSettings) -> Result<f64> {
        r_quadrature(z, &self.disjoint_x, &self.disjoint_y, settings)
    }

    pub fn common_density(&self, z: f64, settings: &QuadratureSettings) -> Result<CommonDiff> {
        common_diff_quadrature(z, &self.common_x, &self.common_y, settings)
    }
}

//! Exact variance of the resampling estimator under exponential laws.
//!
//! Two realizations share `α_x` demand and `α_y` supply elements with
//! hypergeometric probability `P(α)`. Given `α`, both indicators depend on
//! the same difference `C_α` of shared sums and on independent sums of the
//! disjoint elements, so
//!
//! ```text
//! μ₁₁(α) = ∫ R(z | α)² f^C(z | α) dz,     μ₁₁ = Σ_α P(α) μ₁₁(α)
//! V(Θ^R) = μ/r + (r-1)/r · μ₁₁ - μ²        (μ = Θ, μ₂ = μ for an indicator)
//! ```
//!
//! The expectation is over the draws *and* over the samples themselves.

use std::cell::RefCell;
use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::erlang::{ln_binomial, theta_exact, AlphaLaws, CommonDiff};
use crate::error::{Error, Result};
use crate::model::{validate_sizes, AlphaPair, ExponentialPair, MomentSet, Scenario};
use crate::quadrature::{integrate, Domain, QuadratureSettings};

/// Round-off allowance below zero before a variance counts as a failure.
const NEGATIVE_VARIANCE_SLACK: f64 = 1e-10;

fn overlap_probability(n: usize, m: usize, alpha: usize) -> f64 {
    // Both draws take m of n; alpha of the second draw hit the first.
    if m - alpha > n - m {
        return 0.0;
    }
    (ln_binomial(m, alpha) + ln_binomial(n - m, m - alpha) - ln_binomial(n, m)).exp()
}

/// `P(α)`: probability that two independent realizations share exactly
/// `α_x` demand and `α_y` supply positions.
pub fn alpha_probability(a: &AlphaPair, s: &Scenario, n_x: usize, n_y: usize) -> Result<f64> {
    a.check(s)?;
    if n_x < s.m_x() || n_y < s.m_y() {
        return Err(Error::InvalidArgument(format!(
            "sample sizes ({n_x}, {n_y}) smaller than subsample sizes ({}, {})",
            s.m_x(),
            s.m_y()
        )));
    }
    Ok(overlap_probability(n_x, s.m_x(), a.alpha_x) * overlap_probability(n_y, s.m_y(), a.alpha_y))
}

/// `μ₁₁(α) = ∫ R(z | α)² f^C(z | α) dz`.
pub fn mu11_alpha(
    a: &AlphaPair,
    p: &ExponentialPair,
    s: &Scenario,
    q: &QuadratureSettings,
) -> Result<f64> {
    let laws = AlphaLaws::new(a, p, s)?;
    let inner = q.nested(1e-3);
    if a.alpha_x == 0 && a.alpha_y == 0 {
        let r = laws.r(0.0, &inner)?;
        return Ok(r * r);
    }

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let record = |e: Error| {
        failure.borrow_mut().get_or_insert(e);
        f64::NAN
    };
    let integrand = |z: f64| {
        let r = match laws.r(z, &inner) {
            Ok(r) => r,
            Err(e) => return record(e),
        };
        match laws.common_density(z, &inner) {
            Ok(CommonDiff::Density(d)) => r * r * d,
            Ok(CommonDiff::PointMassAtZero) => unreachable!("alpha != (0, 0)"),
            Err(e) => record(e),
        }
    };
    let (cx, cy) = (laws.common_x, laws.common_y);
    // P(C > b) <= P(D_com > b) and P(C < b) <= P(S_com > -b).
    let upper = |b: f64| cx.sf(b);
    let lower = |b: f64| cy.sf(-b);
    let domain = match (a.alpha_x, a.alpha_y) {
        (_, 0) => Domain::Upper {
            lo: 0.0,
            tail: &upper,
        },
        (0, _) => Domain::Lower {
            hi: 0.0,
            tail: &lower,
        },
        _ => Domain::Line {
            lower_tail: &lower,
            upper_tail: &upper,
        },
    };
    let result = integrate(integrand, domain, &[0.0], q);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let value = result?.value;
    Ok(value.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaTerm {
    pub probability: f64,
    pub mu11: f64,
}

/// `μ₁₁` and its per-`α` terms; cells with `P(α) = 0` are omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedMoment {
    pub per_alpha: BTreeMap<AlphaPair, AlphaTerm>,
    pub theta: f64,
    pub mu11: f64,
}

impl MixedMoment {
    pub fn moments(&self) -> Result<MomentSet> {
        MomentSet::for_indicator(self.theta, self.mu11)
    }

    pub fn variance(&self, r: usize) -> Result<f64> {
        if r == 0 {
            return Err(Error::InvalidArgument("r must be at least 1".into()));
        }
        let v = self.moments()?.variance_of_mean(r);
        if v >= 0.0 {
            Ok(v)
        } else if v >= -NEGATIVE_VARIANCE_SLACK {
            Ok(0.0)
        } else {
            Err(Error::numeric(
                format!("resampling variance at r = {r} is negative"),
                v,
                v.abs(),
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceBreakdown {
    pub per_alpha: BTreeMap<AlphaPair, AlphaTerm>,
    pub theta: f64,
    pub mu11: f64,
    pub variance: f64,
    pub r: usize,
}

pub fn mixed_moment(
    p: &ExponentialPair,
    s: &Scenario,
    n_x: usize,
    n_y: usize,
    q: &QuadratureSettings,
) -> Result<MixedMoment> {
    if validate_sizes(n_x, n_y, s).is_hard_fail() {
        return Err(Error::DrawImpossible {
            requested: if n_x < s.m_x() { s.m_x() } else { s.m_y() },
            available: if n_x < s.m_x() { n_x } else { n_y },
        });
    }
    let mut weighted = Vec::new();
    for a in AlphaPair::grid(s) {
        let prob = alpha_probability(&a, s, n_x, n_y)?;
        if prob > 0.0 {
            weighted.push((a, prob));
        }
    }
    let terms: Vec<(AlphaPair, AlphaTerm)> = weighted
        .into_par_iter()
        .map(|(a, probability)| {
            mu11_alpha(&a, p, s, q)
                .map(|mu11| (a, AlphaTerm { probability, mu11 }))
                .map_err(|e| e.with_context(format!("alpha = ({}, {})", a.alpha_x, a.alpha_y)))
        })
        .collect::<Result<_>>()?;
    // Grid order is sorted, and collect preserves it.
    let mu11 = terms.iter().map(|(_, t)| t.probability * t.mu11).sum();
    Ok(MixedMoment {
        per_alpha: terms.into_iter().collect(),
        theta: theta_exact(p, s),
        mu11,
    })
}

pub fn resampling_variance(
    p: &ExponentialPair,
    s: &Scenario,
    n_x: usize,
    n_y: usize,
    r: usize,
    q: &QuadratureSettings,
) -> Result<VarianceBreakdown> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let mm = mixed_moment(p, s, n_x, n_y, q)?;
    let variance = mm.variance(r)?;
    Ok(VarianceBreakdown {
        per_alpha: mm.per_alpha,
        theta: mm.theta,
        mu11: mm.mu11,
        variance,
        r,
    })
}

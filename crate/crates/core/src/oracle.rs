//! Brute-force Monte Carlo oracles.
//!
//! These simulate the renewal sums directly and share no evaluation code
//! with the analytic routines they check. They are also the only route to
//! `Θ` for inter-event laws other than the exponential.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    AlphaPair, EstimatorReport, ExponentialPair, Method, ResamplingPlan, Sample, Scenario,
};
use crate::resampler::count_successes;
use crate::rng::{derive_seed, substream, StreamRng};
use crate::stats;

const BLOCK: usize = 1 << 14;

pub type Sampler = Arc<dyn Fn(&mut StreamRng) -> f64 + Send + Sync>;

/// Law of one inter-event time.
#[derive(Clone)]
pub enum EventLaw {
    Exponential(f64),
    /// Uniform draws, with replacement, from observed values.
    Empirical(Sample),
    Custom(Sampler),
}

impl fmt::Debug for EventLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventLaw::Exponential(rate) => write!(f, "Exponential({rate})"),
            EventLaw::Empirical(s) => write!(f, "Empirical(n = {})", s.len()),
            EventLaw::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl EventLaw {
    fn validate(&self) -> Result<()> {
        match self {
            EventLaw::Exponential(rate) if !(rate.is_finite() && *rate > 0.0) => Err(
                Error::InvalidArgument(format!("exponential rate {rate} must be > 0")),
            ),
            _ => Ok(()),
        }
    }

    pub fn draw(&self, rng: &mut StreamRng) -> f64 {
        match self {
            EventLaw::Exponential(rate) => {
                // Inversion on (0, 1]; kept separate from the rand_distr
                // sampler used by the estimators under test.
                let u: f64 = 1.0 - rng.random::<f64>();
                -u.ln() / rate
            }
            EventLaw::Empirical(s) => s.values()[rng.random_range(0..s.len())],
            EventLaw::Custom(f) => f(rng),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub draws: usize,
}

impl McEstimate {
    fn from_hits(hits: u64, draws: usize) -> Self {
        let p = hits as f64 / draws as f64;
        Self {
            value: p,
            stderr: (p * (1.0 - p) / draws as f64).sqrt(),
            draws,
        }
    }

    /// `|value - target|` in units of the standard error. A zero stderr
    /// gives 0 for an exact match and infinity otherwise.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Count successes of `trial` over `draws` draws split into fixed blocks,
/// block `b` reading substream `b` of `seed`.
fn blocked_hits<F>(draws: usize, seed: u64, trial: F) -> u64
where
    F: Fn(&mut StreamRng) -> bool + Sync,
{
    let blocks = draws.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, b as u64);
            let len = BLOCK.min(draws - b * BLOCK);
            (0..len).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum()
}

/// `Θ = P{D_{m_x} > S_{m_y}}` by direct simulation of both renewal sums.
pub fn theta_mc(
    x_law: &EventLaw,
    y_law: &EventLaw,
    s: &Scenario,
    draws: usize,
    seed: u64,
) -> Result<EstimatorReport> {
    if draws == 0 {
        return Err(Error::InvalidArgument("draws must be at least 1".into()));
    }
    x_law.validate()?;
    y_law.validate()?;
    let (m_x, m_y) = (s.m_x(), s.m_y());
    let hits = blocked_hits(draws, seed, |rng| {
        let mut demand = 0.0;
        for _ in 0..m_x {
            demand += x_law.draw(rng);
        }
        let mut supply = 0.0;
        for _ in 0..m_y {
            supply += y_law.draw(rng);
        }
        demand > supply
    });
    let est = McEstimate::from_hits(hits, draws);
    Ok(EstimatorReport::point(Method::MonteCarlo, est.value).with_stderr(est.stderr))
}

/// `μ₁₁(α)` by simulation: one shared difference of common sums, two
/// independent disjoint parts, product of the two indicators.
pub fn mu11_mc(
    a: &AlphaPair,
    p: &ExponentialPair,
    s: &Scenario,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    a.check(s)?;
    if draws == 0 {
        return Err(Error::InvalidArgument("draws must be at least 1".into()));
    }
    let x = EventLaw::Exponential(p.lambda());
    let y = EventLaw::Exponential(p.nu());
    let (kx, ky) = (s.m_x() - a.alpha_x, s.m_y() - a.alpha_y);
    let sum =
        |law: &EventLaw, k: usize, rng: &mut StreamRng| (0..k).map(|_| law.draw(rng)).sum::<f64>();
    let hits = blocked_hits(draws, seed, |rng| {
        let shared = sum(&x, a.alpha_x, rng) - sum(&y, a.alpha_y, rng);
        let first = sum(&x, kx, rng) + shared > sum(&y, ky, rng);
        let second = sum(&x, kx, rng) + shared > sum(&y, ky, rng);
        first && second
    });
    Ok(McEstimate::from_hits(hits, draws))
}

/// Across-replication mean and variance of the resampling estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResamplingVarianceMc {
    pub mean: f64,
    pub mean_stderr: f64,
    /// Unbiased sample variance over replications.
    pub variance: f64,
    /// Jackknife standard error of `variance`.
    pub variance_stderr: f64,
    pub replications: usize,
}

/// Replication `j` draws fresh exponential samples of sizes `n_x`, `n_y`
/// and runs the full resampling estimator with `plan.r()` realizations.
/// Samples use child seed `[0, j]` and realizations child seed `[1, j]`
/// of `plan.seed()`.
pub fn resampling_variance_mc(
    p: &ExponentialPair,
    s: &Scenario,
    n_x: usize,
    n_y: usize,
    plan: &ResamplingPlan,
    replications: usize,
) -> Result<ResamplingVarianceMc> {
    if replications < 3 {
        return Err(Error::InvalidArgument(
            "variance oracle needs at least 3 replications".into(),
        ));
    }
    if n_x < s.m_x() || n_y < s.m_y() {
        return Err(Error::DrawImpossible {
            requested: if n_x < s.m_x() { s.m_x() } else { s.m_y() },
            available: if n_x < s.m_x() { n_x } else { n_y },
        });
    }
    let estimates: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(derive_seed(plan.seed(), &[0, j as u64]), 0);
            let ex = Exp::new(p.lambda()).expect("validated rate");
            let ey = Exp::new(p.nu()).expect("validated rate");
            let hx = Sample::new((0..n_x).map(|_| ex.sample(&mut rng)).collect())?;
            let hy = Sample::new((0..n_y).map(|_| ey.sample(&mut rng)).collect())?;
            let inner = ResamplingPlan::new(plan.r(), derive_seed(plan.seed(), &[1, j as u64]))?;
            Ok(count_successes(&hx, &hy, s, &inner) as f64 / plan.r() as f64)
        })
        .collect::<Result<_>>()?;
    let variance = stats::sample_variance(&estimates);
    Ok(ResamplingVarianceMc {
        mean: stats::mean(&estimates),
        mean_stderr: (variance / replications as f64).sqrt(),
        variance,
        variance_stderr: stats::jackknife_variance_stderr(&estimates),
        replications,
    })
}

//! The parametric plug-in baseline.
//!
//! Rates are estimated by maximum likelihood (`n / Σ`) and substituted into
//! the exact exponential formula for `Θ`. The estimator is biased for finite
//! samples; its bias, variance and mean square error are measured by
//! redrawing samples from known rates.

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::erlang::theta_exact;
use crate::error::{Error, Result};
use crate::model::{EstimatorReport, ExponentialPair, Method, Sample, Scenario};
use crate::rng::substream;
use crate::stats;

/// `(λ*, ν*) = (n_x / Σ hx, n_y / Σ hy)`.
pub fn rate_estimates(hx: &Sample, hy: &Sample) -> Result<(f64, f64)> {
    let (sx, sy) = (hx.sum(), hy.sum());
    if sx <= 0.0 || sy <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok((hx.len() as f64 / sx, hy.len() as f64 / sy))
}

pub fn classical_estimate(
    hx: &Sample,
    hy: &Sample,
    scenario: &Scenario,
) -> Result<EstimatorReport> {
    let (lambda, nu) = rate_estimates(hx, hy)?;
    let rates = ExponentialPair::new(lambda, nu)?;
    Ok(EstimatorReport::point(
        Method::Classical,
        theta_exact(&rates, scenario),
    ))
}

/// Sampling moments of the plug-in estimator over repeated samples.
///
/// `variance` and `mse` use divisor `n` so that `mse = variance + bias²`
/// holds exactly on the replication set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalMoments {
    pub theta: f64,
    pub mean_estimate: f64,
    /// `E(Θ^C) - Θ`.
    pub bias: f64,
    pub abs_bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub replications: usize,
    pub mean_stderr: f64,
    pub variance_stderr: f64,
    pub mse_stderr: f64,
}

impl ClassicalMoments {
    pub fn bias_stderr(&self) -> f64 {
        self.mean_stderr
    }

    pub fn report(&self) -> EstimatorReport {
        EstimatorReport::point(Method::Classical, self.mean_estimate)
            .with_variance(self.variance)
            .with_bias(self.bias)
            .with_stderr(self.mean_stderr)
    }
}

fn plug_in_estimate(
    p: &ExponentialPair,
    s: &Scenario,
    n_x: usize,
    n_y: usize,
    seed: u64,
    j: usize,
) -> Result<f64> {
    let mut rng = substream(seed, j as u64);
    let ex = Exp::new(p.lambda()).expect("validated rate");
    let ey = Exp::new(p.nu()).expect("validated rate");
    let sx: f64 = (0..n_x).map(|_| ex.sample(&mut rng)).sum();
    let sy: f64 = (0..n_y).map(|_| ey.sample(&mut rng)).sum();
    if sx <= 0.0 || sy <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    let rates = ExponentialPair::new(n_x as f64 / sx, n_y as f64 / sy)?;
    Ok(theta_exact(&rates, s))
}

/// Bias, variance and MSE of the plug-in estimator, from `replications`
/// fresh sample pairs of sizes `n_x`, `n_y` drawn from `p`. Replication `j`
/// uses substream `j` of `seed`.
pub fn classical_moments(
    p: &ExponentialPair,
    s: &Scenario,
    n_x: usize,
    n_y: usize,
    replications: usize,
    seed: u64,
) -> Result<ClassicalMoments> {
    if replications < 2 {
        return Err(Error::InvalidArgument(
            "classical moments need at least 2 replications".into(),
        ));
    }
    if n_x == 0 || n_y == 0 {
        return Err(Error::InvalidArgument(
            "sample sizes must be positive".into(),
        ));
    }
    let values: Vec<f64> = (0..replications)
        .into_par_iter()
        .map(|j| plug_in_estimate(p, s, n_x, n_y, seed, j))
        .collect::<Result<_>>()?;
    Ok(summarize(&values, theta_exact(p, s)))
}

fn summarize(values: &[f64], theta: f64) -> ClassicalMoments {
    let n = values.len() as f64;
    let mean_estimate = stats::mean(values);
    let bias = mean_estimate - theta;
    let variance = stats::mean_sq_dev(values, mean_estimate);
    let fourth: Vec<f64> = values.iter().map(|v| (v - mean_estimate).powi(4)).collect();
    let sq_err: Vec<f64> = values.iter().map(|v| (v - theta) * (v - theta)).collect();
    ClassicalMoments {
        theta,
        mean_estimate,
        bias,
        abs_bias: bias.abs(),
        variance,
        mse: variance + bias * bias,
        replications: values.len(),
        mean_stderr: (stats::sample_variance(values) / n).sqrt(),
        variance_stderr: ((stats::mean(&fourth) - variance * variance).max(0.0) / n).sqrt(),
        mse_stderr: (stats::sample_variance(&sq_err) / n).sqrt(),
    }
}

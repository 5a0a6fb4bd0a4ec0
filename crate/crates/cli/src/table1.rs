//! Reproduction of the published benchmark table.
//!
//! One wide row per (section, K). Every computed value sits next to its
//! provenance, the printed value (when there is one), and a pass/fail flag.
//! Cells run in parallel; each derives its seeds from the master seed and
//! its own coordinates, so the table does not depend on scheduling.

use rayon::prelude::*;
use serde::Serialize;
use shortage_core::reference::{PublishedSection, PUBLISHED_R, SECTIONS, STOCK_LEVELS};
use shortage_core::rng::derive_seed;
use shortage_core::{
    classical_moments, resampling_variance, resampling_variance_mc, theta_exact, theta_mc, Error,
    EventLaw, QuadratureSettings, ResamplingPlan, Result,
};

use crate::output::{Check, Provenance};

/// Absolute tolerance against the printed four-decimal `Θ`.
pub const THETA_TOL: f64 = 5e-5;
/// Relative tolerance against the printed resampling variance.
pub const RESAMPLING_VARIANCE_REL_TOL: f64 = 0.25;
/// Relative tolerance against the printed classical bias, variance and MSE.
pub const CLASSICAL_REL_TOL: f64 = 0.10;
/// Oracle agreement, in standard errors.
pub const ORACLE_SIGMAS: f64 = 3.0;

const TAG_THETA_MC: u64 = 0;
const TAG_CLASSICAL: u64 = 1;
const TAG_VARIANCE_MC: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Options {
    pub seed: u64,
    pub r: usize,
    pub classical_replications: usize,
    pub theta_draws: usize,
    pub variance_replications: usize,
    pub quadrature: QuadratureSettings,
}

impl Table1Options {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            r: PUBLISHED_R,
            classical_replications: 100_000,
            theta_draws: 1_000_000,
            variance_replications: 2000,
            quadrature: QuadratureSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub section: usize,
    pub k: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub m: usize,
    pub lambda: f64,
    pub nu: f64,
    pub r: usize,
    pub reference: String,

    pub theta: f64,
    pub theta_src: Provenance,
    pub theta_published: f64,
    pub theta_published_src: Provenance,
    pub theta_check: Check,

    pub theta_mc: Option<f64>,
    pub theta_mc_stderr: Option<f64>,
    pub theta_mc_src: Option<Provenance>,
    pub theta_mc_check: Option<Check>,

    pub resampling_variance: Option<f64>,
    pub resampling_variance_src: Option<Provenance>,
    pub resampling_variance_published: Option<f64>,
    pub resampling_variance_published_src: Option<Provenance>,
    pub resampling_variance_check: Option<Check>,

    pub resampling_variance_mc: Option<f64>,
    pub resampling_variance_mc_stderr: Option<f64>,
    pub resampling_variance_mc_src: Option<Provenance>,
    pub resampling_variance_mc_check: Option<Check>,

    /// Signed `E(Θ^C) - Θ`; compared by magnitude, as printed.
    pub classical_bias: Option<f64>,
    pub classical_bias_stderr: Option<f64>,
    pub classical_bias_src: Option<Provenance>,
    pub classical_bias_published: f64,
    pub classical_bias_published_src: Provenance,
    pub classical_bias_check: Option<Check>,

    pub classical_variance: Option<f64>,
    pub classical_variance_stderr: Option<f64>,
    pub classical_variance_src: Option<Provenance>,
    pub classical_variance_published: f64,
    pub classical_variance_published_src: Provenance,
    pub classical_variance_check: Option<Check>,

    pub classical_mse: Option<f64>,
    pub classical_mse_stderr: Option<f64>,
    pub classical_mse_src: Option<Provenance>,
    pub classical_mse_published: f64,
    pub classical_mse_published_src: Provenance,
    pub classical_mse_check: Option<Check>,

    /// `; `-joined failures of this row's computations.
    pub error: Option<String>,
    #[serde(skip)]
    pub numeric_failure: bool,
}

fn relative_check(value: f64, published: f64, tol: f64) -> Check {
    Check::from_bool((value - published).abs() <= tol * published.abs())
}

fn oracle_check(oracle: f64, stderr: f64, analytic: f64) -> Check {
    Check::from_bool((oracle - analytic).abs() <= ORACLE_SIGMAS * stderr)
}

fn some<T>(v: T, src: Provenance) -> (Option<T>, Option<Provenance>) {
    (Some(v), Some(src))
}

fn cell(sec: &PublishedSection, i: usize, opts: &Table1Options) -> Table1Row {
    let k = STOCK_LEVELS[i];
    let cell_seed = |tag| derive_seed(opts.seed, &[sec.section as u64, k as u64, tag]);
    let mut errors: Vec<String> = Vec::new();
    let mut numeric_failure = false;
    let mut note = |what: &str, e: Error| {
        numeric_failure |= matches!(e, Error::NumericFailure { .. });
        errors.push(format!("{what}: {e}"));
    };

    let rates = sec.rates().expect("published rates are valid");
    let scenario = sec.scenario(k).expect("published stock levels are valid");
    let theta = theta_exact(&rates, &scenario);

    let mut row = Table1Row {
        section: sec.section,
        k,
        n_x: sec.n_x,
        n_y: sec.n_y,
        m: sec.m,
        lambda: sec.lambda,
        nu: sec.nu,
        r: opts.r,
        reference: format!("table1:s{}:k{k}", sec.section),
        theta,
        theta_src: Provenance::Analytic,
        theta_published: sec.theta[i],
        theta_published_src: Provenance::PaperReference,
        theta_check: Check::from_bool((theta - sec.theta[i]).abs() <= THETA_TOL),
        theta_mc: None,
        theta_mc_stderr: None,
        theta_mc_src: None,
        theta_mc_check: None,
        resampling_variance: None,
        resampling_variance_src: None,
        resampling_variance_published: sec.resampling_variance[i],
        resampling_variance_published_src: sec.resampling_variance[i]
            .map(|_| Provenance::PaperReference),
        resampling_variance_check: None,
        resampling_variance_mc: None,
        resampling_variance_mc_stderr: None,
        resampling_variance_mc_src: None,
        resampling_variance_mc_check: None,
        classical_bias: None,
        classical_bias_stderr: None,
        classical_bias_src: None,
        classical_bias_published: sec.classical_bias[i],
        classical_bias_published_src: Provenance::PaperReference,
        classical_bias_check: None,
        classical_variance: None,
        classical_variance_stderr: None,
        classical_variance_src: None,
        classical_variance_published: sec.classical_variance[i],
        classical_variance_published_src: Provenance::PaperReference,
        classical_variance_check: None,
        classical_mse: None,
        classical_mse_stderr: None,
        classical_mse_src: None,
        classical_mse_published: sec.classical_mse[i],
        classical_mse_published_src: Provenance::PaperReference,
        classical_mse_check: None,
        error: None,
        numeric_failure: false,
    };

    let x = EventLaw::Exponential(rates.lambda());
    let y = EventLaw::Exponential(rates.nu());
    match theta_mc(&x, &y, &scenario, opts.theta_draws, cell_seed(TAG_THETA_MC)) {
        Ok(mc) => {
            let se = mc.stderr.unwrap_or(0.0);
            (row.theta_mc, row.theta_mc_src) = some(mc.estimate, Provenance::MonteCarlo);
            row.theta_mc_stderr = Some(se);
            row.theta_mc_check = Some(oracle_check(mc.estimate, se, theta));
        }
        Err(e) => note("theta oracle", e),
    }

    let analytic = match resampling_variance(
        &rates,
        &scenario,
        sec.n_x,
        sec.n_y,
        opts.r,
        &opts.quadrature,
    ) {
        Ok(v) => {
            (row.resampling_variance, row.resampling_variance_src) =
                some(v.variance, Provenance::Analytic);
            row.resampling_variance_check = sec.resampling_variance[i].map(|published| {
                relative_check(v.variance, published, RESAMPLING_VARIANCE_REL_TOL)
            });
            Some(v.variance)
        }
        Err(e) => {
            note("resampling variance", e);
            None
        }
    };

    let oracle = ResamplingPlan::new(opts.r, cell_seed(TAG_VARIANCE_MC)).and_then(|plan| {
        resampling_variance_mc(
            &rates,
            &scenario,
            sec.n_x,
            sec.n_y,
            &plan,
            opts.variance_replications,
        )
    });
    match oracle {
        Ok(mc) => {
            (row.resampling_variance_mc, row.resampling_variance_mc_src) =
                some(mc.variance, Provenance::MonteCarlo);
            row.resampling_variance_mc_stderr = Some(mc.variance_stderr);
            row.resampling_variance_mc_check =
                analytic.map(|v| oracle_check(mc.variance, mc.variance_stderr, v));
        }
        Err(e) => note("resampling variance oracle", e),
    }

    let classical: Result<_> = classical_moments(
        &rates,
        &scenario,
        sec.n_x,
        sec.n_y,
        opts.classical_replications,
        cell_seed(TAG_CLASSICAL),
    );
    match classical {
        Ok(c) => {
            (row.classical_bias, row.classical_bias_src) = some(c.bias, Provenance::MonteCarlo);
            row.classical_bias_stderr = Some(c.bias_stderr());
            row.classical_bias_check = Some(relative_check(
                c.abs_bias,
                sec.classical_bias[i],
                CLASSICAL_REL_TOL,
            ));
            (row.classical_variance, row.classical_variance_src) =
                some(c.variance, Provenance::MonteCarlo);
            row.classical_variance_stderr = Some(c.variance_stderr);
            row.classical_variance_check = Some(relative_check(
                c.variance,
                sec.classical_variance[i],
                CLASSICAL_REL_TOL,
            ));
            (row.classical_mse, row.classical_mse_src) = some(c.mse, Provenance::MonteCarlo);
            row.classical_mse_stderr = Some(c.mse_stderr);
            row.classical_mse_check = Some(relative_check(
                c.mse,
                sec.classical_mse[i],
                CLASSICAL_REL_TOL,
            ));
        }
        Err(e) => note("classical moments", e),
    }

    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row.numeric_failure = numeric_failure;
    row
}

/// All twelve (section, K) rows, in section-then-K order.
pub fn run_table1(opts: &Table1Options) -> Vec<Table1Row> {
    let cells: Vec<(usize, usize)> = (0..SECTIONS.len())
        .flat_map(|s| (0..STOCK_LEVELS.len()).map(move |i| (s, i)))
        .collect();
    cells
        .into_par_iter()
        .map(|(s, i)| cell(&SECTIONS[s], i, opts))
        .collect()
}

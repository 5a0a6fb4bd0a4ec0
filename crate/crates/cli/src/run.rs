//! Mode dispatch.

use std::ffi::OsString;

use clap::Parser;
use rand_distr::{Distribution, Exp};
use shortage_core::rng::{derive_seed, substream};
use shortage_core::{
    classical_estimate, classical_moments, mixed_moment, mu11_mc, rate_estimates,
    resampling_estimate, resampling_variance, resampling_variance_mc, theta_exact, theta_mc,
    validate_inputs, EventLaw, ExponentialPair, QuadratureSettings, ResamplingPlan, Sample,
    Scenario, Verdict,
};

use crate::config::{Cli, ExperimentConfig, Mode, SampleSource};
use crate::error::{CliError, CliResult};
use crate::ingest::ingest_sample;
use crate::output::{emit, Check, Provenance, ReportRow};
use crate::table1::{run_table1, Table1Options, Table1Row, ORACLE_SIGMAS};

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    Rows(Vec<ReportRow>),
    Table(Vec<Table1Row>),
}

struct RowBase<'a> {
    cfg: &'a ExperimentConfig,
    scenario: Scenario,
    rates: Option<ExponentialPair>,
    sizes: Option<(usize, usize)>,
    r: Option<usize>,
}

impl RowBase<'_> {
    fn row(&self, quantity: &'static str, value: f64, provenance: Provenance) -> ReportRow {
        ReportRow {
            mode: self.cfg.mode.as_str(),
            quantity,
            lambda: self.rates.map(|p| p.lambda()),
            nu: self.rates.map(|p| p.nu()),
            m: self.scenario.m(),
            k: self.scenario.k(),
            n_x: self.sizes.map(|s| s.0),
            n_y: self.sizes.map(|s| s.1),
            r: self.r,
            alpha_x: None,
            alpha_y: None,
            value,
            stderr: None,
            provenance,
            check: None,
        }
    }
}

fn generated_sample(rate: f64, n: usize, seed: u64) -> CliResult<Sample> {
    let mut rng = substream(seed, 0);
    let exp = Exp::new(rate).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Sample::new((0..n).map(|_| exp.sample(&mut rng)).collect())?)
}

fn load_samples(cfg: &ExperimentConfig) -> CliResult<(Sample, Sample)> {
    match cfg.samples.as_ref().expect("sample modes carry a source") {
        SampleSource::Files { x, y } => Ok((ingest_sample(x)?, ingest_sample(y)?)),
        SampleSource::Generated { n_x, n_y } => {
            let p = cfg.rates.expect("generated samples need rates");
            Ok((
                generated_sample(p.lambda(), *n_x, derive_seed(cfg.seed, &[0, 0]))?,
                generated_sample(p.nu(), *n_y, derive_seed(cfg.seed, &[0, 1]))?,
            ))
        }
    }
}

/// Hard failures abort; soft warnings are logged and flagged on the rows.
fn screen(hx: &Sample, hy: &Sample, s: &Scenario) -> CliResult<Option<Check>> {
    match validate_inputs(hx, hy, s) {
        Verdict::Ok => Ok(None),
        Verdict::SoftWarn(msgs) => {
            for m in &msgs {
                log::warn!("K = {}: {m}", s.k());
            }
            Ok(Some(Check::SoftWarn))
        }
        Verdict::HardFail(msgs) => Err(CliError::Usage(format!(
            "K = {}: {}",
            s.k(),
            msgs.join("; ")
        ))),
    }
}

fn exact(cfg: &ExperimentConfig) -> Vec<ReportRow> {
    let p = cfg.rates.expect("validated");
    cfg.scenarios
        .iter()
        .map(|&s| {
            let base = RowBase {
                cfg,
                scenario: s,
                rates: Some(p),
                sizes: None,
                r: None,
            };
            base.row("theta", theta_exact(&p, &s), Provenance::Analytic)
        })
        .collect()
}

fn resample(cfg: &ExperimentConfig) -> CliResult<Vec<ReportRow>> {
    let (hx, hy) = load_samples(cfg)?;
    let mut rows = Vec::new();
    for &s in &cfg.scenarios {
        let check = screen(&hx, &hy, &s)?;
        let plan = ResamplingPlan::new(cfg.r, derive_seed(cfg.seed, &[1, s.k() as u64]))?;
        let est = resampling_estimate(&hx, &hy, &s, &plan)?;
        let base = RowBase {
            cfg,
            scenario: s,
            rates: cfg.rates,
            sizes: Some((hx.len(), hy.len())),
            r: Some(cfg.r),
        };
        let mut row = base.row("theta", est.estimate, Provenance::Resampling);
        row.check = check;
        rows.push(row);
    }
    Ok(rows)
}

fn variance(cfg: &ExperimentConfig) -> CliResult<Vec<ReportRow>> {
    let p = cfg.rates.expect("validated");
    let (n_x, n_y) = cfg.sizes.expect("validated");
    let q = QuadratureSettings::default();
    let mut rows = Vec::new();
    for &s in &cfg.scenarios {
        let b = resampling_variance(&p, &s, n_x, n_y, cfg.r, &q)?;
        let base = RowBase {
            cfg,
            scenario: s,
            rates: Some(p),
            sizes: Some((n_x, n_y)),
            r: Some(cfg.r),
        };
        rows.push(base.row("theta", b.theta, Provenance::Analytic));
        rows.push(base.row("mu11", b.mu11, Provenance::Analytic));
        rows.push(base.row("variance", b.variance, Provenance::Analytic));
        for (a, t) in &b.per_alpha {
            for (quantity, value) in [("p_alpha", t.probability), ("mu11_alpha", t.mu11)] {
                let mut row = base.row(quantity, value, Provenance::Analytic);
                row.alpha_x = Some(a.alpha_x);
                row.alpha_y = Some(a.alpha_y);
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn classical(cfg: &ExperimentConfig) -> CliResult<Vec<ReportRow>> {
    let mut rows = Vec::new();
    match cfg.samples.as_ref().expect("validated") {
        SampleSource::Files { .. } => {
            let (hx, hy) = load_samples(cfg)?;
            let (lambda, nu) = rate_estimates(&hx, &hy)?;
            for &s in &cfg.scenarios {
                let est = classical_estimate(&hx, &hy, &s)?;
                let base = RowBase {
                    cfg,
                    scenario: s,
                    rates: None,
                    sizes: Some((hx.len(), hy.len())),
                    r: None,
                };
                rows.push(base.row("lambda_hat", lambda, Provenance::Analytic));
                rows.push(base.row("nu_hat", nu, Provenance::Analytic));
                rows.push(base.row("theta", est.estimate, Provenance::Analytic));
            }
        }
        SampleSource::Generated { n_x, n_y } => {
            let p = cfg.rates.expect("validated");
            for &s in &cfg.scenarios {
                let seed = derive_seed(cfg.seed, &[2, s.k() as u64]);
                let c = classical_moments(&p, &s, *n_x, *n_y, cfg.replications, seed)?;
                let base = RowBase {
                    cfg,
                    scenario: s,
                    rates: Some(p),
                    sizes: Some((*n_x, *n_y)),
                    r: None,
                };
                rows.push(base.row("theta", c.theta, Provenance::Analytic));
                for (quantity, value, se) in [
                    ("mean", c.mean_estimate, c.mean_stderr),
                    ("bias", c.bias, c.bias_stderr()),
                    ("variance", c.variance, c.variance_stderr),
                    ("mse", c.mse, c.mse_stderr),
                ] {
                    let mut row = base.row(quantity, value, Provenance::MonteCarlo);
                    row.stderr = Some(se);
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

fn mc_check(cfg: &ExperimentConfig) -> CliResult<Vec<ReportRow>> {
    let p = cfg.rates.expect("validated");
    let (n_x, n_y) = cfg.sizes.expect("validated");
    let q = QuadratureSettings::default();
    let verdict = |oracle: f64, se: f64, analytic: f64| {
        // A zero standard error (all or no hits) still allows one draw of slack.
        let se = se.max(1.0 / cfg.draws as f64);
        Check::from_bool((oracle - analytic).abs() <= ORACLE_SIGMAS * se)
    };
    let mut rows = Vec::new();
    for &s in &cfg.scenarios {
        let base = RowBase {
            cfg,
            scenario: s,
            rates: Some(p),
            sizes: Some((n_x, n_y)),
            r: Some(cfg.r),
        };
        let k = s.k() as u64;

        let theta = theta_exact(&p, &s);
        let x = EventLaw::Exponential(p.lambda());
        let y = EventLaw::Exponential(p.nu());
        let mc = theta_mc(&x, &y, &s, cfg.draws, derive_seed(cfg.seed, &[k, 0]))?;
        let se = mc.stderr.unwrap_or(0.0);
        rows.push(base.row("theta", theta, Provenance::Analytic));
        let mut row = base.row("theta", mc.estimate, Provenance::MonteCarlo);
        row.stderr = Some(se);
        row.check = Some(verdict(mc.estimate, se, theta));
        rows.push(row);

        let mm = mixed_moment(&p, &s, n_x, n_y, &q)?;
        for (i, (a, term)) in mm.per_alpha.iter().enumerate() {
            let analytic = term.mu11;
            let oracle = mu11_mc(
                a,
                &p,
                &s,
                cfg.draws,
                derive_seed(cfg.seed, &[k, 1, i as u64]),
            )?;
            let mut row = base.row("mu11_alpha", analytic, Provenance::Analytic);
            row.alpha_x = Some(a.alpha_x);
            row.alpha_y = Some(a.alpha_y);
            rows.push(row.clone());
            row.value = oracle.value;
            row.stderr = Some(oracle.stderr);
            row.provenance = Provenance::MonteCarlo;
            row.check = Some(verdict(oracle.value, oracle.stderr, analytic));
            rows.push(row);
        }

        let v = mm.variance(cfg.r)?;
        let plan = ResamplingPlan::new(cfg.r, derive_seed(cfg.seed, &[k, 2]))?;
        let vmc = resampling_variance_mc(&p, &s, n_x, n_y, &plan, cfg.oracle_replications)?;
        rows.push(base.row("variance", v, Provenance::Analytic));
        let mut row = base.row("variance", vmc.variance, Provenance::MonteCarlo);
        row.stderr = Some(vmc.variance_stderr);
        row.check = Some(Check::from_bool(
            (vmc.variance - v).abs() <= ORACLE_SIGMAS * vmc.variance_stderr,
        ));
        rows.push(row);
    }
    Ok(rows)
}

fn table1(cfg: &ExperimentConfig) -> Vec<Table1Row> {
    run_table1(&Table1Options {
        r: cfg.r,
        classical_replications: cfg.replications,
        theta_draws: cfg.draws,
        variance_replications: cfg.oracle_replications,
        ..Table1Options::new(cfg.seed)
    })
}

/// Runs the configured mode on the current rayon pool.
pub fn run_mode(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    Ok(match cfg.mode {
        Mode::Exact => RunOutput::Rows(exact(cfg)),
        Mode::Resample => RunOutput::Rows(resample(cfg)?),
        Mode::Variance => RunOutput::Rows(variance(cfg)?),
        Mode::Classical => RunOutput::Rows(classical(cfg)?),
        Mode::McCheck => RunOutput::Rows(mc_check(cfg)?),
        Mode::Table1 => RunOutput::Table(table1(cfg)),
    })
}

/// Runs, writes the output, and reports cell failures of `table1`.
pub fn execute(cfg: &ExperimentConfig) -> CliResult<()> {
    if cfg.seed_generated {
        log::warn!("no seed given; using generated seed {}", cfg.seed);
    }
    let work = || -> CliResult<()> {
        match run_mode(cfg)? {
            RunOutput::Rows(rows) => emit(&rows, cfg.format, cfg.output.as_deref()),
            RunOutput::Table(rows) => {
                emit(&rows, cfg.format, cfg.output.as_deref())?;
                for row in rows.iter().filter(|r| r.error.is_some()) {
                    log::error!(
                        "{}: {}",
                        row.reference,
                        row.error.as_deref().unwrap_or_default()
                    );
                }
                match rows.iter().filter(|r| r.numeric_failure).count() {
                    0 => Ok(()),
                    n => Err(CliError::CellFailures(n)),
                }
            }
        }
    };
    match cfg.threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(work),
    }
}

/// Full command-line entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = ExperimentConfig::from_cli(cli).and_then(|cfg| execute(&cfg));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

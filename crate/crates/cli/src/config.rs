//! Command-line flags, the optional TOML config file, and their merge into
//! a validated [`ExperimentConfig`].
//!
//! The config file uses the long flag names as keys (`lambda = 0.3`,
//! `k = [0, 1]`, `x-file = "dx.txt"`). Flags given on the command line win.
//! Relative paths in the file are taken relative to the file's directory.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use shortage_core::{ExponentialPair, Scenario};

use crate::error::{CliError, CliResult};

pub const DEFAULT_R: usize = 1000;
pub const DEFAULT_CLASSICAL_REPLICATIONS: usize = 100_000;
pub const DEFAULT_DRAWS: usize = 1_000_000;
pub const DEFAULT_ORACLE_REPLICATIONS: usize = 2000;

#[derive(Debug, Parser)]
#[command(
    name = "shortage",
    version,
    about = "Estimate the probability that a storage fed by two renewal processes never runs short"
)]
pub struct Cli {
    #[command(subcommand)]
    pub mode: Mode,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Mode {
    /// Exact probability under exponential inter-event times.
    Exact,
    /// Resampling estimate from sample files, or from samples generated with
    /// --lambda/--nu/--nx/--ny.
    Resample,
    /// Analytic variance of the resampling estimator, with its per-overlap
    /// breakdown.
    Variance,
    /// Plug-in estimate from sample files, or its bias/variance/MSE over
    /// --replications generated sample pairs.
    Classical,
    /// Reproduce the published benchmark table side by side with the
    /// printed values.
    Table1,
    /// Pair every analytic value with its Monte Carlo oracle.
    McCheck,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Resample => "resample",
            Mode::Variance => "variance",
            Mode::Classical => "classical",
            Mode::Table1 => "table1",
            Mode::McCheck => "mc-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Demand rate.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Supply rate.
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    /// Number of demands.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Initial stock levels, comma separated [default: 0].
    #[arg(long, global = true, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Demand sample size.
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    /// Supply sample size.
    #[arg(long, global = true)]
    pub ny: Option<usize>,
    /// Realizations per resampling estimate [default: 1000].
    #[arg(long, global = true)]
    pub r: Option<usize>,
    /// Master seed; a random one is generated and logged when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Generated sample pairs for classical moments [default: 100000].
    #[arg(long, global = true)]
    pub replications: Option<usize>,
    /// Draws per Monte Carlo probability oracle [default: 1000000].
    #[arg(long, global = true)]
    pub draws: Option<usize>,
    /// Generated sample pairs for the resampling-variance oracle [default: 2000].
    #[arg(long, global = true)]
    pub oracle_replications: Option<usize>,
    /// Demand sample file.
    #[arg(long, global = true)]
    pub x_file: Option<PathBuf>,
    /// Supply sample file.
    #[arg(long, global = true)]
    pub y_file: Option<PathBuf>,
    /// Output file; relative paths resolve against $SHORTAGE_OUTPUT_DIR when
    /// set. Standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// TOML file of flag values; flags given on the command line override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum StockLevels {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    lambda: Option<f64>,
    nu: Option<f64>,
    m: Option<usize>,
    k: Option<StockLevels>,
    nx: Option<usize>,
    ny: Option<usize>,
    r: Option<usize>,
    seed: Option<u64>,
    replications: Option<usize>,
    draws: Option<usize>,
    oracle_replications: Option<usize>,
    x_file: Option<PathBuf>,
    y_file: Option<PathBuf>,
    output: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
}

fn load_file(path: &Path) -> CliResult<Flags> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: FileConfig = toml::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let rebase = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
    Ok(Flags {
        lambda: file.lambda,
        nu: file.nu,
        m: file.m,
        k: file.k.map(|k| match k {
            StockLevels::One(k) => vec![k],
            StockLevels::Many(k) => k,
        }),
        nx: file.nx,
        ny: file.ny,
        r: file.r,
        seed: file.seed,
        replications: file.replications,
        draws: file.draws,
        oracle_replications: file.oracle_replications,
        x_file: rebase(file.x_file),
        y_file: rebase(file.y_file),
        output: file.output,
        format: file.format,
        config: None,
        threads: file.threads,
    })
}

impl Flags {
    /// `self` where set, otherwise `fallback`.
    fn or(self, fallback: Flags) -> Flags {
        Flags {
            lambda: self.lambda.or(fallback.lambda),
            nu: self.nu.or(fallback.nu),
            m: self.m.or(fallback.m),
            k: self.k.or(fallback.k),
            nx: self.nx.or(fallback.nx),
            ny: self.ny.or(fallback.ny),
            r: self.r.or(fallback.r),
            seed: self.seed.or(fallback.seed),
            replications: self.replications.or(fallback.replications),
            draws: self.draws.or(fallback.draws),
            oracle_replications: self.oracle_replications.or(fallback.oracle_replications),
            x_file: self.x_file.or(fallback.x_file),
            y_file: self.y_file.or(fallback.y_file),
            output: self.output.or(fallback.output),
            format: self.format.or(fallback.format),
            config: self.config,
            threads: self.threads.or(fallback.threads),
        }
    }

    /// Names of the flags that are set, as spelled on the command line.
    fn set_names(&self) -> Vec<&'static str> {
        let set = [
            ("--lambda", self.lambda.is_some()),
            ("--nu", self.nu.is_some()),
            ("--m", self.m.is_some()),
            ("--k", self.k.is_some()),
            ("--nx", self.nx.is_some()),
            ("--ny", self.ny.is_some()),
            ("--r", self.r.is_some()),
            ("--seed", self.seed.is_some()),
            ("--replications", self.replications.is_some()),
            ("--draws", self.draws.is_some()),
            ("--oracle-replications", self.oracle_replications.is_some()),
            ("--x-file", self.x_file.is_some()),
            ("--y-file", self.y_file.is_some()),
        ];
        set.iter().filter(|(_, s)| *s).map(|(n, _)| *n).collect()
    }
}

/// Where the samples for `resample` and `classical` come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSource {
    Files { x: PathBuf, y: PathBuf },
    Generated { n_x: usize, n_y: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub rates: Option<ExponentialPair>,
    pub scenarios: Vec<Scenario>,
    pub sizes: Option<(usize, usize)>,
    pub samples: Option<SampleSource>,
    pub r: usize,
    pub seed: u64,
    pub seed_generated: bool,
    pub replications: usize,
    pub draws: usize,
    pub oracle_replications: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn allowed(mode: Mode) -> &'static [&'static str] {
    match mode {
        Mode::Exact => &["--lambda", "--nu", "--m", "--k"],
        Mode::Resample => &[
            "--lambda", "--nu", "--m", "--k", "--nx", "--ny", "--r", "--seed", "--x-file",
            "--y-file",
        ],
        Mode::Variance => &["--lambda", "--nu", "--m", "--k", "--nx", "--ny", "--r"],
        Mode::Classical => &[
            "--lambda",
            "--nu",
            "--m",
            "--k",
            "--nx",
            "--ny",
            "--seed",
            "--replications",
            "--x-file",
            "--y-file",
        ],
        Mode::Table1 => &[
            "--r",
            "--seed",
            "--replications",
            "--draws",
            "--oracle-replications",
        ],
        Mode::McCheck => &[
            "--lambda",
            "--nu",
            "--m",
            "--k",
            "--nx",
            "--ny",
            "--r",
            "--seed",
            "--draws",
            "--oracle-replications",
        ],
    }
}

fn positive(name: &str, v: Option<usize>, default: usize) -> CliResult<usize> {
    match v {
        Some(0) => Err(usage(format!("{name} must be at least 1"))),
        Some(v) => Ok(v),
        None => Ok(default),
    }
}

impl ExperimentConfig {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let flags = match &cli.flags.config {
            Some(path) => {
                let file = load_file(path)?;
                cli.flags.or(file)
            }
            None => cli.flags,
        };
        Self::from_flags(cli.mode, flags)
    }

    pub fn from_flags(mode: Mode, f: Flags) -> CliResult<Self> {
        let ok = allowed(mode);
        let stray: Vec<_> = f
            .set_names()
            .into_iter()
            .filter(|n| !ok.contains(n))
            .collect();
        if !stray.is_empty() {
            return Err(usage(format!(
                "{} does not apply to {}",
                stray.join(", "),
                mode.as_str()
            )));
        }

        let files = match (&f.x_file, &f.y_file) {
            (Some(x), Some(y)) => Some(SampleSource::Files {
                x: x.clone(),
                y: y.clone(),
            }),
            (None, None) => None,
            _ => return Err(usage("--x-file and --y-file must be given together")),
        };
        let rates = match (f.lambda, f.nu) {
            (Some(l), Some(n)) => Some(ExponentialPair::new(l, n)?),
            (None, None) => None,
            _ => return Err(usage("--lambda and --nu must be given together")),
        };
        let sizes = match (f.nx, f.ny) {
            (Some(x), Some(y)) => Some((x, y)),
            (None, None) => None,
            _ => return Err(usage("--nx and --ny must be given together")),
        };

        let needs_rates = matches!(mode, Mode::Exact | Mode::Variance | Mode::McCheck)
            || (matches!(mode, Mode::Resample | Mode::Classical) && files.is_none());
        if needs_rates && rates.is_none() {
            return Err(usage(format!("{} needs --lambda and --nu", mode.as_str())));
        }
        let needs_sizes = matches!(mode, Mode::Variance | Mode::McCheck)
            || (matches!(mode, Mode::Resample | Mode::Classical) && files.is_none());
        if needs_sizes && sizes.is_none() {
            return Err(usage(format!("{} needs --nx and --ny", mode.as_str())));
        }
        if files.is_some() && (rates.is_some() || sizes.is_some()) {
            return Err(usage("sample files exclude --lambda/--nu/--nx/--ny"));
        }

        let scenarios = if mode == Mode::Table1 {
            Vec::new()
        } else {
            let m =
                f.m.ok_or_else(|| usage(format!("{} needs --m", mode.as_str())))?;
            let ks = f.k.unwrap_or_else(|| vec![0]);
            if ks.is_empty() {
                return Err(usage("--k must list at least one stock level"));
            }
            ks.iter()
                .map(|&k| Scenario::new(m, k))
                .collect::<Result<_, _>>()?
        };

        let samples = match mode {
            Mode::Resample | Mode::Classical => Some(files.unwrap_or_else(|| {
                let (n_x, n_y) = sizes.expect("checked above");
                SampleSource::Generated { n_x, n_y }
            })),
            _ => None,
        };
        let randomized = match mode {
            Mode::Exact | Mode::Variance => false,
            Mode::Resample | Mode::Table1 | Mode::McCheck => true,
            Mode::Classical => matches!(samples, Some(SampleSource::Generated { .. })),
        };
        let (seed, seed_generated) = match f.seed {
            Some(s) => (s, false),
            None if randomized => (rand::random::<u64>(), true),
            None => (0, false),
        };

        let replications = positive(
            "--replications",
            f.replications,
            DEFAULT_CLASSICAL_REPLICATIONS,
        )?;
        let oracle_replications = positive(
            "--oracle-replications",
            f.oracle_replications,
            DEFAULT_ORACLE_REPLICATIONS,
        )?;
        if replications < 2 {
            return Err(usage("--replications must be at least 2"));
        }
        if oracle_replications < 3 {
            return Err(usage("--oracle-replications must be at least 3"));
        }
        if f.threads == Some(0) {
            return Err(usage("--threads must be at least 1"));
        }

        Ok(Self {
            mode,
            rates,
            scenarios,
            sizes,
            samples,
            r: positive("--r", f.r, DEFAULT_R)?,
            seed,
            seed_generated,
            replications,
            draws: positive("--draws", f.draws, DEFAULT_DRAWS)?,
            oracle_replications,
            output: f.output,
            format: f.format.unwrap_or_default(),
            threads: f.threads,
        })
    }
}

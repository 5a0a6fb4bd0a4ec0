//! Domain types shared by every estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed inter-event times of one renewal process.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidSampleValue { index, value });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

/// The storage question: will the `m`-th demand arrive after the `(m-K)`-th
/// supply when `K` units are initially in stock?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    m: usize,
    k: usize,
}

impl Scenario {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidScenario("m must be at least 1".into()));
        }
        if k > m {
            return Err(Error::InvalidScenario(format!(
                "initial stock K = {k} exceeds m = {m}"
            )));
        }
        Ok(Self { m, k })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of demand addends.
    pub fn m_x(&self) -> usize {
        self.m
    }

    /// Number of supply addends, always `m - K`.
    pub fn m_y(&self) -> usize {
        self.m - self.k
    }
}

/// Exponential inter-event rates: `lambda` for demand, `nu` for supply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialPair {
    lambda: f64,
    nu: f64,
}

impl ExponentialPair {
    pub fn new(lambda: f64, nu: f64) -> Result<Self> {
        let ok = |r: f64| r.is_finite() && r > 0.0;
        if !ok(lambda) || !ok(nu) {
            return Err(Error::InvalidRates { lambda, nu });
        }
        Ok(Self { lambda, nu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

/// Overlap counts between the demand and supply subsamples of two
/// resampling realizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AlphaPair {
    pub alpha_x: usize,
    pub alpha_y: usize,
}

impl AlphaPair {
    pub const fn new(alpha_x: usize, alpha_y: usize) -> Self {
        Self { alpha_x, alpha_y }
    }

    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.alpha_x > scenario.m_x() || self.alpha_y > scenario.m_y() {
            return Err(Error::AlphaOutOfRange {
                alpha_x: self.alpha_x,
                alpha_y: self.alpha_y,
                m_x: scenario.m_x(),
                m_y: scenario.m_y(),
            });
        }
        Ok(())
    }

    /// The full grid `{0..=m_x} x {0..=m_y}` in lexicographic order.
    pub fn grid(scenario: &Scenario) -> impl Iterator<Item = AlphaPair> {
        let m_y = scenario.m_y();
        (0..=scenario.m_x()).flat_map(move |ax| (0..=m_y).map(move |ay| AlphaPair::new(ax, ay)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResamplingPlan {
    r: usize,
    seed: u64,
}

impl ResamplingPlan {
    pub fn new(r: usize, seed: u64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument(
                "number of realizations r must be at least 1".into(),
            ));
        }
        Ok(Self { r, seed })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// First, second and mixed moments of the indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mu: f64,
    pub mu2: f64,
    pub mu11: f64,
}

impl MomentSet {
    /// Moments of a 0/1 indicator, where `mu2 == mu`.
    pub fn for_indicator(mu: f64, mu11: f64) -> Result<Self> {
        const SLACK: f64 = 1e-9;
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidArgument(format!("mu = {mu} outside [0, 1]")));
        }
        if mu11 < -SLACK || mu11 > mu + SLACK {
            return Err(Error::InvalidArgument(format!(
                "mixed moment {mu11} outside [0, mu = {mu}]"
            )));
        }
        Ok(Self { mu, mu2: mu, mu11 })
    }

    /// `E(Θ*²) - μ²` for the average of `r` realizations.
    pub fn variance_of_mean(&self, r: usize) -> f64 {
        let r = r as f64;
        self.mu2 / r + (r - 1.0) / r * self.mu11 - self.mu * self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Resampling,
    Classical,
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Resampling => "resampling",
            Method::Classical => "classical",
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An estimate of `Θ` with whatever error characteristics are known for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub method: Method,
    pub estimate: f64,
    pub variance: Option<f64>,
    pub bias: Option<f64>,
    pub mse: Option<f64>,
    pub stderr: Option<f64>,
}

impl EstimatorReport {
    pub fn point(method: Method, estimate: f64) -> Self {
        Self {
            method,
            estimate,
            variance: None,
            bias: None,
            mse: None,
            stderr: None,
        }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.variance = Some(variance);
        self.sync_mse();
        self
    }

    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = Some(bias);
        self.sync_mse();
        self
    }

    fn sync_mse(&mut self) {
        if let (Some(v), Some(b)) = (self.variance, self.bias) {
            self.mse = Some(v + b * b);
        }
    }
}

/// Outcome of [`validate_inputs`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// Computable, but a sample holds fewer than twice the subsample size.
    SoftWarn(Vec<String>),
    /// A subsample cannot be drawn without replacement.
    HardFail(Vec<String>),
}

impl Verdict {
    pub fn is_hard_fail(&self) -> bool {
        matches!(self, Verdict::HardFail(_))
    }

    pub fn messages(&self) -> &[String] {
        match self {
            Verdict::Ok => &[],
            Verdict::SoftWarn(m) | Verdict::HardFail(m) => m,
        }
    }
}

pub fn validate_inputs(hx: &Sample, hy: &Sample, scenario: &Scenario) -> Verdict {
    validate_sizes(hx.len(), hy.len(), scenario)
}

pub fn validate_sizes(n_x: usize, n_y: usize, scenario: &Scenario) -> Verdict {
    let checks = [
        ("demand", n_x, scenario.m_x()),
        ("supply", n_y, scenario.m_y()),
    ];
    let hard: Vec<String> = checks
        .iter()
        .filter(|(_, n, m)| n < m)
        .map(|(name, n, m)| format!("{name} sample has {n} values, subsample needs {m}"))
        .collect();
    if !hard.is_empty() {
        return Verdict::HardFail(hard);
    }
    let soft: Vec<String> = checks
        .iter()
        .filter(|(_, n, m)| *n < 2 * m)
        .map(|(name, n, m)| {
            format!("{name} sample has {n} values, fewer than twice the subsample size {m}")
        })
        .collect();
    if soft.is_empty() {
        Verdict::Ok
    } else {
        Verdict::SoftWarn(soft)
    }
}

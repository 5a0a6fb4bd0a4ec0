//! Estimators of the shortage-absence probability `Θ = P{D_m > S_{m-K}}` for a
//! storage fed by two independent renewal processes.
//!
//! `D_m` is the time of the `m`-th demand and `S_{m-K}` the time of the
//! `(m-K)`-th supply, where `K` is the initial stock. Two estimators are
//! provided:
//!
//! * the nonparametric resampling estimator ([`resampler`]) together with its
//!   exact variance under exponential laws ([`variance`]), built from overlap
//!   ("alpha pair") decomposition of pairs of realizations;
//! * the classical plug-in estimator ([`classical`]) that substitutes
//!   maximum-likelihood rates into the closed form for `Θ`.
//!
//! Every analytic quantity has an independent Monte Carlo counterpart in
//! [`oracle`].

pub mod classical;
pub mod erlang;
pub mod error;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod reference;
pub mod resampler;
pub mod rng;
pub mod stats;
pub mod variance;

pub use classical::{classical_estimate, classical_moments, rate_estimates, ClassicalMoments};
pub use erlang::{theta_exact, CommonDiff, ErlangDist};
pub use error::{Error, Result};
pub use model::{
    validate_inputs, validate_sizes, AlphaPair, EstimatorReport, ExponentialPair, Method,
    MomentSet, ResamplingPlan, Sample, Scenario, Verdict,
};
pub use oracle::{mu11_mc, resampling_variance_mc, theta_mc, EventLaw, McEstimate};
pub use quadrature::QuadratureSettings;
pub use resampler::{draw_subsample, indicator, resampling_estimate, SubsampleDraw};
pub use variance::{
    alpha_probability, mixed_moment, mu11_alpha, resampling_variance, VarianceBreakdown,
};

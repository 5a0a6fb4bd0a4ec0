//! Published reference values for the three benchmark configurations,
//! transcribed as printed (four decimals, bias without sign).
//!
//! Known inconsistencies, left as printed:
//! * the `theta` rows of the `λ = 0.5` and `m = 4` configurations belong to
//!   each other's parameter sets (`Θ(λ=0.5, m=6) = .7155, …`,
//!   `Θ(λ=0.3, m=4) = .8740, …`);
//! * the `m = 4`, `K = 2` value reads `.9695` where the exact value is
//!   `.96922`;
//! * the `λ = 0.5` resampling variance at `K = 3` is missing.

use crate::error::Result;
use crate::model::{ExponentialPair, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedSection {
    pub section: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub m: usize,
    pub lambda: f64,
    pub nu: f64,
    pub theta: [f64; 4],
    pub classical_bias: [f64; 4],
    pub classical_variance: [f64; 4],
    pub classical_mse: [f64; 4],
    pub resampling_variance: [Option<f64>; 4],
}

impl PublishedSection {
    pub fn rates(&self) -> Result<ExponentialPair> {
        ExponentialPair::new(self.lambda, self.nu)
    }

    pub fn scenario(&self, k: usize) -> Result<Scenario> {
        Scenario::new(self.m, k)
    }
}

/// Stock levels reported for every section.
pub const STOCK_LEVELS: [usize; 4] = [0, 1, 2, 3];

/// Realizations per resampling estimate in the published experiment.
pub const PUBLISHED_R: usize = 1000;

pub const SECTIONS: [PublishedSection; 3] = [
    PublishedSection {
        section: 1,
        n_x: 14,
        n_y: 13,
        m: 6,
        lambda: 0.3,
        nu: 0.7,
        theta: [0.9218, 0.9527, 0.9747, 0.9887],
        classical_bias: [0.0862, 0.0654, 0.044, 0.0249],
        classical_variance: [0.0956, 0.0711, 0.047, 0.0262],
        classical_mse: [0.103, 0.0753, 0.0489, 0.0269],
        resampling_variance: [Some(0.0123), Some(0.0085), Some(0.0093), Some(0.0081)],
    },
    PublishedSection {
        section: 2,
        n_x: 14,
        n_y: 13,
        m: 6,
        lambda: 0.5,
        nu: 0.7,
        theta: [0.874, 0.9295, 0.9695, 0.9919],
        classical_bias: [0.1096, 0.0808, 0.0473, 0.0167],
        classical_variance: [0.1318, 0.0963, 0.0555, 0.0195],
        classical_mse: [0.1438, 0.1028, 0.0577, 0.0198],
        resampling_variance: [Some(0.0142), Some(0.0237), Some(0.021), None],
    },
    PublishedSection {
        section: 3,
        n_x: 10,
        n_y: 9,
        m: 4,
        lambda: 0.3,
        nu: 0.7,
        theta: [0.7155, 0.8046, 0.8809, 0.9391],
        classical_bias: [0.1124, 0.1066, 0.0891, 0.0624],
        classical_variance: [0.1431, 0.1292, 0.1037, 0.0701],
        classical_mse: [0.1558, 0.1406, 0.1116, 0.074],
        resampling_variance: [Some(0.0551), Some(0.0453), Some(0.0482), Some(0.0474)],
    },
];

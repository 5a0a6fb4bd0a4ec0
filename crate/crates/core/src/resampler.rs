//! Nonparametric resampling estimator.
//!
//! Each realization draws `m_x` demand values and `m_y` supply values
//! without replacement, evaluates the indicator `Ψ` of "demand sum exceeds
//! supply sum", and returns the values to their samples. The estimate is
//! the mean of `Ψ` over `r` realizations. Realization `l` draws from
//! substream `l` of the plan's seed (see [`crate::rng`]), so the estimate
//! does not depend on evaluation order or thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{validate_inputs, EstimatorReport, Method, ResamplingPlan, Sample, Scenario};
use crate::rng::substream;

/// `Ψ(x, y)`: 1 when `Σx > Σy` strictly, 0 otherwise (ties included).
/// Empty sums are 0.
pub fn indicator(x: &[f64], y: &[f64]) -> u8 {
    u8::from(x.iter().sum::<f64>() > y.iter().sum::<f64>())
}

/// Partial Fisher-Yates over a reusable buffer of positions. Every draw
/// undoes its own swaps, so the buffer is the identity permutation between
/// draws and a draw depends only on the generator it is given.
#[derive(Debug, Clone)]
pub(crate) struct PositionDrawer {
    positions: Vec<usize>,
    swaps: Vec<usize>,
}

impl PositionDrawer {
    pub fn new(n: usize) -> Self {
        Self {
            positions: (0..n).collect(),
            swaps: Vec::new(),
        }
    }

    /// Visit `m` distinct positions chosen uniformly without replacement.
    pub fn draw<R: Rng + ?Sized>(&mut self, m: usize, rng: &mut R, mut visit: impl FnMut(usize)) {
        let n = self.positions.len();
        debug_assert!(m <= n);
        self.swaps.clear();
        for i in 0..m {
            let j = rng.random_range(i..n);
            self.positions.swap(i, j);
            self.swaps.push(j);
            visit(self.positions[i]);
        }
        for (i, &j) in self.swaps.iter().enumerate().rev() {
            self.positions.swap(i, j);
        }
    }
}

/// Draw `m` values without replacement; every size-`m` subset is equally
/// likely and the sample itself is untouched.
pub fn draw_subsample<R: Rng + ?Sized>(sample: &Sample, m: usize, rng: &mut R) -> Result<Vec<f64>> {
    if m > sample.len() {
        return Err(Error::DrawImpossible {
            requested: m,
            available: sample.len(),
        });
    }
    let mut out = Vec::with_capacity(m);
    PositionDrawer::new(sample.len()).draw(m, rng, |i| out.push(sample.values()[i]));
    Ok(out)
}

/// One realization: the drawn positions and values for both processes.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleDraw {
    pub x_positions: Vec<usize>,
    pub y_positions: Vec<usize>,
    pub x_draw: Vec<f64>,
    pub y_draw: Vec<f64>,
    pub demand_sum: f64,
    pub supply_sum: f64,
}

impl SubsampleDraw {
    pub fn indicator(&self) -> u8 {
        u8::from(self.demand_sum > self.supply_sum)
    }
}

fn check_sizes(hx: &Sample, hy: &Sample, scenario: &Scenario) -> Result<()> {
    if validate_inputs(hx, hy, scenario).is_hard_fail() {
        let (requested, available) = if hx.len() < scenario.m_x() {
            (scenario.m_x(), hx.len())
        } else {
            (scenario.m_y(), hy.len())
        };
        return Err(Error::DrawImpossible {
            requested,
            available,
        });
    }
    Ok(())
}

/// Realization `index` of `plan`, exactly as used by [`resampling_estimate`].
pub fn draw_realization(
    hx: &Sample,
    hy: &Sample,
    scenario: &Scenario,
    plan: &ResamplingPlan,
    index: usize,
) -> Result<SubsampleDraw> {
    check_sizes(hx, hy, scenario)?;
    let mut rng = substream(plan.seed(), index as u64);
    let mut x_positions = Vec::with_capacity(scenario.m_x());
    let mut y_positions = Vec::with_capacity(scenario.m_y());
    PositionDrawer::new(hx.len()).draw(scenario.m_x(), &mut rng, |i| x_positions.push(i));
    PositionDrawer::new(hy.len()).draw(scenario.m_y(), &mut rng, |i| y_positions.push(i));
    let x_draw: Vec<f64> = x_positions.iter().map(|&i| hx.values()[i]).collect();
    let y_draw: Vec<f64> = y_positions.iter().map(|&i| hy.values()[i]).collect();
    Ok(SubsampleDraw {
        demand_sum: x_draw.iter().sum(),
        supply_sum: y_draw.iter().sum(),
        x_positions,
        y_positions,
        x_draw,
        y_draw,
    })
}

/// Number of realizations with `Ψ = 1`.
pub(crate) fn count_successes(
    hx: &Sample,
    hy: &Sample,
    scenario: &Scenario,
    plan: &ResamplingPlan,
) -> u64 {
    let (xs, ys) = (hx.values(), hy.values());
    let (m_x, m_y) = (scenario.m_x(), scenario.m_y());
    (0..plan.r())
        .into_par_iter()
        .map_init(
            || (PositionDrawer::new(xs.len()), PositionDrawer::new(ys.len())),
            |(dx, dy), l| {
                let mut rng = substream(plan.seed(), l as u64);
                let mut d = 0.0;
                let mut s = 0.0;
                dx.draw(m_x, &mut rng, |i| d += xs[i]);
                dy.draw(m_y, &mut rng, |i| s += ys[i]);
                u64::from(d > s)
            },
        )
        .sum()
}

/// The resampling estimate: fraction of `r` realizations with `Ψ = 1`.
pub fn resampling_estimate(
    hx: &Sample,
    hy: &Sample,
    scenario: &Scenario,
    plan: &ResamplingPlan,
) -> Result<EstimatorReport> {
    check_sizes(hx, hy, scenario)?;
    let hits = count_successes(hx, hy, scenario, plan);
    Ok(EstimatorReport::point(
        Method::Resampling,
        hits as f64 / plan.r() as f64,
    ))
}

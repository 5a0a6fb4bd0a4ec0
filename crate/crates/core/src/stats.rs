//! Small summary-statistics helpers used by the Monte Carlo routines.
//!
//! All sums run sequentially over the input slice so that results are
//! bit-identical for a given input order.

/// Pairwise summation.
pub fn sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        sum(a) + sum(b)
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    sum(xs) / xs.len() as f64
}

/// Mean of squared deviations from `center`, divisor `n`.
pub fn mean_sq_dev(xs: &[f64], center: f64) -> f64 {
    let dev: Vec<f64> = xs.iter().map(|x| (x - center) * (x - center)).collect();
    mean(&dev)
}

/// Unbiased sample variance, divisor `n - 1`.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    mean_sq_dev(xs, mean(xs)) * n / (n - 1.0)
}

/// Jackknife standard error of the unbiased sample variance.
///
/// Leave-one-out variances are computed in O(n) from the centered first and
/// second sums.
pub fn jackknife_variance_stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    assert!(n >= 3, "jackknife of a variance needs at least 3 values");
    let m = mean(xs);
    let d: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let s1 = sum(&d);
    let sq: Vec<f64> = d.iter().map(|v| v * v).collect();
    let s2 = sum(&sq);
    let nf = n as f64;
    let loo: Vec<f64> = d
        .iter()
        .map(|&di| {
            let a = s1 - di;
            let b = s2 - di * di;
            (b - a * a / (nf - 1.0)) / (nf - 2.0)
        })
        .collect();
    let loo_mean = mean(&loo);
    let spread: Vec<f64> = loo
        .iter()
        .map(|v| (v - loo_mean) * (v - loo_mean))
        .collect();
    ((nf - 1.0) / nf * sum(&spread)).sqrt()
}

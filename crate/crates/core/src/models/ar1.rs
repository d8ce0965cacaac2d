//! First-order autoregression with known noise scale.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::grid::GridDensity;
use crate::special::normal_cdf;
use crate::{Error, Result};

/// Mass allowed outside the grid before the grid is rejected.
pub const GRID_TAIL_MASS: f64 = 1e-6;

/// Simulates `Y_1 = y1`, `Y_i = beta Y_{i-1} + sigma e_i` with standard normal `e_i`.
pub fn simulate_ar1<R: Rng + ?Sized>(beta: f64, n: usize, sigma: f64, y1: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Argument(format!("series length {n} must be at least 2")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) || !beta.is_finite() || !y1.is_finite() {
        return Err(Error::Argument("AR(1) parameters must be finite with sigma >= 0".into()));
    }
    let mut y = Vec::with_capacity(n);
    y.push(y1);
    for i in 1..n {
        let e: f64 = rng.sample(StandardNormal);
        y.push(beta * y[i - 1] + sigma * e);
    }
    Ok(y)
}

/// Lag-one cross products: (Σ Y_i Y_{i+1}, Σ Y_i², Σ Y_{i+1}²) over i = 1..n-1.
fn cross_products(series: &[f64]) -> (f64, f64, f64) {
    series.windows(2).fold((0.0, 0.0, 0.0), |(xy, xx, yy), w| {
        (xy + w[0] * w[1], xx + w[0] * w[0], yy + w[1] * w[1])
    })
}

/// Least-squares (conditional maximum likelihood) coefficient Σ Y_i Y_{i+1} / Σ Y_i².
pub fn ar1_mle(series: &[f64]) -> Result<f64> {
    if series.len() < 2 {
        return Err(Error::Argument("AR(1) estimator needs at least two observations".into()));
    }
    let (xy, xx, _) = cross_products(series);
    if !(xx > 0.0) {
        return Err(Error::DegenerateData("sum of squared lagged values is zero".into()));
    }
    Ok(xy / xx)
}

/// Gaussian form of the untruncated posterior: mean and sd of β when the
/// likelihood is taken at face value over the whole real line.
pub fn ar1_gaussian_posterior(series: &[f64], sigma: f64) -> Result<(f64, f64)> {
    let beta = ar1_mle(series)?;
    let (_, xx, _) = cross_products(series);
    Ok((beta, sigma / xx.sqrt()))
}

/// The flat-prior approximation N(Σ Y_i Y_{i+1} / (1 + Σ Y_i²), (1 + Σ Y_i²)⁻¹),
/// which ignores the noise scale and the prior support. Returned as (mean, sd)
/// for side-by-side reporting.
pub fn ar1_unit_noise_posterior(series: &[f64]) -> (f64, f64) {
    let (xy, xx, _) = cross_products(series);
    (xy / (1.0 + xx), (1.0 + xx).recip().sqrt())
}

/// Posterior of β under a uniform(a, b) prior, tabulated on `grid` by direct
/// evaluation of likelihood × prior and trapezoid normalization.
///
/// The grid must carry all but [`GRID_TAIL_MASS`] of the posterior.
pub fn ar1_reference_posterior(series: &[f64], sigma: f64, a: f64, b: f64, grid: &[f64]) -> Result<GridDensity> {
    if !(a < b) {
        return Err(Error::Argument(format!("prior support ({a}, {b}) is empty")));
    }
    if !(sigma > 0.0) {
        return Err(Error::Argument("sigma must be positive".into()));
    }
    let (xy, xx, yy) = cross_products(series);
    if !(xx > 0.0) {
        return Err(Error::DegenerateData("sum of squared lagged values is zero".into()));
    }
    let (lo, hi) = match (grid.first(), grid.last()) {
        (Some(lo), Some(hi)) => (*lo, *hi),
        _ => return Err(Error::Grid("empty grid".into())),
    };

    // Mass outside [lo, hi] from the closed-form truncated normal.
    let center = xy / xx;
    let sd = sigma / xx.sqrt();
    let cdf = |x: f64| normal_cdf((x.clamp(a, b) - center) / sd);
    let total = cdf(b) - cdf(a);
    if total > 0.0 {
        let outside = (cdf(lo) - cdf(a)).max(0.0) + (cdf(b) - cdf(hi)).max(0.0);
        if outside / total > GRID_TAIL_MASS {
            return Err(Error::Grid(format!(
                "grid [{lo}, {hi}] misses {:.3e} of the posterior mass",
                outside / total
            )));
        }
    }

    let log_values: Vec<f64> = grid
        .iter()
        .map(|&beta| {
            if beta < a || beta > b {
                f64::NEG_INFINITY
            } else {
                -(yy - 2.0 * beta * xy + beta * beta * xx) / (2.0 * sigma * sigma)
            }
        })
        .collect();
    GridDensity::from_log(grid.to_vec(), &log_values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use crate::rng::substream;

    #[test]
    fn noiseless_recursion() {
        let mut rng = substream(0, 1, 0);
        let y = simulate_ar1(0.5, 3, 0.0, 1.0, &mut rng).unwrap();
        assert_eq!(y, vec![1.0, 0.5, 0.25]);
        assert_eq!(ar1_mle(&y).unwrap(), 0.5);
    }

    #[test]
    fn two_point_estimator() {
        assert_eq!(ar1_mle(&[1.0, 2.0]).unwrap(), 2.0);
        assert!(matches!(ar1_mle(&[0.0, 1.0]), Err(Error::DegenerateData(_))));
        assert!(simulate_ar1(0.5, 1, 1.0, 1.0, &mut substream(0, 1, 0)).is_err());
    }

    #[test]
    fn single_transition_posterior_is_symmetric() {
        let grid = linspace(-1.0, 2.0, 6001);
        let post = ar1_reference_posterior(&[1.0, 0.5], 0.5, -1.0, 2.0, &grid).unwrap();
        assert!((post.mode() - 0.5).abs() < 1e-3);
        for d in [0.1, 0.4, 0.8] {
            assert!((post.pdf(0.5 - d) - post.pdf(0.5 + d)).abs() < 1e-9);
        }
    }

    #[test]
    fn large_noise_flattens() {
        let grid = linspace(-1.0, 1.0, 4097);
        let post = ar1_reference_posterior(&[1.0, 0.5, 0.2], 1e4, -1.0, 1.0, &grid).unwrap();
        assert!(post.density().iter().all(|d| (d - 0.5).abs() < 1e-6));
    }

    #[test]
    fn narrow_grid_rejected() {
        let grid = linspace(0.4, 0.6, 101);
        let err = ar1_reference_posterior(&[1.0, 0.5], 0.5, -1.0, 1.0, &grid).unwrap_err();
        assert!(matches!(err, Error::Grid(_)));
    }
}

//! Generative models with their reference estimators and exact or limiting
//! posterior densities.

mod ar1;
mod birth_death;
mod gamma;
mod normal;
mod pivot;

pub use ar1::{
    ar1_gaussian_posterior, ar1_mle, ar1_reference_posterior, ar1_unit_noise_posterior, simulate_ar1, GRID_TAIL_MASS,
};
pub use birth_death::{
    iep_limit_density, iep_mle, iep_partial_posterior_log, iep_partial_posterior_unnormalized, simulate_birth_death,
    BirthDeathPath, LimitVariance, UNIT_ROOT_BAND,
};
pub use gamma::{
    gamma_fisher_information, gamma_godambe_information, gamma_log_likelihood, gamma_m_estimator, gamma_mle,
    gamma_partial_posterior_logpdf, simulate_gamma, solve_digamma, MLE_MAX_ITER,
};
pub use normal::{musq_posterior_params, normal_musq_log_density, normal_musq_mode, normal_musq_partial_posterior};
pub use pivot::{laplace_pivot_posterior_sample, simulate_laplace};

use crate::rng::Stream;
use crate::Result;

/// A simulatable model indexed by a scalar parameter.
pub trait Model: Sync {
    fn name(&self) -> &str;

    /// Draws a dataset of length `n`. Deterministic for a given stream state.
    fn simulate(&self, theta: f64, n: usize, rng: &mut Stream) -> Result<Vec<f64>>;

    /// Classical point estimate of θ from a dataset.
    fn reference_estimator(&self, data: &[f64]) -> Result<f64>;

    /// Unnormalized log posterior of θ given the data, when available in
    /// closed form.
    fn oracle_log_density(&self, _theta: f64, _data: &[f64]) -> Option<f64> {
        None
    }
}

/// AR(1) series with fixed noise sd and starting value; θ is the coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Model {
    pub sigma: f64,
    pub y1: f64,
}

impl Default for Ar1Model {
    fn default() -> Self {
        Self { sigma: 0.5, y1: 1.0 }
    }
}

impl Model for Ar1Model {
    fn name(&self) -> &str {
        "ar1"
    }

    fn simulate(&self, theta: f64, n: usize, rng: &mut Stream) -> Result<Vec<f64>> {
        simulate_ar1(theta, n, self.sigma, self.y1, rng)
    }

    fn reference_estimator(&self, data: &[f64]) -> Result<f64> {
        ar1_mle(data)
    }

    fn oracle_log_density(&self, theta: f64, data: &[f64]) -> Option<f64> {
        let ss: f64 = data.windows(2).map(|w| (w[1] - theta * w[0]).powi(2)).sum();
        Some(-ss / (2.0 * self.sigma * self.sigma))
    }
}

/// Gamma data with known scale; θ is the shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaModel {
    pub scale: f64,
}

impl Model for GammaModel {
    fn name(&self) -> &str {
        "gamma"
    }

    fn simulate(&self, theta: f64, n: usize, rng: &mut Stream) -> Result<Vec<f64>> {
        simulate_gamma(theta, self.scale, n, rng)
    }

    fn reference_estimator(&self, data: &[f64]) -> Result<f64> {
        gamma_mle(data, self.scale)
    }

    fn oracle_log_density(&self, theta: f64, data: &[f64]) -> Option<f64> {
        (theta > 0.0).then(|| gamma_log_likelihood(theta, data, self.scale))
    }
}

//! Normal model with the mean tied to the scale, N(μ, μ²), conditioned on the
//! sample variance alone. The sample variance identifies μ² but not the sign of
//! μ, so the conditional posterior of μ has two mirror-image modes.

use crate::special::ln_gamma;
use crate::{Error, Result};

/// Inverse-gamma parameters of μ² given s² under an InverseGamma(shape, scale)
/// prior on μ²: (shape − 1 + (n−1)/2, scale + (n−1)s²/2).
pub fn musq_posterior_params(s_sq: f64, n: usize, shape: f64, scale: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Argument("need at least two observations".into()));
    }
    if !(s_sq >= 0.0 && s_sq.is_finite()) {
        return Err(Error::Argument(format!("sample variance {s_sq} must be finite and nonnegative")));
    }
    let a = shape - 1.0 + (n as f64 - 1.0) / 2.0;
    let b = scale + (n as f64 - 1.0) * s_sq / 2.0;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Argument(format!("posterior inverse-gamma parameters ({a}, {b}) must be positive")));
    }
    Ok((a, b))
}

/// Log of invgamma_pdf(μ²; a, b) · 2|μ|. Integrates to 1 over each half-line.
pub fn normal_musq_log_density(mu: f64, s_sq: f64, n: usize, shape: f64, scale: f64) -> Result<f64> {
    let (a, b) = musq_posterior_params(s_sq, n, shape, scale)?;
    if mu == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let x = mu * mu;
    Ok(a * b.ln() - ln_gamma(a) - (a + 1.0) * x.ln() - b / x + (2.0 * mu.abs()).ln())
}

/// Density of μ induced by the inverse-gamma law of μ², zero at the origin.
pub fn normal_musq_partial_posterior(mu: f64, s_sq: f64, n: usize, shape: f64, scale: f64) -> Result<f64> {
    normal_musq_log_density(mu, s_sq, n, shape, scale).map(f64::exp)
}

/// Positive mode; the other mode is its negative. Maximizing
/// −(a + ½) log x − b/x over x = μ² gives x = 2b/(2a + 1).
pub fn normal_musq_mode(s_sq: f64, n: usize, shape: f64, scale: f64) -> Result<f64> {
    let (a, b) = musq_posterior_params(s_sq, n, shape, scale)?;
    Ok((2.0 * b / (2.0 * a + 1.0)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_symmetric() {
        for mu in [0.1, 0.9, 2.5] {
            let a = normal_musq_partial_posterior(mu, 1.3, 20, 2.0, 1.0).unwrap();
            let b = normal_musq_partial_posterior(-mu, 1.3, 20, 2.0, 1.0).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(normal_musq_partial_posterior(0.0, 1.3, 20, 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(musq_posterior_params(1.0, 1, 2.0, 1.0).is_err());
        assert!(musq_posterior_params(1.0, 2, 0.5, 0.0).is_err());
    }
}

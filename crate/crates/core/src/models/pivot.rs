//! Pivotal posterior for the location of a symmetric Laplace model.
//!
//! Observations are `Z = μ + X − Y` with `X, Y` independent exponentials of
//! mean λ, so `Z̄ − μ` has the law of `X̄ − Ȳ` whatever μ is. Inverting that
//! pivot at the observed mean gives posterior draws `μ = z̄ − (X̄ − Ȳ)`.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};

use crate::{Error, Result};

fn check(lambda: f64, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("sample size must be at least 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("scale {lambda} must be positive")));
    }
    Ok(())
}

/// Draws `n` observations `μ + X − Y` with `X, Y ~ Exponential(mean λ)`.
pub fn simulate_laplace<R: Rng + ?Sized>(mu: f64, lambda: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check(lambda, n)?;
    let exp = Exp::new(1.0 / lambda).map_err(|e| Error::Argument(e.to_string()))?;
    Ok((0..n).map(|_| mu + exp.sample(rng) - exp.sample(rng)).collect())
}

/// One posterior draw `z̄ − (ḡ₁ − ḡ₂)`, where ḡ₁ and ḡ₂ are independent means
/// of `n` exponentials with mean λ. Each mean is drawn directly as
/// Gamma(n, λ/n), which has the same law as averaging `n` exponentials.
pub fn laplace_pivot_posterior_sample<R: Rng + ?Sized>(z_bar: f64, lambda: f64, n: usize, rng: &mut R) -> Result<f64> {
    check(lambda, n)?;
    let mean_of_n = Gamma::new(n as f64, lambda / n as f64).map_err(|e| Error::Argument(e.to_string()))?;
    let g1 = mean_of_n.sample(rng);
    let g2 = mean_of_n.sample(rng);
    Ok(z_bar - (g1 - g2))
}

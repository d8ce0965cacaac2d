//! Immigration–emigration process: arrivals at constant rate λ, departures at
//! rate μ per individual.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::{Error, Result};

/// Within this distance of `U = 1` the closed form is replaced by its limit.
pub const UNIT_ROOT_BAND: f64 = 1e-6;

/// A fully observed trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathPath {
    /// Event times, strictly increasing, all below `horizon`.
    pub times: Vec<f64>,
    /// Population right after each event.
    pub states: Vec<u64>,
    pub x0: u64,
    /// Number of arrivals.
    pub r1: u64,
    /// Number of departures.
    pub r2: u64,
    /// ∫₀ᵀ X(t) dt.
    pub area: f64,
    pub horizon: f64,
}

impl BirthDeathPath {
    pub fn final_state(&self) -> u64 {
        self.states.last().copied().unwrap_or(self.x0)
    }
}

/// Exact event-by-event (Gillespie) simulation.
pub fn simulate_birth_death<R: Rng + ?Sized>(
    lambda: f64,
    mu: f64,
    x0: u64,
    horizon: f64,
    rng: &mut R,
) -> Result<BirthDeathPath> {
    if !(lambda >= 0.0 && lambda.is_finite() && mu >= 0.0 && mu.is_finite()) {
        return Err(Error::Argument(format!("rates ({lambda}, {mu}) must be finite and nonnegative")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Argument(format!("horizon {horizon} must be positive")));
    }
    let unit = Exp::new(1.0).expect("unit exponential");
    let (mut t, mut x) = (0.0, x0);
    let mut path = BirthDeathPath { times: Vec::new(), states: Vec::new(), x0, r1: 0, r2: 0, area: 0.0, horizon };
    loop {
        let rate = lambda + mu * x as f64;
        if rate <= 0.0 {
            path.area += x as f64 * (horizon - t);
            break;
        }
        let wait = unit.sample(rng) / rate;
        if t + wait >= horizon {
            path.area += x as f64 * (horizon - t);
            break;
        }
        path.area += x as f64 * wait;
        t += wait;
        if rng.random::<f64>() * rate < lambda {
            x += 1;
            path.r1 += 1;
        } else {
            x -= 1;
            path.r2 += 1;
        }
        path.times.push(t);
        path.states.push(x);
    }
    Ok(path)
}

/// Maximum-likelihood rates (r₁/T, r₂/A_T).
pub fn iep_mle(path: &BirthDeathPath) -> Result<(f64, f64)> {
    if !(path.horizon > 0.0) {
        return Err(Error::Argument("horizon must be positive".into()));
    }
    if !(path.area > 0.0) {
        return Err(Error::DegenerateData("population integral is zero, departure rate undefined".into()));
    }
    Ok((path.r1 as f64 / path.horizon, path.r2 as f64 / path.area))
}

fn log_sum_direct(log_u: f64, r: u64) -> f64 {
    // log Σ_{j=1}^{R} j U^j
    let top = (1..=r).map(|j| (j as f64).ln() + j as f64 * log_u).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = (1..=r).map(|j| ((j as f64).ln() + j as f64 * log_u - top).exp()).sum();
    top + sum.ln()
}

/// log L where L = Σ_{j=0}^{R} j Uʲ = U(1−U)⁻²{1 − (R+1)Uᴿ + R Uᴿ⁺¹} and
/// U = μ exp(−μ/μ̂). This is the unnormalized density of μ given μ̂ and R.
///
/// The closed form is evaluated in log space when it is well conditioned;
/// otherwise the finite sum is accumulated by log-sum-exp. At |U − 1| within
/// [`UNIT_ROOT_BAND`] the removable singularity R(R+1)/2 is used.
pub fn iep_partial_posterior_log(mu: f64, mu_hat: f64, r: u64) -> Result<f64> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Argument(format!("mu {mu} must be positive")));
    }
    if !(mu_hat > 0.0 && mu_hat.is_finite()) {
        return Err(Error::Argument(format!("mu_hat {mu_hat} must be positive")));
    }
    if r == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    let log_u = mu.ln() - mu / mu_hat;
    let u = log_u.exp();
    let rf = r as f64;
    if (u - 1.0).abs() <= UNIT_ROOT_BAND {
        return Ok((rf * (rf + 1.0) / 2.0).ln());
    }
    if u < 1.0 {
        // bracket = 1 − Uᴿ((R+1) − R U)
        let tail = (rf * log_u).exp() * ((rf + 1.0) - rf * u);
        if tail < 0.5 {
            return Ok(log_u - 2.0 * (1.0 - u).ln() + (-tail).ln_1p());
        }
    } else {
        // bracket = Uᴿ(R(U−1) − 1) + 1
        let lead = rf * (u - 1.0) - 1.0;
        if lead > 1.0 {
            let log_bracket = rf * log_u + lead.ln() + (-rf * log_u - lead.ln()).exp().ln_1p();
            return Ok(log_u - 2.0 * (u - 1.0).ln() + log_bracket);
        }
    }
    Ok(log_sum_direct(log_u, r))
}

/// L itself; may overflow to infinity for large R when U > 1.
pub fn iep_partial_posterior_unnormalized(mu: f64, mu_hat: f64, r: u64) -> Result<f64> {
    iep_partial_posterior_log(mu, mu_hat, r).map(f64::exp)
}

/// Candidate variances for the Gaussian limit of t = T^{1/2}(μ − μ̂).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitVariance {
    /// μ̂²/λ̂.
    Full,
    /// μ̂²/(2λ̂).
    Half,
}

impl LimitVariance {
    pub const ALL: [LimitVariance; 2] = [LimitVariance::Full, LimitVariance::Half];

    /// The divisor c in μ̂²/(c λ̂).
    pub fn divisor(self) -> f64 {
        match self {
            LimitVariance::Full => 1.0,
            LimitVariance::Half => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LimitVariance::Full => "full",
            LimitVariance::Half => "half",
        }
    }
}

/// Normal density in t with mean zero and variance μ̂²/(c λ̂).
pub fn iep_limit_density(t: f64, lambda_hat: f64, mu_hat: f64, variance: LimitVariance) -> Result<f64> {
    if !(lambda_hat > 0.0 && mu_hat > 0.0) {
        return Err(Error::Argument("limit density needs positive rate estimates".into()));
    }
    let var = mu_hat * mu_hat / (variance.divisor() * lambda_hat);
    Ok((-0.5 * t * t / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn empty_process_stays_at_zero() {
        let mut rng = substream(1, 5, 0);
        let p = simulate_birth_death(0.0, 1.0, 0, 10.0, &mut rng).unwrap();
        assert!(p.times.is_empty());
        assert_eq!(p.area, 0.0);
        assert!(iep_mle(&p).is_err());
    }

    #[test]
    fn frozen_population_area() {
        let mut rng = substream(1, 5, 0);
        let p = simulate_birth_death(0.0, 0.0, 7, 2.5, &mut rng).unwrap();
        assert_eq!(p.area, 17.5);
        assert_eq!(p.final_state(), 7);
    }

    #[test]
    fn estimator_ratios() {
        let path = BirthDeathPath { times: vec![], states: vec![], x0: 3, r1: 5, r2: 0, area: 30.0, horizon: 10.0 };
        assert_eq!(iep_mle(&path).unwrap(), (0.5, 0.0));
    }

    #[test]
    fn single_term_sum() {
        // R = 1: L = U.
        let (mu, mu_hat) = (0.7f64, 1.3f64);
        let u: f64 = mu * (-mu / mu_hat).exp();
        let got = iep_partial_posterior_unnormalized(mu, mu_hat, 1).unwrap();
        assert!((got - u).abs() < 1e-15);
    }

    #[test]
    fn unit_root_limit() {
        // U = 1 exactly at mu = mu_hat = e.
        let e = std::f64::consts::E;
        let got = iep_partial_posterior_unnormalized(e, e, 10).unwrap();
        assert!((got - 55.0).abs() < 1e-9);
    }

    #[test]
    fn limit_density_symmetric() {
        for v in LimitVariance::ALL {
            let a = iep_limit_density(0.3, 2.0, 1.1, v).unwrap();
            let b = iep_limit_density(-0.3, 2.0, 1.1, v).unwrap();
            assert_eq!(a, b);
        }
    }
}

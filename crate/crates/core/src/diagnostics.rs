//! Checks on posterior samples: density estimates, distribution distances,
//! interval estimates and the summary/estimator association.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::grid::{linspace, trapezoid};
use crate::special::{chisq_quantile, normal_pdf, normal_quantile};
use crate::stats::{mean, quantile_sorted, sample_variance, sorted};
use crate::{linalg, Error, Result};

/// Gaussian kernel density estimate tabulated on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Kde {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

impl Kde {
    /// Trapezoid mass of the tabulated density.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.grid, &self.density)
    }
}

/// Silverman's rule of thumb 1.06·sd·m^{-1/5}.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Argument("bandwidth needs at least two samples".into()));
    }
    let sd = sample_variance(samples).sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateData("samples have zero variance".into()));
    }
    Ok(1.06 * sd * (samples.len() as f64).powf(-0.2))
}

/// Grid spanning the samples plus four bandwidths on either side.
pub fn kde_grid(samples: &[f64], bandwidth: f64, points: usize) -> Vec<f64> {
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 * bandwidth;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 4.0 * bandwidth;
    linspace(lo, hi, points)
}

/// Kernel density estimate on `grid`. Uses Silverman's bandwidth unless one is
/// given; with `grid = None` a 512-point grid from [`kde_grid`] is used.
pub fn kde(samples: &[f64], bandwidth: Option<f64>, grid: Option<&[f64]>) -> Result<Kde> {
    if samples.len() < 2 {
        return Err(Error::Argument("density estimate needs at least two samples".into()));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::Argument(format!("bandwidth {h} must be positive"))),
        None => silverman_bandwidth(samples)?,
    };
    let grid = match grid {
        Some(g) => g.to_vec(),
        None => kde_grid(samples, h, 512),
    };
    let scale = 1.0 / (samples.len() as f64 * h);
    let density = grid
        .iter()
        .map(|x| samples.iter().map(|s| normal_pdf((x - s) / h)).sum::<f64>() * scale)
        .collect();
    Ok(Kde { bandwidth: h, grid, density })
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let xs = sorted(samples);
    let m = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |acc, (i, x)| {
        let f = cdf(*x);
        let above = ((i + 1) as f64 / m - f).abs();
        let below = (i as f64 / m - f).abs();
        acc.max(above).max(below)
    })
}

/// How an interval's width was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalBasis {
    Fisher,
    Godambe,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub center: f64,
    pub half_width: f64,
    pub level: f64,
    pub basis: IntervalBasis,
}

impl IntervalReport {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower() && x <= self.upper()
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("level {level} must lie in (0, 1)")))
    }
}

/// Equal-tail interval from the empirical quantiles at (1 ∓ level)/2.
pub fn credible_interval(samples: &[f64], level: f64) -> Result<IntervalReport> {
    check_level(level)?;
    if samples.len() < 20 {
        return Err(Error::Argument(format!("credible interval needs at least 20 samples, got {}", samples.len())));
    }
    let xs = sorted(samples);
    let lo = quantile_sorted(&xs, (1.0 - level) / 2.0);
    let hi = quantile_sorted(&xs, (1.0 + level) / 2.0);
    Ok(IntervalReport { center: 0.5 * (lo + hi), half_width: 0.5 * (hi - lo), level, basis: IntervalBasis::Empirical })
}

/// Normal-approximation interval `center ± z·(n·info)^{-1/2}`.
pub fn wald_interval(center: f64, info_per_obs: f64, n: usize, level: f64, basis: IntervalBasis) -> Result<IntervalReport> {
    check_level(level)?;
    if !(info_per_obs > 0.0 && info_per_obs.is_finite()) {
        return Err(Error::Argument(format!("information {info_per_obs} must be positive")));
    }
    if n == 0 {
        return Err(Error::Argument("sample size must be positive".into()));
    }
    let z = normal_quantile(0.5 * (1.0 + level));
    Ok(IntervalReport { center, half_width: z / (n as f64 * info_per_obs).sqrt(), level, basis })
}

/// Quadratic form n(h − S)ᵀΣ̃(h − S) and the chi-square threshold χ²_{level, q}.
pub fn chisq_credible_statistic(h_theta: &[f64], s: &[f64], sigma: &Array2<f64>, n: usize, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    let q = h_theta.len();
    if q == 0 || s.len() != q || sigma.dim() != (q, q) {
        return Err(Error::Dimension(format!(
            "h has length {q}, S has length {}, weight matrix is {:?}",
            s.len(),
            sigma.dim()
        )));
    }
    for i in 0..q {
        for j in 0..i {
            if (sigma[[i, j]] - sigma[[j, i]]).abs() > 1e-12 * (sigma[[i, j]].abs() + sigma[[j, i]].abs()).max(1e-300) {
                return Err(Error::Argument("weight matrix is not symmetric".into()));
            }
        }
    }
    linalg::cholesky(sigma).map_err(|_| Error::Argument("weight matrix is not positive definite".into()))?;
    let diff: Vec<f64> = h_theta.iter().zip(s).map(|(a, b)| a - b).collect();
    let mut form = 0.0;
    for i in 0..q {
        for j in 0..q {
            form += diff[i] * sigma[[i, j]] * diff[j];
        }
    }
    Ok((n as f64 * form, chisq_quantile(level, q as f64)?))
}

/// Whether θ with image `h_theta` lies in the chi-square credible set
/// {θ : n(h(θ) − S)ᵀΣ̃(h(θ) − S) ≤ χ²_{level, q}}.
pub fn chisq_credible_set_membership(h_theta: &[f64], s: &[f64], sigma: &Array2<f64>, n: usize, level: f64) -> Result<bool> {
    let (form, threshold) = chisq_credible_statistic(h_theta, s, sigma, n, level)?;
    Ok(form <= threshold)
}

/// Least-squares line of `mles` on `summaries` with the Pearson correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub pearson_r: f64,
    pub slope: f64,
    pub intercept: f64,
}

pub fn association_report(summaries: &[f64], mles: &[f64]) -> Result<Association> {
    if summaries.len() != mles.len() {
        return Err(Error::Dimension(format!("{} summaries vs {} estimates", summaries.len(), mles.len())));
    }
    if summaries.len() < 3 {
        return Err(Error::Argument("association needs at least three pairs".into()));
    }
    let (mx, my) = (mean(summaries), mean(mles));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in summaries.iter().zip(mles) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::DegenerateData("constant input in association report".into()));
    }
    let slope = sxy / sxx;
    Ok(Association { pearson_r: sxy / (sxx * syy).sqrt(), slope, intercept: my - slope * mx })
}

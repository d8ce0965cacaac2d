//! Exact partial posterior of a gamma shape given the moment estimator, and
//! its normal limit with the sandwich (Godambe) variance.

use rand::Rng;

use abc_psvm::diagnostics::{ks_statistic, wald_interval, IntervalBasis, IntervalReport};
use abc_psvm::grid::{linspace, GridDensity};
use abc_psvm::models::{
    gamma_fisher_information, gamma_godambe_information, gamma_m_estimator, gamma_mle, gamma_partial_posterior_logpdf,
    simulate_gamma,
};
use abc_psvm::rng::{domain, substream};
use abc_psvm::special::normal_cdf;
use abc_psvm::Error;

use super::ensure;
use crate::config::Params;
use crate::error::CliResult;
use crate::output::{fmt_f64, Report, RunOutput, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub alpha: f64,
    /// Known scale of the gamma data.
    pub beta: f64,
    pub n: usize,
    pub prior_rate: f64,
    pub draws: usize,
    pub grid_points: usize,
    /// Grid half-width in units of (α̃/n)^{1/2}.
    pub grid_halfwidth: f64,
    pub level: f64,
    /// Shapes at which Fisher and Godambe intervals are compared.
    pub interval_alphas: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            alpha: 3.0,
            beta: 2.0,
            n: 5000,
            prior_rate: 1.0,
            draws: 2000,
            grid_points: 8193,
            grid_halfwidth: 12.0,
            level: 0.95,
            interval_alphas: vec![0.5, 1.0, 3.0, 10.0],
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> CliResult<Self> {
        let d = Settings::default();
        let s = Settings {
            alpha: p.get("model.alpha", d.alpha)?,
            beta: p.get("model.beta", d.beta)?,
            n: p.get("model.n", d.n)?,
            prior_rate: p.get("prior.rate", d.prior_rate)?,
            draws: p.get("posterior.draws", d.draws)?,
            grid_points: p.get("posterior.grid_points", d.grid_points)?,
            grid_halfwidth: p.get("posterior.grid_halfwidth", d.grid_halfwidth)?,
            level: p.get("intervals.level", d.level)?,
            interval_alphas: p.get_list("intervals.alphas", &d.interval_alphas)?,
        };
        ensure(s.grid_points >= 4096, || "key 'posterior.grid_points' must be at least 4096".into())?;
        ensure(s.draws >= 2, || "key 'posterior.draws' must be at least 2".into())?;
        ensure(s.grid_halfwidth > 0.0, || "key 'posterior.grid_halfwidth' must be positive".into())?;
        Ok(s)
    }
}

pub struct IntervalPair {
    pub alpha: f64,
    pub fisher: IntervalReport,
    pub godambe: IntervalReport,
}

pub struct Outcome {
    pub settings: Settings,
    pub alpha_tilde: f64,
    pub mle: f64,
    pub posterior: GridDensity,
    pub draws: Vec<f64>,
    /// Draws standardized by n^{1/2} α̃^{-1/2}.
    pub standardized: Vec<f64>,
    pub ks: f64,
    pub intervals: Vec<IntervalPair>,
}

pub fn run(s: &Settings, seed: u64) -> CliResult<Outcome> {
    let data = simulate_gamma(s.alpha, s.beta, s.n, &mut substream(seed, domain::OBSERVED, 0))?;
    let alpha_tilde = gamma_m_estimator(&data, s.beta)?;
    let mle = gamma_mle(&data, s.beta)?;

    let sd = (alpha_tilde / s.n as f64).sqrt();
    let lo = (alpha_tilde - s.grid_halfwidth * sd).max(alpha_tilde * 1e-6);
    let grid = linspace(lo, alpha_tilde + s.grid_halfwidth * sd, s.grid_points);
    let logs: Vec<f64> = grid.iter().map(|a| gamma_partial_posterior_logpdf(*a, alpha_tilde, s.n, s.prior_rate)).collect();
    let posterior = GridDensity::from_log(grid, &logs)?;
    let edge = posterior.density()[0].max(*posterior.density().last().unwrap());
    let peak = posterior.density().iter().cloned().fold(0.0, f64::max);
    if edge > 1e-6 * peak {
        return Err(Error::Grid(format!("partial posterior not negligible at the grid edge ({edge:e})")).into());
    }

    let mut rng = substream(seed, domain::AUXILIARY, 0);
    let draws: Vec<f64> = (0..s.draws).map(|_| posterior.quantile(rng.random::<f64>())).collect();
    let scale = (s.n as f64 / alpha_tilde).sqrt();
    let standardized: Vec<f64> = draws.iter().map(|a| scale * (a - alpha_tilde)).collect();
    let ks = ks_statistic(&standardized, normal_cdf);

    let intervals = s
        .interval_alphas
        .iter()
        .map(|&a| {
            Ok(IntervalPair {
                alpha: a,
                fisher: wald_interval(a, gamma_fisher_information(a), s.n, s.level, IntervalBasis::Fisher)?,
                godambe: wald_interval(a, gamma_godambe_information(a), s.n, s.level, IntervalBasis::Godambe)?,
            })
        })
        .collect::<abc_psvm::Result<Vec<_>>>()?;

    Ok(Outcome { settings: s.clone(), alpha_tilde, mle, posterior, draws, standardized, ks, intervals })
}

impl Outcome {
    pub fn output(&self) -> RunOutput {
        let mut samples = Table::new(&["index", "alpha", "standardized"]);
        for (i, (a, z)) in self.draws.iter().zip(&self.standardized).enumerate() {
            samples.push(vec![i.to_string(), fmt_f64(*a), fmt_f64(*z)]);
        }
        let n = self.settings.n as f64;
        let limit_sd = (self.alpha_tilde / n).sqrt();
        let mut density = Table::new(&["alpha", "partial_posterior", "normal_limit"]);
        for (a, f) in self.posterior.grid().iter().zip(self.posterior.density()).step_by(4) {
            let z = (a - self.alpha_tilde) / limit_sd;
            let limit = (-0.5 * z * z).exp() / (limit_sd * (2.0 * std::f64::consts::PI).sqrt());
            density.push(vec![fmt_f64(*a), fmt_f64(*f), fmt_f64(limit)]);
        }
        let mut intervals = Table::new(&["alpha", "fisher_half_width", "godambe_half_width"]);
        for p in &self.intervals {
            intervals.push(vec![fmt_f64(p.alpha), fmt_f64(p.fisher.half_width), fmt_f64(p.godambe.half_width)]);
        }

        let mut report = Report::default();
        report.add("experiment", "gamma_bvm");
        report.add("alpha_tilde", self.alpha_tilde);
        report.add("alpha_mle", self.mle);
        report.add("posterior_mean", self.posterior.mean());
        report.add("posterior_sd", self.posterior.sd());
        report.add("godambe_limit_sd", limit_sd);
        report.add("draws", self.draws.len());
        report.add("ks_standardized_vs_normal", self.ks);
        for p in &self.intervals {
            report.add(format!("fisher_half_width_at_{}", p.alpha), p.fisher.half_width);
            report.add(format!("godambe_half_width_at_{}", p.alpha), p.godambe.half_width);
        }
        report.add(
            "godambe_wider_everywhere",
            self.intervals.iter().all(|p| p.godambe.half_width > p.fisher.half_width),
        );
        RunOutput { samples, plotdata: vec![("density".into(), density), ("intervals".into(), intervals)], report }
    }
}

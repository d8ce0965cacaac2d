//! Immigration–emigration process: the exact partial posterior of the
//! emigration rate, on the local scale t = T^{1/2}(μ − μ̂), against the two
//! candidate Gaussian limits.

use abc_psvm::grid::{linspace, GridDensity};
use abc_psvm::models::{iep_limit_density, iep_mle, iep_partial_posterior_log, simulate_birth_death, BirthDeathPath, LimitVariance};
use abc_psvm::rng::{domain, substream};

use super::ensure;
use crate::config::Params;
use crate::error::CliResult;
use crate::output::{fmt_f64, Report, RunOutput, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub lambda: f64,
    pub mu: f64,
    pub x0: u64,
    pub horizon: f64,
    pub grid_points: usize,
    /// Half-width of the t grid in limit standard deviations (the wider,
    /// c = 1 convention).
    pub grid_halfwidth: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { lambda: 2.0, mu: 1.0, x0: 5, horizon: 500.0, grid_points: 4097, grid_halfwidth: 8.0 }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> CliResult<Self> {
        let d = Settings::default();
        let s = Settings {
            lambda: p.get("model.lambda", d.lambda)?,
            mu: p.get("model.mu", d.mu)?,
            x0: p.get("model.x0", d.x0)?,
            horizon: p.get("model.horizon", d.horizon)?,
            grid_points: p.get("posterior.grid_points", d.grid_points)?,
            grid_halfwidth: p.get("posterior.grid_halfwidth", d.grid_halfwidth)?,
        };
        ensure(s.grid_points >= 4096, || "key 'posterior.grid_points' must be at least 4096".into())?;
        ensure(s.grid_halfwidth > 0.0, || "key 'posterior.grid_halfwidth' must be positive".into())?;
        Ok(s)
    }
}

pub struct Outcome {
    pub settings: Settings,
    pub path: BirthDeathPath,
    pub lambda_hat: f64,
    pub mu_hat: f64,
    /// R = X0 + r1.
    pub r: u64,
    /// Grid-normalized exact partial posterior of t.
    pub exact: GridDensity,
    /// Total-variation distance to each limit, in [`LimitVariance::ALL`] order.
    pub tv: [f64; 2],
    pub chosen: LimitVariance,
}

impl Outcome {
    pub fn best_tv(&self) -> f64 {
        self.tv[0].min(self.tv[1])
    }
}

pub fn run(s: &Settings, seed: u64) -> CliResult<Outcome> {
    let path = simulate_birth_death(s.lambda, s.mu, s.x0, s.horizon, &mut substream(seed, domain::OBSERVED, 0))?;
    let (lambda_hat, mu_hat) = iep_mle(&path)?;
    let r = path.x0 + path.r1;
    let root_t = s.horizon.sqrt();

    let width = s.grid_halfwidth * mu_hat / lambda_hat.sqrt();
    // μ must stay positive.
    let lo = (-width).max((mu_hat * 1e-9 - mu_hat) * root_t);
    let grid = linspace(lo, width, s.grid_points);
    let logs = grid
        .iter()
        .map(|t| iep_partial_posterior_log(mu_hat + t / root_t, mu_hat, r))
        .collect::<abc_psvm::Result<Vec<f64>>>()?;
    let exact = GridDensity::from_log(grid, &logs)?;

    let mut tv = [0.0; 2];
    for (slot, v) in tv.iter_mut().zip(LimitVariance::ALL) {
        *slot = exact.total_variation(|t| iep_limit_density(t, lambda_hat, mu_hat, v).unwrap_or(f64::NAN));
    }
    let chosen = if tv[0] <= tv[1] { LimitVariance::Full } else { LimitVariance::Half };
    Ok(Outcome { settings: s.clone(), path, lambda_hat, mu_hat, r, exact, tv, chosen })
}

impl Outcome {
    pub fn output(&self) -> RunOutput {
        let mut samples = Table::new(&["time", "state"]);
        samples.push(vec![fmt_f64(0.0), self.path.x0.to_string()]);
        for (t, x) in self.path.times.iter().zip(&self.path.states) {
            samples.push(vec![fmt_f64(*t), x.to_string()]);
        }

        let root_t = self.settings.horizon.sqrt();
        let mut density = Table::new(&["t", "mu", "exact", "limit_full", "limit_half"]);
        for (t, f) in self.exact.grid().iter().zip(self.exact.density()) {
            let limit = |v| iep_limit_density(*t, self.lambda_hat, self.mu_hat, v).unwrap_or(f64::NAN);
            density.push(vec![
                fmt_f64(*t),
                fmt_f64(self.mu_hat + t / root_t),
                fmt_f64(*f),
                fmt_f64(limit(LimitVariance::Full)),
                fmt_f64(limit(LimitVariance::Half)),
            ]);
        }

        let d = self.exact.density();
        let peak = d.iter().cloned().fold(0.0, f64::max);
        let mut report = Report::default();
        report.add("experiment", "iep_limit");
        report.add("events", self.path.times.len());
        report.add("births_r1", self.path.r1);
        report.add("deaths_r2", self.path.r2);
        report.add("area", self.path.area);
        report.add("lambda_hat", self.lambda_hat);
        report.add("mu_hat", self.mu_hat);
        report.add("r", self.r);
        report.add("exact_mean_t", self.exact.mean());
        report.add("exact_sd_t", self.exact.sd());
        report.add("exact_edge_to_peak_ratio", d[0].max(*d.last().unwrap()) / peak);
        for (v, tv) in LimitVariance::ALL.iter().zip(self.tv) {
            report.add(format!("limit_sd_{}", v.name()), self.mu_hat / (v.divisor() * self.lambda_hat).sqrt());
            report.add(format!("tv_{}", v.name()), tv);
        }
        report.add("chosen_convention", self.chosen.name());
        report.add("tv_best", self.best_tv());
        RunOutput { samples, plotdata: vec![("density".into(), density)], report }
    }
}

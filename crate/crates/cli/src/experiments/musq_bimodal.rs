//! N(μ, μ²) data summarized by the sample variance: the partial posterior of
//! μ is symmetric with two modes.

use rand::Rng;

use abc_psvm::grid::{linspace, GridDensity};
use abc_psvm::models::{musq_posterior_params, normal_musq_log_density, normal_musq_mode};
use abc_psvm::rng::{domain, substream};
use abc_psvm::stats::sample_variance;
use abc_psvm::Error;
use rand_distr::{Distribution, Normal};

use super::ensure;
use crate::config::Params;
use crate::error::CliResult;
use crate::output::{fmt_f64, Report, RunOutput, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub mu: f64,
    pub n: usize,
    /// Inverse-gamma prior on μ².
    pub prior_shape: f64,
    pub prior_scale: f64,
    pub grid_points: usize,
    pub draws: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { mu: 1.5, n: 50, prior_shape: 2.0, prior_scale: 1.0, grid_points: 8193, draws: 10_000 }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> CliResult<Self> {
        let d = Settings::default();
        let s = Settings {
            mu: p.get("model.mu", d.mu)?,
            n: p.get("model.n", d.n)?,
            prior_shape: p.get("prior.shape", d.prior_shape)?,
            prior_scale: p.get("prior.scale", d.prior_scale)?,
            grid_points: p.get("posterior.grid_points", d.grid_points)?,
            draws: p.get("posterior.draws", d.draws)?,
        };
        ensure(s.mu != 0.0 && s.mu.is_finite(), || "key 'model.mu' must be finite and nonzero".into())?;
        ensure(s.grid_points >= 4096, || "key 'posterior.grid_points' must be at least 4096".into())?;
        Ok(s)
    }
}

pub struct Outcome {
    pub settings: Settings,
    pub s_sq: f64,
    pub posterior: GridDensity,
    pub closed_form_mode: f64,
    /// Grid arg-max over μ > 0 and μ < 0.
    pub numeric_modes: (f64, f64),
    pub local_maxima: usize,
    pub draws: Vec<f64>,
}

pub fn run(s: &Settings, seed: u64) -> CliResult<Outcome> {
    let normal = Normal::new(s.mu, s.mu.abs()).map_err(|e| Error::Argument(e.to_string()))?;
    let mut rng = substream(seed, domain::OBSERVED, 0);
    let data: Vec<f64> = (0..s.n).map(|_| normal.sample(&mut rng)).collect();
    let s_sq = sample_variance(&data);
    let (a, b) = musq_posterior_params(s_sq, s.n, s.prior_shape, s.prior_scale)?;
    let closed_form_mode = normal_musq_mode(s_sq, s.n, s.prior_shape, s.prior_scale)?;

    // Widen until the density at the edge is negligible; the tail of μ²
    // decays like x^{-(a+1)}.
    let mut reach = 4.0 * closed_form_mode;
    let edge_log = |m: f64| normal_musq_log_density(m, s_sq, s.n, s.prior_shape, s.prior_scale);
    let peak_log = edge_log(closed_form_mode)?;
    while edge_log(reach)? - peak_log > (1e-9f64).ln() {
        reach *= 1.5;
        if reach > 1e6 * closed_form_mode {
            return Err(Error::Grid(format!("posterior tail too heavy to tabulate (shape {a}, scale {b})")).into());
        }
    }
    let grid = linspace(-reach, reach, s.grid_points);
    let logs = grid
        .iter()
        .map(|m| normal_musq_log_density(*m, s_sq, s.n, s.prior_shape, s.prior_scale))
        .collect::<abc_psvm::Result<Vec<f64>>>()?;
    let posterior = GridDensity::from_log(grid, &logs)?;

    let (g, d) = (posterior.grid(), posterior.density());
    let argmax = |keep: &dyn Fn(f64) -> bool| {
        g.iter().zip(d).filter(|(x, _)| keep(**x)).fold((0.0, f64::NEG_INFINITY), |best, (x, f)| if *f > best.1 { (*x, *f) } else { best }).0
    };
    let numeric_modes = (argmax(&|x| x > 0.0), argmax(&|x| x < 0.0));
    let local_maxima = (1..d.len() - 1).filter(|&i| d[i] > d[i - 1] && d[i] >= d[i + 1]).count();

    let mut rng = substream(seed, domain::AUXILIARY, 0);
    let draws = (0..s.draws).map(|_| posterior.quantile(rng.random::<f64>())).collect();
    Ok(Outcome { settings: s.clone(), s_sq, posterior, closed_form_mode, numeric_modes, local_maxima, draws })
}

impl Outcome {
    pub fn output(&self) -> RunOutput {
        let mut samples = Table::new(&["index", "mu"]);
        for (i, m) in self.draws.iter().enumerate() {
            samples.push(vec![i.to_string(), fmt_f64(*m)]);
        }
        let mut density = Table::new(&["mu", "density"]);
        for (m, f) in self.posterior.grid().iter().zip(self.posterior.density()) {
            density.push(vec![fmt_f64(*m), fmt_f64(*f)]);
        }
        let positive = self.draws.iter().filter(|m| **m > 0.0).count() as f64 / self.draws.len().max(1) as f64;
        let mut report = Report::default();
        report.add("experiment", "musq_bimodal");
        report.add("sample_variance", self.s_sq);
        report.add("closed_form_mode", self.closed_form_mode);
        report.add("numeric_mode_positive", self.numeric_modes.0);
        report.add("numeric_mode_negative", self.numeric_modes.1);
        report.add("grid_spacing", self.posterior.grid()[1] - self.posterior.grid()[0]);
        report.add("local_maxima", self.local_maxima);
        report.add("share_of_positive_draws", positive);
        RunOutput { samples, plotdata: vec![("density".into(), density)], report }
    }
}

//! PSVM-summary ABC for the AR(1) coefficient, compared against the
//! numerically integrated posterior under the same uniform prior.

use abc_psvm::abc::{run_abc, AbcConfig, AbcResult, AcceptRule, Metric, PriorSpec};
use abc_psvm::diagnostics::{association_report, kde, ks_statistic, Association};
use abc_psvm::grid::{linspace, GridDensity};
use abc_psvm::models::{ar1_mle, ar1_reference_posterior, ar1_unit_noise_posterior, simulate_ar1, Ar1Model};
use abc_psvm::psvm::PsvmConfig;
use abc_psvm::rng::{domain, substream};
use abc_psvm::stats::{mean, sample_variance};

use super::{ensure, psvm_from_params};
use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, Report, RunOutput, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub beta: f64,
    pub sigma: f64,
    pub n: usize,
    pub y1: f64,
    pub prior_a: f64,
    pub prior_b: f64,
    pub n_prior: usize,
    pub accept: AcceptRule,
    pub metric: Metric,
    pub reuse_training: bool,
    pub psvm: PsvmConfig,
    /// Points of the reference-posterior grid over the prior support.
    pub grid_points: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            beta: 0.6,
            sigma: 0.5,
            n: 100,
            y1: 1.0,
            prior_a: -1.0,
            prior_b: 1.0,
            n_prior: 1000,
            accept: AcceptRule::Quantile(0.1),
            metric: Metric::StandardizedEuclidean,
            reuse_training: true,
            psvm: PsvmConfig::default(),
            grid_points: 4097,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> CliResult<Self> {
        let d = Settings::default();
        let accept = match p.get("abc.rule", "quantile".to_string())?.as_str() {
            "quantile" => AcceptRule::Quantile(p.get("abc.quantile", 0.1)?),
            "epsilon" => AcceptRule::Epsilon(p.require("abc.epsilon")?),
            other => return Err(CliError::Config(format!("key 'abc.rule': expected quantile or epsilon, got '{other}'"))),
        };
        let metric = match p.get("abc.metric", "standardized_euclidean".to_string())?.as_str() {
            "euclidean" => Metric::Euclidean,
            "standardized_euclidean" => Metric::StandardizedEuclidean,
            other => {
                return Err(CliError::Config(format!(
                    "key 'abc.metric': expected euclidean or standardized_euclidean, got '{other}'"
                )))
            }
        };
        let s = Settings {
            beta: p.get("model.beta", d.beta)?,
            sigma: p.get("model.sigma", d.sigma)?,
            n: p.get("model.n", d.n)?,
            y1: p.get("model.y1", d.y1)?,
            prior_a: p.get("prior.a", d.prior_a)?,
            prior_b: p.get("prior.b", d.prior_b)?,
            n_prior: p.get("abc.n_prior", d.n_prior)?,
            accept,
            metric,
            reuse_training: p.get("abc.reuse_training", d.reuse_training)?,
            psvm: psvm_from_params(p, &d.psvm)?,
            grid_points: p.get("reference.grid_points", d.grid_points)?,
        };
        ensure(s.grid_points >= 4096, || "key 'reference.grid_points' must be at least 4096".into())?;
        Ok(s)
    }

    fn abc_config(&self, seed: u64) -> AbcConfig {
        AbcConfig {
            n_prior: self.n_prior,
            n_obs: self.n,
            accept: self.accept,
            metric: self.metric,
            reuse_training: self.reuse_training,
            psvm: self.psvm.clone(),
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accepted: usize,
    pub accepted_mean: f64,
    pub accepted_sd: f64,
    pub reference_mean: f64,
    pub reference_sd: f64,
    /// |accepted mean − reference mean| in reference standard deviations.
    pub mean_gap_sd: f64,
    pub ks: f64,
    /// Summary versus MLE over the training sets.
    pub association: Association,
    pub observed_mle: f64,
}

pub struct Outcome {
    pub settings: Settings,
    pub observed: Vec<f64>,
    pub result: AbcResult,
    pub reference: GridDensity,
    pub training_mles: Vec<f64>,
    pub metrics: Metrics,
}

pub fn run(s: &Settings, seed: u64) -> CliResult<Outcome> {
    let model = Ar1Model { sigma: s.sigma, y1: s.y1 };
    let prior = PriorSpec::Uniform { a: s.prior_a, b: s.prior_b };
    let observed = simulate_ar1(s.beta, s.n, s.sigma, s.y1, &mut substream(seed, domain::OBSERVED, 0))?;
    let result = run_abc(&model, &prior, &observed, &s.abc_config(seed))?;
    let grid = linspace(s.prior_a, s.prior_b, s.grid_points);
    let reference = ar1_reference_posterior(&observed, s.sigma, s.prior_a, s.prior_b, &grid)?;

    let training_mles = result
        .training_data
        .rows()
        .into_iter()
        .map(|row| ar1_mle(row.as_slice().expect("standard layout")))
        .collect::<abc_psvm::Result<Vec<f64>>>()?;
    let association = association_report(result.map.training_summaries().column(0).as_slice().unwrap(), &training_mles)?;

    let accepted = result.accepted_thetas();
    if accepted.is_empty() {
        return Err(abc_psvm::Error::Inference("no prior draw was accepted".into()).into());
    }
    let accepted_mean = mean(&accepted);
    let accepted_sd = if accepted.len() > 1 { sample_variance(&accepted).sqrt() } else { 0.0 };
    let (reference_mean, reference_sd) = (reference.mean(), reference.sd());
    let metrics = Metrics {
        accepted: accepted.len(),
        accepted_mean,
        accepted_sd,
        reference_mean,
        reference_sd,
        mean_gap_sd: (accepted_mean - reference_mean).abs() / reference_sd,
        ks: ks_statistic(&accepted, |x| reference.cdf(x)),
        association,
        observed_mle: ar1_mle(&observed)?,
    };
    Ok(Outcome { settings: s.clone(), observed, result, reference, training_mles, metrics })
}

impl Outcome {
    pub fn output(&self) -> RunOutput {
        let r = &self.result;
        let d = r.summaries.ncols();
        let mut header = vec!["index".to_string(), "theta".to_string()];
        header.extend((1..=d).map(|j| format!("summary_{j}")));
        header.extend(["distance".to_string(), "accepted".to_string()]);
        let mut samples = Table::new(&header);
        let mut is_accepted = vec![false; r.thetas.len()];
        for &i in &r.accepted {
            is_accepted[i] = true;
        }
        for i in 0..r.thetas.len() {
            let mut row = vec![i.to_string(), fmt_f64(r.thetas[i])];
            row.extend(r.summaries.row(i).iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(r.distances[i]));
            row.push(u8::from(is_accepted[i]).to_string());
            samples.push(row);
        }

        // Density overlay on the reference grid: ABC kernel estimate and the
        // reference posterior.
        let accepted = r.accepted_thetas();
        let grid = self.reference.grid();
        let kde_values = kde(&accepted, None, Some(grid)).map(|k| k.density).unwrap_or_else(|_| vec![f64::NAN; grid.len()]);
        let mut density = Table::new(&["theta", "abc_kde", "reference_density"]);
        for (i, x) in grid.iter().enumerate() {
            density.push(vec![fmt_f64(*x), fmt_f64(kde_values[i]), fmt_f64(self.reference.density()[i])]);
        }

        let training_summaries = r.map.training_summaries();
        let mut scatter = Table::new(&["summary", "mle"]);
        for (s, m) in training_summaries.column(0).iter().zip(&self.training_mles) {
            scatter.push(vec![fmt_f64(*s), fmt_f64(*m)]);
        }

        let mut observed = Table::new(&["index", "y"]);
        for (i, y) in self.observed.iter().enumerate() {
            observed.push(vec![(i + 1).to_string(), fmt_f64(*y)]);
        }

        let m = &self.metrics;
        let (unit_mean, unit_sd) = ar1_unit_noise_posterior(&self.observed);
        let mut report = Report::default();
        report.add("experiment", "ar1_abc");
        report.add("prior_draws", r.thetas.len());
        report.add("accepted", m.accepted);
        report.add("accepted_mean", m.accepted_mean);
        report.add("accepted_sd", m.accepted_sd);
        report.add("reference_mean", m.reference_mean);
        report.add("reference_sd", m.reference_sd);
        report.add("mean_gap_in_reference_sd", m.mean_gap_sd);
        report.add("ks_accepted_vs_reference", m.ks);
        report.add("summary_mle_pearson_r", m.association.pearson_r);
        report.add("summary_mle_slope", m.association.slope);
        report.add("summary_mle_intercept", m.association.intercept);
        report.add("observed_mle", m.observed_mle);
        report.add("observed_summary", r.s_obs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "));
        report.add("unit_noise_normal_mean", unit_mean);
        report.add("unit_noise_normal_sd", unit_sd);
        report.add("basis_size", r.map.basis_size());
        for w in &r.warnings {
            report.add("warning", w);
        }

        RunOutput {
            samples,
            plotdata: vec![("density".into(), density), ("scatter".into(), scatter), ("observed".into(), observed)],
            report,
        }
    }
}

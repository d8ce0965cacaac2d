//! Linear PSVM on a nearly linear single-index model: the leading direction
//! should line up with the linear part despite the small quadratic term.

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

use abc_psvm::psvm::{fit_linear_psvm, LinearPsvmConfig, LinearPsvmFit, Slicing};
use abc_psvm::qp::DEFAULT_TOL;
use abc_psvm::rng::{domain, substream};

use super::ensure;
use crate::config::Params;
use crate::error::CliResult;
use crate::output::{fmt_f64, Report, RunOutput, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub m: usize,
    /// Coefficients of the linear part.
    pub a1: f64,
    pub a2: f64,
    /// Weight of X₁² + X₂².
    pub curvature: f64,
    pub noise_sd: f64,
    pub cuts: Vec<f64>,
    pub cost: f64,
    pub standardize: bool,
    pub replications: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            m: 2000,
            a1: 2.0,
            a2: 1.0,
            curvature: 0.001,
            noise_sd: 1.0,
            cuts: vec![1.5],
            cost: 1.0,
            standardize: true,
            replications: 10,
        }
    }
}

impl Settings {
    pub fn from_params(p: &Params) -> CliResult<Self> {
        let d = Settings::default();
        let s = Settings {
            m: p.get("model.m", d.m)?,
            a1: p.get("model.a1", d.a1)?,
            a2: p.get("model.a2", d.a2)?,
            curvature: p.get("model.curvature", d.curvature)?,
            noise_sd: p.get("model.noise_sd", d.noise_sd)?,
            cuts: p.get_list("psvm.cuts", &d.cuts)?,
            cost: p.get("psvm.cost", d.cost)?,
            standardize: p.get("psvm.standardize", d.standardize)?,
            replications: p.get("replications", d.replications)?,
        };
        ensure(s.replications >= 1, || "key 'replications' must be at least 1".into())?;
        ensure(s.a1 != 0.0 || s.a2 != 0.0, || "keys 'model.a1' and 'model.a2' cannot both be zero".into())?;
        Ok(s)
    }

    fn truth(&self) -> [f64; 2] {
        let norm = self.a1.hypot(self.a2);
        [self.a1 / norm, self.a2 / norm]
    }
}

/// Draws `(theta, X)` for one replication.
pub fn simulate(s: &Settings, seed: u64, replication: u64) -> (Vec<f64>, Array2<f64>) {
    let mut rng = substream(seed, domain::REPLICATE, replication);
    let mut x = Array2::zeros((s.m, 2));
    let mut theta = Vec::with_capacity(s.m);
    for i in 0..s.m {
        let (x1, x2): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        x[[i, 0]] = x1;
        x[[i, 1]] = x2;
        let e: f64 = rng.sample(StandardNormal);
        theta.push(s.a1 * x1 + s.a2 * x2 + s.curvature * (x1 * x1 + x2 * x2) + s.noise_sd * e);
    }
    (theta, x)
}

pub struct Replication {
    pub fit: LinearPsvmFit,
    pub cosine: f64,
}

pub struct Outcome {
    pub settings: Settings,
    pub replications: Vec<Replication>,
    /// Data of the first replication, kept for plotting.
    pub first: (Vec<f64>, Array2<f64>),
}

pub fn run(s: &Settings, seed: u64) -> CliResult<Outcome> {
    let config = LinearPsvmConfig {
        slicing: Slicing::Cuts(s.cuts.clone()),
        d: 1,
        cost: s.cost,
        standardize: s.standardize,
        qp_tol: DEFAULT_TOL,
    };
    let truth = s.truth();
    let mut replications = Vec::with_capacity(s.replications);
    let mut first = None;
    for r in 0..s.replications {
        let (theta, x) = simulate(s, seed, r as u64);
        let fit = fit_linear_psvm(&theta, x.view(), &config)?;
        let cosine = (fit.directions[[0, 0]] * truth[0] + fit.directions[[1, 0]] * truth[1]).abs();
        replications.push(Replication { fit, cosine });
        if r == 0 {
            first = Some((theta, x));
        }
    }
    Ok(Outcome { settings: s.clone(), replications, first: first.expect("at least one replication") })
}

impl Outcome {
    pub fn output(&self) -> RunOutput {
        let mut samples = Table::new(&["replication", "direction_1", "direction_2", "cosine", "leading_share", "weak"]);
        for (r, rep) in self.replications.iter().enumerate() {
            samples.push(vec![
                r.to_string(),
                fmt_f64(rep.fit.directions[[0, 0]]),
                fmt_f64(rep.fit.directions[[1, 0]]),
                fmt_f64(rep.cosine),
                fmt_f64(rep.fit.leading_share),
                u8::from(rep.fit.weak).to_string(),
            ]);
        }

        let (theta, x) = &self.first;
        let cut = self.settings.cuts[0];
        let mut points = Table::new(&["x1", "x2", "theta", "above_cut"]);
        for (i, t) in theta.iter().enumerate() {
            points.push(vec![fmt_f64(x[[i, 0]]), fmt_f64(x[[i, 1]]), fmt_f64(*t), u8::from(*t > cut).to_string()]);
        }
        let mut normals = Table::new(&["cut", "normal_1", "normal_2"]);
        for (c, n) in self.settings.cuts.iter().zip(&self.replications[0].fit.normals) {
            normals.push(vec![fmt_f64(*c), fmt_f64(n[0]), fmt_f64(n[1])]);
        }

        let cosines: Vec<f64> = self.replications.iter().map(|r| r.cosine).collect();
        let mut report = Report::default();
        report.add("experiment", "svm_robustness");
        report.add("replications", cosines.len());
        report.add("true_direction", format!("{} {}", self.settings.truth()[0], self.settings.truth()[1]));
        for (r, c) in cosines.iter().enumerate() {
            report.add(format!("cosine_{r}"), c);
        }
        report.add("min_cosine", cosines.iter().cloned().fold(f64::INFINITY, f64::min));
        report.add("count_cosine_at_least_0.98", cosines.iter().filter(|c| **c >= 0.98).count());

        RunOutput { samples, plotdata: vec![("points".into(), points), ("normals".into(), normals)], report }
    }
}

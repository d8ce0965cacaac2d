//! Rejection ABC with PSVM-learned summary statistics.
//!
//! A run draws `N` parameters from the prior and simulates one dataset per
//! draw, fits an [`SdrMap`] on those pairs, summarizes the simulated and
//! observed data through the map, and keeps the draws whose summaries land
//! closest to the observed one.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::Model;
use crate::psvm::{fit_psvm, PsvmConfig, SdrMap, ZERO_SD};
use crate::rng::{domain, substream, Stream};
use crate::special::ln_gamma;
use crate::{Error, Result};

/// A user-supplied prior: a sampler plus its log density.
#[derive(Clone)]
pub struct CustomPrior {
    pub name: String,
    pub sampler: Arc<dyn Fn(&mut Stream) -> f64 + Send + Sync>,
    pub log_density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPrior").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Prior on a scalar parameter.
#[derive(Debug, Clone)]
pub enum PriorSpec {
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    InverseGamma { shape: f64, scale: f64 },
    Custom(CustomPrior),
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            PriorSpec::Uniform { a, b } => a.is_finite() && b.is_finite() && a < b,
            PriorSpec::Exponential { rate } => *rate > 0.0 && rate.is_finite(),
            PriorSpec::InverseGamma { shape, scale } => {
                *shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
            PriorSpec::Custom(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid prior {}", self.describe())))
        }
    }

    pub fn sample(&self, rng: &mut Stream) -> f64 {
        match self {
            PriorSpec::Uniform { a, b } => rng.random_range(*a..*b),
            PriorSpec::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            PriorSpec::InverseGamma { shape, scale } => {
                1.0 / Gamma::new(*shape, 1.0 / *scale).expect("validated shape").sample(rng)
            }
            PriorSpec::Custom(c) => (c.sampler)(rng),
        }
    }

    /// Log density, `-inf` outside the support.
    pub fn log_density(&self, theta: f64) -> f64 {
        match self {
            PriorSpec::Uniform { a, b } => {
                if theta >= *a && theta < *b {
                    -(b - a).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            PriorSpec::Exponential { rate } => {
                if theta >= 0.0 {
                    rate.ln() - rate * theta
                } else {
                    f64::NEG_INFINITY
                }
            }
            PriorSpec::InverseGamma { shape, scale } => {
                if theta > 0.0 {
                    shape * scale.ln() - ln_gamma(*shape) - (shape + 1.0) * theta.ln() - scale / theta
                } else {
                    f64::NEG_INFINITY
                }
            }
            PriorSpec::Custom(c) => (c.log_density)(theta),
        }
    }

    /// Short human-readable form, used in manifests.
    pub fn describe(&self) -> String {
        match self {
            PriorSpec::Uniform { a, b } => format!("uniform({a}, {b})"),
            PriorSpec::Exponential { rate } => format!("exponential(rate={rate})"),
            PriorSpec::InverseGamma { shape, scale } => format!("inverse_gamma(shape={shape}, scale={scale})"),
            PriorSpec::Custom(c) => format!("custom({})", c.name),
        }
    }
}

/// Acceptance rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptRule {
    /// Keep the ⌈qN⌉ closest draws.
    Quantile(f64),
    /// Keep every draw within distance ε.
    Epsilon(f64),
}

impl AcceptRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AcceptRule::Quantile(q) if q > 0.0 && q <= 1.0 => Ok(()),
            AcceptRule::Epsilon(e) if e > 0.0 => Ok(()),
            rule => Err(Error::Argument(format!("invalid acceptance rule {rule:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    /// Each component divided by the sd of the simulated summaries.
    StandardizedEuclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcConfig {
    pub n_prior: usize,
    pub n_obs: usize,
    pub accept: AcceptRule,
    pub metric: Metric,
    /// Summarize the training draws themselves instead of a fresh batch.
    pub reuse_training: bool,
    pub psvm: PsvmConfig,
    pub seed: u64,
}

impl Default for AbcConfig {
    fn default() -> Self {
        AbcConfig {
            n_prior: 1000,
            n_obs: 100,
            accept: AcceptRule::Quantile(0.1),
            metric: Metric::StandardizedEuclidean,
            reuse_training: true,
            psvm: PsvmConfig::default(),
            seed: 0,
        }
    }
}

impl AbcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_prior < 10 {
            return Err(Error::Argument(format!("need at least 10 prior draws, got {}", self.n_prior)));
        }
        if self.n_obs == 0 {
            return Err(Error::Argument("observed length must be positive".into()));
        }
        self.accept.validate()?;
        self.psvm.validate()
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbcManifest {
    pub model: String,
    pub prior: String,
    pub config: AbcConfig,
    pub library_version: String,
}

/// Outcome of [`run_abc`].
#[derive(Debug, Clone)]
pub struct AbcResult {
    /// Parameters of the summarized batch (the training batch when reused).
    pub thetas: Vec<f64>,
    /// N×d summaries of that batch.
    pub summaries: Array2<f64>,
    pub s_obs: Vec<f64>,
    /// Per-component scales used by the metric; zero means the component was dropped.
    pub scales: Vec<f64>,
    pub distances: Vec<f64>,
    /// Accepted indices into `thetas`, ascending.
    pub accepted: Vec<usize>,
    pub warnings: Vec<String>,
    pub training_thetas: Vec<f64>,
    /// N×n simulated training datasets.
    pub training_data: Array2<f64>,
    pub map: SdrMap,
    pub manifest: AbcManifest,
}

impl AbcResult {
    pub fn accepted_thetas(&self) -> Vec<f64> {
        self.accepted.iter().map(|&i| self.thetas[i]).collect()
    }
}

/// Result of an acceptance step.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub warning: Option<String>,
}

/// Applies an acceptance rule. Under the quantile rule the ⌈qN⌉ smallest
/// distances win, ties going to the smaller index.
pub fn select_accepted(distances: &[f64], rule: AcceptRule) -> Result<Selection> {
    rule.validate()?;
    if distances.iter().any(|d| !d.is_finite()) {
        return Err(Error::Argument("distances must be finite".into()));
    }
    let n = distances.len();
    match rule {
        AcceptRule::Quantile(q) => {
            let keep = (((q * n as f64) - 1e-9).ceil().max(0.0) as usize).min(n);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| distances[i].total_cmp(&distances[j]).then(i.cmp(&j)));
            let mut indices = order[..keep].to_vec();
            indices.sort_unstable();
            Ok(Selection { indices, warning: None })
        }
        AcceptRule::Epsilon(eps) => {
            let indices: Vec<usize> = (0..n).filter(|&i| distances[i] <= eps).collect();
            let warning = indices.is_empty().then(|| format!("no draw within epsilon {eps}"));
            Ok(Selection { indices, warning })
        }
    }
}

/// Distance between two summaries. Under the standardized metric a component
/// with a zero (or non-finite) scale is ignored.
pub fn summary_distance(a: &[f64], b: &[f64], metric: Metric, scales: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("summaries of length {} and {}", a.len(), b.len())));
    }
    match metric {
        Metric::Euclidean => Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()),
        Metric::StandardizedEuclidean => {
            if scales.len() != a.len() {
                return Err(Error::Dimension(format!("{} scales for summaries of length {}", scales.len(), a.len())));
            }
            let ss: f64 = a
                .iter()
                .zip(b)
                .zip(scales)
                .filter(|(_, s)| **s > 0.0 && s.is_finite())
                .map(|((x, y), s)| ((x - y) / s).powi(2))
                .sum();
            Ok(ss.sqrt())
        }
    }
}

/// Population sd of each summary column; columns at or below [`ZERO_SD`] get 0.
pub fn summary_scales(summaries: ArrayView2<f64>) -> Vec<f64> {
    summaries
        .columns()
        .into_iter()
        .map(|c| {
            let c = c.to_vec();
            let sd = crate::stats::population_variance(&c).sqrt();
            if sd > ZERO_SD {
                sd
            } else {
                0.0
            }
        })
        .collect()
}

/// Draws `count` (θ, dataset) pairs, draw `i` from its own stream in `stream_domain`.
pub fn simulate_batch(
    model: &dyn Model,
    prior: &PriorSpec,
    n_obs: usize,
    count: usize,
    seed: u64,
    stream_domain: u16,
) -> Result<(Vec<f64>, Array2<f64>)> {
    let draws: Vec<(f64, Vec<f64>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, stream_domain, i as u64);
            let theta = prior.sample(&mut rng);
            let data = model.simulate(theta, n_obs, &mut rng)?;
            if data.len() != n_obs {
                return Err(Error::Dimension(format!("model returned {} values, expected {n_obs}", data.len())));
            }
            Ok((theta, data))
        })
        .collect::<Result<_>>()?;
    let mut x = Array2::zeros((count, n_obs));
    let mut thetas = Vec::with_capacity(count);
    for (i, (theta, data)) in draws.into_iter().enumerate() {
        thetas.push(theta);
        x.row_mut(i).assign(&ndarray::ArrayView1::from(&data));
    }
    Ok((thetas, x))
}

/// Runs ABC with a PSVM summary map. Deterministic for a given seed whatever
/// the thread count.
pub fn run_abc(model: &dyn Model, prior: &PriorSpec, observed: &[f64], config: &AbcConfig) -> Result<AbcResult> {
    config.validate()?;
    prior.validate()?;
    if observed.len() != config.n_obs {
        return Err(Error::Dimension(format!(
            "observed data has length {}, config expects {}",
            observed.len(),
            config.n_obs
        )));
    }

    let (training_thetas, training_data) =
        simulate_batch(model, prior, config.n_obs, config.n_prior, config.seed, domain::TRAINING)?;
    let map = fit_psvm(&training_thetas, training_data.view(), &config.psvm)?;

    let (thetas, summaries) = if config.reuse_training {
        (training_thetas.clone(), map.training_summaries())
    } else {
        let (thetas, fresh) = simulate_batch(model, prior, config.n_obs, config.n_prior, config.seed, domain::FRESH)?;
        let summaries = map.evaluate_rows(fresh.view())?;
        (thetas, summaries)
    };
    let s_obs = map.evaluate(ndarray::ArrayView1::from(observed))?;

    let scales = summary_scales(summaries.view());
    if scales.iter().all(|s| *s == 0.0) {
        return Err(Error::Inference("every summary component has zero variance".into()));
    }
    let distances = summaries
        .rows()
        .into_iter()
        .map(|row| summary_distance(row.as_slice().expect("standard layout"), &s_obs, config.metric, &scales))
        .collect::<Result<Vec<f64>>>()?;
    let selection = select_accepted(&distances, config.accept)?;

    let mut warnings: Vec<String> = selection.warning.into_iter().collect();
    if map.basis_truncated {
        warnings.push("eigenbasis truncated by the positivity floor".into());
    }
    if map.directions_truncated {
        warnings.push("fewer informative directions than requested".into());
    }

    Ok(AbcResult {
        thetas,
        summaries,
        s_obs,
        scales,
        distances,
        accepted: selection.indices,
        warnings,
        training_thetas,
        training_data,
        map,
        manifest: AbcManifest {
            model: model.name().to_string(),
            prior: prior.describe(),
            config: config.clone(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

//! The six reproducible experiments. Each has a `Settings` type whose
//! `Default` is the reference configuration, a `from_params` constructor for
//! config files, a typed `run`, and a conversion of the outcome into files.

pub mod ar1_abc;
pub mod gamma_bvm;
pub mod iep_limit;
pub mod laplace_pivot;
pub mod musq_bimodal;
pub mod svm_robustness;

use abc_psvm::kernel::KernelSpec;
use abc_psvm::psvm::PsvmConfig;
use abc_psvm::qp::DEFAULT_TOL;

use crate::config::Params;
use crate::error::{CliError, CliResult};
use crate::output::RunOutput;

pub const EXPERIMENTS: [&str; 6] = ["ar1_abc", "svm_robustness", "gamma_bvm", "laplace_pivot", "iep_limit", "musq_bimodal"];

/// A fully configured experiment, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Ar1Abc(ar1_abc::Settings),
    SvmRobustness(svm_robustness::Settings),
    GammaBvm(gamma_bvm::Settings),
    LaplacePivot(laplace_pivot::Settings),
    IepLimit(iep_limit::Settings),
    MusqBimodal(musq_bimodal::Settings),
}

impl Experiment {
    /// Reads the settings of experiment `name` from `params`.
    pub fn from_params(name: &str, p: &Params) -> CliResult<Self> {
        Ok(match name {
            "ar1_abc" => Experiment::Ar1Abc(ar1_abc::Settings::from_params(p)?),
            "svm_robustness" => Experiment::SvmRobustness(svm_robustness::Settings::from_params(p)?),
            "gamma_bvm" => Experiment::GammaBvm(gamma_bvm::Settings::from_params(p)?),
            "laplace_pivot" => Experiment::LaplacePivot(laplace_pivot::Settings::from_params(p)?),
            "iep_limit" => Experiment::IepLimit(iep_limit::Settings::from_params(p)?),
            "musq_bimodal" => Experiment::MusqBimodal(musq_bimodal::Settings::from_params(p)?),
            other => {
                return Err(CliError::Config(format!(
                    "unknown experiment '{other}', expected one of {}",
                    EXPERIMENTS.join(", ")
                )))
            }
        })
    }

    pub fn run(&self, seed: u64) -> CliResult<RunOutput> {
        Ok(match self {
            Experiment::Ar1Abc(s) => ar1_abc::run(s, seed)?.output(),
            Experiment::SvmRobustness(s) => svm_robustness::run(s, seed)?.output(),
            Experiment::GammaBvm(s) => gamma_bvm::run(s, seed)?.output(),
            Experiment::LaplacePivot(s) => laplace_pivot::run(s, seed)?.output(),
            Experiment::IepLimit(s) => iep_limit::run(s, seed)?.output(),
            Experiment::MusqBimodal(s) => musq_bimodal::run(s, seed)?.output(),
        })
    }
}

/// Reads the `[psvm]` section of a kernel PSVM fit.
pub fn psvm_from_params(p: &Params, defaults: &PsvmConfig) -> CliResult<PsvmConfig> {
    let default_gamma = match defaults.kernel {
        KernelSpec::Gaussian { gamma } => gamma,
        KernelSpec::Linear => 1e-5,
    };
    let kernel = match p.get("psvm.kernel", "gaussian".to_string())?.as_str() {
        "gaussian" => KernelSpec::Gaussian { gamma: p.get("psvm.gamma", default_gamma)? },
        "linear" => KernelSpec::Linear,
        other => return Err(CliError::Config(format!("key 'psvm.kernel': expected gaussian or linear, got '{other}'"))),
    };
    let k = match p.get("psvm.k", defaults.k.map_or("auto".to_string(), |k| k.to_string()))?.as_str() {
        "auto" => None,
        text => Some(text.parse().map_err(|_| CliError::Config(format!("key 'psvm.k': expected auto or an integer, got '{text}'")))?),
    };
    let qp_max_iter = match p.get("psvm.qp_max_iter", defaults.qp_max_iter.map_or("auto".to_string(), |v| v.to_string()))?.as_str() {
        "auto" => None,
        text => Some(text.parse().map_err(|_| CliError::Config(format!("key 'psvm.qp_max_iter': expected auto or an integer, got '{text}'")))?),
    };
    let config = PsvmConfig {
        kernel,
        k,
        slices: p.get("psvm.slices", defaults.slices)?,
        d: p.get("psvm.d", defaults.d)?,
        cost: p.get("psvm.cost", defaults.cost)?,
        standardize: p.get("psvm.standardize", defaults.standardize)?,
        qp_tol: p.get("psvm.qp_tol", if defaults.qp_tol > 0.0 { defaults.qp_tol } else { DEFAULT_TOL })?,
        qp_max_iter,
    };
    config.validate()?;
    Ok(config)
}

/// Fails with a config error unless `ok`.
pub(crate) fn ensure(ok: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

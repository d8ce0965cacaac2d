//! Linear principal support vector machine.
//!
//! For each slice the normal vector solves
//!
//! ```text
//! min_{psi, t}  psi' Sigma psi + cost * mean_i [1 - y_i (psi' x_i - t)]_+
//! ```
//!
//! with `Sigma` the sample covariance. Its dual is the same box-and-equality
//! QP as the kernel case, with `M = diag(y) Xc Sigma^-1 Xc' diag(y)` and box
//! `cost / m`; the normal vector is recovered as
//! `psi = 1/2 Sigma^-1 Xc' diag(y) alpha`.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{column_moments, principal_directions, standardize_columns, SliceSet, ZERO_SD};
use crate::error::{Error, Result};
use crate::kernel::symmetric_eigen;
use crate::linalg::spd_inverse;
use crate::qp::{solve_sliced_svm_dual, SvmDualProblem, DEFAULT_TOL};

/// Below this share of the trace the leading direction is reported as weak.
///
/// Normal vectors of nested slices are correlated, so even a response
/// independent of the data tends to give shares of 0.35 to 0.85; any real
/// linear signal pushes the share above 0.97. With a single cut the share is
/// always 1 and the flag carries no information.
pub const WEAK_DIRECTION_SHARE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slicing {
    /// `h` slices at empirical quantiles.
    Quantiles(usize),
    /// Explicit cut points.
    Cuts(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPsvmConfig {
    pub slicing: Slicing,
    pub d: usize,
    pub cost: f64,
    pub standardize: bool,
    pub qp_tol: f64,
}

impl Default for LinearPsvmConfig {
    fn default() -> Self {
        LinearPsvmConfig {
            slicing: Slicing::Quantiles(4),
            d: 1,
            cost: 1.0,
            standardize: true,
            qp_tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearPsvmFit {
    /// p×d unit directions in the original coordinates.
    pub directions: Array2<f64>,
    /// Per non-degenerate slice, the normal vector in the original coordinates.
    pub normals: Vec<Vec<f64>>,
    /// Eigenvalues of `sum_s psi_s psi_s'`, descending.
    pub eigenvalues: Vec<f64>,
    /// Leading eigenvalue over the trace.
    pub leading_share: f64,
    /// `leading_share` below [`WEAK_DIRECTION_SHARE`]: no stable direction.
    pub weak: bool,
    /// The covariance needed a ridge to be invertible.
    pub regularized: bool,
}

pub fn fit_linear_psvm(theta: &[f64], x: ArrayView2<f64>, config: &LinearPsvmConfig) -> Result<LinearPsvmFit> {
    let (m, p) = x.dim();
    if theta.len() != m {
        return Err(Error::Dimension(format!("{} responses but {m} data rows", theta.len())));
    }
    if !(config.cost > 0.0) {
        return Err(Error::Argument(format!("SVM cost must be positive, got {}", config.cost)));
    }
    if config.d == 0 || config.d > p {
        return Err(Error::Argument(format!("need 1 <= d <= p, got d={}, p={p}", config.d)));
    }
    let slices = match &config.slicing {
        Slicing::Quantiles(h) => super::slice_response(theta, *h)?,
        Slicing::Cuts(cuts) => {
            if m < cuts.len() + 1 {
                return Err(Error::Argument(format!("{m} points cannot fill {} slices", cuts.len() + 1)));
            }
            SliceSet::at_cuts(theta, cuts)
        }
    };

    let (means, sds) = column_moments(x);
    let z = if config.standardize {
        standardize_columns(x, &means, &sds)?
    } else {
        x.to_owned()
    };
    let centre = z.mean_axis(Axis(0)).expect("non-empty");
    let zc = &z - &centre.view().insert_axis(Axis(0));
    let mut sigma = zc.t().dot(&zc) / m as f64;
    let trace: f64 = sigma.diag().sum();
    if !(trace > 0.0) {
        return Err(Error::DegenerateData("every coordinate is constant".into()));
    }
    let (evals, _) = symmetric_eigen(&sigma)?;
    let regularized = evals[p - 1] < 1e-10 * trace;
    if regularized {
        let ridge = 1e-8 * trace / p as f64;
        sigma.diag_mut().iter_mut().for_each(|v| *v += ridge);
    }
    let sigma_inv = spd_inverse(&sigma)?;
    let whitened = zc.dot(&sigma_inv); // m×p, rows Sigma^-1 zc_i
    let base = whitened.dot(&zc.t());
    let box_bound = config.cost / m as f64;

    let solved: Vec<Result<Option<Vec<f64>>>> = slices
        .labels
        .par_iter()
        .map(|y| {
            if y.iter().all(|&v| v == y[0]) {
                return Ok(None);
            }
            let problem = SvmDualProblem::from_labels(&base, y.clone(), box_bound)?;
            let sol = solve_sliced_svm_dual(&problem, config.qp_tol, None)?;
            let weights: Array1<f64> = y.iter().zip(&sol.alpha).map(|(a, b)| a * b).collect();
            let psi = whitened.t().dot(&weights) * 0.5;
            // Back to original coordinates: psi'z = (psi / sd)'(x - mean).
            let normal: Vec<f64> = psi
                .iter()
                .zip(&sds)
                .map(|(v, sd)| if config.standardize && *sd > ZERO_SD { v / sd } else { *v })
                .collect();
            Ok(Some(normal))
        })
        .collect();
    let mut normals = Vec::new();
    for r in solved {
        normals.extend(r?);
    }
    if normals.is_empty() {
        return Err(Error::Fit("every slice was single-class".into()));
    }

    let dirs = principal_directions(&normals, config.d)?;
    if dirs.vectors.ncols() == 0 {
        return Err(Error::Fit("all normal vectors vanished".into()));
    }
    let total: f64 = normals.iter().map(|n| n.iter().map(|v| v * v).sum::<f64>()).sum();
    let leading_share = dirs.eigenvalues[0] / total;
    Ok(LinearPsvmFit {
        directions: dirs.vectors,
        normals,
        eigenvalues: dirs.eigenvalues,
        leading_share,
        weak: leading_share < WEAK_DIRECTION_SHARE,
        regularized,
    })
}

//! Kernels, Gram matrices and double centering.
//!
//! Data sets are stored one point per row of an `Array2<f64>`.

mod eigen;

pub use eigen::{symmetric_eigen, top_k_eigen, EigenPairs, POSITIVITY_FLOOR};

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive-definite kernel on ℝᵖ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `exp(-gamma * |x - y|^2)`
    Gaussian { gamma: f64 },
    /// `x . y`
    Linear,
}

impl KernelSpec {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Argument(format!(
                "gaussian kernel needs gamma > 0, got {gamma}"
            )));
        }
        Ok(KernelSpec::Gaussian { gamma })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { gamma } => Self::gaussian(gamma).map(|_| ()),
            KernelSpec::Linear => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "kernel arguments have lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_with_norms(x, y, dot(x, x), dot(y, y)))
    }

    /// Kernel value given precomputed squared norms of both arguments.
    #[inline]
    fn eval_with_norms(&self, x: &[f64], y: &[f64], xx: f64, yy: f64) -> f64 {
        match *self {
            KernelSpec::Gaussian { gamma } => {
                let sq = (xx + yy - 2.0 * dot(x, y)).max(0.0);
                (-gamma * sq).exp()
            }
            KernelSpec::Linear => dot(x, y),
        }
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn row_slices(data: &ArrayView2<f64>) -> Vec<Vec<f64>> {
    data.axis_iter(Axis(0)).map(|r| r.to_vec()).collect()
}

/// The n×n Gram matrix of the rows of `data`.
pub fn gram(spec: &KernelSpec, data: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = data.nrows();
    if n == 0 {
        return Err(Error::Argument("gram matrix of an empty data set".into()));
    }
    spec.validate()?;
    let rows = row_slices(&data);
    let norms: Vec<f64> = rows.iter().map(|r| dot(r, r)).collect();
    // Each row depends only on the inputs, so the schedule cannot change the result.
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = spec.eval_with_norms(&rows[i], &rows[j], norms[i], norms[j]);
        }
    });
    // Mirror the lower triangle so the result is exactly symmetric.
    for i in 0..n {
        for j in 0..i {
            out[j * n + i] = out[i * n + j];
        }
    }
    Ok(Array2::from_shape_vec((n, n), out).expect("shape matches"))
}

/// Kernel evaluations of a single point against every row of `data`.
pub fn kernel_row(spec: &KernelSpec, x: ArrayView1<f64>, data: ArrayView2<f64>) -> Result<Vec<f64>> {
    if x.len() != data.ncols() {
        return Err(Error::Dimension(format!(
            "point has dimension {}, data has {}",
            x.len(),
            data.ncols()
        )));
    }
    let x = x.to_vec();
    let xx = dot(&x, &x);
    Ok(data
        .axis_iter(Axis(0))
        .map(|r| {
            let r = r.to_vec();
            let rr = dot(&r, &r);
            spec.eval_with_norms(&x, &r, xx, rr)
        })
        .collect())
}

/// Returns `QKQ` with `Q = I - J/n`.
pub fn center_gram(k: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, m) = k.dim();
    if n != m {
        return Err(Error::Dimension(format!("center_gram needs a square matrix, got {n}x{m}")));
    }
    if n == 0 {
        return Err(Error::Argument("center_gram of an empty matrix".into()));
    }
    let nf = n as f64;
    let row_means: Vec<f64> = k.axis_iter(Axis(0)).map(|r| r.sum() / nf).collect();
    let col_means: Vec<f64> = k.axis_iter(Axis(1)).map(|c| c.sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] = k[[i, j]] - row_means[i] - col_means[j] + grand;
        }
    }
    // Symmetrize roundoff away.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    Ok(s)
}

/// Gram matrix, its doubly centered form and the leading eigenpairs of the latter.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredGram {
    pub kernel: Array2<f64>,
    pub centered: Array2<f64>,
    /// Descending, strictly positive.
    pub eigenvalues: Vec<f64>,
    /// n×k, orthonormal columns.
    pub eigenvectors: Array2<f64>,
    /// Set when fewer than the requested number of eigenpairs cleared the positivity floor.
    pub truncated: bool,
}

impl CenteredGram {
    pub fn compute(spec: &KernelSpec, data: ArrayView2<f64>, k: usize) -> Result<Self> {
        let kernel = gram(spec, data)?;
        let centered = center_gram(&kernel)?;
        let pairs = top_k_eigen(&centered, k)?;
        if pairs.values.is_empty() {
            return Err(Error::DegenerateData(
                "centered Gram matrix has no positive eigenvalues".into(),
            ));
        }
        Ok(CenteredGram {
            kernel,
            centered,
            eigenvalues: pairs.values,
            eigenvectors: pairs.vectors,
            truncated: pairs.truncated,
        })
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }
}

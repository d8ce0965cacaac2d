//! Principal support vector machines.
//!
//! A fit slices the scalar response at empirical quantiles, solves one SVM
//! dual per slice in the eigenbasis of the centered Gram matrix, and runs PCA
//! over the per-slice hyperplane coefficients. The resulting [`SdrMap`] turns
//! a raw data vector into a `d`-dimensional summary statistic.

mod container;
mod linear;

pub use container::{read_map, write_map, MAGIC};
pub use linear::{fit_linear_psvm, LinearPsvmConfig, LinearPsvmFit, Slicing, WEAK_DIRECTION_SHARE};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_row, symmetric_eigen, CenteredGram, KernelSpec, POSITIVITY_FLOOR};
use crate::linalg::{cholesky, cholesky_solve};
use crate::qp::{solve_sliced_svm_dual, SvmDualProblem, DEFAULT_TOL};
use crate::stats::{mean, population_variance, quantile_sorted, sorted};

/// Standard deviations at or below this are treated as zero.
pub const ZERO_SD: f64 = 1e-12;

/// Hyperparameters of a kernel PSVM fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsvmConfig {
    pub kernel: KernelSpec,
    /// Number of eigenbasis functions; `None` means half the training set.
    pub k: Option<usize>,
    /// Number of slices `h`; there are `h - 1` cut points.
    pub slices: usize,
    /// Target dimension.
    pub d: usize,
    /// SVM cost (upper bound of every dual variable).
    pub cost: f64,
    pub standardize: bool,
    pub qp_tol: f64,
    pub qp_max_iter: Option<usize>,
}

impl Default for PsvmConfig {
    fn default() -> Self {
        PsvmConfig {
            kernel: KernelSpec::Gaussian { gamma: 1e-5 },
            k: None,
            slices: 4,
            d: 1,
            cost: 1.0,
            standardize: false,
            qp_tol: DEFAULT_TOL,
            qp_max_iter: None,
        }
    }
}

impl PsvmConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.slices < 2 {
            return Err(Error::Argument(format!("need at least 2 slices, got {}", self.slices)));
        }
        if self.d == 0 {
            return Err(Error::Argument("target dimension must be at least 1".into()));
        }
        if !(self.cost > 0.0 && self.cost.is_finite()) {
            return Err(Error::Argument(format!("SVM cost must be positive, got {}", self.cost)));
        }
        if let Some(k) = self.k {
            if k < self.d {
                return Err(Error::Argument(format!("need d <= k, got d={}, k={k}", self.d)));
            }
        }
        Ok(())
    }

    /// The number of basis functions used for `m` training points.
    pub fn basis_size(&self, m: usize) -> usize {
        self.k.unwrap_or((m / 2).max(1))
    }
}

/// Cut points of a sliced response and the ±1 labels they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSet {
    /// Strictly ascending.
    pub cut_points: Vec<f64>,
    /// One row per cut point: `+1` where `theta <= cut`, `-1` otherwise.
    pub labels: Vec<Vec<f64>>,
}

impl SliceSet {
    /// Labels `theta` against explicit cut points (kept as given after sorting
    /// and deduplication, even if a slice ends up single-class).
    pub fn at_cuts(theta: &[f64], cuts: &[f64]) -> Self {
        let mut cut_points = sorted(cuts);
        cut_points.dedup();
        let labels = cut_points
            .iter()
            .map(|&c| theta.iter().map(|&t| if t <= c { 1.0 } else { -1.0 }).collect())
            .collect();
        SliceSet { cut_points, labels }
    }

    pub fn len(&self) -> usize {
        self.cut_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cut_points.is_empty()
    }
}

/// Slices `theta` at its `j/h` empirical quantiles, `j = 1..h-1`.
///
/// Duplicate quantiles collapse, and cut points that leave every response on
/// one side are dropped.
pub fn slice_response(theta: &[f64], h: usize) -> Result<SliceSet> {
    if h < 2 {
        return Err(Error::Argument(format!("need at least 2 slices, got {h}")));
    }
    if theta.len() < h {
        return Err(Error::Argument(format!(
            "{} responses cannot fill {h} slices",
            theta.len()
        )));
    }
    let sorted_theta = sorted(theta);
    let max = *sorted_theta.last().expect("non-empty");
    let cuts: Vec<f64> = (1..h)
        .map(|j| quantile_sorted(&sorted_theta, j as f64 / h as f64))
        .filter(|&c| c < max)
        .collect();
    if cuts.is_empty() {
        return Err(Error::DegenerateResponse(
            "all responses are identical; no cut point separates them".into(),
        ));
    }
    Ok(SliceSet::at_cuts(theta, &cuts))
}

/// Per-column mean and population standard deviation.
pub fn column_moments(data: ArrayView2<f64>) -> (Vec<f64>, Vec<f64>) {
    data.axis_iter(Axis(1))
        .map(|c| {
            let c = c.to_vec();
            (mean(&c), population_variance(&c).sqrt())
        })
        .unzip()
}

/// Subtracts the stored means and divides by the stored sds; columns with sd
/// at or below [`ZERO_SD`] are only centered.
pub fn standardize_columns(data: ArrayView2<f64>, col_means: &[f64], col_sds: &[f64]) -> Result<Array2<f64>> {
    if data.ncols() != col_means.len() || data.ncols() != col_sds.len() {
        return Err(Error::Dimension(format!(
            "data has {} columns but {} means and {} sds",
            data.ncols(),
            col_means.len(),
            col_sds.len()
        )));
    }
    let mut out = data.to_owned();
    for mut row in out.axis_iter_mut(Axis(0)) {
        standardize_in_place(row.as_slice_mut().expect("standard layout"), col_means, col_sds);
    }
    Ok(out)
}

fn standardize_in_place(x: &mut [f64], col_means: &[f64], col_sds: &[f64]) {
    for ((v, m), sd) in x.iter_mut().zip(col_means).zip(col_sds) {
        *v -= m;
        if *sd > ZERO_SD {
            *v /= sd;
        }
    }
}

/// Hyperplane coefficients `c = 1/2 (Psi'Psi)^-1 Psi' diag(y) alpha`.
///
/// When `Psi` has orthonormal columns (the case for eigenbases) the Gram
/// factor is the identity and is skipped.
pub fn sv_coefficients(psi: ArrayView2<f64>, y: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    let (n, k) = psi.dim();
    if y.len() != n || alpha.len() != n {
        return Err(Error::Dimension(format!(
            "basis has {n} rows but {} labels and {} multipliers",
            y.len(),
            alpha.len()
        )));
    }
    let weights: Array1<f64> = y.iter().zip(alpha).map(|(a, b)| a * b).collect();
    let projected = psi.t().dot(&weights);
    let gram = psi.t().dot(&psi);
    let orthonormal = gram
        .indexed_iter()
        .all(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-8);
    let c = if orthonormal {
        projected
    } else {
        let l = cholesky(&gram)?;
        cholesky_solve(&l, projected.as_slice().expect("contiguous"))
    };
    debug_assert_eq!(c.len(), k);
    Ok(c.iter().map(|v| 0.5 * v).collect())
}

/// Top eigenvectors of `C = sum_s c_s c_s'`.
#[derive(Debug, Clone, PartialEq)]
pub struct Directions {
    /// k×d', orthonormal columns, d' <= d.
    pub vectors: Array2<f64>,
    pub eigenvalues: Vec<f64>,
    /// Fewer than `d` directions had a positive eigenvalue.
    pub truncated: bool,
}

/// Leading `d` eigenvectors of `sum_s c_s c_s'` for coefficient vectors `c_s`.
///
/// The eigenproblem is solved on the small `r×r` Gram matrix `B'B` of
/// `B = [c_1 .. c_r]` and mapped back through `v = B w / sqrt(mu)`, then signed
/// with the same convention as the kernel eigensolver.
pub fn principal_directions(coefs: &[Vec<f64>], d: usize) -> Result<Directions> {
    let r = coefs.len();
    if r == 0 {
        return Err(Error::Fit("no slice produced a hyperplane".into()));
    }
    let k = coefs[0].len();
    if coefs.iter().any(|c| c.len() != k) {
        return Err(Error::Dimension("coefficient vectors differ in length".into()));
    }
    if d == 0 || d > k {
        return Err(Error::Argument(format!("need 1 <= d <= k, got d={d}, k={k}")));
    }
    let mut small = Array2::zeros((r, r));
    for a in 0..r {
        for b in 0..=a {
            let v: f64 = coefs[a].iter().zip(&coefs[b]).map(|(x, y)| x * y).sum();
            small[[a, b]] = v;
            small[[b, a]] = v;
        }
    }
    let (mu, w) = symmetric_eigen(&small)?;
    let floor = if mu[0] > 0.0 { POSITIVITY_FLOOR * mu[0] } else { f64::INFINITY };
    let kept = mu.iter().take(d).take_while(|&&v| v > floor).count();
    let mut vectors = Array2::zeros((k, kept));
    for col in 0..kept {
        let scale = 1.0 / mu[col].sqrt();
        let mut v: Vec<f64> = (0..k)
            .map(|i| (0..r).map(|s| coefs[s][i] * w[[s, col]]).sum::<f64>() * scale)
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let sign = largest_component_sign(&v);
        for (i, x) in v.iter().enumerate() {
            vectors[[i, col]] = sign * x;
        }
    }
    Ok(Directions {
        vectors,
        eigenvalues: mu[..kept].to_vec(),
        truncated: kept < d,
    })
}

pub(crate) fn largest_component_sign(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

/// Per-slice solver statistics kept for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceFit {
    pub cut_point: f64,
    pub single_class: bool,
    pub iterations: usize,
    pub kkt_violation: f64,
    pub objective: f64,
}

/// A fitted summary-statistic map.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrMap {
    pub kernel: KernelSpec,
    /// Training points as the kernel sees them (standardized when
    /// `standardize` is set), one per row.
    pub training: Array2<f64>,
    pub standardize: bool,
    pub col_means: Vec<f64>,
    pub col_sds: Vec<f64>,
    /// Descending, strictly positive.
    pub eigenvalues: Vec<f64>,
    /// n×k eigenbasis of the centered Gram matrix.
    pub psi: Array2<f64>,
    /// k×d principal directions.
    pub directions: Array2<f64>,
    /// Diagnostics from the fit; not part of the serialized container.
    pub slices: Vec<SliceFit>,
    pub basis_truncated: bool,
    pub directions_truncated: bool,
}

/// Fits a kernel PSVM on responses `theta` and data rows `x`.
pub fn fit_psvm(theta: &[f64], x: ArrayView2<f64>, config: &PsvmConfig) -> Result<SdrMap> {
    config.validate()?;
    let m = theta.len();
    if x.nrows() != m {
        return Err(Error::Dimension(format!(
            "{m} responses but {} data rows",
            x.nrows()
        )));
    }
    if m < config.slices {
        return Err(Error::Argument(format!(
            "{m} training pairs cannot fill {} slices",
            config.slices
        )));
    }
    let k = config.basis_size(m);
    if k > m {
        return Err(Error::Argument(format!("basis size k={k} exceeds training size {m}")));
    }
    let slices = slice_response(theta, config.slices)?;

    let (col_means, col_sds) = column_moments(x);
    let training = if config.standardize {
        standardize_columns(x, &col_means, &col_sds)?
    } else {
        x.to_owned()
    };
    let gram = CenteredGram::compute(&config.kernel, training.view(), k)?;
    let psi = gram.eigenvectors;
    let projection = psi.dot(&psi.t());

    let solved: Vec<Result<(SliceFit, Option<Vec<f64>>)>> = slices
        .cut_points
        .par_iter()
        .zip(slices.labels.par_iter())
        .map(|(&cut, y)| {
            let single_class = y.iter().all(|&v| v == y[0]);
            if single_class {
                let fit = SliceFit { cut_point: cut, single_class, iterations: 0, kkt_violation: 0.0, objective: 0.0 };
                return Ok((fit, None));
            }
            let problem = SvmDualProblem::from_labels(&projection, y.clone(), config.cost)?;
            let sol = solve_sliced_svm_dual(&problem, config.qp_tol, config.qp_max_iter)?;
            let c = sv_coefficients(psi.view(), y, &sol.alpha)?;
            let fit = SliceFit {
                cut_point: cut,
                single_class,
                iterations: sol.iterations,
                kkt_violation: sol.kkt_violation,
                objective: sol.objective,
            };
            Ok((fit, Some(c)))
        })
        .collect();

    let mut slice_fits = Vec::with_capacity(solved.len());
    let mut coefs = Vec::new();
    for r in solved {
        let (fit, c) = r?;
        slice_fits.push(fit);
        coefs.extend(c);
    }
    if coefs.is_empty() {
        return Err(Error::Fit("every slice was single-class".into()));
    }
    let d = config.d.min(gram.eigenvalues.len());
    let dirs = principal_directions(&coefs, d)?;
    if dirs.vectors.ncols() == 0 {
        return Err(Error::Fit("hyperplane coefficients are all zero".into()));
    }

    Ok(SdrMap {
        kernel: config.kernel,
        training,
        standardize: config.standardize,
        col_means,
        col_sds,
        eigenvalues: gram.eigenvalues,
        psi,
        directions: dirs.vectors,
        slices: slice_fits,
        basis_truncated: gram.truncated,
        directions_truncated: dirs.truncated || d < config.d,
    })
}

impl SdrMap {
    /// Dimension of the raw data vectors.
    pub fn input_dim(&self) -> usize {
        self.training.ncols()
    }

    /// Dimension of the summaries.
    pub fn output_dim(&self) -> usize {
        self.directions.ncols()
    }

    pub fn basis_size(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V' diag(lambda)^-1 Psi' K(x, X)` with the row-centered kernel vector
    /// `K(x, X)_i = kappa(x, X_i) - mean_j kappa(x, X_j)`.
    pub fn evaluate(&self, x: ArrayView1<f64>) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "data vector has length {}, map expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut point = x.to_vec();
        if self.standardize {
            standardize_in_place(&mut point, &self.col_means, &self.col_sds);
        }
        let mut kv = kernel_row(&self.kernel, ArrayView1::from(&point), self.training.view())?;
        let centre = mean(&kv);
        kv.iter_mut().for_each(|v| *v -= centre);
        Ok(self.project(&kv))
    }

    fn project(&self, centered_kernel: &[f64]) -> Vec<f64> {
        let kv = ArrayView1::from(centered_kernel);
        let coords: Array1<f64> = self
            .psi
            .t()
            .dot(&kv)
            .iter()
            .zip(&self.eigenvalues)
            .map(|(z, l)| z / l)
            .collect();
        self.directions.t().dot(&coords).to_vec()
    }

    /// Summaries of many data rows; row `i` of the output belongs to row `i`
    /// of `x` regardless of how the work is scheduled.
    pub fn evaluate_rows(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let rows: Vec<Result<Vec<f64>>> = (0..x.nrows())
            .into_par_iter()
            .map(|i| self.evaluate(x.row(i)))
            .collect();
        let d = self.output_dim();
        let mut out = Array2::zeros((x.nrows(), d));
        for (i, r) in rows.into_iter().enumerate() {
            out.row_mut(i).assign(&Array1::from(r?));
        }
        Ok(out)
    }

    /// Summaries of the training points themselves.
    pub fn training_summaries(&self) -> Array2<f64> {
        let kernel = crate::kernel::gram(&self.kernel, self.training.view())
            .expect("training data was valid at fit time");
        let n = kernel.nrows();
        let mut out = Array2::zeros((n, self.output_dim()));
        for i in 0..n {
            let mut row = kernel.row(i).to_vec();
            let centre = mean(&row);
            row.iter_mut().for_each(|v| *v -= centre);
            out.row_mut(i).assign(&Array1::from(self.project(&row)));
        }
        out
    }
}

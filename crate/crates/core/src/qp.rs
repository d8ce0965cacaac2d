//! Dual QP of a sliced support vector machine.
//!
//! ```text
//! minimize   f(a) = -1'a + 1/4 a' M a
//! subject to 0 <= a_i <= cost,  y'a = 0,  y_i in {-1, +1}
//! ```
//!
//! Solved by SMO: each step moves the maximally violating pair along the
//! direction that keeps `y'a = 0`, minimizing the objective exactly on that
//! segment.

use ndarray::Array2;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Curvature below this is treated as zero along a pair direction.
const FLAT_CURVATURE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmDualProblem {
    m: Array2<f64>,
    y: Vec<f64>,
    cost: f64,
}

impl SvmDualProblem {
    /// Validates `M` (square, symmetric, matching `y`), the labels and the cost.
    ///
    /// Positive semidefiniteness is the caller's responsibility; it is what
    /// makes the SMO steps exact minimizers.
    pub fn new(m: Array2<f64>, y: Vec<f64>, cost: f64) -> Result<Self> {
        let (r, c) = m.dim();
        if r != c || r != y.len() {
            return Err(Error::Dimension(format!(
                "QP matrix is {r}x{c} but there are {} labels",
                y.len()
            )));
        }
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(Error::Argument(format!("SVM cost must be positive, got {cost}")));
        }
        if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::Argument(format!("labels must be +1 or -1, found {bad}")));
        }
        let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
        for i in 0..r {
            for j in 0..i {
                if (m[[i, j]] - m[[j, i]]).abs() > 1e-9 * scale {
                    return Err(Error::Argument("QP matrix is not symmetric".into()));
                }
            }
        }
        Ok(SvmDualProblem { m, y, cost })
    }

    /// Builds `M = diag(y) P diag(y)` from a Gram-type matrix `P`.
    pub fn from_labels(p: &Array2<f64>, y: Vec<f64>, cost: f64) -> Result<Self> {
        if p.nrows() != y.len() || p.ncols() != y.len() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but there are {} labels",
                p.nrows(),
                p.ncols(),
                y.len()
            )));
        }
        let mut m = p.clone();
        for ((i, j), v) in m.indexed_iter_mut() {
            *v *= y[i] * y[j];
        }
        Self::new(m, y, cost)
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.m
    }

    pub fn objective(&self, alpha: &[f64]) -> f64 {
        let n = self.dim();
        let mut quad = 0.0;
        for i in 0..n {
            if alpha[i] == 0.0 {
                continue;
            }
            let row = self.m.row(i);
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * alpha[j];
            }
            quad += alpha[i] * acc;
        }
        0.25 * quad - alpha.iter().sum::<f64>()
    }

    /// `grad f(a) = -1 + M a / 2`.
    pub fn gradient(&self, alpha: &[f64]) -> Vec<f64> {
        self.m
            .rows()
            .into_iter()
            .map(|row| -1.0 + 0.5 * row.iter().zip(alpha).map(|(a, b)| a * b).sum::<f64>())
            .collect()
    }

    fn single_class(&self) -> bool {
        self.y.iter().all(|&v| v == self.y[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmDualSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub kkt_violation: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Bound {
    Lower,
    Upper,
    Free,
}

fn bound_of(a: f64, cost: f64) -> Bound {
    if a <= 0.0 {
        Bound::Lower
    } else if a >= cost {
        Bound::Upper
    } else {
        Bound::Free
    }
}

/// Can `a_t` move by `+y_t * delta` for small `delta > 0`?
#[inline]
fn can_rise(y: f64, b: Bound) -> bool {
    match b {
        Bound::Free => true,
        Bound::Lower => y > 0.0,
        Bound::Upper => y < 0.0,
    }
}

/// Can `a_t` move by `-y_t * delta` for small `delta > 0`?
#[inline]
fn can_fall(y: f64, b: Bound) -> bool {
    match b {
        Bound::Free => true,
        Bound::Lower => y < 0.0,
        Bound::Upper => y > 0.0,
    }
}

/// The maximal violating pair `(i, j)` and its gap `u_i - u_j`, where
/// `u_t = -y_t * grad_t`.
fn violating_pair(y: &[f64], alpha: &[f64], grad: &[f64], cost: f64) -> Option<(usize, usize, f64)> {
    let mut best_up: Option<(usize, f64)> = None;
    let mut best_down: Option<(usize, f64)> = None;
    for t in 0..y.len() {
        let b = bound_of(alpha[t], cost);
        let u = -y[t] * grad[t];
        if can_rise(y[t], b) && best_up.is_none_or(|(_, v)| u > v) {
            best_up = Some((t, u));
        }
        if can_fall(y[t], b) && best_down.is_none_or(|(_, v)| u < v) {
            best_down = Some((t, u));
        }
    }
    match (best_up, best_down) {
        (Some((i, ui)), Some((j, uj))) => Some((i, j, ui - uj)),
        _ => None,
    }
}

/// First-order optimality residual of `alpha`.
///
/// With `u_t = -y_t * grad_t`, stationarity with multiplier `nu` asks
/// `nu >= u_t` for every coordinate that may still rise along `+y_t` and
/// `nu <= u_t` for every coordinate that may still fall. The residual is the
/// gap `max u (rising) - min u (falling)`, clamped at zero; it vanishes
/// exactly at a KKT point and equals twice the smallest achievable
/// per-coordinate stationarity error over all `nu`.
pub fn kkt_violation(problem: &SvmDualProblem, alpha: &[f64]) -> f64 {
    let grad = problem.gradient(alpha);
    match violating_pair(&problem.y, alpha, &grad, problem.cost) {
        Some((_, _, gap)) => gap.max(0.0),
        None => 0.0,
    }
}

/// Solves the dual to KKT residual `tol` or fails after `max_iter` pair updates.
///
/// `max_iter = None` means `100 * m^2`.
pub fn solve_sliced_svm_dual(
    problem: &SvmDualProblem,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<SvmDualSolution> {
    let n = problem.dim();
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    if n == 0 || problem.single_class() {
        return Ok(SvmDualSolution {
            alpha: vec![0.0; n],
            objective: 0.0,
            kkt_violation: 0.0,
            iterations: 0,
        });
    }
    let max_iter = max_iter.unwrap_or(100 * n * n);
    let (m, y, cost) = (&problem.m, &problem.y, problem.cost);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut objective = 0.0f64;
    let mut iterations = 0;

    loop {
        let Some((i, j, gap)) = violating_pair(y, &alpha, &grad, cost) else {
            break;
        };
        if gap <= tol {
            break;
        }
        if iterations >= max_iter {
            let violation = kkt_violation(problem, &alpha);
            return Err(Error::Convergence { iterations, violation, alpha });
        }
        iterations += 1;

        // Direction d = y_i e_i - y_j e_j; g'd = -gap.
        let curvature = m[[i, i]] + m[[j, j]] - 2.0 * y[i] * y[j] * m[[i, j]];
        let room_i = if y[i] > 0.0 { cost - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { cost - alpha[j] };
        let max_step = room_i.min(room_j);
        let step = if curvature > FLAT_CURVATURE {
            (2.0 * gap / curvature).min(max_step)
        } else {
            max_step
        };
        if step <= 0.0 {
            // Cannot happen for a genuine violating pair; guard against a stall.
            let violation = kkt_violation(problem, &alpha);
            return Err(Error::Convergence { iterations, violation, alpha });
        }

        let change = -gap * step + 0.25 * curvature * step * step;
        debug_assert!(
            change <= 1e-12 * (1.0 + objective.abs()),
            "objective increased by {change}"
        );
        objective += change;

        alpha[i] = if step == room_i { if y[i] > 0.0 { cost } else { 0.0 } } else { alpha[i] + y[i] * step };
        alpha[j] = if step == room_j { if y[j] > 0.0 { 0.0 } else { cost } } else { alpha[j] - y[j] * step };
        alpha[i] = alpha[i].clamp(0.0, cost);
        alpha[j] = alpha[j].clamp(0.0, cost);

        let (ci, cj) = (0.5 * step * y[i], 0.5 * step * y[j]);
        let (row_i, row_j) = (m.row(i), m.row(j));
        for t in 0..n {
            grad[t] += ci * row_i[t] - cj * row_j[t];
        }
    }

    let kkt = kkt_violation(problem, &alpha);
    Ok(SvmDualSolution {
        objective: problem.objective(&alpha),
        kkt_violation: kkt,
        alpha,
        iterations,
    })
}

//! Independent reference solvers shared by the test suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Random symmetric matrix with entries uniform in (-1, 1).
pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> Array2<f64> {
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v = rng.random_range(-1.0..1.0);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    s
}

/// Random PSD matrix B Bᵀ with B of shape n×rank.
pub fn random_psd(n: usize, rank: usize, rng: &mut impl Rng) -> Array2<f64> {
    let b = Array2::from_shape_fn((n, rank), |_| rng.random_range(-1.0..1.0));
    let p = b.dot(&b.t());
    (&p + &p.t()) * 0.5
}

/// Minimum of −1ᵀα + ¼αᵀMα over 0 ≤ α ≤ cost, yᵀα = 0, by enumerating all
/// 3^m assignments of each coordinate to {lower bound, upper bound, free}
/// and solving the equality-constrained stationarity system on the free set.
/// Returns (objective, alpha).
pub fn qp_bruteforce(m: &Array2<f64>, y: &[f64], cost: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let patterns = 3usize.pow(n as u32);
    for code in 0..patterns {
        let mut state = vec![0u8; n];
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { cost } else { 0.0 }).collect();
        if free.is_empty() {
            let eq: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
            if eq.abs() > 1e-12 {
                continue;
            }
        } else {
            // [½M_FF y_F; y_Fᵀ 0][α_F; ν] = [1 − ½M_F,fixed α_fixed; −y_fixedᵀα_fixed]
            let f = free.len();
            let mut a = DMatrix::zeros(f + 1, f + 1);
            let mut rhs = DVector::zeros(f + 1);
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    a[(r, c)] = 0.5 * m[[i, j]];
                }
                a[(r, f)] = y[i];
                a[(f, r)] = y[i];
                let fixed: f64 = (0..n).filter(|j| state[*j] != 2).map(|j| m[[i, j]] * alpha[j]).sum();
                rhs[r] = 1.0 - 0.5 * fixed;
            }
            rhs[f] = -(0..n).filter(|j| state[*j] != 2).map(|j| y[j] * alpha[j]).sum::<f64>();
            // Full-pivot LU is exact enough for the nonsingular systems that
            // hold the optimum; the SVD pseudo-solve covers singular ones.
            let sol = match a.clone().full_piv_lu().solve(&rhs) {
                Some(s) => s,
                None => match a.clone().svd(true, true).solve(&rhs, 1e-12) {
                    Ok(s) => s,
                    Err(_) => continue,
                },
            };
            if (&a * &sol - &rhs).norm() > 1e-9 * (1.0 + rhs.norm()) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
            if alpha.iter().any(|v| *v < -1e-10 || *v > cost + 1e-10) {
                continue;
            }
        }
        let obj = objective(m, &alpha);
        if obj < best.0 {
            best = (obj, alpha);
        }
    }
    best
}

pub fn objective(m: &Array2<f64>, alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * m[[i, j]] * alpha[j];
        }
    }
    -alpha.iter().sum::<f64>() + 0.25 * quad
}

fn det_shifted(s: &DMatrix<f64>, lambda: f64) -> f64 {
    let n = s.nrows();
    (s - DMatrix::identity(n, n) * lambda).lu().determinant()
}

/// Eigenvalues of a small symmetric matrix as the roots of det(S − λI),
/// located by sign changes on a fine grid over the Gershgorin interval and
/// refined by bisection. Assumes simple eigenvalues. Descending order.
pub fn char_poly_eigenvalues(s: &Array2<f64>) -> Vec<f64> {
    let n = s.nrows();
    let sm = to_na(s);
    let radius = (0..n)
        .map(|i| s[[i, i]].abs() + (0..n).filter(|&j| j != i).map(|j| s[[i, j]].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1e-9;
    let steps = 200_000;
    let h = 2.0 * radius / steps as f64;
    let mut roots = Vec::new();
    let mut x0 = -radius;
    let mut f0 = det_shifted(&sm, x0);
    for k in 1..=steps {
        let x1 = -radius + h * k as f64;
        let f1 = det_shifted(&sm, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = det_shifted(&sm, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

//! Dense symmetric eigensolver by cyclic Jacobi rotations.
//!
//! Rotations are applied in round-robin (tournament) order: each round
//! annihilates n/2 disjoint off-diagonal pairs at once, and a sweep of n-1
//! rounds visits every pair exactly once. Row and column updates then stream
//! through contiguous memory instead of striding down columns.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Eigenpairs with `lambda <= POSITIVITY_FLOOR * lambda_1` are not returned by
/// [`top_k_eigen`].
pub const POSITIVITY_FLOOR: f64 = 1e-10;

const CONVERGENCE_TOL: f64 = 1e-11;
const MAX_SWEEPS: usize = 60;

/// Leading eigenpairs of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    /// Descending.
    pub values: Vec<f64>,
    /// One eigenvector per column.
    pub vectors: Array2<f64>,
    /// Fewer pairs than requested were returned.
    pub truncated: bool,
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Eigenvalues come back in descending order with eigenvectors as columns.
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive (the first such component on ties).
pub fn symmetric_eigen(s: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (n, m) = s.dim();
    if n != m {
        return Err(Error::Dimension(format!("eigensolver needs a square matrix, got {n}x{m}")));
    }
    if n == 0 {
        return Ok((Vec::new(), Array2::zeros((0, 0))));
    }
    let mut a: Vec<f64> = s.iter().copied().collect();
    for i in 0..n {
        for j in 0..i {
            if (a[i * n + j] - a[j * n + i]).abs() > 1e-12 * (1.0 + a[i * n + j].abs()) {
                return Err(Error::Argument("eigensolver needs a symmetric matrix".into()));
            }
            let v = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    // Row r of `vt` is column r of the eigenvector matrix.
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    jacobi_sweeps(&mut a, &mut vt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let row = &vt[src * n..(src + 1) * n];
        let sign = sign_of_largest(row);
        for (r, v) in row.iter().enumerate() {
            vectors[[r, col]] = sign * v;
        }
    }
    Ok((values, vectors))
}

/// The `k` largest eigenpairs of a symmetric matrix, dropping any whose
/// eigenvalue is not above `POSITIVITY_FLOOR * lambda_1`.
pub fn top_k_eigen(s: &Array2<f64>, k: usize) -> Result<EigenPairs> {
    let n = s.nrows();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let (values, vectors) = symmetric_eigen(s)?;
    let floor = if values[0] > 0.0 { POSITIVITY_FLOOR * values[0] } else { f64::INFINITY };
    let kept = values.iter().take(k).take_while(|&&v| v > floor).count();
    Ok(EigenPairs {
        values: values[..kept].to_vec(),
        vectors: vectors.slice(ndarray::s![.., ..kept]).to_owned(),
        truncated: kept < k,
    })
}

fn sign_of_largest(v: &[f64]) -> f64 {
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

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sum.sqrt()
}

/// Round-robin schedule: `rounds[r]` lists the disjoint pairs of round r.
fn tournament(n: usize) -> Vec<Vec<(usize, usize)>> {
    let players = n + n % 2;
    let mut ring: Vec<usize> = (1..players).collect();
    let mut rounds = Vec::with_capacity(players - 1);
    for _ in 0..players - 1 {
        let mut seats = Vec::with_capacity(players);
        seats.push(0);
        seats.extend_from_slice(&ring);
        let pairs = (0..players / 2)
            .map(|i| {
                let (p, q) = (seats[i], seats[players - 1 - i]);
                (p.min(q), p.max(q))
            })
            .filter(|&(_, q)| q < n)
            .collect();
        rounds.push(pairs);
        ring.rotate_right(1);
    }
    rounds
}

#[derive(Clone, Copy)]
struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    t: f64,
    app: f64,
    aqq: f64,
    apq: f64,
}

fn jacobi_sweeps(a: &mut [f64], vt: &mut [f64], n: usize) -> Result<()> {
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if frob == 0.0 || n == 1 {
        return Ok(());
    }
    let target = CONVERGENCE_TOL * frob;
    // Entries this small cannot keep the off-diagonal norm above target.
    let skip = target / (4.0 * n as f64);
    let rounds = tournament(n);
    let mut rotations: Vec<Rotation> = Vec::with_capacity(n / 2);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a, n) < target {
            return Ok(());
        }
        for pairs in &rounds {
            rotations.clear();
            for &(p, q) in pairs {
                let apq = a[p * n + q];
                if apq.abs() <= skip {
                    continue;
                }
                let (app, aqq) = (a[p * n + p], a[q * n + q]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                rotations.push(Rotation { p, q, c, s: t * c, t, app, aqq, apq });
            }
            if rotations.is_empty() {
                continue;
            }
            // A <- P^T A: rotate rows.
            for r in &rotations {
                rotate_rows(a, n, r);
                rotate_rows(vt, n, r);
            }
            // A <- A P: rotate columns, one row at a time.
            for row in a.chunks_exact_mut(n) {
                for r in &rotations {
                    let (x, y) = (row[r.p], row[r.q]);
                    row[r.p] = r.c * x - r.s * y;
                    row[r.q] = r.s * x + r.c * y;
                }
            }
            // The 2x2 blocks are known in closed form.
            for r in &rotations {
                let (p, q) = (r.p, r.q);
                a[p * n + p] = r.app - r.t * r.apq;
                a[q * n + q] = r.aqq + r.t * r.apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let off = off_diagonal_norm(a, n);
    if off < target {
        Ok(())
    } else {
        Err(Error::EigenConvergence { sweeps: MAX_SWEEPS, off_norm: off })
    }
}

#[inline]
fn rotate_rows(m: &mut [f64], n: usize, r: &Rotation) {
    let (lo, hi) = m.split_at_mut(r.q * n);
    let rp = &mut lo[r.p * n..(r.p + 1) * n];
    let rq = &mut hi[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = r.c * xp - r.s * yq;
        *y = r.s * xp + r.c * yq;
    }
}

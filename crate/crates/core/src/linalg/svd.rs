//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! The columns of a working copy of `A` are rotated pairwise until every pair
//! is orthogonal to working precision; the column norms are then the singular
//! values and the accumulated rotations form `V`. Wide matrices are handled by
//! decomposing the transpose. The left factor is completed to a square
//! orthogonal matrix with Householder reflections.

use alloc::vec;
use alloc::vec::Vec;

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::float::{hypot, sqrt};

/// Hard cap on cyclic sweeps before giving up.
pub const MAX_SWEEPS: usize = 60;

/// `A = U * diag(sigma) * V^T` with `U` (m x m) and `V` (n x n) orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: Matrix,
    /// Non-increasing, non-negative; `min(m, n)` entries.
    pub sigma: Vec<f64>,
    pub v: Matrix,
    /// Default rank threshold `max(m, n) * eps * sigma_1`.
    pub rank_tol: f64,
}

impl SvdFactors {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `tol`, or above `rank_tol`
    /// when `tol` is `None`.
    pub fn rank(&self, tol: Option<f64>) -> usize {
        let t = tol.unwrap_or(self.rank_tol);
        self.sigma.iter().take_while(|&&s| s > t).count()
    }

    /// Columns `idx` of `U`.
    pub fn u_columns(&self, idx: &[usize]) -> Matrix {
        self.u.select_columns(idx)
    }

    /// Columns `idx` of `V`.
    pub fn v_columns(&self, idx: &[usize]) -> Matrix {
        self.v.select_columns(idx)
    }

    /// `sum_{i in idx} sigma_i u_i v_i^T`.
    pub fn partial_sum(&self, idx: &[usize]) -> Matrix {
        let (m, n) = (self.rows(), self.cols());
        Matrix::from_fn(m, n, |i, j| {
            idx.iter()
                .map(|&k| self.sigma[k] * self.u.get(i, k) * self.v.get(j, k))
                .sum()
        })
    }

    pub fn reconstruct(&self) -> Matrix {
        let all: Vec<usize> = (0..self.sigma.len()).collect();
        self.partial_sum(&all)
    }
}

/// Default rank threshold for an `m x n` matrix with largest singular value `sigma_max`.
pub fn default_rank_tol(m: usize, n: usize, sigma_max: f64) -> f64 {
    let t = m.max(n) as f64 * f64::EPSILON * sigma_max;
    if t > 0.0 {
        t
    } else {
        f64::MIN_POSITIVE
    }
}

/// Computes the full SVD of `a`.
///
/// Deterministic: identical input yields bit-identical factors. Equal
/// singular values keep the original column order of `V`.
pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    if m >= n {
        let (u, sigma, v) = jacobi_tall(a)?;
        let rank_tol = default_rank_tol(m, n, sigma.first().copied().unwrap_or(0.0));
        Ok(SvdFactors {
            u,
            sigma,
            v,
            rank_tol,
        })
    } else {
        let (u, sigma, v) = jacobi_tall(&a.transpose())?;
        let rank_tol = default_rank_tol(m, n, sigma.first().copied().unwrap_or(0.0));
        Ok(SvdFactors {
            u: v,
            sigma,
            v: u,
            rank_tol,
        })
    }
}

/// One-sided Jacobi on a matrix with `m >= n`.
fn jacobi_tall(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    // Work on A / 2^e with max |a_ij| in [1, 2): exact, and keeps the column
    // inner products below from underflowing for tiny but nonzero input.
    let scale = pow2_scale(a.max_abs());
    // column-major working copies
    let mut w: Vec<f64> = a.to_column_major().into_iter().map(|x| x / scale).collect();
    let mut v = Matrix::identity(n).to_column_major();
    let tol = f64::EPSILON * sqrt(m.max(1) as f64);

    let mut converged = false;
    let mut off = 0.0_f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        off = 0.0;
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let cp = &w[p * m..(p + 1) * m];
                    let cq = &w[q * m..(q + 1) * m];
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    (alpha, beta, gamma)
                };
                if alpha == 0.0 || beta == 0.0 || gamma == 0.0 {
                    continue;
                }
                let rel = gamma.abs() / (sqrt(alpha) * sqrt(beta));
                off = off.max(rel);
                if rel <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + hypot(1.0, zeta));
                let c = 1.0 / hypot(1.0, t);
                let s = c * t;
                rotate(&mut w, m, p, q, c, s);
                rotate(&mut v, n, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: MAX_SWEEPS,
            off_diagonal: off,
        });
    }

    // columns this far below the largest entry were never orthogonalized
    // (their squares underflow) and count as zero
    let negligible = sqrt(f64::MIN_POSITIVE);
    let norms: Vec<f64> = (0..n)
        .map(|j| column_norm(&w[j * m..(j + 1) * m]))
        .map(|c| if c < negligible { 0.0 } else { c })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep original column order
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j] * scale).collect();
    let v_sorted = Matrix::from_fn(n, n, |i, k| v[order[k] * n + i]);

    // normalized columns for nonzero singular values, completed to an orthogonal U
    let nonzero = order.iter().take_while(|&&j| norms[j] > 0.0).count();
    let mut thin = vec![0.0; m * nonzero];
    for (k, &j) in order.iter().take(nonzero).enumerate() {
        let s = norms[j];
        for i in 0..m {
            thin[k * m + i] = w[j * m + i] / s;
        }
    }
    let u = complete_orthonormal(&thin, m, nonzero);
    Ok((u, sigma, v_sorted))
}

/// Largest power of two not above `x`, or 1 for zero and non-normal input.
fn pow2_scale(x: f64) -> f64 {
    if x.is_normal() {
        f64::from_bits(x.to_bits() & 0x7ff0_0000_0000_0000)
    } else {
        1.0
    }
}

fn rotate(buf: &mut [f64], len: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = buf.split_at_mut(q * len);
    let cp = &mut head[p * len..(p + 1) * len];
    let cq = &mut tail[..len];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

fn column_norm(c: &[f64]) -> f64 {
    let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = c.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * sqrt(s)
}

/// Extends `r` orthonormal columns (column-major, length `m` each) to an
/// `m x m` orthogonal matrix whose leading columns are exactly the input.
fn complete_orthonormal(thin: &[f64], m: usize, r: usize) -> Matrix {
    // Householder QR of the thin block; the trailing columns of Q span the complement.
    let mut work = thin.to_vec();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(r);
    for k in 0..r.min(m) {
        let col = &work[k * m..(k + 1) * m];
        let x = &col[k..];
        let norm = column_norm(x);
        let mut vk = x.to_vec();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        vk[0] -= alpha;
        let vnorm2: f64 = vk.iter().map(|t| t * t).sum();
        let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
        for j in k..r {
            let cj = &mut work[j * m + k..(j + 1) * m];
            let d: f64 = vk.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
            let f = beta * d;
            for (c, a) in cj.iter_mut().zip(&vk) {
                *c -= f * a;
            }
        }
        reflectors.push((vk, beta));
    }

    let mut u = Matrix::zeros(m, m);
    for k in 0..r {
        for i in 0..m {
            u.set(i, k, thin[k * m + i]);
        }
    }
    let mut e = vec![0.0; m];
    for j in r..m {
        e.iter_mut().for_each(|t| *t = 0.0);
        e[j] = 1.0;
        for (k, (vk, beta)) in reflectors.iter().enumerate().rev() {
            let seg = &mut e[k..];
            let d: f64 = vk.iter().zip(seg.iter()).map(|(a, b)| a * b).sum();
            let f = beta * d;
            for (c, a) in seg.iter_mut().zip(vk) {
                *c -= f * a;
            }
        }
        for i in 0..m {
            u.set(i, j, e[i]);
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonality_defect(q: &Matrix) -> f64 {
        (&(&q.transpose() * q) - &Matrix::identity(q.cols())).max_abs()
    }

    fn check_invariants(a: &Matrix) {
        let f = svd(a).unwrap();
        let (m, n) = a.shape();
        assert_eq!(f.u.shape(), (m, m));
        assert_eq!(f.v.shape(), (n, n));
        assert!(orthogonality_defect(&f.u) <= 100.0 * f64::EPSILON);
        assert!(orthogonality_defect(&f.v) <= 100.0 * f64::EPSILON);
        assert!(f.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(f.sigma.iter().all(|&s| s >= 0.0));
        let bound = 100.0 * f64::EPSILON * f.sigma_max().max(1.0) * sqrt((m * n) as f64);
        assert!(f.reconstruct().distance(a) <= bound);
    }

    #[test]
    fn tiny_entries_keep_factors_orthogonal() {
        let a = Matrix::from_rows(&[
            [1e-16, -3e-17, 0.0, 2e-170],
            [4e-17, 2e-16, 1e-169, 0.0],
            [-1e-16, 5e-17, 0.0, 0.0],
        ])
        .unwrap();
        let f = svd(&a).unwrap();
        assert!(orthogonality_defect(&f.u) <= 100.0 * f64::EPSILON);
        assert!(orthogonality_defect(&f.v) <= 100.0 * f64::EPSILON);
        assert!(f.reconstruct().distance(&a) <= 1e-30);
        let tiny = svd(&Matrix::identity(2).scale(1e-300)).unwrap();
        assert_eq!(tiny.sigma, vec![1e-300, 1e-300]);
    }

    #[test]
    fn identity() {
        let f = svd(&Matrix::identity(3)).unwrap();
        assert_eq!(f.sigma, vec![1.0, 1.0, 1.0]);
        assert_eq!(f.u, Matrix::identity(3));
        assert_eq!(f.v, Matrix::identity(3));
    }

    #[test]
    fn already_diagonal() {
        let a = Matrix::from_rows(&[[3.0, 0.0], [0.0, 0.0]]).unwrap();
        let f = svd(&a).unwrap();
        assert_eq!(f.sigma, vec![3.0, 0.0]);
        check_invariants(&a);
    }

    #[test]
    fn shapes_and_degenerate_inputs() {
        check_invariants(&Matrix::zeros(3, 2));
        check_invariants(&Matrix::zeros(2, 5));
        check_invariants(&Matrix::from_rows(&[[1.0, 2.0, 1.0], [2.0, 3.0, 2.0]]).unwrap());
        check_invariants(&Matrix::from_rows(&[[1.0], [2.0], [2.0]]).unwrap());
        let f = svd(&Matrix::zeros(3, 0)).unwrap();
        assert!(f.sigma.is_empty());
        assert_eq!(f.u, Matrix::identity(3));
    }

    #[test]
    fn deterministic() {
        let a = Matrix::from_fn(7, 5, |i, j| ((i * 31 + j * 17) % 11) as f64 - 5.0);
        assert_eq!(svd(&a).unwrap(), svd(&a).unwrap());
        check_invariants(&a);
    }

    #[test]
    fn ties_keep_column_order() {
        let a = Matrix::from_rows(&[[0.0, 2.0], [2.0, 0.0]]).unwrap();
        let f = svd(&a).unwrap();
        assert_eq!(f.sigma, vec![2.0, 2.0]);
        assert_eq!(f.v, Matrix::identity(2));
    }
}

//! Low-rank factorizations obtained from the generalized reduction: removing
//! chosen singular triplets, optimal rank-`k` truncation, CUR and Nyström.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::subspace::{range_basis, subspace_distance, SubspaceBasis};
use crate::linalg::{factorize, numerical_rank, pinv_with_tol, spectral_norm};
use crate::reduction::{reduce, reduction_term, wedderburn_factorize, DecompositionReport};
use crate::sketch;
use crate::tol::Tolerances;
use crate::Matrix;

/// Relative gap below which singular values on both sides of an index split
/// count as equal.
pub const SPLIT_GAP: f64 = 1e-8;

/// Strictly increasing, non-empty list of 0-based singular-value indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if let Some(pos) = indices.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::IndexNotIncreasing { position: pos + 1 });
        }
        Ok(Self(indices))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("non-empty")
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// `{0, ..., n-1}` minus this set, in increasing order.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| !self.contains(i)).collect()
    }

    fn check_bound(&self, bound: usize) -> Result<()> {
        let max = self.max();
        if max >= bound {
            return Err(Error::IndexOutOfRange { index: max, bound });
        }
        Ok(())
    }
}

/// Singular triplets of `A` with index set `I` checked against `rank(A)` and
/// against splitting a repeated singular value.
struct IndexedSvd {
    f: crate::SvdFactors,
}

impl IndexedSvd {
    fn new(a: &Matrix, i: &IndexSet, tol: &Tolerances) -> Result<Self> {
        let f = factorize(a);
        let rank = f.rank(tol.rank);
        i.check_bound(rank)?;
        let gap = SPLIT_GAP * f.sigma_max();
        for &inside in i.as_slice() {
            for outside in i.complement(rank) {
                if (f.sigma[inside] - f.sigma[outside]).abs() <= gap {
                    return Err(Error::DegenerateSplit {
                        inside,
                        outside,
                        gap: (f.sigma[inside] - f.sigma[outside]).abs(),
                    });
                }
            }
        }
        Ok(Self { f })
    }
}

/// Reduction of `A` by `X = V_I`, `Y = U_I`: removes the singular triplets
/// indexed by `I`, leaving `sum over i not in I of sigma_i u_i v_i^T`.
pub fn svd_indexed_reduce(a: &Matrix, i: &IndexSet, tol: &Tolerances) -> Result<Matrix> {
    let s = IndexedSvd::new(a, i, tol)?;
    let x = s.f.v_columns(i.as_slice());
    let y = s.f.u_columns(i.as_slice());
    reduce(a, &x, &y, tol)
}

/// Reduction by any `X`, `Y` with `R(X) = R(V_I)` and `R(Y) = R(U_I)`; equals
/// [`svd_indexed_reduce`].
pub fn range_matched_reduce(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    i: &IndexSet,
    tol: &Tolerances,
) -> Result<Matrix> {
    let s = IndexedSvd::new(a, i, tol)?;
    let vi = SubspaceBasis::from_orthonormal(s.f.v_columns(i.as_slice()));
    let ui = SubspaceBasis::from_orthonormal(s.f.u_columns(i.as_slice()));
    if x.rows() != a.cols() || y.rows() != a.rows() {
        return Err(Error::ShapeMismatch {
            op: "range_matched_reduce",
            left: x.shape(),
            right: y.shape(),
        });
    }
    let dx = subspace_distance(&range_basis(x, tol.rank), &vi)?;
    if dx > tol.subspace {
        return Err(Error::RangeMismatch { which: "X", distance: dx });
    }
    let dy = subspace_distance(&range_basis(y, tol.rank), &ui)?;
    if dy > tol.subspace {
        return Err(Error::RangeMismatch { which: "Y", distance: dy });
    }
    reduce(a, x, y, tol)
}

#[derive(Debug, Clone)]
pub struct ApproxReport {
    pub approx: Matrix,
    /// `||A - approx||_F`.
    pub frob_error: f64,
    /// `||A - approx||_2`.
    pub spectral_error: f64,
    /// `sqrt(sum over i >= k of sigma_i^2)`.
    pub optimal_frob_error: f64,
    pub k_kept: usize,
}

/// Best rank-`k` approximation, formed as the reduction of `A` by the
/// trailing singular vectors `V_I`, `U_I` with `I = {k, ..., rank(A) - 1}`.
pub fn best_rank_k(a: &Matrix, k: usize, tol: &Tolerances) -> Result<ApproxReport> {
    let f = factorize(a);
    let rank = f.rank(tol.rank);
    if k > rank {
        return Err(Error::IndexOutOfRange { index: k, bound: rank + 1 });
    }
    let tail: Vec<usize> = (k..rank).collect();
    let approx = if tail.is_empty() {
        a.clone()
    } else {
        reduce(a, &f.v_columns(&tail), &f.u_columns(&tail), tol)?
    };
    let diff = a - &approx;
    let optimal = crate::float::sqrt(f.sigma[k..].iter().map(|s| s * s).sum());
    Ok(ApproxReport {
        frob_error: diff.frobenius_norm(),
        spectral_error: spectral_norm(&diff),
        optimal_frob_error: optimal,
        k_kept: k,
        approx,
    })
}

#[derive(Debug, Clone)]
pub struct CurReport {
    /// `A(:, cols)`.
    pub c: Matrix,
    /// `A(rows, cols)`.
    pub u: Matrix,
    /// `A(rows, :)`.
    pub r: Matrix,
    /// `C U^+ R`.
    pub approx: Matrix,
    /// `||A - C U^+ R||_F`.
    pub residual: f64,
    pub rank_u: usize,
    pub rank_a: usize,
}

/// CUR factorization: the reduction term for unit-vector `X`, `Y` selecting
/// the given columns and rows. Exact when `rank(U) = rank(A)`.
pub fn cur_decompose(
    a: &Matrix,
    rows: &IndexSet,
    cols: &IndexSet,
    tol: &Tolerances,
) -> Result<CurReport> {
    rows.check_bound(a.rows())?;
    cols.check_bound(a.cols())?;
    let x = Matrix::selector(a.cols(), cols.as_slice());
    let y = Matrix::selector(a.rows(), rows.as_slice());
    // U = Y^T A X is M itself, so its rank is judged against ||A||
    let parts = crate::reduction::CoreParts::new(a, &x, &y, tol)?;
    let approx = parts.removed_term();
    let u = a.select_rows(rows.as_slice()).select_columns(cols.as_slice());
    Ok(CurReport {
        c: a.select_columns(cols.as_slice()),
        r: a.select_rows(rows.as_slice()),
        rank_u: parts.k,
        rank_a: numerical_rank(a, tol.rank),
        residual: a.distance(&approx),
        u,
        approx,
    })
}

/// Nyström-type sketch: `X` (n x s) and `Y` (m x (s + oversample)) drawn
/// uniform in `[-1, 1)` from the seeded generator, `X` first.
pub fn nystrom_sketch(
    a: &Matrix,
    sketch_cols: usize,
    oversample: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    let mut rng = sketch::rng(seed);
    let x = sketch::uniform_symmetric(&mut rng, a.cols(), sketch_cols);
    let y = sketch::uniform_symmetric(&mut rng, a.rows(), sketch_cols + oversample);
    wedderburn_factorize(a, &x, &y, tol)
}

/// Residuals of the cancellations `A X (Y^T A X)^+ = A (Y^T A)^+` (left) and
/// `(Y^T A X)^+ Y^T A = (A X)^+ A` (right), each relative to its right side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellationReport {
    pub left_residual: f64,
    pub right_residual: f64,
    /// `rank(A X) = rank(A)` and `rank(Y) = m`.
    pub left_hypothesis: bool,
    /// `rank(Y^T A) = rank(A)` and `rank(X) = n`.
    pub right_hypothesis: bool,
}

fn relative(diff: f64, reference: f64) -> f64 {
    diff / reference.max(f64::MIN_POSITIVE)
}

pub fn cancellation_check(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<CancellationReport> {
    let term = crate::reduction::CoreParts::new(a, x, y, tol)?;
    let left = &term.ax * &term.m_plus;
    let left_ref = a * &pinv_with_tol(&term.ya, Some(term.ya_tol));
    let right = &term.m_plus * &term.ya;
    let right_ref = &pinv_with_tol(&term.ax, Some(term.ax_tol)) * a;
    let rank_a = numerical_rank(a, tol.rank);
    Ok(CancellationReport {
        left_residual: relative(left.distance(&left_ref), left_ref.frobenius_norm()),
        right_residual: relative(right.distance(&right_ref), right_ref.frobenius_norm()),
        left_hypothesis: numerical_rank(&term.ax, Some(term.ax_tol)) == rank_a
            && numerical_rank(y, tol.rank) == a.rows(),
        right_hypothesis: numerical_rank(&term.ya, Some(term.ya_tol)) == rank_a
            && numerical_rank(x, tol.rank) == a.cols(),
    })
}

/// Relative change of the reduction term `A X (Y^T A X)^+ Y^T A` when a
/// matrix `G` is inserted, in the order: `X -> X G`, `X -> G X`,
/// `Y^T -> Y^T G`, `Y^T -> G^T Y^T`.
pub fn insertion_deviations(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    g: &Matrix,
    tol: &Tolerances,
) -> Result<[f64; 4]> {
    let base = reduction_term(a, x, y, tol)?;
    let scale = base.frobenius_norm();
    let variants = [
        reduction_term(a, &(x * g), y, tol)?,
        reduction_term(a, &(g * x), y, tol)?,
        reduction_term(a, x, &(&g.transpose() * y), tol)?,
        reduction_term(a, x, &(y * g), tol)?,
    ];
    Ok(variants.map(|t| relative(t.distance(&base), scale)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn idx(v: &[usize]) -> IndexSet {
        IndexSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn index_set_validation() {
        assert_eq!(IndexSet::new(vec![]), Err(Error::EmptyIndexSet));
        assert_eq!(IndexSet::new(vec![0, 2, 2]), Err(Error::IndexNotIncreasing { position: 2 }));
        assert_eq!(idx(&[1, 3]).complement(5), vec![0, 2, 4]);
    }

    #[test]
    fn remove_leading_triplet_of_diagonal() {
        let a = Matrix::from_diagonal(3, 3, &[3.0, 2.0, 1.0]);
        let b = svd_indexed_reduce(&a, &idx(&[0]), &tol()).unwrap();
        assert!(b.distance(&Matrix::from_diagonal(3, 3, &[0.0, 2.0, 1.0])) < 1e-15);
        let all = svd_indexed_reduce(&a, &idx(&[0, 1, 2]), &tol()).unwrap();
        assert!(all.max_abs() < 1e-15);
    }

    #[test]
    fn index_past_rank_and_repeated_values() {
        let a = Matrix::from_diagonal(3, 3, &[3.0, 2.0, 0.0]);
        assert_eq!(
            svd_indexed_reduce(&a, &idx(&[2]), &tol()),
            Err(Error::IndexOutOfRange { index: 2, bound: 2 })
        );
        let rep = Matrix::from_diagonal(3, 3, &[2.0, 2.0, 1.0]);
        assert!(matches!(
            svd_indexed_reduce(&rep, &idx(&[0]), &tol()),
            Err(Error::DegenerateSplit { .. })
        ));
        assert!(svd_indexed_reduce(&rep, &idx(&[0, 1]), &tol()).is_ok());
    }

    #[test]
    fn best_rank_k_on_diagonal() {
        let a = Matrix::from_diagonal(3, 3, &[3.0, 2.0, 1.0]);
        let r = best_rank_k(&a, 2, &tol()).unwrap();
        assert!((r.frob_error - 1.0).abs() < 1e-14);
        assert!((r.optimal_frob_error - 1.0).abs() < 1e-15);
        let zero = best_rank_k(&a, 0, &tol()).unwrap();
        assert!(zero.approx.max_abs() < 1e-15);
        assert!((zero.frob_error - a.frobenius_norm()).abs() < 1e-14);
        let full = best_rank_k(&a, 3, &tol()).unwrap();
        assert_eq!(full.frob_error, 0.0);
        assert!(best_rank_k(&a, 4, &tol()).is_err());
    }

    #[test]
    fn cur_of_rank_one() {
        let a = Matrix::from_fn(3, 4, |i, j| (i + 1) as f64 * (j as f64 - 1.5));
        let r = cur_decompose(&a, &idx(&[2]), &idx(&[0]), &tol()).unwrap();
        assert!(r.residual < 1e-14);
        assert_eq!((r.rank_u, r.rank_a), (1, 1));
        assert!(cur_decompose(&a, &idx(&[3]), &idx(&[0]), &tol()).is_err());
    }

    #[test]
    fn cancellation_with_identity_x() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 5.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0, 1.0], [0.0, 2.0]]).unwrap();
        let r = cancellation_check(&a, &Matrix::identity(2), &y, &tol()).unwrap();
        assert!(r.left_hypothesis && r.right_hypothesis);
        assert!(r.left_residual < 1e-14 && r.right_residual < 1e-14);
    }

    #[test]
    fn nystrom_is_deterministic() {
        let a = Matrix::from_fn(5, 4, |i, j| (i * j) as f64 + 1.0);
        let r1 = nystrom_sketch(&a, 2, 1, 9, &tol()).unwrap();
        let r2 = nystrom_sketch(&a, 2, 1, 9, &tol()).unwrap();
        assert_eq!(r1.approx, r2.approx);
        assert!(r1.exact_rank());
        assert!(r1.reconstruction_residual < 1e-12);
    }
}

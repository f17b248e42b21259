//! Dense matrix substrate: SVD, Moore-Penrose pseudoinverse, numerical rank
//! and subspace predicates.

pub mod matrix;
pub mod subspace;
pub mod svd;

use crate::error::{Error, Result};
use matrix::Matrix;
use svd::{svd, SvdFactors};

/// SVD for operations documented as total.
///
/// # Panics
///
/// Panics if Jacobi iteration hits the sweep cap, which does not happen for
/// finite input of moderate size.
pub(crate) fn factorize(a: &Matrix) -> SvdFactors {
    match svd(a) {
        Ok(f) => f,
        Err(e) => panic!("{e}"),
    }
}

/// Moore-Penrose pseudoinverse with the default truncation
/// `sigma_i <= max(m, n) * eps * sigma_1`.
///
/// `pinv` of an `m x n` zero matrix is the `n x m` zero matrix.
pub fn pinv(a: &Matrix) -> Matrix {
    pinv_with_tol(a, None)
}

/// Pseudoinverse treating singular values `<= tol` as zero.
pub fn pinv_with_tol(a: &Matrix, tol: Option<f64>) -> Matrix {
    pinv_from_svd(&factorize(a), tol)
}

pub fn pinv_from_svd(f: &SvdFactors, tol: Option<f64>) -> Matrix {
    let r = f.rank(tol);
    let (m, n) = (f.rows(), f.cols());
    Matrix::from_fn(n, m, |i, j| {
        (0..r).map(|k| f.v.get(i, k) * f.u.get(j, k) / f.sigma[k]).sum()
    })
}

/// Count of singular values strictly above `tol`
/// (default `max(m, n) * eps * sigma_1`).
pub fn numerical_rank(a: &Matrix, tol: Option<f64>) -> usize {
    factorize(a).rank(tol)
}

/// Largest singular value.
pub fn spectral_norm(a: &Matrix) -> f64 {
    factorize(a).sigma_max()
}

/// Rank threshold for a computed product `p` whose factors have norm product
/// `operand_scale`, with `inner` the largest dimension summed over.
///
/// Rounding in a product scales with its factors, so a product that is small
/// through cancellation needs a threshold above its own largest singular
/// value. `tol` overrides when given.
pub fn product_rank_tol(p: &Matrix, operand_scale: f64, inner: usize, tol: Option<f64>) -> f64 {
    tol.unwrap_or_else(|| {
        let dim = p.rows().max(p.cols()).max(inner);
        svd::default_rank_tol(dim, dim, spectral_norm(p).max(operand_scale))
    })
}

/// Frobenius norms of the four Penrose-condition residuals for a candidate
/// pseudoinverse `X` of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenroseResiduals {
    /// `||A X A - A||`
    pub axa: f64,
    /// `||X A X - X||`
    pub xax: f64,
    /// `||(A X)^T - A X||`
    pub ax_symmetric: f64,
    /// `||(X A)^T - X A||`
    pub xa_symmetric: f64,
}

impl PenroseResiduals {
    pub fn max(&self) -> f64 {
        self.axa
            .max(self.xax)
            .max(self.ax_symmetric)
            .max(self.xa_symmetric)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.axa, self.xax, self.ax_symmetric, self.xa_symmetric]
    }
}

/// Evaluates the four Penrose conditions for `aplus` as a pseudoinverse of `a`.
///
/// The fourth condition is the standard `(A^+ A)^T = A^+ A`.
pub fn penrose_check(a: &Matrix, aplus: &Matrix) -> Result<PenroseResiduals> {
    if aplus.shape() != (a.cols(), a.rows()) {
        return Err(Error::ShapeMismatch {
            op: "penrose_check",
            left: a.shape(),
            right: aplus.shape(),
        });
    }
    let ax = a * aplus;
    let xa = aplus * a;
    Ok(PenroseResiduals {
        axa: (&ax * a).distance(a),
        xax: (&xa * aplus).distance(aplus),
        ax_symmetric: ax.asymmetry(),
        xa_symmetric: xa.asymmetry(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pinv_of_zero_is_transposed_zero() {
        assert_eq!(pinv(&Matrix::zeros(3, 2)), Matrix::zeros(2, 3));
        assert_eq!(pinv(&Matrix::zeros(0, 4)), Matrix::zeros(4, 0));
    }

    #[test]
    fn pinv_of_column_vector() {
        let v = Matrix::column(&[3.0, 4.0]).unwrap();
        let p = pinv(&v);
        let expected = Matrix::from_rows(&[[3.0 / 25.0, 4.0 / 25.0]]).unwrap();
        assert!(p.distance(&expected) < 1e-16);
    }

    #[test]
    fn penrose_identity_pair() {
        let i = Matrix::identity(3);
        let r = penrose_check(&i, &i).unwrap();
        assert_eq!(r.as_array(), [0.0; 4]);
        assert!(penrose_check(&i, &Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn rank_of_zero_and_example_y() {
        assert_eq!(numerical_rank(&Matrix::zeros(3, 3), None), 0);
        let y = Matrix::from_rows(&[[1.0, 4.0, 1.0], [2.0, 5.0, 1.0], [3.0, 6.0, 1.0]]).unwrap();
        assert_eq!(numerical_rank(&y, None), 2);
        assert_eq!(numerical_rank(&y, Some(1e3)), 0);
    }

    #[test]
    fn explicit_tolerance_truncates() {
        let a = Matrix::from_diagonal(2, 2, &[1.0, 1e-6]);
        assert_eq!(pinv_with_tol(&a, Some(1e-3)), Matrix::from_diagonal(2, 2, &[1.0, 0.0]));
        let p = pinv(&a);
        assert!((p.get(1, 1) - 1e6).abs() < 1e-4);
        assert_eq!(vec![p.get(0, 1), p.get(1, 0)], vec![0.0, 0.0]);
    }
}

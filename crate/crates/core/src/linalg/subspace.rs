//! Orthonormal bases of column spaces and null spaces, and tolerance-based
//! predicates on them.
//!
//! Two subspaces are compared through their orthogonal projectors, which makes
//! every predicate independent of the particular basis (signs, rotations).

use crate::error::{Error, Result};
use crate::linalg::factorize;
use crate::linalg::matrix::Matrix;
use crate::linalg::spectral_norm;

/// Orthonormal column basis of a subspace of `R^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    ambient_dim: usize,
    basis: Matrix,
}

impl SubspaceBasis {
    /// Wraps `basis`, which must have orthonormal columns.
    pub fn from_orthonormal(basis: Matrix) -> Self {
        Self {
            ambient_dim: basis.rows(),
            basis,
        }
    }

    pub fn trivial(ambient_dim: usize) -> Self {
        Self::from_orthonormal(Matrix::zeros(ambient_dim, 0))
    }

    pub fn whole(ambient_dim: usize) -> Self {
        Self::from_orthonormal(Matrix::identity(ambient_dim))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projector `B B^T` onto the subspace.
    pub fn projector(&self) -> Matrix {
        &self.basis * &self.basis.transpose()
    }

    /// `I - B B^T`.
    pub fn complement_projector(&self) -> Matrix {
        &Matrix::identity(self.ambient_dim) - &self.projector()
    }

    pub fn orthogonal_complement(&self) -> SubspaceBasis {
        let f = factorize(&self.basis);
        let k = self.dim();
        let idx: alloc::vec::Vec<usize> = (k..self.ambient_dim).collect();
        Self::from_orthonormal(f.u.select_columns(&idx))
    }

    fn check_ambient(&self, other: &SubspaceBasis) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::AmbientMismatch {
                left: self.ambient_dim,
                right: other.ambient_dim,
            });
        }
        Ok(())
    }
}

/// Orthonormal basis of `R(A)` from the left singular vectors above `tol`.
pub fn range_basis(a: &Matrix, tol: Option<f64>) -> SubspaceBasis {
    let f = factorize(a);
    let r = f.rank(tol);
    let idx: alloc::vec::Vec<usize> = (0..r).collect();
    SubspaceBasis::from_orthonormal(f.u.select_columns(&idx))
}

/// Orthonormal basis of `N(A)` from the right singular vectors at or below `tol`.
pub fn nullspace_basis(a: &Matrix, tol: Option<f64>) -> SubspaceBasis {
    let f = factorize(a);
    let r = f.rank(tol);
    let idx: alloc::vec::Vec<usize> = (r..a.cols()).collect();
    SubspaceBasis::from_orthonormal(f.v.select_columns(&idx))
}

/// `||P_1 - P_2||_2` for the orthogonal projectors onto the two subspaces.
pub fn subspace_distance(s1: &SubspaceBasis, s2: &SubspaceBasis) -> Result<f64> {
    s1.check_ambient(s2)?;
    if s1.dim() != s2.dim() {
        return Ok(1.0);
    }
    Ok(spectral_norm(&(&s1.projector() - &s2.projector())))
}

pub fn subspaces_equal(s1: &SubspaceBasis, s2: &SubspaceBasis, tol_sub: f64) -> Result<bool> {
    Ok(subspace_distance(s1, s2)? <= tol_sub)
}

/// `||(I - B_o B_o^T) B_i||_2`, zero exactly when `inner` lies in `outer`.
pub fn containment_defect(outer: &SubspaceBasis, inner: &SubspaceBasis) -> Result<f64> {
    outer.check_ambient(inner)?;
    if inner.dim() == 0 {
        return Ok(0.0);
    }
    let residual = &outer.complement_projector() * inner.basis();
    Ok(spectral_norm(&residual))
}

pub fn subspace_contains(outer: &SubspaceBasis, inner: &SubspaceBasis, tol_sub: f64) -> Result<bool> {
    Ok(containment_defect(outer, inner)? <= tol_sub)
}

/// `S_1 ∩ S_2` as the null space of `[I - P_1; I - P_2]`, thresholded at `tol_sub`.
pub fn intersection(s1: &SubspaceBasis, s2: &SubspaceBasis, tol_sub: f64) -> Result<SubspaceBasis> {
    s1.check_ambient(s2)?;
    let stacked = s1.complement_projector().vstack(&s2.complement_projector())?;
    Ok(nullspace_basis(&stacked, Some(tol_sub)))
}

/// `S_1 + S_2` as the range of `[B_1 B_2]`, thresholded at `tol_sub`.
pub fn sum(s1: &SubspaceBasis, s2: &SubspaceBasis, tol_sub: f64) -> Result<SubspaceBasis> {
    s1.check_ambient(s2)?;
    let joined = s1.basis().hstack(s2.basis())?;
    Ok(range_basis(&joined, Some(tol_sub)))
}

/// Sine of the smallest principal angle between two subspaces (1 if either is trivial).
pub fn min_angle_sine(s1: &SubspaceBasis, s2: &SubspaceBasis) -> Result<f64> {
    s1.check_ambient(s2)?;
    if s1.dim() == 0 || s2.dim() == 0 {
        return Ok(1.0);
    }
    let cos = spectral_norm(&(&s1.basis().transpose() * s2.basis())).min(1.0);
    Ok(crate::float::sqrt((1.0 - cos) * (1.0 + cos)))
}

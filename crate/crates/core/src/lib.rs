//! Generalized Wedderburn rank reduction through the Moore-Penrose
//! pseudoinverse.
//!
//! For `A` (m x n), `X` (n x p) and `Y` (m x q) the reduction
//!
//! ```text
//! B = A - (A X) (Y^T A X)^+ (Y^T A)
//! ```
//!
//! has rank exactly `rank(A) - rank(Y^T A X)`, with no invertibility
//! assumption on the core matrix `Y^T A X`. The crate builds the reduction
//! together with the oblique projection calculus it rests on
//! ([`projector`]), the Wedderburn decomposition, meta-factorization and
//! related identities ([`reduction`]), and SVD-indexed, CUR and Nyström
//! factorizations ([`lowrank`]).
//!
//! Everything is dense, real and double precision. The crate is `no_std`
//! and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
mod float;
pub mod linalg;
pub mod lowrank;
pub mod projector;
pub mod reduction;
pub mod sketch;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::matrix::Matrix;
pub use linalg::subspace::{
    nullspace_basis, range_basis, subspace_contains, subspaces_equal, SubspaceBasis,
};
pub use linalg::svd::{svd, SvdFactors};
pub use linalg::{numerical_rank, penrose_check, pinv, PenroseResiduals};
pub use projector::Projector;
pub use reduction::{generalized_reduce, DecompositionReport, ReductionReport};
pub use tol::Tolerances;

use core::fmt;

/// Errors raised by the linear-algebra and reduction routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand shapes do not conform for the named operation.
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    /// Backing data length differs from `rows * cols`.
    DataLength { expected: usize, got: usize },
    /// A NaN or infinite entry was passed to a constructor.
    NonFinite { row: usize, col: usize },
    /// Jacobi sweeps hit the cap; carries the largest relative off-diagonal Gram entry.
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    /// Matrix is not square.
    NotSquare { rows: usize, cols: usize },
    NotIdempotent { residual: f64, tolerance: f64 },
    NotOrthogonalProjector { residual: f64 },
    /// Subspaces compared or combined live in different ambient spaces.
    AmbientMismatch { left: usize, right: usize },
    NotComplementary { dims: (usize, usize), ambient: usize, sin_angle: f64 },
    NonCommuting { residual: f64 },
    /// `y^T A x` vanishes; the generalized reduction handles this case.
    DegenerateOmega { omega: f64 },
    /// The core matrix `Y^T A X` does not carry the full rank of `A`.
    RankDeficient { rank_core: usize, rank_a: usize },
    EmptyIndexSet,
    IndexNotIncreasing { position: usize },
    IndexOutOfRange { index: usize, bound: usize },
    /// Singular values on both sides of an index split are numerically equal.
    DegenerateSplit { inside: usize, outside: usize, gap: f64 },
    RangeMismatch { which: &'static str, distance: f64 },
    /// Input is outside the matrix class the operation is defined for.
    NotInClass(&'static str),
    /// `A = PAQ` fails for the supplied projections.
    NotMetaFactorization { residual: f64 },
    /// Projections in `A = PAQ` must both have rank `rank(A)`.
    ProjectorRankMismatch { rank_p: usize, rank_q: usize, rank_a: usize },
    /// Projections do not sum to the identity.
    NotComplementaryPair { residual: f64 },
    /// Two independent characterizations of the same fact disagreed.
    Disagreement { what: &'static str, left: f64, right: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, left, right } => write!(
                f,
                "{op}: shape mismatch {}x{} vs {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::DataLength { expected, got } => {
                write!(f, "data length mismatch: expected {expected}, got {got}")
            }
            Error::NonFinite { row, col } => write!(f, "non-finite entry at ({row}, {col})"),
            Error::NoConvergence { sweeps, off_diagonal } => write!(
                f,
                "Jacobi SVD did not converge after {sweeps} sweeps (off-diagonal residual {off_diagonal:e})"
            ),
            Error::NotSquare { rows, cols } => write!(f, "matrix must be square, got {rows}x{cols}"),
            Error::NotIdempotent { residual, tolerance } => write!(
                f,
                "matrix is not idempotent: ||P^2 - P||_F = {residual:e} > {tolerance:e}"
            ),
            Error::NotOrthogonalProjector { residual } => {
                write!(f, "projector is not orthogonal: ||P^T - P||_F = {residual:e}")
            }
            Error::AmbientMismatch { left, right } => {
                write!(f, "ambient dimension mismatch: {left} vs {right}")
            }
            Error::NotComplementary { dims, ambient, sin_angle } => write!(
                f,
                "subspaces of dimension {} and {} are not complementary in R^{ambient} (sin of smallest principal angle {sin_angle:e})",
                dims.0, dims.1
            ),
            Error::NonCommuting { residual } => {
                write!(f, "projections do not commute: ||PQ - QP||_F = {residual:e}")
            }
            Error::DegenerateOmega { omega } => write!(
                f,
                "y^T A x = {omega:e} is numerically zero; use the generalized reduction instead"
            ),
            Error::RankDeficient { rank_core, rank_a } => write!(
                f,
                "rank(Y^T A X) = {rank_core} is less than rank(A) = {rank_a}"
            ),
            Error::EmptyIndexSet => write!(f, "index set must not be empty"),
            Error::IndexNotIncreasing { position } => {
                write!(f, "index set is not strictly increasing at position {position}")
            }
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {index} out of range (must be < {bound})")
            }
            Error::DegenerateSplit { inside, outside, gap } => write!(
                f,
                "singular values {inside} (selected) and {outside} (not selected) are not separated (gap {gap:e})"
            ),
            Error::RangeMismatch { which, distance } => {
                write!(f, "range of {which} does not match the singular subspace (distance {distance:e})")
            }
            Error::NotInClass(class) => write!(f, "input is not {class}"),
            Error::NotMetaFactorization { residual } => {
                write!(f, "A != PAQ (residual {residual:e})")
            }
            Error::ProjectorRankMismatch { rank_p, rank_q, rank_a } => write!(
                f,
                "rank(P) = {rank_p} and rank(Q) = {rank_q} must both equal rank(A) = {rank_a}"
            ),
            Error::NotComplementaryPair { residual } => {
                write!(f, "projections do not sum to the identity (residual {residual:e})")
            }
            Error::Disagreement { what, left, right } => write!(
                f,
                "characterizations of {what} disagree ({left:e} vs {right:e}); tolerance is likely miscalibrated"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

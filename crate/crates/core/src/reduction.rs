//! Generalized Wedderburn rank reduction and the factorizations built on it.
//!
//! For `A` (m x n), `X` (n x p) and `Y` (m x q), with core matrix
//! `M = Y^T A X` of rank `k`,
//!
//! ```text
//! B = A - (A X) M^+ (Y^T A),    rank(B) = rank(A) - k.
//! ```
//!
//! `M` may be rectangular or singular. When `k = rank(A)` the subtracted
//! term reproduces `A` exactly (the Wedderburn decomposition), which is the
//! common root of the CUR, Nyström and meta-factorizations.

use alloc::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::subspace::{
    containment_defect, nullspace_basis, range_basis, subspace_distance, SubspaceBasis,
};
use crate::linalg::svd::{default_rank_tol, SvdFactors};
use crate::linalg::{factorize, pinv_from_svd, pinv_with_tol, product_rank_tol, spectral_norm};
use crate::projector::{idempotency_tol, Projector};
use crate::tol::{residual_scale, Tolerances};
use crate::Matrix;

/// The pieces `A X`, `Y^T A`, `M = Y^T A X` and `M^+` of a reduction.
///
/// Rank thresholds for the products are taken relative to the norms of
/// their factors: a product that is small through cancellation still
/// carries rounding noise of size `eps * ||Y|| ||A|| ||X||`.
#[derive(Debug, Clone)]
pub struct CoreParts {
    pub ax: Matrix,
    pub ya: Matrix,
    pub m: Matrix,
    /// `M^+` truncated at `m_tol`.
    pub m_plus: Matrix,
    /// `rank(M)` at `m_tol`.
    pub k: usize,
    pub m_tol: f64,
    pub ax_tol: f64,
    pub ya_tol: f64,
}

impl CoreParts {
    pub fn new(a: &Matrix, x: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<Self> {
        if x.rows() != a.cols() {
            return Err(Error::ShapeMismatch {
                op: "reduction (A X)",
                left: a.shape(),
                right: x.shape(),
            });
        }
        if y.rows() != a.rows() {
            return Err(Error::ShapeMismatch {
                op: "reduction (Y^T A)",
                left: a.shape(),
                right: y.shape(),
            });
        }
        let ax = a * x;
        let ya = &y.transpose() * a;
        let m = &ya * x;
        let (na, nx, ny) = (spectral_norm(a), spectral_norm(x), spectral_norm(y));
        let inner = a.rows().max(a.cols());
        let ax_tol = product_rank_tol(&ax, na * nx, inner, tol.rank);
        let ya_tol = product_rank_tol(&ya, ny * na, inner, tol.rank);
        let m_tol = product_rank_tol(&m, ny * na * nx, inner, tol.rank);
        let f = factorize(&m);
        let k = f.rank(Some(m_tol));
        let m_plus = pinv_from_svd(&f, Some(m_tol));
        Ok(Self {
            ax,
            ya,
            m,
            m_plus,
            k,
            m_tol,
            ax_tol,
            ya_tol,
        })
    }

    /// `(A X) M^+ (Y^T A)`, the part removed from `A`.
    pub fn removed_term(&self) -> Matrix {
        &(&self.ax * &self.m_plus) * &self.ya
    }
}

/// `(A X) (Y^T A X)^+ (Y^T A)`.
pub fn reduction_term(a: &Matrix, x: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    Ok(CoreParts::new(a, x, y, tol)?.removed_term())
}

/// The reduction `B = A - (A X)(Y^T A X)^+ (Y^T A)` alone.
pub fn reduce(a: &Matrix, x: &Matrix, y: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    Ok(a - &reduction_term(a, x, y, tol)?)
}

/// Classic rank-one Wedderburn step `A - (y^T A x)^{-1} A x y^T A`.
///
/// Fails with [`Error::DegenerateOmega`] when `|y^T A x| <= tol * ||A|| ||x|| ||y||`;
/// [`generalized_reduce`] covers that case.
pub fn classic_reduce_vector(a: &Matrix, x: &[f64], y: &[f64], tol: &Tolerances) -> Result<Matrix> {
    let xm = Matrix::column(x)?;
    let ym = Matrix::column(y)?;
    let parts = CoreParts::new(a, &xm, &ym, tol)?;
    let omega = parts.m.get(0, 0);
    let xn = xm.frobenius_norm();
    let yn = ym.frobenius_norm();
    if omega.abs() <= tol.residual * a.frobenius_norm() * xn * yn {
        return Err(Error::DegenerateOmega { omega });
    }
    Ok(a - &(&parts.ax * &parts.ya).scale(1.0 / omega))
}

/// Output of [`generalized_reduce`].
#[derive(Debug, Clone)]
pub struct ReductionReport {
    /// The reduction `B`.
    pub b: Matrix,
    /// `P = (A X) M^+ Y^T` (m x m), with `B = (I - P) A`.
    pub p: Projector,
    /// `Q = X M^+ Y^T A` (n x n), with `B = A (I - Q)`.
    pub q: Projector,
    pub rank_a: usize,
    /// `rank(Y^T A X)`.
    pub k: usize,
    pub rank_b: usize,
    /// Singular-value threshold used for `rank_b`.
    pub rank_b_tol: f64,
    /// Worst-case rounding level of `B`, see [`reduction_noise`].
    pub b_noise: f64,
    /// Named residual norms:
    /// `left_projection` = `||B - (I-P)A||_F`,
    /// `right_projection` = `||B - A(I-Q)||_F`,
    /// `nullspace_split` = how far `N(A)` and `R(X M^+)` stick out of `N(B)`
    /// (largest containment defect),
    /// `nullspace_overlap` = `dim N(A) + dim R(X M^+) - dim N(B)`.
    pub residuals: BTreeMap<&'static str, f64>,
}

impl ReductionReport {
    /// `rank(B) - (rank(A) - k)`; zero when the rank identity holds.
    pub fn rank_deviation(&self) -> i64 {
        self.rank_b as i64 - (self.rank_a as i64 - self.k as i64)
    }
}

/// Worst-case rounding level of a computed reduction, over all directions.
///
/// `B` is formed by cancellation, so its rounding noise scales with the
/// larger of `||A||_2` and `||A X||_2 ||M^+||_2 ||Y^T A||_2`, not with
/// `||B||_2` (which is itself noise when `k = rank(A)`). On top of that, the
/// rounding of `M` itself, about `eps ||Y|| ||A|| ||X||`, can reach the removed
/// term through `(A X M^+) dM (M^+ Y^T A)`; this matters when `M` is small by
/// cancellation. The bound is reached only when `dM` lines up with the
/// smallest singular directions of `M`, so it is usually pessimistic.
pub fn reduction_noise(a: &Matrix, x: &Matrix, y: &Matrix, parts: &CoreParts) -> f64 {
    let norm_a = spectral_norm(a);
    let term = removed_term_scale(parts);
    let left = spectral_norm(&(&parts.ax * &parts.m_plus));
    let right = spectral_norm(&(&parts.m_plus * &parts.ya));
    let through_m = left * spectral_norm(y) * norm_a * spectral_norm(x) * right;
    default_rank_tol(reduction_dim(a, x, y), 0, norm_a.max(term).max(through_m))
}

/// Rounding level of `B` when `M` is not small by cancellation.
fn reduction_noise_floor(a: &Matrix, x: &Matrix, y: &Matrix, parts: &CoreParts) -> f64 {
    let scale = spectral_norm(a).max(removed_term_scale(parts));
    default_rank_tol(reduction_dim(a, x, y), 0, scale)
}

fn removed_term_scale(parts: &CoreParts) -> f64 {
    spectral_norm(&parts.ax) * spectral_norm(&parts.m_plus) * spectral_norm(&parts.ya)
}

// the removed term accumulates sums over all four dimensions
fn reduction_dim(a: &Matrix, x: &Matrix, y: &Matrix) -> usize {
    a.rows() + a.cols() + x.cols() + y.cols()
}

/// Rank of a computed reduction from its SVD `fb`, with the threshold used.
///
/// The rounding of `M` reaches `B` as `(A X M^+) dM (M^+ Y^T A)`, but only the
/// part of that along the trailing singular directions of `B` can pose as
/// extra rank. The rank is the smallest `r` for which `sigma_{r+1}` is within
/// the rounding floor plus that projected reach.
fn reduction_rank(fb: &SvdFactors, a: &Matrix, x: &Matrix, y: &Matrix, parts: &CoreParts) -> (usize, f64) {
    let dim = reduction_dim(a, x, y);
    let floor = reduction_noise_floor(a, x, y, parts);
    let dm = spectral_norm(y) * spectral_norm(a) * spectral_norm(x);
    let ul = &fb.u.transpose() * &(&parts.ax * &parts.m_plus);
    let rv = &(&parts.m_plus * &parts.ya) * &fb.v;
    let (m, n) = (ul.rows(), rv.cols());
    for (r, &s) in fb.sigma.iter().enumerate() {
        let tail_rows: alloc::vec::Vec<usize> = (r..m).collect();
        let tail_cols: alloc::vec::Vec<usize> = (r..n).collect();
        let reach = spectral_norm(&ul.select_rows(&tail_rows)) * dm * spectral_norm(&rv.select_columns(&tail_cols));
        let t = floor + default_rank_tol(dim, 0, reach);
        if s <= t {
            return (r, t);
        }
    }
    (fb.sigma.len(), floor)
}

/// Generalized Wedderburn reduction with its projection factors and diagnostics.
///
/// `k` is always recomputed as the numerical rank of `Y^T A X`.
pub fn generalized_reduce(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<ReductionReport> {
    let parts = CoreParts::new(a, x, y, tol)?;
    let b = a - &parts.removed_term();

    let rank_a = factorize(a).rank(tol.rank);
    let k = parts.k;
    let b_noise = reduction_noise(a, x, y, &parts);
    let fb = factorize(&b);
    let (rank_b, rank_b_tol) = match tol.rank {
        Some(t) => (fb.rank(Some(t)), t),
        None => reduction_rank(&fb, a, x, y, &parts),
    };

    let (p, q) = projectors_from_parts(a, x, y, &parts, tol)?;

    let mut residuals = BTreeMap::new();
    let id_m = Matrix::identity(a.rows());
    let id_n = Matrix::identity(a.cols());
    residuals.insert(
        "left_projection",
        b.distance(&(&(&id_m - p.matrix()) * a)),
    );
    residuals.insert(
        "right_projection",
        b.distance(&(a * &(&id_n - q.matrix()))),
    );

    // N(B) = N(A) ⊕ R(X M^+)
    let null_b = nullspace_basis(&b, Some(rank_b_tol));
    let null_a = nullspace_basis(a, tol.rank);
    // rank(X M^+) = k, since R(M^+) = R(M^T) lies in R(X^T)
    let kept: alloc::vec::Vec<usize> = (0..k).collect();
    let added = SubspaceBasis::from_orthonormal(factorize(&(x * &parts.m_plus)).u_columns(&kept));
    // both pieces lie in N(B) and their dimensions add up to dim N(B); the
    // angle between them can be tiny, so their sum is not formed directly
    let split = containment_defect(&null_b, &null_a)?.max(containment_defect(&null_b, &added)?);
    residuals.insert("nullspace_split", split);
    residuals.insert(
        "nullspace_overlap",
        (null_a.dim() + added.dim()) as f64 - null_b.dim() as f64,
    );

    Ok(ReductionReport {
        b,
        p,
        q,
        rank_a,
        k,
        rank_b,
        rank_b_tol,
        b_noise,
        residuals,
    })
}

fn projectors_from_parts(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    parts: &CoreParts,
    tol: &Tolerances,
) -> Result<(Projector, Projector)> {
    // both share the M^+ that fixed k, so their ranks agree with it
    let left = &parts.ax * &parts.m_plus;
    let right = &parts.m_plus * &parts.ya;
    let xm = x * &parts.m_plus;
    let my = &parts.m_plus * &y.transpose();
    // rounding in M (about eps ||Y|| ||A|| ||X||) enters each projector
    // between its two halves; an ill-conditioned M amplifies it
    let (nx, ny) = (spectral_norm(x), spectral_norm(y));
    let m_noise = ny * spectral_norm(a) * nx;
    let dim = (x.rows() + y.rows() + x.cols() + y.cols()) as f64;
    let amplified = |l: &Matrix, r: &Matrix, plain: f64| {
        let amp = (spectral_norm(l) * m_noise * spectral_norm(r)).max(plain);
        Tolerances {
            residual: tol.residual.max(dim * f64::EPSILON * amp),
            ..*tol
        }
    };
    let p_tol = amplified(&left, &my, spectral_norm(&left) * ny);
    let q_tol = amplified(&xm, &right, spectral_norm(&xm) * spectral_norm(&parts.ya));
    let p = Projector::new(&left * &y.transpose(), &p_tol)?;
    let q = Projector::new(&xm * &parts.ya, &q_tol)?;
    Ok((p, q))
}

/// `P = (A X) M^+ Y^T` onto `R(A X X^T A^T Y)` along `N(X^T A^T Y Y^T)`, and
/// `Q = X M^+ Y^T A` onto `R(X X^T A^T Y)` along `N(X^T A^T Y Y^T A)`.
pub fn reduction_projectors(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<(Projector, Projector)> {
    let parts = CoreParts::new(a, x, y, tol)?;
    projectors_from_parts(a, x, y, &parts, tol)
}

/// Whether the reduction of the projection `A` is again a projection, and,
/// when `A` is orthogonal and `X = Y`, an orthogonal one.
pub fn reduction_preserves_projection(
    a: &Projector,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<bool> {
    let b = reduce(a.matrix(), x, y, tol)?;
    let bound = idempotency_tol(&b, tol.residual);
    let idempotent = (&b * &b).distance(&b) <= bound;
    if a.is_orthogonal() && x == y {
        Ok(idempotent && b.asymmetry() <= bound)
    } else {
        Ok(idempotent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixClass {
    SymmetricPsd,
    SkewSymmetric,
}

/// Reduction of a symmetric PSD or skew-symmetric matrix with `X = Y`.
#[derive(Debug, Clone)]
pub struct InheritanceReport {
    pub class: MatrixClass,
    pub b: Matrix,
    /// Smallest eigenvalue of `B` (PSD case).
    pub min_eigenvalue: Option<f64>,
    /// `||B - A^{1/2} (I - C C^+) A^{1/2}||_F` with `C = A^{1/2} X` (PSD case).
    pub sqrt_route_residual: Option<f64>,
    /// `||B^T + B||_F` (skew case).
    pub skew_residual: Option<f64>,
    /// Whether `B` is in the same class as `A`, to `tol.residual * max(1, ||A||_F)`.
    pub preserved: bool,
}

/// Smallest eigenvalue of a symmetric matrix from singular values only:
/// with `c = ||S||_2`, `S + cI` is PSD, so `lambda_min = sigma_min(S + cI) - c`.
pub fn symmetric_min_eigenvalue(s: &Matrix) -> f64 {
    let n = s.rows();
    if n == 0 {
        return 0.0;
    }
    let c = spectral_norm(s);
    let shifted = s + &Matrix::identity(n).scale(c);
    factorize(&shifted).sigma.last().copied().unwrap_or(0.0) - c
}

/// Symmetric square root `V Σ^{1/2} V^T` of a symmetric PSD matrix.
pub fn psd_sqrt(a: &Matrix) -> Matrix {
    let f = factorize(a);
    let n = a.rows();
    Matrix::from_fn(n, n, |i, j| {
        f.sigma
            .iter()
            .enumerate()
            .map(|(k, s)| f.v.get(i, k) * crate::float::sqrt(*s) * f.v.get(j, k))
            .sum()
    })
}

pub fn psd_skew_preservation(a: &Matrix, x: &Matrix, tol: &Tolerances) -> Result<InheritanceReport> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let bound = tol.residual * residual_scale(a);
    let symmetric = a.asymmetry() <= bound;
    let skew = (a + &a.transpose()).frobenius_norm() <= bound;
    let class = if symmetric && symmetric_min_eigenvalue(a) >= -bound {
        MatrixClass::SymmetricPsd
    } else if skew {
        MatrixClass::SkewSymmetric
    } else {
        return Err(Error::NotInClass("symmetric positive semidefinite or skew-symmetric"));
    };

    let b = reduce(a, x, x, tol)?;
    match class {
        MatrixClass::SymmetricPsd => {
            let root = psd_sqrt(a);
            let c = &root * x;
            let proj = &Matrix::identity(a.rows()) - &(&c * &pinv_with_tol(&c, tol.rank));
            let via_sqrt = &(&root * &proj) * &root;
            let min_eig = symmetric_min_eigenvalue(&b);
            Ok(InheritanceReport {
                class,
                preserved: b.asymmetry() <= bound && min_eig >= -bound,
                sqrt_route_residual: Some(b.distance(&via_sqrt)),
                min_eigenvalue: Some(min_eig),
                skew_residual: None,
                b,
            })
        }
        MatrixClass::SkewSymmetric => {
            let skew_residual = (&b + &b.transpose()).frobenius_norm();
            Ok(InheritanceReport {
                class,
                preserved: skew_residual <= bound,
                sqrt_route_residual: None,
                min_eigenvalue: None,
                skew_residual: Some(skew_residual),
                b,
            })
        }
    }
}

/// Residuals of the {2}-inverse identities for a reduction `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmeliShaddenReport {
    /// `||B A^+ B - B||_F`.
    pub two_inverse_residual: f64,
    /// `||A^+ B A^+ - R||_F` where `R` reduces `A^+` by `A X` and `A^T Y`.
    pub pinv_reduction_residual: f64,
    /// `||B A^+ B - A^+||_F` when the shapes allow the comparison (square `A`).
    /// Measured only: this form does not hold in general.
    pub statement_residual: Option<f64>,
    /// `max(1, ||A||_F)`.
    pub scale: f64,
    /// `max(1, ||A^+||_F)`.
    pub pinv_scale: f64,
}

pub fn ameli_shadden_identities(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<AmeliShaddenReport> {
    let parts = CoreParts::new(a, x, y, tol)?;
    let b = a - &parts.removed_term();
    let a_plus = pinv_with_tol(a, tol.rank);
    let bab = &(&b * &a_plus) * &b;
    let two_inverse_residual = bab.distance(&b);

    let sandwiched = &(&a_plus * &b) * &a_plus;
    let reduced_pinv = reduce(&a_plus, &parts.ax, &parts.ya.transpose(), tol)?;
    let pinv_reduction_residual = sandwiched.distance(&reduced_pinv);

    let statement_residual = (bab.shape() == a_plus.shape()).then(|| bab.distance(&a_plus));
    Ok(AmeliShaddenReport {
        two_inverse_residual,
        pinv_reduction_residual,
        statement_residual,
        scale: residual_scale(a),
        pinv_scale: residual_scale(&a_plus),
    })
}

/// Whether reductions by `(X, Y)` and `(X', Y')` coincide to
/// `tol.residual * max(1, ||A||_F)`. They always do when `R(X - X') ⊆ N(A)`
/// and `R(Y - Y') ⊆ N(A^T)`.
pub fn reduction_invariance(
    a: &Matrix,
    x: &Matrix,
    x_prime: &Matrix,
    y: &Matrix,
    y_prime: &Matrix,
    tol: &Tolerances,
) -> Result<bool> {
    let b = reduce(a, x, y, tol)?;
    let b_prime = reduce(a, x_prime, y_prime, tol)?;
    Ok(b.distance(&b_prime) <= tol.residual * residual_scale(a))
}

/// Wedderburn decomposition `A = (A X) M^+ (Y^T A)` and the pseudoinverse
/// factorization `A^+ = (Y^T A)^+ M (A X)^+`.
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub ax: Matrix,
    /// `M = Y^T A X`.
    pub m: Matrix,
    pub ya: Matrix,
    /// `(A X) M^+ (Y^T A)`.
    pub approx: Matrix,
    pub rank_a: usize,
    pub rank_m: usize,
    /// `||A - (A X) M^+ (Y^T A)||_F`.
    pub reconstruction_residual: f64,
    /// `||A^+ - (Y^T A)^+ M (A X)^+||_F`.
    pub pinv_residual: f64,
}

impl DecompositionReport {
    pub fn exact_rank(&self) -> bool {
        self.rank_m == self.rank_a
    }
}

/// Builds the decomposition report without requiring `rank(M) = rank(A)`.
///
/// When the rank condition fails, `approx` is the part of `A` captured by the
/// sketch and the residuals measure what is lost.
pub fn wedderburn_factorize(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    let parts = CoreParts::new(a, x, y, tol)?;
    let approx = parts.removed_term();
    let rank_a = factorize(a).rank(tol.rank);
    let rank_m = parts.k;
    let a_plus = pinv_with_tol(a, tol.rank);
    let factored = &(&pinv_with_tol(&parts.ya, Some(parts.ya_tol)) * &parts.m)
        * &pinv_with_tol(&parts.ax, Some(parts.ax_tol));
    Ok(DecompositionReport {
        reconstruction_residual: a.distance(&approx),
        pinv_residual: a_plus.distance(&factored),
        ax: parts.ax,
        m: parts.m,
        ya: parts.ya,
        approx,
        rank_a,
        rank_m,
    })
}

/// Wedderburn decomposition of `A` (m x n); requires `rank(Y^T A X) = rank(A)`.
///
/// With `X = A^T`, `Y = A` this is `A = A A^T (A^T A A^T)^+ A^T A`.
pub fn wedderburn_decompose(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    let report = wedderburn_factorize(a, x, y, tol)?;
    if !report.exact_rank() {
        return Err(Error::RankDeficient {
            rank_core: report.rank_m,
            rank_a: report.rank_a,
        });
    }
    Ok(report)
}

/// `A = P A Q` with projections `P`, `Q` built from `X`, `Y`.
#[derive(Debug, Clone)]
pub struct MetaFactorization {
    /// `(A X) M^+ Y^T`, with `R(P) = R(A)`.
    pub p: Projector,
    /// `X M^+ Y^T A`, with `N(Q) = N(A)`.
    pub q: Projector,
    /// Largest of `||PAQ - A||`, `||PA - A||`, `||AQ - A||`.
    pub residual: f64,
    /// `R(Q) = R(X)`; holds exactly when `rank(X) = rank(A)`.
    pub range_q_is_range_x: bool,
    /// `N(P) = N(Y^T)`; holds exactly when `rank(Y) = rank(A)`.
    pub null_p_is_null_yt: bool,
}

pub fn meta_factorize(
    a: &Matrix,
    x: &Matrix,
    y: &Matrix,
    tol: &Tolerances,
) -> Result<MetaFactorization> {
    let parts = CoreParts::new(a, x, y, tol)?;
    let rank_a = factorize(a).rank(tol.rank);
    let rank_m = parts.k;
    if rank_m != rank_a {
        return Err(Error::RankDeficient {
            rank_core: rank_m,
            rank_a,
        });
    }
    let (p, q) = projectors_from_parts(a, x, y, &parts, tol)?;
    let pa = p.matrix() * a;
    let aq = a * q.matrix();
    let paq = &pa * q.matrix();
    let residual = paq.distance(a).max(pa.distance(a)).max(aq.distance(a));
    let bound = tol.residual * residual_scale(a);
    if residual > bound {
        return Err(Error::Disagreement {
            what: "A = PAQ",
            left: residual,
            right: bound,
        });
    }

    let range_a = range_basis(a, tol.rank);
    let null_a = nullspace_basis(a, tol.rank);
    let d_range = subspace_distance(p.range(), &range_a)?;
    let d_null = subspace_distance(q.nullspace(), &null_a)?;
    if d_range > tol.subspace || d_null > tol.subspace {
        return Err(Error::Disagreement {
            what: "R(P) = R(A) and N(Q) = N(A)",
            left: d_range,
            right: d_null,
        });
    }
    let range_q_is_range_x =
        subspace_distance(q.range(), &range_basis(x, tol.rank))? <= tol.subspace;
    let null_p_is_null_yt =
        subspace_distance(p.nullspace(), &nullspace_basis(&y.transpose(), tol.rank))? <= tol.subspace;
    Ok(MetaFactorization {
        p,
        q,
        residual,
        range_q_is_range_x,
        null_p_is_null_yt,
    })
}

/// Recovers `X = Q`, `Y = P^T` from a meta-factorization `A = PAQ`; the
/// Wedderburn formulas applied to them reproduce `P` and `Q`.
///
/// Requires `rank(P) = rank(Q) = rank(A)`: `P = Q = I` satisfies `A = PAQ`
/// for every `A` but is not of this form unless `A` is invertible.
pub fn meta_factor_recover(
    a: &Matrix,
    p: &Projector,
    q: &Projector,
    tol: &Tolerances,
) -> Result<(Matrix, Matrix)> {
    if p.dim() != a.rows() || q.dim() != a.cols() {
        return Err(Error::ShapeMismatch {
            op: "meta_factor_recover",
            left: a.shape(),
            right: (p.dim(), q.dim()),
        });
    }
    let residual = (&(p.matrix() * a) * q.matrix()).distance(a);
    if residual > tol.residual * residual_scale(a) {
        return Err(Error::NotMetaFactorization { residual });
    }
    let rank_a = factorize(a).rank(tol.rank);
    if p.rank() != rank_a || q.rank() != rank_a {
        return Err(Error::ProjectorRankMismatch {
            rank_p: p.rank(),
            rank_q: q.rank(),
            rank_a,
        });
    }
    let x = q.matrix().clone();
    let y = p.matrix().transpose();
    let parts = CoreParts::new(a, &x, &y, tol)?;
    let p_back = &(&parts.ax * &parts.m_plus) * &y.transpose();
    let q_back = &(&x * &parts.m_plus) * &parts.ya;
    let dev = p_back.distance(p.matrix()).max(q_back.distance(q.matrix()));
    let bound = tol.residual * (1.0 + p.matrix().frobenius_norm() + q.matrix().frobenius_norm());
    if dev > bound {
        return Err(Error::Disagreement {
            what: "recovered P, Q",
            left: dev,
            right: bound,
        });
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_through_small_core_is_not_rank() {
        // M = 1.8e-4 with ||A X M^+|| ~ 1.5 and ||M^+ Y^T A|| ~ 2.4e3: B = 0
        // exactly, computed with a 9e-14 singular value
        let mut r = crate::sketch::rng(16396597007988210869);
        let a = crate::sketch::low_rank(&mut r, 3, 4, 1);
        let x = crate::sketch::low_rank(&mut r, 4, 1, 1);
        let y = crate::sketch::low_rank(&mut r, 3, 2, 1);
        let rep = generalized_reduce(&a, &x, &y, &tol()).unwrap();
        assert_eq!((rep.rank_a, rep.k, rep.rank_b), (1, 1, 0));
    }

    #[test]
    fn small_inherited_singular_value_is_rank() {
        // A has sigma_min = 4e-6 and B keeps a 7.8e-6 singular value, far
        // below the worst-case rounding bound of 4e-5
        use crate::sketch::{below, low_rank};
        let mut r = crate::sketch::rng(907365);
        let (m, n, p, q) = (1 + below(&mut r, 12), 1 + below(&mut r, 12), 1 + below(&mut r, 12), 1 + below(&mut r, 12));
        let mut rank = |max: usize| match below(&mut r, 4) {
            0 => max,
            1 => 0,
            _ => below(&mut r, max + 1),
        };
        let (ra, rx, ry) = (rank(m.min(n)), rank(n.min(p)), rank(m.min(q)));
        let a = low_rank(&mut r, m, n, ra);
        let x = low_rank(&mut r, n, p, rx);
        let y = low_rank(&mut r, m, q, ry);
        let rep = generalized_reduce(&a, &x, &y, &tol()).unwrap();
        assert!(rep.b_noise > 1e-5);
        assert_eq!((rep.rank_a, rep.k, rep.rank_b), (11, 3, 8));
    }

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn example_a() -> Matrix {
        m(&[&[1.0, 2.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 2.0]])
    }

    #[test]
    fn classic_identity_step() {
        let b = classic_reduce_vector(&Matrix::identity(2), &[1.0, 0.0], &[1.0, 0.0], &tol()).unwrap();
        assert_eq!(b, Matrix::from_diagonal(2, 2, &[0.0, 1.0]));
    }

    #[test]
    fn classic_drops_rank_by_one_and_matches_general() {
        let a = example_a();
        let e1 = [1.0, 0.0, 0.0];
        let b = classic_reduce_vector(&a, &e1, &e1, &tol()).unwrap();
        assert_eq!(crate::numerical_rank(&b, None), 2);
        let col = Matrix::column(&e1).unwrap();
        let g = generalized_reduce(&a, &col, &col, &tol()).unwrap();
        assert!(g.b.distance(&b) < 1e-14);
        assert_eq!((g.rank_a, g.k, g.rank_b), (3, 1, 2));
    }

    #[test]
    fn classic_degenerate_omega() {
        let a = Matrix::from_diagonal(2, 2, &[1.0, 0.0]);
        let err = classic_reduce_vector(&a, &[0.0, 1.0], &[1.0, 0.0], &tol()).unwrap_err();
        assert!(matches!(err, Error::DegenerateOmega { .. }));
    }

    #[test]
    fn full_and_empty_reductions() {
        let a = example_a();
        let full = generalized_reduce(&a, &Matrix::identity(3), &Matrix::identity(3), &tol()).unwrap();
        assert!(full.b.max_abs() < 1e-13);
        assert_eq!((full.k, full.rank_b), (3, 0));

        let zero = generalized_reduce(&a, &Matrix::zeros(3, 2), &Matrix::identity(3), &tol()).unwrap();
        assert_eq!(zero.b, a);
        assert_eq!(zero.k, 0);

        let empty = generalized_reduce(&a, &Matrix::zeros(3, 0), &Matrix::zeros(3, 0), &tol()).unwrap();
        assert_eq!(empty.b, a);
        assert_eq!((empty.k, empty.rank_b), (0, 3));

        let za = generalized_reduce(&Matrix::zeros(2, 3), &Matrix::identity(3), &Matrix::identity(2), &tol()).unwrap();
        assert_eq!((za.rank_a, za.k, za.rank_b), (0, 0, 0));
    }

    #[test]
    fn shape_errors() {
        let a = example_a();
        assert!(matches!(
            generalized_reduce(&a, &Matrix::zeros(2, 1), &Matrix::zeros(3, 1), &tol()),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            generalized_reduce(&a, &Matrix::zeros(3, 1), &Matrix::zeros(4, 1), &tol()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn decomposition_requires_full_core_rank() {
        let a = example_a();
        let err = wedderburn_decompose(&a, &Matrix::zeros(3, 2), &Matrix::identity(3), &tol()).unwrap_err();
        assert_eq!(err, Error::RankDeficient { rank_core: 0, rank_a: 3 });
    }

    #[test]
    fn transpose_choice_reconstructs() {
        let a = m(&[&[1.0, 2.0, 0.0, 1.0], &[2.0, 4.0, 0.0, 2.0], &[0.0, 1.0, 1.0, 0.0]]);
        let r = wedderburn_decompose(&a, &a.transpose(), &a, &tol()).unwrap();
        assert_eq!(r.rank_a, 2);
        assert!(r.reconstruction_residual < 1e-12);
        assert!(r.pinv_residual < 1e-12);
    }

    #[test]
    fn psd_identity_with_axis() {
        let e1 = Matrix::column(&[1.0, 0.0, 0.0]).unwrap();
        let r = psd_skew_preservation(&Matrix::identity(3), &e1, &tol()).unwrap();
        assert_eq!(r.class, MatrixClass::SymmetricPsd);
        assert_eq!(r.b, Matrix::from_diagonal(3, 3, &[0.0, 1.0, 1.0]));
        assert!(r.preserved);
        assert!(r.sqrt_route_residual.unwrap() < 1e-15);
    }

    #[test]
    fn skew_two_by_two() {
        // A = [[0,1],[-1,0]], x = e1: x^T A x = 0, so M^+ = 0 and B = A
        let a = m(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let e1 = Matrix::column(&[1.0, 0.0]).unwrap();
        let r = psd_skew_preservation(&a, &e1, &tol()).unwrap();
        assert_eq!(r.class, MatrixClass::SkewSymmetric);
        assert_eq!(r.b, a);
        assert!(r.preserved);
    }

    #[test]
    fn class_rejection() {
        let err = psd_skew_preservation(&example_a(), &Matrix::identity(3), &tol()).unwrap_err();
        assert!(matches!(err, Error::NotInClass(_)));
        let neg = Matrix::from_diagonal(2, 2, &[1.0, -1.0]);
        assert!(psd_skew_preservation(&neg, &Matrix::identity(2), &tol()).is_err());
    }

    #[test]
    fn min_eigenvalue_from_singular_values() {
        let s = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert!((symmetric_min_eigenvalue(&s) - 1.0).abs() < 1e-14);
        let s = Matrix::from_diagonal(3, 3, &[-3.0, 0.5, 2.0]);
        assert!((symmetric_min_eigenvalue(&s) + 3.0).abs() < 1e-14);
    }

    #[test]
    fn meta_recover_orthogonal_pair() {
        let a = m(&[&[1.0, 2.0, 1.0], &[2.0, 4.0, 2.0]]);
        let a_plus = crate::pinv(&a);
        let p = Projector::new(&a * &a_plus, &tol()).unwrap();
        let q = Projector::new(&a_plus * &a, &tol()).unwrap();
        let (x, y) = meta_factor_recover(&a, &p, &q, &tol()).unwrap();
        assert_eq!(x, *q.matrix());
        assert_eq!(y, p.matrix().transpose());

        let id2 = Projector::new(Matrix::identity(2), &tol()).unwrap();
        let id3 = Projector::new(Matrix::identity(3), &tol()).unwrap();
        assert_eq!(
            meta_factor_recover(&a, &id2, &id3, &tol()).unwrap_err(),
            Error::ProjectorRankMismatch { rank_p: 2, rank_q: 3, rank_a: 1 }
        );
        let other = Projector::new(Matrix::from_diagonal(2, 2, &[0.0, 1.0]), &tol()).unwrap();
        assert!(matches!(
            meta_factor_recover(&a, &other, &q, &tol()),
            Err(Error::NotMetaFactorization { .. })
        ));
    }

    #[test]
    fn invariance_trivial() {
        let a = example_a();
        let x = Matrix::column(&[1.0, 0.0, 1.0]).unwrap();
        assert!(reduction_invariance(&a, &x, &x, &x, &x, &tol()).unwrap());
    }
}

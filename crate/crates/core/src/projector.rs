//! Oblique projections of the form `P = A (B^T A)^+ B^T`.
//!
//! For any `A` (m x p) and `B` (m x q), `P` is idempotent of rank
//! `rank(B^T A)`, with `R(P) = R(A A^T B)` and `N(P) = N(A^T B B^T)`. This
//! module builds such projections, classifies them, and checks the identities
//! that connect them to the reverse order law `(AB)^+ = B^+ A^+` and to the
//! meet and join of commuting projections.
//!
//! Functions that have two independent characterizations of the same fact
//! evaluate both and return [`Error::Disagreement`] when they differ, rather
//! than silently choosing one.

use crate::error::{Error, Result};
use crate::linalg::subspace::{
    containment_defect, intersection, min_angle_sine, nullspace_basis, range_basis,
    subspace_distance, SubspaceBasis,
};
use crate::linalg::{pinv_with_tol, product_rank_tol, spectral_norm};
use crate::tol::Tolerances;
use crate::Matrix;

/// An idempotent matrix with bases of its range and null space.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    p: Matrix,
    range: SubspaceBasis,
    nullsp: SubspaceBasis,
    orthogonal: bool,
}

/// `||P^2 - P||_F` bound used for projectors: `factor * (1 + ||P||_F^2)`.
///
/// Oblique projectors can have large norm when range and null space are
/// nearly parallel, so the bound grows with `||P||_F^2`.
pub fn idempotency_tol(p: &Matrix, factor: f64) -> f64 {
    let n = p.frobenius_norm();
    factor * (1.0 + n * n)
}

impl Projector {
    /// Validates idempotency and computes range and null space from the SVD of `p`.
    ///
    /// Rank is decided by [`idempotent_rank_tol`].
    pub fn new(p: Matrix, tol: &Tolerances) -> Result<Self> {
        let rank_tol = idempotent_rank_tol(tol);
        let range = range_basis(&p, rank_tol);
        let nullsp = nullspace_basis(&p, rank_tol);
        Self::with_spaces(p, range, nullsp, tol)
    }

    fn with_spaces(
        p: Matrix,
        range: SubspaceBasis,
        nullsp: SubspaceBasis,
        tol: &Tolerances,
    ) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::NotSquare {
                rows: p.rows(),
                cols: p.cols(),
            });
        }
        let bound = idempotency_tol(&p, tol.residual);
        let residual = idempotency_residual(&p);
        if residual > bound {
            return Err(Error::NotIdempotent {
                residual,
                tolerance: bound,
            });
        }
        let orthogonal = p.asymmetry() <= bound;
        Ok(Self {
            p,
            range,
            nullsp,
            orthogonal,
        })
    }

    /// Orthogonal projector onto `s`.
    pub fn orthogonal_onto(s: &SubspaceBasis) -> Self {
        Self {
            p: s.projector(),
            range: s.clone(),
            nullsp: s.orthogonal_complement(),
            orthogonal: true,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn into_matrix(self) -> Matrix {
        self.p
    }

    pub fn range(&self) -> &SubspaceBasis {
        &self.range
    }

    pub fn nullspace(&self) -> &SubspaceBasis {
        &self.nullsp
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn dim(&self) -> usize {
        self.p.rows()
    }

    pub fn rank(&self) -> usize {
        self.range.dim()
    }

    /// `trace(P)` rounded to the nearest integer; equals `rank()` for a projection.
    pub fn trace_rank(&self) -> usize {
        crate::float::round(self.p.trace()).max(0.0) as usize
    }

    pub fn idempotency_residual(&self) -> f64 {
        idempotency_residual(&self.p)
    }

    /// The complementary projector `I - P`.
    pub fn complement(&self) -> Projector {
        Projector {
            p: &Matrix::identity(self.dim()) - &self.p,
            range: self.nullsp.clone(),
            nullsp: self.range.clone(),
            orthogonal: self.orthogonal,
        }
    }
}

fn idempotency_residual(p: &Matrix) -> f64 {
    (p * p).distance(p)
}

fn check_rows(op: &'static str, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

/// `A (B^T A)^+ B^T` without range and null space bookkeeping.
pub fn oblique_matrix(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    check_rows("oblique_projector", a, b)?;
    let bt = b.transpose();
    let core = &bt * a;
    let core_tol = product_rank_tol(&core, spectral_norm(a) * spectral_norm(b), a.rows(), tol.rank);
    Ok(&(a * &pinv_with_tol(&core, Some(core_tol))) * &bt)
}

/// `P = A (B^T A)^+ B^T` with `R(P) = R(A A^T B)` and `N(P) = N(A^T B B^T)`.
pub fn oblique_projector(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Projector> {
    let p = oblique_matrix(a, b, tol)?;
    let at = a.transpose();
    let bt = b.transpose();
    let (na, nb) = (spectral_norm(a), spectral_norm(b));
    let inner = a.rows().max(a.cols()).max(b.cols());
    let aab = &(a * &at) * b;
    let abb = &(&at * b) * &bt;
    let range = range_basis(&aab, Some(product_rank_tol(&aab, na * na * nb, inner, tol.rank)));
    let nullsp = nullspace_basis(&abb, Some(product_rank_tol(&abb, na * nb * nb, inner, tol.rank)));
    Projector::with_spaces(p, range, nullsp, tol)
}

/// Projection onto `v` along `w`, as `(P_{W^⊥} P_V)^+`.
pub fn projector_from_subspaces(
    v: &SubspaceBasis,
    w: &SubspaceBasis,
    tol: &Tolerances,
) -> Result<Projector> {
    let ambient = v.ambient_dim();
    if w.ambient_dim() != ambient {
        return Err(Error::AmbientMismatch {
            left: ambient,
            right: w.ambient_dim(),
        });
    }
    let sin_angle = min_angle_sine(v, w)?;
    if v.dim() + w.dim() != ambient || sin_angle <= tol.subspace {
        return Err(Error::NotComplementary {
            dims: (v.dim(), w.dim()),
            ambient,
            sin_angle,
        });
    }
    let prod = &w.complement_projector() * &v.projector();
    let p = pinv_with_tol(&prod, Some(product_rank_tol(&prod, 1.0, ambient, tol.rank)));
    Projector::with_spaces(p, v.clone(), w.clone(), tol)
}

/// Factors `C = I - (B B^T A)(B B^T A)^+` and `D = I - (A A^T B)(A A^T B)^+`
/// with `C (D^T C)^+ D^T = I - A (B^T A)^+ B^T`.
pub fn complement_factors(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<(Matrix, Matrix)> {
    check_rows("complement_factors", a, b)?;
    let m = a.rows();
    let id = Matrix::identity(m);
    let (na, nb) = (spectral_norm(a), spectral_norm(b));
    let inner = m.max(a.cols()).max(b.cols());
    let bba = &(b * &b.transpose()) * a;
    let aab = &(a * &a.transpose()) * b;
    let bba_tol = product_rank_tol(&bba, nb * nb * na, inner, tol.rank);
    let aab_tol = product_rank_tol(&aab, na * na * nb, inner, tol.rank);
    let c = &id - &(&bba * &pinv_with_tol(&bba, Some(bba_tol)));
    let d = &id - &(&aab * &pinv_with_tol(&aab, Some(aab_tol)));
    Ok((c, d))
}

/// Whether `P^+` is itself a projection; equivalent to `P` being orthogonal.
pub fn pinv_is_projection(p: &Projector, tol: &Tolerances) -> Result<bool> {
    let q = pinv_with_tol(p.matrix(), tol.rank);
    let idempotent = idempotency_residual(&q) <= idempotency_tol(&q, tol.residual);
    if idempotent != p.is_orthogonal() {
        return Err(Error::Disagreement {
            what: "pinv(P) idempotent vs P orthogonal",
            left: idempotency_residual(&q),
            right: p.matrix().asymmetry(),
        });
    }
    Ok(idempotent)
}

/// `(PQ)^+` for orthogonal projectors, checked to equal `Q (PQ)^+ P` and to be idempotent.
pub fn pinv_of_orth_product(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Matrix> {
    for x in [p, q] {
        if !x.is_orthogonal() {
            return Err(Error::NotOrthogonalProjector {
                residual: x.matrix().asymmetry(),
            });
        }
    }
    if p.dim() != q.dim() {
        return Err(Error::AmbientMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    // ||P||_2 = ||Q||_2 = 1 for nonzero orthogonal projections
    let r = pinv_with_tol(&(p.matrix() * q.matrix()), lattice_rank_tol(1.0, tol));
    let bound = idempotency_tol(&r, tol.residual);
    let sandwich = (&(q.matrix() * &r) * p.matrix()).distance(&r);
    if sandwich > bound {
        return Err(Error::Disagreement {
            what: "(PQ)^+ vs Q (PQ)^+ P",
            left: sandwich,
            right: bound,
        });
    }
    let idem = idempotency_residual(&r);
    if idem > bound {
        return Err(Error::Disagreement {
            what: "(PQ)^+ idempotency",
            left: idem,
            right: bound,
        });
    }
    Ok(r)
}

fn check_conformable(op: &'static str, a: &Matrix, b: &Matrix) -> Result<()> {
    if a.cols() != b.rows() {
        return Err(Error::ShapeMismatch {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

/// `||(AB)^+ - B^+ A^+||_F` relative to `max(1, ||(AB)^+||_F, ||B^+||_F ||A^+||_F)`.
pub fn rol_deviation(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<f64> {
    check_conformable("reverse_order_law", a, b)?;
    let ab = a * b;
    let ab_tol = product_rank_tol(&ab, spectral_norm(a) * spectral_norm(b), a.cols(), tol.rank);
    let ab_plus = pinv_with_tol(&ab, Some(ab_tol));
    let a_plus = pinv_with_tol(a, tol.rank);
    let b_plus = pinv_with_tol(b, tol.rank);
    let scale = ab_plus
        .frobenius_norm()
        .max(a_plus.frobenius_norm() * b_plus.frobenius_norm())
        .max(1.0);
    Ok(ab_plus.distance(&(&b_plus * &a_plus)) / scale)
}

/// `B B^T A^T` and `A^T A B` with their rank thresholds.
fn rol_products(a: &Matrix, b: &Matrix, tol: &Tolerances) -> (Matrix, Matrix, f64, f64) {
    let at = a.transpose();
    let (na, nb) = (spectral_norm(a), spectral_norm(b));
    let inner = a.rows().max(a.cols()).max(b.cols());
    let bbat = &(b * &b.transpose()) * &at;
    let aab = &(&at * a) * b;
    let bbat_tol = product_rank_tol(&bbat, nb * nb * na, inner, tol.rank);
    let aab_tol = product_rank_tol(&aab, na * na * nb, inner, tol.rank);
    (bbat, aab, bbat_tol, aab_tol)
}

/// Threshold for the reverse-order-law tests: `tol.subspace`, raised to
/// `d eps cond(AB)` when `AB` is so ill-conditioned that `(AB)^+` and the
/// ranges derived from it cannot be resolved more finely.
pub fn rol_threshold(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<f64> {
    check_conformable("reverse_order_law", a, b)?;
    let ab = a * b;
    let ab_tol = product_rank_tol(&ab, spectral_norm(a) * spectral_norm(b), a.cols(), tol.rank);
    let sigma = crate::linalg::svd::svd(&ab)?.sigma;
    let k = sigma.iter().take_while(|&&s| s > ab_tol).count();
    let cond = if k == 0 { 1.0 } else { sigma[0] / sigma[k - 1] };
    let dim = (a.rows() + a.cols() + b.cols()) as f64;
    Ok(tol.subspace.max(dim * f64::EPSILON * cond))
}

/// Greville's condition: `R(B B^T A^T) ⊆ R(A^T)` and `R(A^T A B) ⊆ R(B)`,
/// reported as the larger of the two containment defects.
pub fn greville_defect(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<f64> {
    check_conformable("greville", a, b)?;
    let at = a.transpose();
    let (bbat, aab, bbat_tol, aab_tol) = rol_products(a, b, tol);
    let first = containment_defect(&range_basis(&at, tol.rank), &range_basis(&bbat, Some(bbat_tol)))?;
    let second = containment_defect(&range_basis(b, tol.rank), &range_basis(&aab, Some(aab_tol)))?;
    Ok(first.max(second))
}

/// Whether `(AB)^+ = B^+ A^+`, decided both directly and through Greville's
/// condition; the two must agree.
pub fn reverse_order_law_holds(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<bool> {
    let direct = rol_deviation(a, b, tol)?;
    let greville = greville_defect(a, b, tol)?;
    let threshold = rol_threshold(a, b, tol)?;
    let by_direct = direct <= threshold;
    let by_greville = greville <= threshold;
    if by_direct != by_greville {
        return Err(Error::Disagreement {
            what: "reverse order law: direct vs Greville",
            left: direct,
            right: greville,
        });
    }
    Ok(by_direct)
}

/// Three characterizations of the reverse order law for `A` (m x n) and `B` (n x k).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolClassification {
    /// `(AB)^+ = B^+ A^+` by direct comparison.
    pub rol_holds: bool,
    /// `B (AB)^+ A` is an orthogonal projection.
    pub orthogonal_projection: bool,
    /// `R(B B^T A^T) = R(A^T A B)`.
    pub ranges_equal: bool,
    pub rol_deviation: f64,
    pub asymmetry: f64,
    pub range_distance: f64,
}

impl RolClassification {
    pub fn consistent(&self) -> bool {
        self.rol_holds == self.orthogonal_projection && self.rol_holds == self.ranges_equal
    }
}

pub fn rol_projector_classification(
    a: &Matrix,
    b: &Matrix,
    tol: &Tolerances,
) -> Result<RolClassification> {
    let rol_deviation = rol_deviation(a, b, tol)?;
    // B (AB)^+ A is always idempotent; it is orthogonal iff symmetric
    let ab = a * b;
    let ab_tol = product_rank_tol(&ab, spectral_norm(a) * spectral_norm(b), a.cols(), tol.rank);
    let e = &(b * &pinv_with_tol(&ab, Some(ab_tol))) * a;
    let asymmetry = e.asymmetry() / e.frobenius_norm().max(1.0);
    let (bbat, aab, bbat_tol, aab_tol) = rol_products(a, b, tol);
    let left = range_basis(&bbat, Some(bbat_tol));
    let right = range_basis(&aab, Some(aab_tol));
    let range_distance = subspace_distance(&left, &right)?;
    let threshold = rol_threshold(a, b, tol)?;
    Ok(RolClassification {
        rol_holds: rol_deviation <= threshold,
        orthogonal_projection: asymmetry <= threshold,
        ranges_equal: range_distance <= threshold,
        rol_deviation,
        asymmetry,
        range_distance,
    })
}

/// For `A` (m x p) and `B` (m x q) such that `(B^T A)^+ = A^+ (B^T)^+`, returns
/// `P = A (B^T A)^+ B^T`, which then equals `A A^+ B B^+` and is the orthogonal
/// projection onto `R(A) ∩ R(B)`. Returns `None` when the reverse order law fails.
pub fn rol_projector(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Option<Projector>> {
    check_rows("rol_projector", a, b)?;
    let bt = b.transpose();
    if !reverse_order_law_holds(&bt, a, tol)? {
        return Ok(None);
    }
    let p = oblique_matrix(a, b, tol)?;
    let product = &(a * &pinv_with_tol(a, tol.rank)) * &(b * &pinv_with_tol(b, tol.rank));
    let dev = p.distance(&product);
    if dev > tol.subspace * p.frobenius_norm().max(1.0) {
        return Err(Error::Disagreement {
            what: "A (B^T A)^+ B^T vs A A^+ B B^+",
            left: dev,
            right: tol.subspace,
        });
    }
    let range = intersection(
        &range_basis(a, tol.rank),
        &range_basis(b, tol.rank),
        tol.subspace,
    )?;
    let nullsp = range.orthogonal_complement();
    Projector::with_spaces(p, range, nullsp, tol).map(Some)
}

fn require_orthogonal(p: &Projector) -> Result<()> {
    if p.is_orthogonal() {
        Ok(())
    } else {
        Err(Error::NotOrthogonalProjector {
            residual: p.matrix().asymmetry(),
        })
    }
}

/// The fixed space `{v : PQv = v}` of two orthogonal projectors, computed as
/// `N(PQ - I)` and checked against `R(P) ∩ R(Q)`.
pub fn orth_product_fixed_space(
    p: &Projector,
    q: &Projector,
    tol: &Tolerances,
) -> Result<SubspaceBasis> {
    require_orthogonal(p)?;
    require_orthogonal(q)?;
    let n = p.dim();
    let shifted = &(p.matrix() * q.matrix()) - &Matrix::identity(n);
    let fixed = nullspace_basis(&shifted, Some(tol.subspace));
    let cap = intersection(p.range(), q.range(), tol.subspace)?;
    let d = subspace_distance(&fixed, &cap)?;
    if d > tol.subspace {
        return Err(Error::Disagreement {
            what: "eigenspace of PQ for 1 vs R(P) ∩ R(Q)",
            left: fixed.dim() as f64,
            right: cap.dim() as f64,
        });
    }
    Ok(fixed)
}

/// Whether `A (B^T A)^+ B^T = C (D^T C)^+ D^T`, decided by direct comparison
/// and by `S S^+ = T T^+`, `S^+ S = T^+ T` for `S = A A^T B B^T`,
/// `T = C C^T D D^T`.
pub fn projectors_equal_by_factors(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    tol: &Tolerances,
) -> Result<bool> {
    check_rows("projectors_equal_by_factors", a, c)?;
    let p1 = oblique_matrix(a, b, tol)?;
    let p2 = oblique_matrix(c, d, tol)?;
    let direct = p1.distance(&p2) / p1.frobenius_norm().max(p2.frobenius_norm()).max(1.0);

    let s = &(a * &a.transpose()) * &(b * &b.transpose());
    let t = &(c * &c.transpose()) * &(d * &d.transpose());
    let s_plus = pinv_with_tol(&s, tol.rank);
    let t_plus = pinv_with_tol(&t, tol.rank);
    let left = spectral_norm(&(&(&s * &s_plus) - &(&t * &t_plus)));
    let right = spectral_norm(&(&(&s_plus * &s) - &(&t_plus * &t)));
    let criterion = left.max(right);

    let by_direct = direct <= tol.subspace;
    let by_criterion = criterion <= tol.subspace;
    if by_direct != by_criterion {
        return Err(Error::Disagreement {
            what: "projector equality: direct vs S/T criterion",
            left: direct,
            right: criterion,
        });
    }
    Ok(by_direct)
}

fn commute_check(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::AmbientMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    let (pm, qm) = (p.matrix(), q.matrix());
    let residual = (pm * qm).distance(&(qm * pm));
    if residual > tol.residual * lattice_scale(p, q) {
        return Err(Error::NonCommuting { residual });
    }
    Ok(())
}

/// `(1 + ||P||_F)(1 + ||Q||_F)`, the scale for commutation and meet/join
/// residuals: it covers `P`, `Q` and `PQ` alike.
pub fn lattice_scale(p: &Projector, q: &Projector) -> f64 {
    (1.0 + p.matrix().frobenius_norm()) * (1.0 + q.matrix().frobenius_norm())
}

/// `S (T S)^+ T` for `S = M M^+`, `T = M^+ M`: the projection onto `R(M)`
/// along `N(M)`, written in the oblique form. `rank_tol` decides the rank of `M`.
pub fn range_null_projection(m: &Matrix, rank_tol: Option<f64>) -> Matrix {
    let m_plus = pinv_with_tol(m, rank_tol);
    let s = m * &m_plus;
    let t = &m_plus * m;
    // T S is a product of orthogonal projections; its rounding is eps-sized
    // even when its own singular values are small
    let ts = &t * &s;
    let ts_tol = product_rank_tol(&ts, 1.0, ts.rows(), None);
    &(&s * &pinv_with_tol(&ts, Some(ts_tol))) * &t
}

/// Rank threshold for an (approximately) idempotent matrix.
///
/// Nonzero singular values of an idempotent are at least 1 and rounding
/// leaves the zero ones far below, so the default cuts at 1/2.
pub fn idempotent_rank_tol(tol: &Tolerances) -> Option<f64> {
    Some(tol.rank.unwrap_or(0.5))
}

/// Rank threshold for a product `PQ` given the size of the factors.
///
/// Rounding in a product scales with its operands, and the inputs carry
/// their own rounding. When the result is (close to) zero, a threshold
/// relative to its own largest singular value would count that as rank, so
/// the default is `sqrt(eps) * operand_scale`.
pub fn lattice_rank_tol(operand_scale: f64, tol: &Tolerances) -> Option<f64> {
    Some(tol.rank.unwrap_or_else(|| crate::float::sqrt(f64::EPSILON) * operand_scale))
}

fn check_formula(what: &'static str, direct: &Matrix, formula: &Matrix, bound: f64) -> Result<()> {
    let dev = direct.distance(formula);
    if dev > bound {
        return Err(Error::Disagreement {
            what,
            left: dev,
            right: bound,
        });
    }
    Ok(())
}

/// `P ∨ Q = P + Q - PQ` for commuting projections, checked against
/// `S (T S)^+ T` with `S = (P+Q)(P+Q)^+`, `T = (P+Q)^+(P+Q)`.
pub fn join(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Projector> {
    commute_check(p, q, tol)?;
    let (pm, qm) = (p.matrix(), q.matrix());
    let sum = pm + qm;
    let pq = pm * qm;
    let j = &sum - &pq;
    let formula = range_null_projection(&sum, join_rank_tol(&j, &pq, tol));
    check_formula("join: P+Q-PQ vs S(TS)^+T", &j, &formula, formula_bound(p, q, &j, tol))?;
    Projector::new(j, &lattice_output_tol(p, q, tol))
}

/// Rank threshold for `P + Q` given `J = P + Q - PQ` and `PQ`, for commuting
/// projections `P`, `Q`.
///
/// On `R(J)` the sum has inverse `J - PQ/2`, so its nonzero singular values
/// are at least `1 / (||J||_2 + ||PQ||_2 / 2)`; the cut sits at half that.
pub fn join_rank_tol(j: &Matrix, pq: &Matrix, tol: &Tolerances) -> Option<f64> {
    Some(tol.rank.unwrap_or_else(|| 0.5 / (spectral_norm(j) + 0.5 * spectral_norm(pq))))
}

/// `P ∧ Q = PQ` for commuting projections, checked against `S (T S)^+ T`
/// with `S = (PQ)(PQ)^+`, `T = (PQ)^+(PQ)`.
pub fn meet(p: &Projector, q: &Projector, tol: &Tolerances) -> Result<Projector> {
    commute_check(p, q, tol)?;
    let pq = p.matrix() * q.matrix();
    // PQ is itself a projection here
    let rank_tol = idempotent_rank_tol(tol);
    let formula = range_null_projection(&pq, rank_tol);
    check_formula("meet: PQ vs S(TS)^+T", &pq, &formula, formula_bound(p, q, &pq, tol))?;
    Projector::new(pq, &lattice_output_tol(p, q, tol))
}

/// The oblique form goes through `(T S)^+`, whose norm is that of the
/// result, so its rounding grows like `||result||^2`.
fn formula_bound(p: &Projector, q: &Projector, result: &Matrix, tol: &Tolerances) -> f64 {
    let r = result.frobenius_norm();
    tol.residual * lattice_scale(p, q).max(1.0 + r * r)
}

/// Products of `P` and `Q` carry rounding of order `eps ||P|| ||Q||`, so the
/// idempotency of a lattice result is judged at that scale.
fn lattice_output_tol(p: &Projector, q: &Projector, tol: &Tolerances) -> Tolerances {
    Tolerances {
        residual: tol.residual * lattice_scale(p, q),
        ..*tol
    }
}

/// Norms of `A A^T B B^T C C^T D D^T` and the reversed product, which vanish
/// when the two oblique projections sum to the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annihilation {
    /// Larger of the two product norms.
    pub residual: f64,
    /// `||A A^T B B^T||_F * ||C C^T D D^T||_F`.
    pub scale: f64,
}

pub fn complementary_factor_annihilation(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    tol: &Tolerances,
) -> Result<Annihilation> {
    check_rows("complementary_factor_annihilation", a, c)?;
    let p1 = oblique_matrix(a, b, tol)?;
    let p2 = oblique_matrix(c, d, tol)?;
    let sum_defect = (&p1 + &p2).distance(&Matrix::identity(a.rows()));
    let bound = tol.residual * (1.0 + p1.frobenius_norm() + p2.frobenius_norm());
    if sum_defect > bound {
        return Err(Error::NotComplementaryPair {
            residual: sum_defect,
        });
    }
    let s = &(a * &a.transpose()) * &(b * &b.transpose());
    let t = &(c * &c.transpose()) * &(d * &d.transpose());
    let residual = (&s * &t).frobenius_norm().max((&t * &s).frobenius_norm());
    Ok(Annihilation {
        residual,
        scale: s.frobenius_norm() * t.frobenius_norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn rejects_non_idempotent() {
        let err = Projector::new(m(&[&[1.0, 1.0], &[0.0, 0.0]]).scale(2.0), &tol()).unwrap_err();
        assert!(matches!(err, Error::NotIdempotent { .. }));
        assert!(matches!(
            Projector::new(Matrix::zeros(2, 3), &tol()),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn prescribed_axes() {
        let e1 = SubspaceBasis::from_orthonormal(Matrix::selector(2, &[0]));
        let e2 = SubspaceBasis::from_orthonormal(Matrix::selector(2, &[1]));
        let p = projector_from_subspaces(&e1, &e2, &tol()).unwrap();
        assert!(p.matrix().distance(&Matrix::from_diagonal(2, 2, &[1.0, 0.0])) < 1e-15);
        assert!(p.is_orthogonal());
    }

    #[test]
    fn prescribed_oblique() {
        // P (1,1)^T = (1,1)^T and P e2 = 0 force P = [[1,0],[1,0]]
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let v = SubspaceBasis::from_orthonormal(m(&[&[s], &[s]]));
        let w = SubspaceBasis::from_orthonormal(Matrix::selector(2, &[1]));
        let p = projector_from_subspaces(&v, &w, &tol()).unwrap();
        assert!(p.matrix().distance(&m(&[&[1.0, 0.0], &[1.0, 0.0]])) < 1e-14);
        assert!(!p.is_orthogonal());
        assert!(!pinv_is_projection(&p, &tol()).unwrap());
    }

    #[test]
    fn non_complementary_subspaces() {
        let e1 = SubspaceBasis::from_orthonormal(Matrix::selector(3, &[0]));
        let e2 = SubspaceBasis::from_orthonormal(Matrix::selector(3, &[1]));
        assert!(matches!(
            projector_from_subspaces(&e1, &e2, &tol()),
            Err(Error::NotComplementary { .. })
        ));
        let same = SubspaceBasis::from_orthonormal(Matrix::selector(2, &[0]));
        assert!(matches!(
            projector_from_subspaces(&same, &same, &tol()),
            Err(Error::NotComplementary { .. })
        ));
    }

    #[test]
    fn complement_of_identity_factors() {
        let id = Matrix::identity(3);
        let (c, d) = complement_factors(&id, &id, &tol()).unwrap();
        assert!(c.max_abs() < 1e-15 && d.max_abs() < 1e-15);
        let q = oblique_matrix(&c, &d, &tol()).unwrap();
        assert!(q.max_abs() < 1e-15);
    }

    #[test]
    fn orthogonal_pinv_is_projection() {
        let p = Projector::new(Matrix::from_diagonal(2, 2, &[1.0, 0.0]), &tol()).unwrap();
        assert!(pinv_is_projection(&p, &tol()).unwrap());
    }

    #[test]
    fn pinv_of_product_of_axis_and_diagonal() {
        let p = Projector::new(Matrix::from_diagonal(2, 2, &[1.0, 0.0]), &tol()).unwrap();
        let q = Projector::new(m(&[&[0.5, 0.5], &[0.5, 0.5]]), &tol()).unwrap();
        let r = pinv_of_orth_product(&p, &q, &tol()).unwrap();
        // PQ = [[1/2, 1/2], [0, 0]], (PQ)^+ = [[1, 0], [1, 0]]
        assert!(r.distance(&m(&[&[1.0, 0.0], &[1.0, 0.0]])) < 1e-14);
        assert!((&r * &r).distance(&r) < 1e-14);
        let id = Projector::new(Matrix::identity(2), &tol()).unwrap();
        assert!(pinv_of_orth_product(&id, &id, &tol()).unwrap().distance(&Matrix::identity(2)) < 1e-15);
        let oblique = Projector::new(m(&[&[1.0, 0.0], &[1.0, 0.0]]), &tol()).unwrap();
        assert!(matches!(
            pinv_of_orth_product(&oblique, &id, &tol()),
            Err(Error::NotOrthogonalProjector { .. })
        ));
    }

    #[test]
    fn rol_two_by_two_brute_force() {
        // A = [1 0; 0 0], B = [1 1; 0 1]: AB = [1 1; 0 0], (AB)^+ = [1/2 0; 1/2 0],
        // B^+ A^+ = B^{-1} A = [1 0; 0 0]
        let a = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let b = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(!reverse_order_law_holds(&a, &b, &tol()).unwrap());
        let c = rol_projector_classification(&a, &b, &tol()).unwrap();
        assert!(c.consistent());
        assert!(reverse_order_law_holds(&a, &a.transpose(), &tol()).unwrap());
        assert!(rol_projector_classification(&a, &a, &tol()).unwrap().consistent());
    }

    #[test]
    fn meet_and_join_of_diagonal_projectors() {
        let p = Projector::new(Matrix::from_diagonal(3, 3, &[1.0, 0.0, 0.0]), &tol()).unwrap();
        let q = Projector::new(Matrix::from_diagonal(3, 3, &[0.0, 1.0, 0.0]), &tol()).unwrap();
        let j = join(&p, &q, &tol()).unwrap();
        let mt = meet(&p, &q, &tol()).unwrap();
        assert!(j.matrix().distance(&Matrix::from_diagonal(3, 3, &[1.0, 1.0, 0.0])) < 1e-15);
        assert!(mt.matrix().max_abs() < 1e-15);
        let jp = join(&p, &p, &tol()).unwrap();
        let mp = meet(&p, &p, &tol()).unwrap();
        assert!(jp.matrix().distance(p.matrix()) < 1e-15);
        assert!(mp.matrix().distance(p.matrix()) < 1e-15);
    }

    #[test]
    fn non_commuting_rejected() {
        let p = Projector::new(Matrix::from_diagonal(2, 2, &[1.0, 0.0]), &tol()).unwrap();
        let q = Projector::new(m(&[&[0.5, 0.5], &[0.5, 0.5]]), &tol()).unwrap();
        assert!(matches!(join(&p, &q, &tol()), Err(Error::NonCommuting { .. })));
        assert!(matches!(meet(&p, &q, &tol()), Err(Error::NonCommuting { .. })));
    }

    #[test]
    fn diagonal_split_of_identity_annihilates() {
        let a = Matrix::selector(3, &[0]);
        let c = Matrix::selector(3, &[1, 2]);
        let r = complementary_factor_annihilation(&a, &a, &c, &c, &tol()).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(matches!(
            complementary_factor_annihilation(&a, &a, &a, &a, &tol()),
            Err(Error::NotComplementaryPair { .. })
        ));
    }
}

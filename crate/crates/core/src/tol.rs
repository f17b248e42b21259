/// Tolerances shared by every rank decision and residual assertion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute singular-value threshold for rank decisions. `None` selects
    /// `max(m, n) * eps * sigma_1` of the matrix being ranked.
    pub rank: Option<f64>,
    /// Threshold for subspace equality and containment (spectral norm of
    /// projector differences) and for intersections and sums of subspaces.
    pub subspace: f64,
    /// Relative factor for residual identities, e.g. `1e-9 * max(1, ||A||_F)`.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: None,
            subspace: DEFAULT_SUBSPACE_TOL,
            residual: DEFAULT_RESIDUAL_TOL,
        }
    }
}

pub const DEFAULT_SUBSPACE_TOL: f64 = 1e-8;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

/// `max(1, ||A||_F)`, the scale residuals are measured against.
pub fn residual_scale(a: &crate::Matrix) -> f64 {
    a.frobenius_norm().max(1.0)
}

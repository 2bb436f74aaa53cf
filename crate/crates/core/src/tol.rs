//! Numerical thresholds shared across the crate.
//!
//! Every comparison that decides a structural question (is this rate the same
//! as that one, is this trace zero, is this vector independent) goes through
//! one of these constants.

/// Relative tolerance for merging exponential rates and detecting resonance.
pub const RATE_TOL: f64 = 1e-8;

/// Coefficients below this fraction of the largest coefficient are dropped.
pub const COEFF_TOL: f64 = 1e-12;

/// Boundary traces below this (times the trace scale) count as zero.
pub const TRACE_TOL: f64 = 1e-9;

/// Default relative rank tolerance for orthonormalization.
pub const RANK_TOL: f64 = 1e-10;

/// Smallest and largest supported spectral offsets `eps` for `z = ±i eps`.
pub const EPS_MIN: f64 = 1e-5;
pub const EPS_MAX: f64 = 0.5;

/// Limit vectors below this fraction of the largest probe norm are zero
/// when recovering the domain of the relative parameter.
pub const LIMIT_RANK_TOL: f64 = 1e-7;

/// Maximum accepted Richardson error estimate (relative to `max(1, |limit|)`).
pub const EXTRAPOLATION_TOL: f64 = 1e-5;

/// Maximum residual of direct-sum reconstructions.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Maximum `|U^H U - I|` accepted for a reconstructed von Neumann parameter.
pub const UNITARY_TOL: f64 = 1e-7;

/// Hermitian-input symmetry tolerance, relative to `max |M|`.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub fn check_eps(eps: f64) -> crate::Result<()> {
    if (EPS_MIN..=EPS_MAX).contains(&eps) {
        Ok(())
    } else {
        Err(crate::Error::EpsOutOfRange(eps))
    }
}

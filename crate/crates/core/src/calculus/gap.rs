//! Gap metric between finite-dimensional subspaces.
//!
//! For orthogonal projections `P_A`, `P_B` of finite rank, `P_A - P_B` is
//! self-adjoint with range inside `A + B`, so its operator norm is the largest
//! absolute eigenvalue of its matrix in an orthonormal basis of `A + B`.

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::Sign;
use crate::linalg::{gram, hermitian_eigen, orthonormalize, ComplexMatrix, InnerProductSpace};
use crate::models::Model;
use crate::tol::{check_eps, RANK_TOL};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubspaceGap {
    /// `sup_{a ∈ A, |a| = 1} dist(a, B)`
    pub delta_ab: f64,
    pub delta_ba: f64,
    /// `max(delta_ab, delta_ba)`
    pub delta_hat: f64,
}

/// Largest singular value of `(1 - P_to)` on the span of `from`.
fn one_sided<V: InnerProductSpace>(from: &[V], to: &[V]) -> Result<f64> {
    if from.is_empty() {
        return Ok(0.0);
    }
    // residuals are formed explicitly; the Gram route 1 - |<a,b>|^2 loses eps^2
    let residuals: Vec<V> = from
        .iter()
        .map(|a| {
            let mut r = a.clone();
            for b in to {
                let c = b.inner(a);
                r.axpy(-c, b);
            }
            for b in to {
                let c = b.inner(&r);
                r.axpy(-c, b);
            }
            r
        })
        .collect();
    let g = gram(&residuals, |x, y| x.inner(y));
    let top = hermitian_eigen(&g)?.eigenvalues.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// `δ(A,B)`, `δ(B,A)` and `δ̂` for the spans of two vector lists.
pub fn subspace_gap<V: InnerProductSpace>(a: &[V], b: &[V]) -> Result<SubspaceGap> {
    let qa = orthonormalize(a, RANK_TOL);
    let qb = orthonormalize(b, RANK_TOL);
    let delta_ab = one_sided(&qa, &qb)?;
    let delta_ba = one_sided(&qb, &qa)?;
    Ok(SubspaceGap { delta_ab, delta_ba, delta_hat: delta_ab.max(delta_ba) })
}

/// `|P_A - P_B|` via the eigenvalues of the difference on the joint span.
pub fn projection_difference_norm<V: InnerProductSpace>(a: &[V], b: &[V]) -> Result<f64> {
    let qa = orthonormalize(a, RANK_TOL);
    let qb = orthonormalize(b, RANK_TOL);
    let joint: Vec<V> = qa.iter().chain(&qb).cloned().collect();
    let w = orthonormalize(&joint, RANK_TOL);
    let projector = |q: &[V]| -> ComplexMatrix {
        let coords: Vec<Vec<Complex64>> = q.iter().map(|qk| w.iter().map(|wi| wi.inner(qk)).collect()).collect();
        ComplexMatrix::from_fn(w.len(), w.len(), |i, j| coords.iter().map(|c| c[i] * c[j].conj()).sum())
    };
    let diff = projector(&qa).sub(&projector(&qb))?;
    let eig = hermitian_eigen(&diff.hermitian_part())?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max))
}

/// `|P_{ker(S* ∓ i eps)} - P_{ker S*}|`
pub fn projection_gap_norm(model: &dyn Model, eps: f64, sign: Sign) -> Result<f64> {
    check_eps(eps)?;
    let shifted = model.deficiency_basis(sign.kernel_point(eps))?;
    let base = model.deficiency_basis(Complex64::new(0.0, 0.0))?;
    projection_difference_norm(&shifted, &base)
}

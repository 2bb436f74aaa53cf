//! Boundary maps `Γ₀ = 1 - S_D^{-1} S*`, `Γ₁ = P_{ker S*} S*`, their
//! `z = ±i eps` counterparts, and the two direct-sum decompositions of `D(S*)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::models::{HilbertElement, Model};
use crate::tol::check_eps;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Which of the pair `Γ₁,ε^∓` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    /// `Γ₁,ε^- = P_{ker(S* - i eps)} (S* + i eps)`
    Minus,
    /// `Γ₁,ε^+ = P_{ker(S* + i eps)} (S* - i eps)`
    Plus,
}

impl Sign {
    /// Spectral point `z` of the target kernel `ker(S* - z)`.
    pub fn kernel_point(self, eps: f64) -> Complex64 {
        match self {
            Sign::Minus => Complex64::new(0.0, eps),
            Sign::Plus => Complex64::new(0.0, -eps),
        }
    }
}

/// Coordinates `<e_i, h>` of `P_{ker(S* - z)} h` in the orthonormal deficiency basis.
pub fn kernel_coordinates(model: &dyn Model, z: Complex64, h: &HilbertElement) -> Result<Vec<Complex64>> {
    use crate::linalg::InnerProductSpace;
    Ok(model.deficiency_basis(z)?.iter().map(|e| e.inner(h)).collect())
}

/// `P_{ker(S* - z)} h`
pub fn project_onto_kernel(model: &dyn Model, z: Complex64, h: &HilbertElement) -> Result<HilbertElement> {
    use crate::linalg::InnerProductSpace;
    let basis = model.deficiency_basis(z)?;
    let coeffs: Vec<Complex64> = basis.iter().map(|e| e.inner(h)).collect();
    Ok(HilbertElement::combination(model.channel_count(), &coeffs, &basis))
}

/// `Γ₀ g = g - S_D^{-1} S* g`, an element of `ker S*`.
pub fn gamma0(model: &dyn Model, g: &HilbertElement) -> Result<HilbertElement> {
    let w = model.distinguished_resolvent(&model.apply_adjoint(g))?;
    Ok(g - &w)
}

/// `Γ₁ g = P_{ker S*} S* g`
pub fn gamma1(model: &dyn Model, g: &HilbertElement) -> Result<HilbertElement> {
    project_onto_kernel(model, ZERO, &model.apply_adjoint(g))
}

/// `Γ₁,ε^∓ g = P_{ker(S* ∓ i eps)} (S* ± i eps) g`
pub fn gamma1_eps(model: &dyn Model, g: &HilbertElement, eps: f64, sign: Sign) -> Result<HilbertElement> {
    check_eps(eps)?;
    let z = sign.kernel_point(eps);
    project_onto_kernel(model, z, &model.apply_shifted(g, z.conj()))
}

/// `Υ_ε g = (Γ₁,ε^- - Γ₁,ε^+) g / (2 i eps) = u_eps - v_eps`
pub fn upsilon_eps(model: &dyn Model, g: &HilbertElement, eps: f64) -> Result<HilbertElement> {
    let minus = gamma1_eps(model, g, eps, Sign::Minus)?;
    let plus = gamma1_eps(model, g, eps, Sign::Plus)?;
    Ok((&minus - &plus).scale(Complex64::new(0.0, -0.5 / eps)))
}

/// `S* Υ_ε g`, evaluated as `(Γ₁,ε^- + Γ₁,ε^+) g / 2`.
///
/// The direct evaluation `S*(u_eps - v_eps)` agrees; see the tests.
pub fn s_star_upsilon(model: &dyn Model, g: &HilbertElement, eps: f64) -> Result<HilbertElement> {
    let minus = gamma1_eps(model, g, eps, Sign::Minus)?;
    let plus = gamma1_eps(model, g, eps, Sign::Plus)?;
    Ok((&minus + &plus).scale(Complex64::new(0.5, 0.0)))
}

/// `Γ₀,ε g = Γ₀ Υ_ε g`
pub fn gamma0_eps(model: &dyn Model, g: &HilbertElement, eps: f64) -> Result<HilbertElement> {
    gamma0(model, &upsilon_eps(model, g, eps)?)
}

/// `g = f_eps + u_eps - v_eps` with `u_eps ∈ ker(S* - i eps)`, `v_eps ∈ ker(S* + i eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VnDecomposition {
    pub f_eps: HilbertElement,
    pub u_eps: HilbertElement,
    pub v_eps: HilbertElement,
    pub eps: f64,
}

/// Split at `z` with `Im z > 0`: `u = P_{ker(S*-z)} (S*-z̄) g / (z - z̄)`, `v` likewise.
pub(crate) fn split_at(model: &dyn Model, g: &HilbertElement, z: Complex64) -> Result<(HilbertElement, HilbertElement)> {
    let scale = (z - z.conj()).inv();
    let u = project_onto_kernel(model, z, &model.apply_shifted(g, z.conj()))?.scale(scale);
    let v = project_onto_kernel(model, z.conj(), &model.apply_shifted(g, z))?.scale(scale);
    Ok((u, v))
}

pub fn decompose_vn(model: &dyn Model, g: &HilbertElement, eps: f64) -> Result<VnDecomposition> {
    check_eps(eps)?;
    let (u_eps, v_eps) = split_at(model, g, Complex64::new(0.0, eps))?;
    let f_eps = &(g - &u_eps) + &v_eps;
    if !model.closure_membership(&f_eps) {
        let trace = model.boundary_trace(&f_eps).as_vector();
        let residual = trace.iter().map(|t| t.norm()).fold(0.0, f64::max);
        return Err(Error::ConsistencyFailure { what: "regular part of the von Neumann split", residual });
    }
    Ok(VnDecomposition { f_eps, u_eps, v_eps, eps })
}

/// `g = f + S_D^{-1} u1 + u0` with `u0 = Γ₀ g`, `u1 = Γ₁ g`, `f ∈ D(S̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KvbDecomposition {
    pub f: HilbertElement,
    pub u1: HilbertElement,
    pub u0: HilbertElement,
}

impl KvbDecomposition {
    pub fn recompose(&self, model: &dyn Model) -> Result<HilbertElement> {
        Ok(&(&self.f + &model.distinguished_resolvent(&self.u1)?) + &self.u0)
    }
}

pub fn decompose_kvb(model: &dyn Model, g: &HilbertElement) -> Result<KvbDecomposition> {
    let u0 = gamma0(model, g)?;
    let u1 = gamma1(model, g)?;
    let f = &(g - &model.distinguished_resolvent(&u1)?) - &u0;
    if !model.closure_membership(&f) {
        let trace = model.boundary_trace(&f).as_vector();
        let residual = trace.iter().map(|t| t.norm()).fold(0.0, f64::max);
        return Err(Error::ConsistencyFailure { what: "regular part of the relative split", residual });
    }
    Ok(KvbDecomposition { f, u1, u0 })
}

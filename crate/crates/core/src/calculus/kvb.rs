//! Kreĭn–Višik–Birman labels: a self-adjoint `T` on a subspace `D(T)` of
//! `ker S*`, with domain `{f + S_D^{-1}(T u + w) + u}`, and its recovery from
//! the `eps -> 0` limits of the von Neumann components.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::extrapolate::richardson;
use crate::calculus::maps::{gamma0, kernel_coordinates, project_onto_kernel};
use crate::calculus::vn::{reconstruct_u, vn_components, VnParameter};
use crate::linalg::{gram, hermitian_eigen, orthonormalize, pseudo_inverse, singular_values, ComplexMatrix, InnerProductSpace};
use crate::models::{Extension, HilbertElement, Model};
use crate::tol::{EXTRAPOLATION_TOL, LIMIT_RANK_TOL, RANK_TOL, RECONSTRUCTION_TOL, TRACE_TOL};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default extrapolation grid for [`reconstruct_t_default`].
pub const DEFAULT_T_GRID: [f64; 3] = [1e-3, 5e-4, 2.5e-4];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KvbParameter {
    /// Orthonormal basis of `D(T)` inside `ker S*`.
    pub domain_basis: Vec<HilbertElement>,
    /// Hermitian matrix of `T` in `domain_basis`.
    pub t_matrix: ComplexMatrix,
    /// Orthonormal basis of `ker S* ∩ D(T)^⊥`.
    pub complement_basis: Vec<HilbertElement>,
}

impl KvbParameter {
    /// From an orthonormal family in `ker S*` and a Hermitian `T` on its span.
    pub fn new(model: &dyn Model, domain_basis: Vec<HilbertElement>, t_matrix: ComplexMatrix) -> Result<Self> {
        let coords: Vec<Vec<Complex64>> = domain_basis
            .iter()
            .map(|u| kernel_coordinates(model, ZERO, u))
            .collect::<Result<_>>()?;
        for (u, c) in domain_basis.iter().zip(&coords) {
            let outside = (u - &project_onto_kernel(model, ZERO, u)?).norm();
            if outside > TRACE_TOL * c.iter().map(|x| x.norm()).fold(1.0, f64::max) {
                return Err(Error::ConsistencyFailure { what: "domain vector outside ker S*", residual: outside });
            }
        }
        Self::from_kernel_coordinates(model, &coords, t_matrix)
    }

    /// Same as [`KvbParameter::new`] with `D(T)` given by coordinates in `deficiency_basis(0)`.
    pub fn from_kernel_coordinates(model: &dyn Model, coords: &[Vec<Complex64>], t_matrix: ComplexMatrix) -> Result<Self> {
        let d = model.deficiency_index();
        let r = coords.len();
        if t_matrix.rows() != r || t_matrix.cols() != r {
            return Err(Error::DimensionMismatch(format!(
                "T must be {r}x{r} for a {r}-dimensional domain, got {}x{}",
                t_matrix.rows(),
                t_matrix.cols()
            )));
        }
        if r > d || coords.iter().any(|c| c.len() != d) {
            return Err(Error::DimensionMismatch(format!("domain coordinates must be at most {d} vectors of length {d}")));
        }
        let g = gram(coords, |a, b| a.inner(b));
        let drift = g.sub(&ComplexMatrix::identity(r))?.max_abs();
        if drift > 1e-9 {
            return Err(Error::ConsistencyFailure { what: "domain basis is not orthonormal", residual: drift });
        }
        let asymmetry = t_matrix.hermitian_asymmetry();
        if asymmetry > 1e-8 * t_matrix.max_abs().max(1.0) {
            return Err(Error::NotHermitian { asymmetry });
        }
        let kernel = model.deficiency_basis(ZERO)?;
        let n = model.channel_count();
        // complement: eigenvectors of I - Q Q^H with eigenvalue one
        let q = ComplexMatrix::from_columns(d, coords);
        let rest = ComplexMatrix::identity(d).sub(&q.matmul(&q.adjoint())?)?;
        let eig = hermitian_eigen(&rest.hermitian_part())?;
        let complement_coords: Vec<Vec<Complex64>> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.5)
            .map(|(k, _)| eig.eigenvectors.column(k))
            .collect();
        let to_elements =
            |cs: &[Vec<Complex64>]| -> Vec<HilbertElement> { cs.iter().map(|c| HilbertElement::combination(n, c, &kernel)).collect() };
        Ok(KvbParameter {
            domain_basis: to_elements(coords),
            t_matrix: t_matrix.hermitian_part(),
            complement_basis: to_elements(&complement_coords),
        })
    }

    /// `D(T) = {0}`: the distinguished extension itself.
    pub fn distinguished(model: &dyn Model) -> Result<Self> {
        Self::from_kernel_coordinates(model, &[], ComplexMatrix::zeros(0, 0))
    }

    pub fn rank(&self) -> usize {
        self.domain_basis.len()
    }

    /// Eigenvalues of `T`, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eigen(&self.t_matrix)?.eigenvalues)
    }

    /// Basis-free form: `(Q Q^H, Q T Q^H)` in `deficiency_basis(0)` coordinates.
    pub fn kernel_matrices(&self, model: &dyn Model) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let d = model.deficiency_index();
        let coords: Vec<Vec<Complex64>> =
            self.domain_basis.iter().map(|u| kernel_coordinates(model, ZERO, u)).collect::<Result<_>>()?;
        let q = ComplexMatrix::from_columns(d, &coords);
        let projector = q.matmul(&q.adjoint())?;
        let operator = q.matmul(&self.t_matrix)?.matmul(&q.adjoint())?;
        Ok((projector, operator))
    }

    /// Largest entrywise difference of the basis-free forms.
    pub fn distance(&self, other: &KvbParameter, model: &dyn Model) -> Result<f64> {
        let (p1, t1) = self.kernel_matrices(model)?;
        let (p2, t2) = other.kernel_matrices(model)?;
        Ok(p1.sub(&p2)?.max_abs().max(t1.sub(&t2)?.max_abs()))
    }
}

/// `g = f + S_D^{-1}(T u + w) + u`
pub fn build_kvb_domain_vector(
    model: &dyn Model,
    kvb: &KvbParameter,
    f: &HilbertElement,
    u_coords: &[Complex64],
    w_coords: &[Complex64],
) -> Result<HilbertElement> {
    if u_coords.len() != kvb.domain_basis.len() || w_coords.len() != kvb.complement_basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} domain and {} complement coordinates, got {} and {}",
            kvb.domain_basis.len(),
            kvb.complement_basis.len(),
            u_coords.len(),
            w_coords.len()
        )));
    }
    if f.channel_count() != model.channel_count() {
        return Err(Error::DimensionMismatch("regular part has the wrong number of channels".into()));
    }
    if !model.closure_membership(f) {
        return Err(Error::NotInDomain { extension: "closure".into() });
    }
    let n = model.channel_count();
    let u = HilbertElement::combination(n, u_coords, &kvb.domain_basis);
    let tu = HilbertElement::combination(n, &kvb.t_matrix.mul_vec(u_coords)?, &kvb.domain_basis);
    let w = HilbertElement::combination(n, w_coords, &kvb.complement_basis);
    Ok(&(f + &model.distinguished_resolvent(&(&tu + &w))?) + &u)
}

/// One element per basis vector of `D(T)` and of its complement (with `f = 0`).
pub fn kvb_spanning_probes(model: &dyn Model, kvb: &KvbParameter) -> Result<Vec<HilbertElement>> {
    let r = kvb.domain_basis.len();
    let c = kvb.complement_basis.len();
    let n = model.channel_count();
    let f = HilbertElement::zero(n);
    let mut out = Vec::with_capacity(r + c);
    for i in 0..r {
        let u: Vec<Complex64> = (0..r).map(|k| if k == i { Complex64::new(1.0, 0.0) } else { ZERO }).collect();
        out.push(build_kvb_domain_vector(model, kvb, &f, &u, &vec![ZERO; c])?);
    }
    for j in 0..c {
        let w: Vec<Complex64> = (0..c).map(|k| if k == j { Complex64::new(1.0, 0.0) } else { ZERO }).collect();
        out.push(build_kvb_domain_vector(model, kvb, &f, &vec![ZERO; r], &w)?);
    }
    Ok(out)
}

/// Membership in `D(S_T)`: `Γ₀ g ∈ D(T)` and `P_{D(T)} Γ₁ g = T Γ₀ g`.
pub fn kvb_contains(model: &dyn Model, kvb: &KvbParameter, g: &HilbertElement) -> bool {
    let check = || -> Result<bool> {
        let alpha = kernel_coordinates(model, ZERO, &gamma0(model, g)?)?;
        let beta = kernel_coordinates(model, ZERO, &model.apply_adjoint(g))?;
        let scale = alpha.iter().chain(&beta).map(|c| c.norm()).fold(1.0, f64::max);
        let tol = TRACE_TOL * scale;
        let coords = |basis: &[HilbertElement], v: &[Complex64]| -> Result<Vec<Complex64>> {
            basis
                .iter()
                .map(|b| Ok(kernel_coordinates(model, ZERO, b)?.inner(&v.to_vec())))
                .collect()
        };
        let off_domain = coords(&kvb.complement_basis, &alpha)?;
        if off_domain.iter().any(|c| c.norm() > tol) {
            return Ok(false);
        }
        let u = coords(&kvb.domain_basis, &alpha)?;
        let projected = coords(&kvb.domain_basis, &beta)?;
        let tu = kvb.t_matrix.mul_vec(&u)?;
        Ok(tu.iter().zip(&projected).all(|(a, b)| (a - b).norm() <= tol))
    };
    check().unwrap_or(false)
}

/// `f^{(g)}`, `u^{(g)}`, `T u^{(g)} + w^{(g)}` for `g ∈ D(ext)`, without limits.
#[derive(Debug, Clone, PartialEq)]
pub struct KvbComponents {
    pub f: HilbertElement,
    pub u: HilbertElement,
    pub t_u_plus_w: HilbertElement,
}

pub fn kvb_components(ext: &Extension, g: &HilbertElement) -> Result<KvbComponents> {
    let model = ext.model().as_ref();
    let s = ext.apply(g)?;
    let u = g - &model.distinguished_resolvent(&s)?;
    let t_u_plus_w = project_onto_kernel(model, ZERO, &s)?;
    let f = model.distinguished_resolvent(&(&s - &t_u_plus_w))?;
    let back = &(&f + &model.distinguished_resolvent(&t_u_plus_w)?) + &u;
    let residual = (&back - g).norm();
    if residual > RECONSTRUCTION_TOL * g.norm().max(1.0) || !model.closure_membership(&f) {
        return Err(Error::ConsistencyFailure { what: "relative split of a domain element", residual });
    }
    Ok(KvbComponents { f, u, t_u_plus_w })
}

/// `T` from probe data `(a_j, b_j) = (u^{(g_j)}, T u^{(g_j)} + w^{(g_j)})` in kernel coordinates.
///
/// `D(T)` is the span of the `a_j` above `LIMIT_RANK_TOL * probe_scale`; on
/// it, `<a_i, b_j> = <a_i, T a_j>` determines `T` once the `a_j` span `D(T)`.
/// Returns the parameter and the asymmetry of the raw matrix before
/// Hermitization.
fn assemble_kvb(model: &dyn Model, a: &[Vec<Complex64>], b: &[Vec<Complex64>], probe_scale: f64) -> Result<(KvbParameter, f64)> {
    let d = model.deficiency_index();
    // the boundary data (a_j, b_j) of a spanning probe set fill a d-dimensional subspace
    let stacked: Vec<Vec<Complex64>> = a.iter().zip(b).map(|(x, y)| x.iter().chain(y).copied().collect()).collect();
    let data_scale = stacked.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let rank = if stacked.is_empty() || data_scale == 0.0 {
        0
    } else {
        singular_values(&ComplexMatrix::from_columns(2 * d, &stacked))
            .iter()
            .filter(|&&s| s > LIMIT_RANK_TOL * data_scale)
            .count()
    };
    if rank < d {
        return Err(Error::InsufficientProbes { rank, needed: d });
    }

    let threshold = LIMIT_RANK_TOL * probe_scale.max(f64::MIN_POSITIVE);
    let kept: Vec<usize> = (0..a.len()).filter(|&j| a[j].norm() >= threshold).collect();
    let kept_a: Vec<Vec<Complex64>> = kept.iter().map(|&j| a[j].clone()).collect();
    let kept_b: Vec<Vec<Complex64>> = kept.iter().map(|&j| b[j].clone()).collect();
    let q = orthonormalize(&kept_a, LIMIT_RANK_TOL);
    let r = q.len();
    if r == 0 {
        return Ok((KvbParameter::distinguished(model)?, 0.0));
    }
    let n = kept.len();
    // A: domain coordinates of each kept a_j; F_ij = <a_i, b_j> = (A^H T A)_ij
    let amat = ComplexMatrix::from_fn(r, n, |i, j| q[i].inner(&kept_a[j]));
    let fmat = ComplexMatrix::from_fn(n, n, |i, j| kept_a[i].inner(&kept_b[j]));
    let right = pseudo_inverse(&amat, RANK_TOL); // A^H (A A^H)^{-1}
    let raw = right.adjoint().matmul(&fmat)?.matmul(&right)?;
    let asymmetry = raw.hermitian_asymmetry();
    Ok((KvbParameter::from_kernel_coordinates(model, &q, raw.hermitian_part())?, asymmetry))
}

/// Direct route: `T` assembled from [`kvb_components`] of the probes.
pub fn kvb_from_components(ext: &Extension, probes: &[HilbertElement]) -> Result<(KvbParameter, f64)> {
    let model = ext.model().as_ref();
    let mut a = Vec::with_capacity(probes.len());
    let mut b = Vec::with_capacity(probes.len());
    for g in probes {
        let c = kvb_components(ext, g)?;
        a.push(kernel_coordinates(model, ZERO, &c.u)?);
        b.push(kernel_coordinates(model, ZERO, &c.t_u_plus_w)?);
    }
    let scale = probes.iter().map(|g| g.norm()).fold(0.0, f64::max);
    assemble_kvb(model, &a, &b, scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KvbReconstruction {
    pub parameter: KvbParameter,
    /// Asymmetry of the raw quadratic-form matrix before Hermitization.
    pub asymmetry: f64,
    /// Largest Richardson error estimate over probes and coordinates.
    pub extrapolation_residual: f64,
    /// Distance to the parameter assembled from [`kvb_components`] (no limits).
    pub route_discrepancy: f64,
    pub eps_grid: Vec<f64>,
}

/// `T` from the limits `a_eps -> u^{(g)}` and `b_eps -> T u^{(g)} + w^{(g)}`, where
/// `a_eps = (1 - S_D^{-1} S*)(u_eps - U_eps u_eps)` and `b_eps = i eps (u_eps + U_eps u_eps)`.
pub fn reconstruct_t(ext: &Extension, probes: &[HilbertElement], eps_grid: &[f64]) -> Result<KvbReconstruction> {
    let model = ext.model().as_ref();
    if probes.is_empty() {
        return Err(Error::InsufficientProbes { rank: 0, needed: model.deficiency_index() });
    }
    type Series = (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>);
    let series: Vec<Series> = probes
        .par_iter()
        .map(|g| -> Result<Series> {
            let mut a = Vec::with_capacity(eps_grid.len());
            let mut b = Vec::with_capacity(eps_grid.len());
            for &eps in eps_grid {
                let c = vn_components(ext, g, eps)?;
                let a_eps = gamma0(model, &(&c.u_eps - &c.u_eps_image))?;
                let b_eps = (&c.u_eps + &c.u_eps_image).scale(Complex64::new(0.0, eps));
                a.push(kernel_coordinates(model, ZERO, &a_eps)?);
                b.push(kernel_coordinates(model, ZERO, &b_eps)?);
            }
            Ok((a, b))
        })
        .collect::<Result<_>>()?;

    let scale = probes.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let mut a0 = Vec::with_capacity(probes.len());
    let mut b0 = Vec::with_capacity(probes.len());
    let mut residual: f64 = 0.0;
    for (a, b) in &series {
        let ea = richardson(eps_grid, a)?;
        let eb = richardson(eps_grid, b)?;
        residual = residual.max(ea.residual).max(eb.residual);
        a0.push(ea.limit);
        b0.push(eb.limit);
    }
    let data_scale = a0.iter().chain(&b0).flatten().map(|c| c.norm()).fold(scale, f64::max).max(1.0);
    let relative = residual / data_scale;
    if relative > EXTRAPOLATION_TOL {
        return Err(Error::ExtrapolationDivergence { estimate: relative });
    }
    let (parameter, asymmetry) = assemble_kvb(model, &a0, &b0, scale)?;
    let (direct, _) = kvb_from_components(ext, probes)?;
    let route_discrepancy = parameter.distance(&direct, model)?;
    Ok(KvbReconstruction {
        parameter,
        asymmetry,
        extrapolation_residual: relative,
        route_discrepancy,
        eps_grid: eps_grid.to_vec(),
    })
}

pub fn reconstruct_t_default(ext: &Extension, probes: &[HilbertElement]) -> Result<KvbReconstruction> {
    reconstruct_t(ext, probes, &DEFAULT_T_GRID)
}

/// `U` at `z` for the extension `S_T`, via probes built from `kvb`.
pub fn kvb_to_vn(model: &Arc<dyn Model>, kvb: &KvbParameter, z: Complex64) -> Result<VnParameter> {
    let probes = kvb_spanning_probes(model.as_ref(), kvb)?;
    let ext = Extension::from_kvb("kvb", model.clone(), kvb.clone());
    reconstruct_u(&ext, z, &probes)
}

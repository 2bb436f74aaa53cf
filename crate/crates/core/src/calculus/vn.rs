//! Von Neumann labels: the unitary `U : ker(S* - z) -> ker(S* - z̄)` of an
//! extension, with domain `D(S̄) ∔ {u - U u}`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::maps::{kernel_coordinates, split_at};
use crate::linalg::{pseudo_inverse, singular_values, ComplexMatrix, InnerProductSpace};
use crate::models::{Extension, HilbertElement, Model};
use crate::tol::{check_eps, RANK_TOL, TRACE_TOL, UNITARY_TOL};
use crate::{Error, Result};

/// Matrix of `U` in the orthonormal bases returned by `deficiency_basis(z)` and `deficiency_basis(z̄)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VnParameter {
    pub z: Complex64,
    pub matrix: ComplexMatrix,
    /// `U = e^{i theta}` in the one-dimensional case.
    pub theta: Option<f64>,
    /// `max |U X - Y|` over the probe relations, relative to the largest probe image.
    pub fit_residual: f64,
}

impl VnParameter {
    pub fn new(z: Complex64, matrix: ComplexMatrix) -> Result<Self> {
        if z.im <= 0.0 {
            return Err(Error::UnsupportedSpectralPoint { re: z.re, im: z.im, reason: "von Neumann labels need Im z > 0" });
        }
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!("U must be square, got {}x{}", matrix.rows(), matrix.cols())));
        }
        let residual = matrix.unitarity_residual();
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        let theta = (matrix.rows() == 1).then(|| matrix[(0, 0)].arg().rem_euclid(TAU));
        Ok(VnParameter { z, matrix, theta, fit_residual: 0.0 })
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.matrix.unitarity_residual()
    }
}

/// `u_eps^{(g)}`, `U_eps u_eps^{(g)}` and `f_eps^{(g)} = g - u + U u` for `g ∈ D(ext)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VnComponents {
    pub u_eps: HilbertElement,
    pub u_eps_image: HilbertElement,
    pub f_eps: HilbertElement,
}

pub fn vn_components(ext: &Extension, g: &HilbertElement, eps: f64) -> Result<VnComponents> {
    check_eps(eps)?;
    if !ext.contains(g) {
        return Err(Error::NotInDomain { extension: ext.name().to_string() });
    }
    let model = ext.model().as_ref();
    let (u_eps, u_eps_image) = split_at(model, g, Complex64::new(0.0, eps))?;
    let f_eps = &(g - &u_eps) + &u_eps_image;
    if !model.closure_membership(&f_eps) {
        let residual = model.boundary_trace(&f_eps).as_vector().iter().map(|t| t.norm()).fold(0.0, f64::max);
        return Err(Error::ConsistencyFailure { what: "regular part of the von Neumann split", residual });
    }
    Ok(VnComponents { u_eps, u_eps_image, f_eps })
}

/// Least-squares solve of `U P_{ker(S*-z)}(S~-z̄) g = P_{ker(S*-z̄)}(S~-z) g` over the probes.
pub fn reconstruct_u(ext: &Extension, z: Complex64, probes: &[HilbertElement]) -> Result<VnParameter> {
    if z.im <= 0.0 {
        return Err(Error::UnsupportedSpectralPoint { re: z.re, im: z.im, reason: "von Neumann labels need Im z > 0" });
    }
    let model = ext.model().as_ref();
    let d = model.deficiency_index();
    let mut xs = Vec::with_capacity(probes.len());
    let mut ys = Vec::with_capacity(probes.len());
    let mut scale: f64 = 0.0;
    for g in probes {
        if !ext.contains(g) {
            return Err(Error::NotInDomain { extension: ext.name().to_string() });
        }
        let shifted = model.apply_shifted(g, z.conj());
        scale = scale.max(shifted.norm());
        xs.push(kernel_coordinates(model, z, &shifted)?);
        ys.push(kernel_coordinates(model, z.conj(), &model.apply_shifted(g, z))?);
    }
    let x = ComplexMatrix::from_columns(d, &xs);
    let y = ComplexMatrix::from_columns(d, &ys);
    let rank = if probes.is_empty() || scale == 0.0 {
        0
    } else {
        singular_values(&x).iter().filter(|&&s| s > RANK_TOL * scale).count()
    };
    if rank < d {
        return Err(Error::InsufficientProbes { rank, needed: d });
    }
    let u = y.matmul(&pseudo_inverse(&x, RANK_TOL))?;
    let fit_residual = u.matmul(&x)?.sub(&y)?.max_abs() / scale;
    let mut param = VnParameter::new(z, u)?;
    param.fit_residual = fit_residual;
    Ok(param)
}

/// Whether `g = f + u - U u` for some `f ∈ D(S̄)`, `u ∈ ker(S* - z)`.
pub fn vn_contains(model: &dyn Model, vn: &VnParameter, g: &HilbertElement) -> bool {
    let Ok((u, v)) = split_at(model, g, vn.z) else { return false };
    let (Ok(cu), Ok(cv)) = (kernel_coordinates(model, vn.z, &u), kernel_coordinates(model, vn.z.conj(), &v)) else {
        return false;
    };
    let Ok(mapped) = vn.matrix.mul_vec(&cu) else { return false };
    let scale = cu.iter().chain(&cv).map(|c| c.norm()).fold(1.0, f64::max);
    mapped.iter().zip(&cv).all(|(a, b)| (a - b).norm() <= TRACE_TOL * scale)
}

/// `e_j - U e_j` for each deficiency basis vector: elements spanning the domain modulo `D(S̄)`.
pub fn vn_spanning_probes(model: &dyn Model, vn: &VnParameter) -> Result<Vec<HilbertElement>> {
    let from = model.deficiency_basis(vn.z)?;
    let to = model.deficiency_basis(vn.z.conj())?;
    let n = model.channel_count();
    Ok((0..from.len())
        .map(|j| {
            let image = HilbertElement::combination(n, &vn.matrix.column(j), &to);
            &from[j] - &image
        })
        .collect())
}

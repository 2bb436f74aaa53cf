//! The two operator families: `-d^2/dx^2 + 1` on the half-line, and two
//! decoupled copies on `L^2(R-) ⊕ L^2(R+)`. Both have lower bound 1, so the
//! closure is invertible with `|S^{-1}| <= 1` and the Friedrichs extension
//! (Dirichlet condition) serves as the distinguished extension.
//!
//! The left half-line is stored reflected, `g_-(x) = ǧ(-x)`, so every channel
//! is an [`ExpPoly`] on `R+`; only the derivative trace changes sign.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{self, KvbParameter, VnParameter};
use crate::exppoly::{decay_rate, BoundaryCondition, ExpPoly};
use crate::linalg::{null_space, ComplexMatrix, InnerProductSpace};
use crate::tol::TRACE_TOL;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Element of the model Hilbert space: one [`ExpPoly`] per channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertElement {
    channels: Vec<ExpPoly>,
}

impl HilbertElement {
    pub fn new(channels: Vec<ExpPoly>) -> Self {
        HilbertElement { channels }
    }

    pub fn zero(channel_count: usize) -> Self {
        HilbertElement { channels: vec![ExpPoly::zero(); channel_count] }
    }

    /// `p` on channel `index`, zero elsewhere.
    pub fn on_channel(channel_count: usize, index: usize, p: ExpPoly) -> Self {
        let mut g = Self::zero(channel_count);
        g.channels[index] = p;
        g
    }

    pub fn single(p: ExpPoly) -> Self {
        HilbertElement { channels: vec![p] }
    }

    pub fn pair(left_reflected: ExpPoly, right: ExpPoly) -> Self {
        HilbertElement { channels: vec![left_reflected, right] }
    }

    pub fn channels(&self) -> &[ExpPoly] {
        &self.channels
    }

    pub fn channel(&self, i: usize) -> &ExpPoly {
        &self.channels[i]
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn map(&self, f: impl Fn(&ExpPoly) -> ExpPoly) -> Self {
        HilbertElement { channels: self.channels.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&ExpPoly) -> Result<ExpPoly>) -> Result<Self> {
        Ok(HilbertElement { channels: self.channels.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|p| p.scale(c))
    }

    pub fn is_zero(&self) -> bool {
        self.channels.iter().all(ExpPoly::is_zero)
    }

    pub fn max_coeff(&self) -> f64 {
        self.channels.iter().map(ExpPoly::max_coeff).fold(0.0, f64::max)
    }

    /// Sum of `coeffs[i] * vectors[i]`; `channel_count` fixes the shape of an empty sum.
    pub fn combination(channel_count: usize, coeffs: &[Complex64], vectors: &[HilbertElement]) -> Self {
        coeffs.iter().zip(vectors).fold(Self::zero(channel_count), |acc, (&c, v)| &acc + &v.scale(c))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&ExpPoly, &ExpPoly) -> ExpPoly) -> Self {
        assert_eq!(self.channels.len(), other.channels.len(), "channel count mismatch");
        HilbertElement { channels: self.channels.iter().zip(&other.channels).map(|(a, b)| f(a, b)).collect() }
    }
}

impl InnerProductSpace for HilbertElement {
    fn inner(&self, other: &Self) -> Complex64 {
        self.channels.iter().zip(&other.channels).map(|(a, b)| a.inner_product(b)).sum()
    }

    fn axpy(&mut self, a: Complex64, x: &Self) {
        *self = &*self + &x.scale(a);
    }

    fn scaled(&self, a: Complex64) -> Self {
        self.scale(a)
    }
}

impl Add for &HilbertElement {
    type Output = HilbertElement;
    fn add(self, rhs: &HilbertElement) -> HilbertElement {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &HilbertElement {
    type Output = HilbertElement;
    fn sub(self, rhs: &HilbertElement) -> HilbertElement {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Add for HilbertElement {
    type Output = HilbertElement;
    fn add(self, rhs: HilbertElement) -> HilbertElement {
        &self + &rhs
    }
}

impl Sub for HilbertElement {
    type Output = HilbertElement;
    fn sub(self, rhs: HilbertElement) -> HilbertElement {
        &self - &rhs
    }
}

impl Neg for &HilbertElement {
    type Output = HilbertElement;
    fn neg(self) -> HilbertElement {
        self.map(|p| -p)
    }
}

impl Mul<Complex64> for &HilbertElement {
    type Output = HilbertElement;
    fn mul(self, c: Complex64) -> HilbertElement {
        self.scale(c)
    }
}

impl fmt::Display for HilbertElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.channels.iter().map(|p| format!("[{p}]")).collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// Physical boundary values `(g(0), g'(0))` per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub channels: Vec<(Complex64, Complex64)>,
}

impl BoundaryTrace {
    /// `(v_0, d_0, v_1, d_1, ...)`
    pub fn as_vector(&self) -> Vec<Complex64> {
        self.channels.iter().flat_map(|&(v, d)| [v, d]).collect()
    }
}

/// Orientation of a channel relative to the stored `R+` representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Function on `R+`, stored as is.
    Right,
    /// Function on `R-`, stored as `x -> g(-x)`.
    ReflectedLeft,
}

impl Orientation {
    fn derivative_sign(self) -> f64 {
        match self {
            Orientation::Right => 1.0,
            Orientation::ReflectedLeft => -1.0,
        }
    }
}

/// Operator family descriptor.
///
/// `S` is symmetric with `0` in the resolvent set of its closure; `S*` acts on
/// every [`HilbertElement`], `S_D` is the distinguished extension.
pub trait Model: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn channel_count(&self) -> usize;
    fn deficiency_index(&self) -> usize;
    /// Lower bound `m(S)`; bounds `|S^{-1}|` and `|S_D^{-1}|` by `1 / m(S)`.
    fn lower_bound(&self) -> f64;

    /// `(S* - z) g`
    fn apply_shifted(&self, g: &HilbertElement, z: Complex64) -> HilbertElement;

    /// Orthonormal basis of `ker(S* - z)`.
    fn deficiency_basis(&self, z: Complex64) -> Result<Vec<HilbertElement>>;

    /// `S_D^{-1} f`
    fn distinguished_resolvent(&self, f: &HilbertElement) -> Result<HilbertElement>;

    /// Inverse of the closure on its range; `NotInRange` otherwise.
    fn closure_solve(&self, f: &HilbertElement) -> Result<HilbertElement>;

    fn boundary_trace(&self, g: &HilbertElement) -> BoundaryTrace;

    /// Whether `g` lies in the domain of the closure.
    fn closure_membership(&self, g: &HilbertElement) -> bool;

    /// Boundary form `J` with `<S*g, h> - <g, S*h> = trace(g)^H J trace(h)`.
    fn boundary_form(&self) -> ComplexMatrix;

    fn apply_adjoint(&self, g: &HilbertElement) -> HilbertElement {
        self.apply_shifted(g, ZERO)
    }

    /// Rigorous bound on `|S^{-1}|` (closure inverse).
    fn closure_inverse_bound(&self) -> f64 {
        1.0 / self.lower_bound()
    }

    /// Rigorous bound on `|S_D^{-1}|`.
    fn distinguished_inverse_bound(&self) -> f64 {
        1.0 / self.lower_bound()
    }

    /// Random element of the closure domain (vanishing traces on every channel).
    fn random_closure_element(&self, rng: &mut dyn rand::RngCore) -> HilbertElement;

    /// Element with prescribed physical boundary trace `(v_0, d_0, v_1, d_1, ...)`.
    fn element_with_trace(&self, trace: &[Complex64], rate: f64) -> HilbertElement;
}

/// `-d^2/dx^2 + 1` on one or two half-lines, decoupled at the origin.
#[derive(Debug, Clone)]
pub struct SchrodingerModel {
    name: String,
    orientations: Vec<Orientation>,
}

pub fn make_halfline_model() -> SchrodingerModel {
    SchrodingerModel { name: "halfline".into(), orientations: vec![Orientation::Right] }
}

pub fn make_twohalflines_model() -> SchrodingerModel {
    SchrodingerModel {
        name: "twohalflines".into(),
        orientations: vec![Orientation::ReflectedLeft, Orientation::Right],
    }
}

/// Model by CLI name.
pub fn model_by_name(name: &str) -> Result<Arc<dyn Model>> {
    match name {
        "halfline" => Ok(Arc::new(make_halfline_model())),
        "twohalflines" => Ok(Arc::new(make_twohalflines_model())),
        other => Err(Error::Config(format!("unknown model `{other}` (expected halfline or twohalflines)"))),
    }
}

impl SchrodingerModel {
    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    fn check_shape(&self, g: &HilbertElement) {
        assert_eq!(g.channel_count(), self.orientations.len(), "element has the wrong number of channels");
    }
}

impl Model for SchrodingerModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn channel_count(&self) -> usize {
        self.orientations.len()
    }

    fn deficiency_index(&self) -> usize {
        self.orientations.len()
    }

    fn lower_bound(&self) -> f64 {
        1.0
    }

    fn apply_shifted(&self, g: &HilbertElement, z: Complex64) -> HilbertElement {
        self.check_shape(g);
        // reflection commutes with d^2/dx^2
        g.map(|p| p.apply_shifted(z))
    }

    fn deficiency_basis(&self, z: Complex64) -> Result<Vec<HilbertElement>> {
        let k = decay_rate(z)?;
        // |e^{-kx}|^2 = 1 / (2 Re k)
        let unit = ExpPoly::single(Complex64::new((2.0 * k.re).sqrt(), 0.0), 0, k);
        let n = self.channel_count();
        Ok((0..n).map(|c| HilbertElement::on_channel(n, c, unit.clone())).collect())
    }

    fn distinguished_resolvent(&self, f: &HilbertElement) -> Result<HilbertElement> {
        self.check_shape(f);
        f.try_map(|p| p.solve_resolvent(ZERO, BoundaryCondition::Dirichlet))
    }

    fn closure_solve(&self, f: &HilbertElement) -> Result<HilbertElement> {
        self.check_shape(f);
        f.try_map(|p| p.solve_resolvent(ZERO, BoundaryCondition::DoubleZero))
    }

    fn boundary_trace(&self, g: &HilbertElement) -> BoundaryTrace {
        self.check_shape(g);
        BoundaryTrace {
            channels: g
                .channels()
                .iter()
                .zip(&self.orientations)
                .map(|(p, o)| {
                    let (v, d) = p.boundary_values();
                    (v, d * o.derivative_sign())
                })
                .collect(),
        }
    }

    fn closure_membership(&self, g: &HilbertElement) -> bool {
        self.check_shape(g);
        g.channels().iter().all(|p| {
            let (v, d) = p.boundary_values();
            let tol = TRACE_TOL * p.trace_scale().max(1.0);
            v.norm() <= tol && d.norm() <= tol
        })
    }

    fn boundary_form(&self) -> ComplexMatrix {
        // right channel: conj(g'(0)) h(0) - conj(g(0)) h'(0); left channel: opposite sign
        let n = self.channel_count();
        let mut j = ComplexMatrix::zeros(2 * n, 2 * n);
        for (c, o) in self.orientations.iter().enumerate() {
            let s = o.derivative_sign();
            j[(2 * c + 1, 2 * c)] = Complex64::new(s, 0.0);
            j[(2 * c, 2 * c + 1)] = Complex64::new(-s, 0.0);
        }
        j
    }

    fn random_closure_element(&self, rng: &mut dyn rand::RngCore) -> HilbertElement {
        let n = self.channel_count();
        HilbertElement::new(
            (0..n)
                .map(|_| {
                    let mut p = ExpPoly::zero();
                    for power in [2u32, 3] {
                        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        let r = Complex64::new(rng.gen_range(0.7..2.0), rng.gen_range(-0.5..0.5));
                        p = &p + &ExpPoly::single(c, power, r);
                    }
                    p
                })
                .collect(),
        )
    }

    fn element_with_trace(&self, trace: &[Complex64], rate: f64) -> HilbertElement {
        assert_eq!(trace.len(), 2 * self.channel_count(), "trace has the wrong length");
        HilbertElement::new(
            self.orientations
                .iter()
                .enumerate()
                .map(|(c, o)| {
                    let v = trace[2 * c];
                    let d = trace[2 * c + 1] * o.derivative_sign();
                    // (1 + r x) e^{-r x} has traces (1, 0); x e^{-r x} has (0, 1)
                    let value_part = &ExpPoly::real(1.0, 0, rate) + &ExpPoly::real(rate, 1, rate);
                    &value_part.scale(v) + &ExpPoly::real(1.0, 1, rate).scale(d)
                })
                .collect(),
        )
    }
}

/// How membership in an extension domain is decided.
#[derive(Debug, Clone)]
pub enum Membership {
    /// `rows * trace(g) = 0` for a `d x 2d` row matrix of boundary conditions.
    Boundary(ComplexMatrix),
    /// `g = f + S_D^{-1}(Tu + w) + u` for the given relative parameter.
    Kvb(KvbParameter),
    /// `g = f + u - U u` for the given unitary label.
    Vn(VnParameter),
}

/// A self-adjoint extension `S~ = S*|D(S~)`.
#[derive(Debug, Clone)]
pub struct Extension {
    name: String,
    model: Arc<dyn Model>,
    membership: Membership,
}

impl Extension {
    /// Extension cut out by linear boundary conditions on the trace vector.
    ///
    /// The conditions must have rank `d` and annihilate a Lagrangian subspace
    /// of the boundary form, which is what self-adjointness means here.
    pub fn from_boundary_conditions(name: &str, model: Arc<dyn Model>, rows: ComplexMatrix) -> Result<Self> {
        let d = model.deficiency_index();
        if rows.rows() != d || rows.cols() != 2 * d {
            return Err(Error::DimensionMismatch(format!(
                "boundary conditions must be {d}x{}, got {}x{}",
                2 * d,
                rows.rows(),
                rows.cols()
            )));
        }
        let kernel = null_space(&rows, 1e-10);
        if kernel.len() != d {
            return Err(Error::DimensionMismatch(format!("boundary conditions have rank {}", 2 * d - kernel.len())));
        }
        let basis = ComplexMatrix::from_columns(2 * d, &kernel);
        let form = basis.adjoint().matmul(&model.boundary_form())?.matmul(&basis)?;
        if form.max_abs() > 1e-10 {
            return Err(Error::ConsistencyFailure {
                what: "boundary conditions do not define a self-adjoint extension",
                residual: form.max_abs(),
            });
        }
        Ok(Extension { name: name.into(), model, membership: Membership::Boundary(rows) })
    }

    /// Extension `S_T` labelled by a relative parameter.
    pub fn from_kvb(name: &str, model: Arc<dyn Model>, kvb: KvbParameter) -> Self {
        Extension { name: name.into(), model, membership: Membership::Kvb(kvb) }
    }

    /// Extension `S_U` labelled by a unitary at `z = vn.z`.
    pub fn from_vn(name: &str, model: Arc<dyn Model>, vn: VnParameter) -> Self {
        Extension { name: name.into(), model, membership: Membership::Vn(vn) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn model(&self) -> &Arc<dyn Model> {
        &self.model
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }

    pub fn contains(&self, g: &HilbertElement) -> bool {
        match &self.membership {
            Membership::Boundary(rows) => {
                let trace = self.model.boundary_trace(g).as_vector();
                let scale = g.channels().iter().map(ExpPoly::trace_scale).fold(1.0, f64::max);
                let residual = rows.mul_vec(&trace).expect("trace length matches");
                let row_scale = rows.max_abs().max(1.0);
                residual.iter().all(|r| r.norm() <= TRACE_TOL * scale * row_scale)
            }
            Membership::Kvb(kvb) => calculus::kvb_contains(self.model.as_ref(), kvb, g),
            Membership::Vn(vn) => calculus::vn_contains(self.model.as_ref(), vn, g),
        }
    }

    /// `S~ g`, defined only on the extension domain.
    pub fn apply(&self, g: &HilbertElement) -> Result<HilbertElement> {
        if !self.contains(g) {
            return Err(Error::NotInDomain { extension: self.name.clone() });
        }
        Ok(self.model.apply_adjoint(g))
    }

    /// `count` elements of the domain whose images span every deficiency space.
    ///
    /// The first `d` probes realise a basis of the admissible traces (rate 1);
    /// later ones mix those traces with random rates and add random closure
    /// elements.
    pub fn domain_probes(&self, count: usize, rng: &mut impl Rng) -> Result<Vec<HilbertElement>> {
        let d = self.model.deficiency_index();
        let base: Vec<HilbertElement> = match &self.membership {
            Membership::Boundary(rows) => {
                null_space(rows, 1e-10).iter().map(|tau| self.model.element_with_trace(tau, 1.0)).collect()
            }
            Membership::Kvb(kvb) => calculus::kvb_spanning_probes(self.model.as_ref(), kvb)?,
            Membership::Vn(vn) => calculus::vn_spanning_probes(self.model.as_ref(), vn)?,
        };
        let mut probes: Vec<HilbertElement> = base.iter().take(count).cloned().collect();
        while probes.len() < count {
            let mix: Vec<Complex64> =
                (0..d).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let g = match &self.membership {
                Membership::Boundary(rows) => {
                    let kernel = null_space(rows, 1e-10);
                    let tau: Vec<Complex64> = (0..2 * d).map(|i| kernel.iter().zip(&mix).map(|(k, m)| k[i] * m).sum()).collect();
                    self.model.element_with_trace(&tau, rng.gen_range(0.7..1.8))
                }
                Membership::Kvb(_) | Membership::Vn(_) => {
                    HilbertElement::combination(self.model.channel_count(), &mix, &base)
                }
            };
            probes.push(&g + &self.model.random_closure_element(rng));
        }
        Ok(probes)
    }
}

/// Friedrichs extension: vanishing value trace on every channel.
pub fn make_friedrichs_extension(model: Arc<dyn Model>) -> Extension {
    let n = model.channel_count();
    let rows = ComplexMatrix::from_fn(n, 2 * n, |i, j| if j == 2 * i { Complex64::new(1.0, 0.0) } else { ZERO });
    Extension::from_boundary_conditions("friedrichs", model, rows).expect("Dirichlet conditions are self-adjoint")
}

/// `S_alpha` on two half-lines: `g_+(0) = g_-(0) = g_0`, `g_+'(0) - g_-'(0) = alpha g_0`.
pub fn make_salpha_extension(alpha: f64) -> Extension {
    let model: Arc<dyn Model> = Arc::new(make_twohalflines_model());
    // trace layout (g_-(0), g_-'(0), g_+(0), g_+'(0))
    let rows = ComplexMatrix::from_real_rows(&[&[-1.0, 0.0, 1.0, 0.0], &[0.0, -1.0, -alpha, 1.0]]);
    Extension::from_boundary_conditions(&format!("salpha:{alpha}"), model, rows)
        .expect("delta coupling conditions are self-adjoint")
}

/// Extension from its CLI name: `friedrichs` or `salpha:<alpha>` (two half-lines only).
pub fn extension_by_spec(model: Arc<dyn Model>, spec: &str) -> Result<Extension> {
    if spec == "friedrichs" {
        return Ok(make_friedrichs_extension(model));
    }
    if let Some(rest) = spec.strip_prefix("salpha:") {
        let alpha: f64 = rest.parse().map_err(|_| Error::Config(format!("bad alpha in `{spec}`")))?;
        if model.channel_count() != 2 {
            return Err(Error::Config("salpha extensions need the twohalflines model".into()));
        }
        return Ok(make_salpha_extension(alpha));
    }
    Err(Error::Config(format!("unknown extension `{spec}` (expected friedrichs or salpha:<alpha>)")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gram;
    use crate::quadrature;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kappa(eps: f64) -> f64 {
        (1.0 + eps * eps).powf(0.125) * (eps.atan() / 2.0).cos().sqrt()
    }

    #[test]
    fn halfline_deficiency_basis_at_zero() {
        let m = make_halfline_model();
        let b = m.deficiency_basis(ZERO).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0].channel(0) - &ExpPoly::real(2f64.sqrt(), 0, 1.0)).max_coeff() < 1e-15);
    }

    #[test]
    fn halfline_deficiency_normalisation_matches_kappa() {
        let m = make_halfline_model();
        for eps in [1e-5, 1e-3, 0.1, 0.5] {
            let b = m.deficiency_basis(c(0.0, eps)).unwrap();
            let t = b[0].channel(0).terms()[0];
            assert!((t.coeff.re - 2f64.sqrt() * kappa(eps)).abs() < 1e-14);
            assert!((t.rate - c(1.0, -eps).sqrt()).norm() < 1e-15);
            let g = gram(&b, |a, b| a.inner(b));
            assert!((g[(0, 0)].re - 1.0).abs() < 1e-12);
        }
        // quadrature oracle for the unit norm at eps = 0.5
        let b = m.deficiency_basis(c(0.0, 0.5)).unwrap();
        let q = quadrature::inner_product(b[0].channel(0), b[0].channel(0));
        assert!((q.re - 1.0).abs() < 1e-11);
    }

    #[test]
    fn deficiency_vectors_are_kernel_vectors_and_orthonormal() {
        let models: Vec<Box<dyn Model>> = vec![Box::new(make_halfline_model()), Box::new(make_twohalflines_model())];
        for m in &models {
            for z in [ZERO, c(0.0, 0.3), c(0.0, -0.3), c(0.0, 1e-4)] {
                let b = m.deficiency_basis(z).unwrap();
                assert_eq!(b.len(), m.deficiency_index());
                for v in &b {
                    assert!(m.apply_shifted(v, z).max_coeff() < 1e-15);
                }
                let g = gram(&b, |a, b| a.inner(b));
                assert!(g.sub(&ComplexMatrix::identity(b.len())).unwrap().max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn halfline_closure_membership() {
        let m = make_halfline_model();
        assert!(m.closure_membership(&HilbertElement::single(ExpPoly::real(1.0, 2, 1.0))));
        assert!(!m.closure_membership(&HilbertElement::single(ExpPoly::real(1.0, 1, 1.0))));
    }

    #[test]
    fn twohalflines_shape_and_resolvent() {
        let m = make_twohalflines_model();
        assert_eq!(m.deficiency_index(), 2);
        let f = HilbertElement::pair(ExpPoly::zero(), ExpPoly::real(1.0, 0, 1.0));
        let u = m.distinguished_resolvent(&f).unwrap();
        assert_eq!(u, HilbertElement::pair(ExpPoly::zero(), ExpPoly::real(0.5, 1, 1.0)));
        let b0 = m.deficiency_basis(ZERO).unwrap();
        let s2 = ExpPoly::real(2f64.sqrt(), 0, 1.0);
        assert_eq!(b0[0], HilbertElement::pair(s2.clone(), ExpPoly::zero()));
        assert_eq!(b0[1], HilbertElement::pair(ExpPoly::zero(), s2));
    }

    #[test]
    fn trace_examples() {
        let h = make_halfline_model();
        let t = h.boundary_trace(&HilbertElement::single(ExpPoly::real(0.5, 1, 1.0)));
        assert_eq!(t.as_vector(), vec![ZERO, c(0.5, 0.0)]);
        let m = make_twohalflines_model();
        let e = ExpPoly::real(1.0, 0, 1.0);
        let t = m.boundary_trace(&HilbertElement::pair(e.clone(), e));
        assert_eq!(t.as_vector(), vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        let t = m.boundary_trace(&HilbertElement::pair(ExpPoly::zero(), ExpPoly::real(1.0, 1, 1.0)));
        assert_eq!(t.as_vector(), vec![ZERO, ZERO, ZERO, c(1.0, 0.0)]);
    }

    #[test]
    fn friedrichs_membership_and_action() {
        let h: Arc<dyn Model> = Arc::new(make_halfline_model());
        let f = make_friedrichs_extension(h);
        let g = HilbertElement::single(ExpPoly::real(0.5, 1, 1.0));
        assert!(f.contains(&g));
        assert_eq!(f.apply(&g).unwrap(), HilbertElement::single(ExpPoly::real(1.0, 0, 1.0)));
        let e = HilbertElement::single(ExpPoly::real(1.0, 0, 1.0));
        assert!(!f.contains(&e));
        assert!(matches!(f.apply(&e), Err(Error::NotInDomain { .. })));

        let two: Arc<dyn Model> = Arc::new(make_twohalflines_model());
        let f2 = make_friedrichs_extension(two);
        // -x e^{x} on R- is stored as x e^{-x}
        let g = HilbertElement::pair(ExpPoly::real(1.0, 1, 1.0), ExpPoly::real(1.0, 1, 1.0));
        assert!(f2.contains(&g));
    }

    #[test]
    fn salpha_membership_of_kernel_pair() {
        let e = ExpPoly::real(1.0, 0, 1.0);
        let g = HilbertElement::pair(e.clone(), e);
        // g_0 = 1, jump = -1 - 1 = -2
        assert!(make_salpha_extension(-2.0).contains(&g));
        for alpha in [-1.0, 0.0, 1.0, 3.0] {
            assert!(!make_salpha_extension(alpha).contains(&g));
        }
    }

    #[test]
    fn salpha_zero_membership_solved_for_coefficient() {
        // (e^{x} + c(-x e^{x})) ⊕ (e^{-x} + c x e^{-x}): jump = 2(c - 1) = 0 at alpha = 0
        let e = ExpPoly::real(1.0, 0, 1.0);
        let xe = ExpPoly::real(1.0, 1, 1.0);
        let build = |cc: f64| HilbertElement::pair(&e + &xe.scale_real(cc), &e + &xe.scale_real(cc));
        let s0 = make_salpha_extension(0.0);
        assert!(s0.contains(&build(1.0)));
        assert!(!s0.contains(&build(0.5)));
    }

    #[test]
    fn salpha_contains_dirichlet_elements_with_matching_jump() {
        let xe = ExpPoly::real(1.0, 1, 1.0);
        // g_0 = 0 and g_+'(0) - g_-'(0) = 1 - 1 = 0
        let g = HilbertElement::pair(-&xe, xe);
        for alpha in [-2.0, 0.5, 7.0] {
            assert!(make_salpha_extension(alpha).contains(&g));
        }
    }

    #[test]
    fn salpha_is_symmetric_on_random_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for alpha in [-2.0, 0.0, 1.5] {
            let ext = make_salpha_extension(alpha);
            let probes = ext.domain_probes(5, &mut rng).unwrap();
            for g in &probes {
                assert!(ext.contains(g));
                for h in &probes {
                    let lhs = ext.apply(g).unwrap().inner(h);
                    let rhs = g.inner(&ext.apply(h).unwrap());
                    assert!((lhs - rhs).norm() < 1e-10, "alpha={alpha}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn non_self_adjoint_conditions_rejected() {
        let h: Arc<dyn Model> = Arc::new(make_halfline_model());
        // g'(0) = i g(0) is not self-adjoint
        let rows = ComplexMatrix::from_row_major(1, 2, vec![c(0.0, -1.0), c(1.0, 0.0)]).unwrap();
        assert!(Extension::from_boundary_conditions("bad", h.clone(), rows).is_err());
        // g'(0) = 3 g(0) is (Robin)
        let rows = ComplexMatrix::from_real_rows(&[&[-3.0, 1.0]]);
        assert!(Extension::from_boundary_conditions("robin", h, rows).is_ok());
    }

    #[test]
    fn reflection_preserves_inner_products() {
        // direct integral on R-: int_{-inf}^0 conj(e^{2x}) x e^{x} dx = -1/9
        let m = make_twohalflines_model();
        let a = HilbertElement::pair(ExpPoly::real(1.0, 0, 2.0), ExpPoly::zero());
        // x e^{x} on R- is stored as (-x) e^{-x}
        let b = HilbertElement::pair(ExpPoly::real(-1.0, 1, 1.0), ExpPoly::zero());
        assert!((a.inner(&b) - c(-1.0 / 9.0, 0.0)).norm() < 1e-15);
        let _ = m;
    }

    #[test]
    fn closure_solve_succeeds_exactly_off_the_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let models: Vec<Box<dyn Model>> = vec![Box::new(make_halfline_model()), Box::new(make_twohalflines_model())];
        for m in &models {
            let ker = m.deficiency_basis(ZERO).unwrap();
            for _ in 0..5 {
                let raw = &m.random_closure_element(&mut rng) + &m.element_with_trace(
                    &(0..2 * m.channel_count()).map(|_| c(rng.gen_range(-1.0..1.0), 0.3)).collect::<Vec<_>>(),
                    1.3,
                );
                // project onto (ker S*)^perp = ran S
                let coeffs: Vec<Complex64> = ker.iter().map(|e| e.inner(&raw)).collect();
                let f = &raw - &HilbertElement::combination(m.channel_count(), &coeffs, &ker);
                let u = m.closure_solve(&f).unwrap();
                assert!(m.closure_membership(&u));
                assert!((&m.apply_adjoint(&u) - &f).max_coeff() < 1e-12);
                assert!(matches!(m.closure_solve(&raw), Err(Error::NotInRange { .. })));
            }
        }
    }
}

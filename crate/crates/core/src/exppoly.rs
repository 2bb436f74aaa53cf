//! Exact algebra of exponential polynomials `sum_k c_k x^{m_k} e^{-lambda_k x}`
//! on the half-line, `Re lambda_k > 0`.
//!
//! Every such function lies in `H^2(R+)` together with all its derivatives, so
//! the class is closed under the adjoint action `-d^2/dx^2 + 1`, under the
//! Dirichlet resolvent, and under the orthogonal projections onto deficiency
//! spaces (which are spanned by pure exponentials). Inner products use the
//! closed form `int_0^inf x^n e^{-w x} dx = n! / w^{n+1}`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::{self, DdComplex};
use crate::tol::{COEFF_TOL, RATE_TOL, TRACE_TOL};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One term `coeff * x^power * e^{-rate x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPolyTerm {
    pub coeff: Complex64,
    pub power: u32,
    pub rate: Complex64,
}

impl ExpPolyTerm {
    pub fn new(coeff: Complex64, power: u32, rate: Complex64) -> Result<Self> {
        if !(rate.re > 0.0) || !rate.im.is_finite() {
            return Err(Error::NonDecayingRate { re: rate.re, im: rate.im });
        }
        Ok(ExpPolyTerm { coeff, power, rate })
    }

    fn same_slot(&self, other: &ExpPolyTerm) -> bool {
        self.power == other.power && (self.rate - other.rate).norm() <= RATE_TOL * (1.0 + self.rate.norm())
    }
}

/// Canonical exponential polynomial.
///
/// Canonical form: terms sorted by `(Re rate, Im rate, power)`, no two terms
/// in the same `(power, rate)` slot, no negligible coefficients.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<TermRecord>", into = "Vec<TermRecord>")]
pub struct ExpPoly {
    terms: Vec<ExpPolyTerm>,
}

/// JSON record for one term.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TermRecord {
    pub re_coeff: f64,
    pub im_coeff: f64,
    pub power: u32,
    pub re_rate: f64,
    pub im_rate: f64,
}

impl TryFrom<Vec<TermRecord>> for ExpPoly {
    type Error = Error;
    fn try_from(records: Vec<TermRecord>) -> Result<Self> {
        let terms = records
            .into_iter()
            .map(|r| {
                ExpPolyTerm::new(Complex64::new(r.re_coeff, r.im_coeff), r.power, Complex64::new(r.re_rate, r.im_rate))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpPoly::from_terms_unchecked(terms))
    }
}

impl From<ExpPoly> for Vec<TermRecord> {
    fn from(p: ExpPoly) -> Self {
        p.terms
            .iter()
            .map(|t| TermRecord {
                re_coeff: t.coeff.re,
                im_coeff: t.coeff.im,
                power: t.power,
                re_rate: t.rate.re,
                im_rate: t.rate.im,
            })
            .collect()
    }
}

/// Which boundary condition the resolvent solve imposes at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    /// `u(0) = 0`: the Friedrichs (Dirichlet) operator.
    Dirichlet,
    /// `u(0) = u'(0) = 0`: inverse of the closure on its range.
    DoubleZero,
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `1 - z - lambda^2` evaluated in double-double, rounded once.
///
/// Shared by the adjoint action and the resolvent so that the two are exact
/// inverses of each other at the representation level.
fn shift_factor(lambda: Complex64, z: Complex64) -> Complex64 {
    let l = DdComplex::from_c64(lambda);
    DdComplex::from_c64(Complex64::new(1.0, 0.0) - z).sub(l.mul(l)).to_c64()
}

/// Principal square root `sqrt(1 - z)`; the decay rate of `ker(S* - z)`.
pub fn decay_rate(z: Complex64) -> Result<Complex64> {
    let k = (Complex64::new(1.0, 0.0) - z).sqrt();
    if !(k.re > 0.0) {
        return Err(Error::UnsupportedSpectralPoint {
            re: z.re,
            im: z.im,
            reason: "sqrt(1 - z) has no decaying branch",
        });
    }
    Ok(k)
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    /// `coeff * x^power * e^{-rate x}`; panics if `Re rate <= 0`.
    pub fn single(coeff: Complex64, power: u32, rate: Complex64) -> Self {
        Self::try_single(coeff, power, rate).expect("exponential rate must have positive real part")
    }

    pub fn try_single(coeff: Complex64, power: u32, rate: Complex64) -> Result<Self> {
        Ok(Self::from_terms_unchecked(vec![ExpPolyTerm::new(coeff, power, rate)?]))
    }

    /// `e^{-rate x}`
    pub fn exp(rate: Complex64) -> Self {
        Self::single(Complex64::new(1.0, 0.0), 0, rate)
    }

    /// `coeff * x^power * e^{-rate x}` with a real rate.
    pub fn real(coeff: f64, power: u32, rate: f64) -> Self {
        Self::single(Complex64::new(coeff, 0.0), power, Complex64::new(rate, 0.0))
    }

    pub fn from_terms(terms: Vec<ExpPolyTerm>) -> Result<Self> {
        for t in &terms {
            ExpPolyTerm::new(t.coeff, t.power, t.rate)?;
        }
        Ok(Self::from_terms_unchecked(terms))
    }

    fn from_terms_unchecked(terms: Vec<ExpPolyTerm>) -> Self {
        let mut merged: Vec<ExpPolyTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            if t.coeff == ZERO {
                continue;
            }
            match merged.iter_mut().find(|m| m.same_slot(&t)) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        let largest = merged.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max);
        merged.retain(|t| t.coeff.norm() > COEFF_TOL * largest);
        merged.sort_by(term_order);
        ExpPoly { terms: merged }
    }

    pub fn terms(&self) -> &[ExpPolyTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == ZERO {
            return Self::zero();
        }
        Self::from_terms_unchecked(self.terms.iter().map(|t| ExpPolyTerm { coeff: t.coeff * c, ..*t }).collect())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Pointwise complex conjugate; rates go to their conjugates.
    pub fn conjugate(&self) -> Self {
        Self::from_terms_unchecked(
            self.terms
                .iter()
                .map(|t| ExpPolyTerm { coeff: t.coeff.conj(), power: t.power, rate: t.rate.conj() })
                .collect(),
        )
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|t| t.coeff * x.powi(t.power as i32) * (-t.rate * x).exp()).sum()
    }

    pub fn differentiate(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.power > 0 {
                out.push(ExpPolyTerm { coeff: t.coeff * f64::from(t.power), power: t.power - 1, rate: t.rate });
            }
            out.push(ExpPolyTerm { coeff: -t.coeff * t.rate, ..*t });
        }
        Self::from_terms_unchecked(out)
    }

    /// `(p(0), p'(0))`, summed in double-double.
    pub fn boundary_values(&self) -> (Complex64, Complex64) {
        let value = dd::sum(self.terms.iter().filter(|t| t.power == 0).map(|t| t.coeff));
        let slope = dd::sum(self.terms.iter().filter_map(|t| match t.power {
            0 => Some(-t.coeff * t.rate),
            1 => Some(t.coeff),
            _ => None,
        }));
        (value, slope)
    }

    /// Magnitude against which trace cancellation is judged.
    pub fn trace_scale(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.power <= 1)
            .map(|t| t.coeff.norm() * (1.0 + t.rate.norm()))
            .sum()
    }

    /// `<p, q> = int_0^inf conj(p) q dx`.
    pub fn inner_product(&self, other: &ExpPoly) -> Complex64 {
        let mut acc = DdComplex::ZERO;
        for a in &self.terms {
            for b in &other.terms {
                let n = a.power + b.power;
                let w = DdComplex::from_c64(a.rate.conj()).add(DdComplex::from_c64(b.rate));
                let coeff = DdComplex::from_c64(a.coeff.conj()).mul(DdComplex::from_c64(b.coeff));
                let term = coeff.scale(factorial(n)).div(w.powi(n + 1));
                acc = acc.add(term);
            }
        }
        acc.to_c64()
    }

    pub fn norm(&self) -> f64 {
        self.inner_product(self).re.max(0.0).sqrt()
    }

    /// `(S* - z) p = -p'' + (1 - z) p`.
    pub fn apply_shifted(&self, z: Complex64) -> Self {
        let mut out = Vec::with_capacity(3 * self.terms.len());
        for t in &self.terms {
            let m = t.power;
            out.push(ExpPolyTerm { coeff: t.coeff * shift_factor(t.rate, z), ..*t });
            if m >= 1 {
                out.push(ExpPolyTerm { coeff: t.coeff * t.rate * (2.0 * f64::from(m)), power: m - 1, rate: t.rate });
            }
            if m >= 2 {
                out.push(ExpPolyTerm { coeff: -t.coeff * f64::from(m * (m - 1)), power: m - 2, rate: t.rate });
            }
        }
        Self::from_terms_unchecked(out)
    }

    /// Decaying solution `u` of `(S* - z) u = f` under the given boundary condition.
    ///
    /// Accepted points: `z = 0`, or `z = ±i eps` with `0 < eps <= 0.5` for
    /// [`BoundaryCondition::Dirichlet`]; only `z = 0` for
    /// [`BoundaryCondition::DoubleZero`].
    pub fn solve_resolvent(&self, z: Complex64, bc: BoundaryCondition) -> Result<Self> {
        let accepted = z == ZERO || (z.re == 0.0 && z.im.abs() > 0.0 && z.im.abs() <= 0.5);
        if !accepted {
            return Err(Error::UnsupportedSpectralPoint {
                re: z.re,
                im: z.im,
                reason: "resolvent solves accept z = 0 or z = ±i eps with eps <= 0.5",
            });
        }
        if bc == BoundaryCondition::DoubleZero && z != ZERO {
            return Err(Error::UnsupportedSpectralPoint {
                re: z.re,
                im: z.im,
                reason: "the closure is only inverted at z = 0",
            });
        }
        let k = decay_rate(z)?;
        let mut out: Vec<ExpPolyTerm> = Vec::new();
        for t in &self.terms {
            out.extend(particular_solution(t, k, z));
        }
        let particular = Self::from_terms_unchecked(out);
        let (u0, _) = particular.boundary_values();
        let u = &particular - &ExpPoly::single(u0, 0, k);
        if bc == BoundaryCondition::DoubleZero {
            let (_, slope) = u.boundary_values();
            if slope.norm() > TRACE_TOL * u.trace_scale().max(1.0) {
                return Err(Error::NotInRange { residual: slope.norm() });
            }
        }
        Ok(u)
    }
}

/// Undetermined coefficients for one term `c x^m e^{-lambda x}` against
/// `-u'' + k^2 u`, raising the degree by one at resonance `lambda = k`.
fn particular_solution(t: &ExpPolyTerm, k: Complex64, z: Complex64) -> Vec<ExpPolyTerm> {
    let m = t.power as usize;
    let lambda = t.rate;
    let resonant = (lambda - k).norm() <= RATE_TOL * (1.0 + k.norm());
    // (-D^2 + k^2) x^j e^{-lambda x} = [s x^j + 2 lambda j x^{j-1} - j(j-1) x^{j-2}] e^{-lambda x}
    if !resonant {
        let s = shift_factor(lambda, z);
        let mut a = vec![ZERO; m + 3];
        for j in (0..=m).rev() {
            let target = if j == m { t.coeff } else { ZERO };
            let carry = lambda * (2.0 * (j + 1) as f64) * a[j + 1] - ((j + 2) * (j + 1)) as f64 * a[j + 2];
            a[j] = (target - carry) / s;
        }
        a.into_iter()
            .take(m + 1)
            .enumerate()
            .map(|(j, c)| ExpPolyTerm { coeff: c, power: j as u32, rate: lambda })
            .collect()
    } else {
        // s = 0: coefficient of x^j is 2 lambda (j+1) a_{j+1} - (j+2)(j+1) a_{j+2}
        let mut a = vec![ZERO; m + 3];
        for j in (0..=m).rev() {
            let target = if j == m { t.coeff } else { ZERO };
            a[j + 1] = (target + ((j + 2) * (j + 1)) as f64 * a[j + 2]) / (lambda * (2.0 * (j + 1) as f64));
        }
        a.into_iter()
            .take(m + 2)
            .enumerate()
            .skip(1)
            .map(|(j, c)| ExpPolyTerm { coeff: c, power: j as u32, rate: lambda })
            .collect()
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        ExpPoly::from_terms_unchecked(self.terms.iter().chain(&rhs.terms).copied().collect())
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: ExpPoly) -> ExpPoly {
        &self + &rhs
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        ExpPoly { terms: self.terms.iter().map(|t| ExpPolyTerm { coeff: -t.coeff, ..*t }).collect() }
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        -&self
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        &self - &rhs
    }
}

impl Mul<Complex64> for &ExpPoly {
    type Output = ExpPoly;
    fn mul(self, c: Complex64) -> ExpPoly {
        self.scale(c)
    }
}

impl Mul<Complex64> for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, c: Complex64) -> ExpPoly {
        self.scale(c)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", t.coeff.re, t.coeff.im)?;
            match t.power {
                0 => {}
                1 => write!(f, " x")?,
                m => write!(f, " x^{m}")?,
            }
            write!(f, " e^(-({:.6}{:+.6}i) x)", t.rate.re, t.rate.im)?;
        }
        Ok(())
    }
}

/// Lexicographic term order used by the canonical form.
pub fn term_order(a: &ExpPolyTerm, b: &ExpPolyTerm) -> Ordering {
    a.rate.re.total_cmp(&b.rate.re).then(a.rate.im.total_cmp(&b.rate.im)).then(a.power.cmp(&b.power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn add_cancels_to_empty() {
        let p = ExpPoly::real(1.0, 0, 1.0);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn scale_and_conjugate() {
        let p = ExpPoly::real(1.0, 1, 1.0).scale_real(2.0);
        assert_eq!(p, ExpPoly::real(2.0, 1, 1.0));
        let eps = 0.3;
        let k = c(1.0, -eps).sqrt();
        assert_eq!(ExpPoly::exp(k).conjugate(), ExpPoly::exp(c(1.0, eps).sqrt()));
    }

    #[test]
    fn rejects_growing_rate() {
        assert!(matches!(ExpPoly::try_single(c(1.0, 0.0), 0, c(-1.0, 0.0)), Err(Error::NonDecayingRate { .. })));
        assert!(ExpPoly::try_single(c(1.0, 0.0), 0, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn merges_nearby_rates_and_orders_terms() {
        let p = &ExpPoly::real(1.0, 0, 2.0) + &ExpPoly::real(1.0, 0, 1.0);
        let q = &p + &ExpPoly::real(1.0, 0, 1.0 + 1e-12);
        assert_eq!(q.terms().len(), 2);
        assert_eq!(q.terms()[0].rate.re, 1.0);
        assert!(close(q.terms()[0].coeff, c(2.0, 0.0), 1e-15));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(ExpPoly::real(1.0, 0, 1.0).differentiate(), ExpPoly::real(-1.0, 0, 1.0));
        assert_eq!(
            ExpPoly::real(1.0, 1, 1.0).differentiate(),
            &ExpPoly::real(1.0, 0, 1.0) - &ExpPoly::real(1.0, 1, 1.0)
        );
        assert_eq!(
            ExpPoly::real(1.0, 2, 2.0).differentiate(),
            &ExpPoly::real(2.0, 1, 2.0) - &ExpPoly::real(2.0, 2, 2.0)
        );
    }

    #[test]
    fn boundary_value_examples() {
        assert_eq!(ExpPoly::real(0.5, 1, 1.0).boundary_values(), (c(0.0, 0.0), c(0.5, 0.0)));
        let k = c(1.0, -0.2).sqrt();
        let (v, d) = ExpPoly::exp(k).boundary_values();
        assert_eq!(v, c(1.0, 0.0));
        assert!(close(d, -k, 1e-16));
        assert_eq!(ExpPoly::real(1.0, 2, 1.0).boundary_values(), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn inner_product_examples() {
        let e = ExpPoly::real(1.0, 0, 1.0);
        let xe = ExpPoly::real(1.0, 1, 1.0);
        assert!(close(e.inner_product(&e), c(0.5, 0.0), 1e-16));
        assert!(close(e.inner_product(&xe), c(0.25, 0.0), 1e-16));
        let p = ExpPoly::exp(c(1.0, 1.0));
        let exact = c(2.0, 1.0) / 5.0;
        assert!(close(p.inner_product(&e), exact, 1e-15));
        // oracle: numerical quadrature of conj(p) e
        let quad = quadrature::inner_product(&p, &e);
        assert!(close(quad, exact, 1e-11));
    }

    #[test]
    fn shifted_action_examples() {
        assert!(ExpPoly::real(1.0, 0, 1.0).apply_shifted(c(0.0, 0.0)).is_zero());
        for eps in [1e-5, 1e-3, 0.1, 0.5] {
            let k = c(1.0, -eps).sqrt();
            let r = ExpPoly::exp(k).apply_shifted(c(0.0, eps));
            assert!(r.max_coeff() < 1e-15, "eps={eps}: {r}");
        }
        let r = ExpPoly::real(0.5, 1, 1.0).apply_shifted(c(0.0, 0.0));
        assert_eq!(r, ExpPoly::real(1.0, 0, 1.0));
    }

    #[test]
    fn dirichlet_resolvent_examples() {
        let zero = c(0.0, 0.0);
        let u = ExpPoly::real(1.0, 0, 1.0).solve_resolvent(zero, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(u, ExpPoly::real(0.5, 1, 1.0));
        let u = ExpPoly::real(1.0, 0, 2.0).solve_resolvent(zero, BoundaryCondition::Dirichlet).unwrap();
        let expected = &ExpPoly::real(1.0 / 3.0, 0, 1.0) - &ExpPoly::real(1.0 / 3.0, 0, 2.0);
        assert!((&u - &expected).max_coeff() < 1e-15);
        // residual oracle
        let back = u.apply_shifted(zero);
        assert!((&back - &ExpPoly::real(1.0, 0, 2.0)).max_coeff() < 1e-15);
        assert!(u.boundary_values().0.norm() < 1e-16);
    }

    #[test]
    fn double_zero_rejects_kernel_vector() {
        let r = ExpPoly::real(1.0, 0, 1.0).solve_resolvent(c(0.0, 0.0), BoundaryCondition::DoubleZero);
        assert!(matches!(r, Err(Error::NotInRange { .. })));
    }

    #[test]
    fn double_zero_accepts_range_element() {
        // S* (x^2 e^{-x}) lies in ran of the closure
        let g = ExpPoly::real(1.0, 2, 1.0);
        let f = g.apply_shifted(c(0.0, 0.0));
        let u = f.solve_resolvent(c(0.0, 0.0), BoundaryCondition::DoubleZero).unwrap();
        assert!((&u - &g).max_coeff() < 1e-14);
    }

    #[test]
    fn unsupported_points_rejected() {
        let p = ExpPoly::real(1.0, 0, 1.0);
        assert!(p.solve_resolvent(c(0.3, 0.0), BoundaryCondition::Dirichlet).is_err());
        assert!(p.solve_resolvent(c(0.0, 0.7), BoundaryCondition::Dirichlet).is_err());
        assert!(p.solve_resolvent(c(0.0, 0.1), BoundaryCondition::DoubleZero).is_err());
    }

    #[test]
    fn resonant_higher_power() {
        // f = x^2 e^{-x} at z = 0 resonates with the homogeneous rate
        let f = ExpPoly::real(1.0, 2, 1.0);
        let u = f.solve_resolvent(c(0.0, 0.0), BoundaryCondition::Dirichlet).unwrap();
        assert!(u.terms().iter().any(|t| t.power == 3));
        assert!((&u.apply_shifted(c(0.0, 0.0)) - &f).max_coeff() < 1e-14);
    }

    #[test]
    fn json_schema_round_trip() {
        let p = &ExpPoly::single(c(1.5, -2.0), 2, c(0.7, 0.3)) + &ExpPoly::real(1.0, 0, 1.0);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"re_coeff\"") && s.contains("\"im_rate\""));
        let back: ExpPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"[{"re_coeff":1.0,"im_coeff":0.0,"power":0,"re_rate":-1.0,"im_rate":0.0}]"#;
        assert!(serde_json::from_str::<ExpPoly>(bad).is_err());
    }

    fn arb_exppoly() -> impl Strategy<Value = ExpPoly> {
        prop::collection::vec(
            (-2.0..2.0f64, -2.0..2.0f64, 0u32..4, 0.3..3.0f64, -2.0..2.0f64),
            0..4,
        )
        .prop_map(|ts| {
            ts.into_iter()
                .map(|(cr, ci, m, rr, ri)| ExpPoly::single(c(cr, ci), m, c(rr, ri)))
                .fold(ExpPoly::zero(), |a, b| &a + &b)
        })
    }

    proptest! {
        #[test]
        fn norm_is_real_nonnegative(p in arb_exppoly()) {
            let n = p.inner_product(&p);
            prop_assert!(n.im.abs() <= 1e-12 * n.re.abs().max(1e-300));
            prop_assert!(n.re >= 0.0);
            prop_assert_eq!(n.re == 0.0, p.is_zero());
        }

        #[test]
        fn inner_product_hermitian(p in arb_exppoly(), q in arb_exppoly()) {
            let a = p.inner_product(&q);
            let b = q.inner_product(&p).conj();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-12));
        }

        #[test]
        fn greens_identity(p in arb_exppoly(), q in arb_exppoly()) {
            let zero = c(0.0, 0.0);
            let lhs = p.apply_shifted(zero).inner_product(&q) - p.inner_product(&q.apply_shifted(zero));
            let (p0, p1) = p.boundary_values();
            let (q0, q1) = q.boundary_values();
            let rhs = p1.conj() * q0 - p0.conj() * q1;
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        }

        #[test]
        fn dirichlet_resolvent_is_right_inverse(p in arb_exppoly(), which in 0usize..5) {
            let z = [c(0.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.0, 1e-3), c(0.0, -1e-5)][which];
            let u = p.solve_resolvent(z, BoundaryCondition::Dirichlet).unwrap();
            let back = u.apply_shifted(z);
            let scale = p.max_coeff().max(1.0);
            // near-resonant rates give large coefficients in u; rounding scales with them
            let rounding = 1e-14 * u.max_coeff();
            prop_assert!((&back - &p).max_coeff() <= 1e-10 * scale + rounding);
            prop_assert!(u.boundary_values().0.norm() <= 1e-10 * scale + rounding);
        }
    }
}

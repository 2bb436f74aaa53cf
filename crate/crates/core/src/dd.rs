//! Double-double arithmetic for the few reductions that suffer cancellation.
//!
//! Vectors near `eps -> 0` are sums of terms with `O(1/eps)` coefficients
//! whose combination is `O(1)` or smaller; a Gram-formula norm of such a sum
//! cancels `O(1/eps^2)` contributions. Accumulating in ~106-bit precision
//! keeps those norms accurate to double precision of the represented function.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from_f64(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex { re: Dd::ZERO, im: Dd::ZERO };

    pub fn from_c64(z: Complex64) -> Self {
        DdComplex { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn add(self, o: Self) -> Self {
        DdComplex { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    pub fn neg(self) -> Self {
        DdComplex { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    pub fn mul(self, o: Self) -> Self {
        DdComplex {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn scale(self, s: f64) -> Self {
        let s = Dd::from_f64(s);
        DdComplex { re: self.re.mul(s), im: self.im.mul(s) }
    }

    pub fn div(self, o: Self) -> Self {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        let num = self.mul(DdComplex { re: o.re, im: o.im.neg() });
        DdComplex { re: num.re.div(den), im: num.im.div(den) }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut acc = DdComplex { re: Dd::from_f64(1.0), im: Dd::ZERO };
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Sum of complex doubles accumulated in double-double.
pub(crate) fn sum(values: impl IntoIterator<Item = Complex64>) -> Complex64 {
    values
        .into_iter()
        .fold(DdComplex::ZERO, |acc, v| acc.add(DdComplex::from_c64(v)))
        .to_c64()
}

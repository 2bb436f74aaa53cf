//! Adaptive Gauss-Kronrod quadrature, used as an independent oracle for the
//! closed-form inner products.

use num_complex::Complex64;

use crate::exppoly::ExpPoly;

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Adaptive integration of a complex function on `[a, b]` to absolute `tol`.
pub fn integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    let mut stack = vec![(a, b, tol)];
    let mut total = Complex64::new(0.0, 0.0);
    let mut guard = 0usize;
    while let Some((lo, hi, t)) = stack.pop() {
        let (v, err) = kronrod(&f, lo, hi);
        guard += 1;
        if err <= t || hi - lo < 1e-9 || guard > 200_000 {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * t));
            stack.push((mid, hi, 0.5 * t));
        }
    }
    total
}

/// Upper bound on `int_L^inf |conj(p) q| dx` from term magnitudes.
fn tail_bound(p: &ExpPoly, q: &ExpPoly, cutoff: f64) -> f64 {
    let mut bound = 0.0;
    for a in p.terms() {
        for b in q.terms() {
            let s = a.rate.re + b.rate.re;
            let n = f64::from(a.power + b.power);
            let slack = s - n / cutoff;
            if slack <= 0.0 {
                return f64::INFINITY;
            }
            // x^n e^{-s x} <= L^n e^{-(s - n/L)(x - L)} e^{-s L} for x >= L
            bound += a.coeff.norm() * b.coeff.norm() * cutoff.powf(n) * (-s * cutoff).exp() / slack;
        }
    }
    bound
}

/// `<p, q>` by quadrature on `[0, L]`, `L >= 40` chosen so the tail is negligible.
pub fn inner_product(p: &ExpPoly, q: &ExpPoly) -> Complex64 {
    let mut cutoff = 40.0;
    while tail_bound(p, q, cutoff) > 1e-14 && cutoff < 1e4 {
        cutoff *= 1.5;
    }
    let f = |x: f64| p.evaluate(x).conj() * q.evaluate(x);
    // subdivide geometrically so early oscillation/peaks are resolved
    let mut edges = vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    while *edges.last().unwrap() < cutoff {
        let next = (edges.last().unwrap() * 2.0).min(cutoff);
        edges.push(next);
    }
    edges.windows(2).map(|w| integrate(f, w[0], w[1], 1e-14)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_gaussian_moment() {
        let v = integrate(|x| Complex64::new(x * x * (-x).exp(), 0.0), 0.0, 60.0, 1e-13);
        assert!((v.re - 2.0).abs() < 1e-11);
    }

    #[test]
    fn inner_product_of_unit_exponential() {
        let e = ExpPoly::real(1.0, 0, 1.0);
        assert!((inner_product(&e, &e) - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }
}

//! Oracle suites run by `extlab selftest`.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{decompose_kvb, decompose_vn};
use crate::experiments::worked::Check;
use crate::exppoly::{BoundaryCondition, ExpPoly, TermRecord};
use crate::linalg::{
    gram, hermitian_eigen, orthonormalize, pseudo_inverse, singular_values, ComplexMatrix, InnerProductSpace,
};
use crate::models::{make_halfline_model, make_salpha_extension, make_twohalflines_model, Model};
use crate::quadrature;
use crate::{Error, Result};

const GOLDEN: &str = include_str!("../../fixtures/golden_exppoly.json");

pub const QUADRATURE_PAIRS: usize = 200;
pub const RUNTIME_BUDGET_SECS: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub schema_version: u32,
    pub checks: Vec<Check>,
    pub runtime_secs: f64,
    pub pass: bool,
}

#[derive(Deserialize)]
struct InnerCase {
    p: Vec<TermRecord>,
    q: Vec<TermRecord>,
    expected: (f64, f64),
}

#[derive(Deserialize)]
struct MapCase {
    p: Vec<TermRecord>,
    expected: Vec<TermRecord>,
}

#[derive(Deserialize)]
struct Golden {
    inner_products: Vec<InnerCase>,
    adjoint: Vec<MapCase>,
    dirichlet_resolvent: Vec<MapCase>,
}

fn poly(records: Vec<TermRecord>) -> Result<ExpPoly> {
    ExpPoly::try_from(records)
}

/// Random exponential polynomial with `1..=3` terms, powers up to 3, rates in `[0.3, 3] + i[-2, 2]`.
pub fn random_exppoly(rng: &mut impl Rng) -> ExpPoly {
    let n = rng.gen_range(1..=3);
    let mut p = ExpPoly::zero();
    for _ in 0..n {
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let rate = Complex64::new(rng.gen_range(0.3..3.0), rng.gen_range(-2.0..2.0));
        p = &p + &ExpPoly::single(c, rng.gen_range(0..=3), rate);
    }
    p
}

/// Largest deviation between symbolic and quadrature inner products over `pairs` random pairs.
pub fn quadrature_oracle(pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| {
            let p = random_exppoly(&mut rng);
            let q = random_exppoly(&mut rng);
            let scale = p.norm() * q.norm();
            (p.inner_product(&q) - quadrature::inner_product(&p, &q)).norm() / scale.max(1.0)
        })
        .fold(0.0, f64::max)
}

/// `max |(S* - z) R(z) f - f| / |f|` plus the boundary value at the origin.
pub fn resolvent_residuals(cases: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let f = random_exppoly(&mut rng);
        let z = match i % 3 {
            0 => Complex64::new(0.0, 0.0),
            1 => Complex64::new(0.0, rng.gen_range(1e-4..0.5)),
            _ => Complex64::new(0.0, -rng.gen_range(1e-4..0.5)),
        };
        let u = f.solve_resolvent(z, BoundaryCondition::Dirichlet)?;
        let r = &u.apply_shifted(z) - &f;
        worst = worst.max((r.norm() + u.boundary_values().0.norm()) / f.norm());
    }
    Ok(worst)
}

/// Eigen-, pseudo-inverse and orthonormalization identities on random matrices.
pub fn linalg_properties(trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let random = |r: usize, c: usize, rng: &mut ChaCha8Rng| {
        ComplexMatrix::from_fn(r, c, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    };
    for _ in 0..trials {
        let n = rng.gen_range(1..=6);
        let a = random(n, n, &mut rng);
        let h = a.add(&a.adjoint())?;
        let eig = hermitian_eigen(&h)?;
        let v = &eig.eigenvectors;
        let rebuilt = v.matmul(&ComplexMatrix::diagonal(&eig.eigenvalues))?.matmul(&v.adjoint())?;
        worst = worst.max(rebuilt.sub(&h)?.max_abs());
        worst = worst.max(v.unitarity_residual());

        let (r, c) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
        let m = random(r, c, &mut rng);
        let p = pseudo_inverse(&m, 1e-12);
        // A A+ A = A and A+ A A+ = A+
        worst = worst.max(m.matmul(&p)?.matmul(&m)?.sub(&m)?.max_abs());
        worst = worst.max(p.matmul(&m)?.matmul(&p)?.sub(&p)?.max_abs());
        let sv = singular_values(&m);
        let fro: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        worst = worst.max((fro - m.frobenius_norm()).abs());

        let vectors: Vec<Vec<Complex64>> = random(n, 6, &mut rng).columns();
        let q = orthonormalize(&vectors, 1e-10);
        let g = gram(&q, |x, y| x.inner(y));
        worst = worst.max(g.sub(&ComplexMatrix::identity(q.len()))?.max_abs());
    }
    Ok(worst)
}

/// Golden fixtures; returns the largest deviation.
pub fn golden_fixtures() -> Result<f64> {
    let golden: Golden =
        serde_json::from_str(GOLDEN).map_err(|e| Error::Config(format!("golden fixture file is malformed: {e}")))?;
    let mut worst: f64 = 0.0;
    for case in golden.inner_products {
        let got = poly(case.p)?.inner_product(&poly(case.q)?);
        let dev = (got - Complex64::new(case.expected.0, case.expected.1)).norm();
        if !dev.is_finite() {
            return Err(Error::ConsistencyFailure { what: "golden inner product", residual: dev });
        }
        worst = worst.max(dev);
    }
    for case in golden.adjoint {
        let got = poly(case.p)?.apply_shifted(Complex64::new(0.0, 0.0));
        worst = worst.max((&got - &poly(case.expected)?).norm());
    }
    for case in golden.dirichlet_resolvent {
        let got = poly(case.p)?.solve_resolvent(Complex64::new(0.0, 0.0), BoundaryCondition::Dirichlet)?;
        worst = worst.max((&got - &poly(case.expected)?).norm());
    }
    Ok(worst)
}

/// Relative residuals of both direct-sum splits on random elements of `D(S*)`.
pub fn direct_sum_residuals(per_model: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let models: Vec<Box<dyn Model>> = vec![Box::new(make_halfline_model()), Box::new(make_twohalflines_model())];
    let mut worst: f64 = 0.0;
    for m in &models {
        let n = m.channel_count();
        for _ in 0..per_model {
            let g = crate::models::HilbertElement::new((0..n).map(|_| random_exppoly(&mut rng)).collect());
            let scale = g.norm() + m.apply_adjoint(&g).norm();
            let k = decompose_kvb(m.as_ref(), &g)?;
            let mut r = (&k.recompose(m.as_ref())? - &g).norm();
            r = r.max(m.apply_adjoint(&k.u0).norm()).max(m.apply_adjoint(&k.u1).norm());
            worst = worst.max(r / scale);
            for eps in [1e-1, 1e-3] {
                let v = decompose_vn(m.as_ref(), &g, eps)?;
                let back = &(&v.f_eps + &v.u_eps) - &v.v_eps;
                let z = Complex64::new(0.0, eps);
                let r = (&back - &g)
                    .norm()
                    .max(m.apply_shifted(&v.u_eps, z).norm() * eps)
                    .max(m.apply_shifted(&v.v_eps, z.conj()).norm() * eps);
                worst = worst.max(r / scale);
            }
        }
    }
    // extension-level split on an S_alpha probe set
    let ext = make_salpha_extension(0.5);
    for g in ext.domain_probes(4, &mut rng)? {
        let c = crate::calculus::vn_components(&ext, &g, 1e-2)?;
        let back = &(&c.f_eps + &c.u_eps) - &c.u_eps_image;
        worst = worst.max((&back - &g).norm() / g.norm());
    }
    Ok(worst)
}

pub fn cmd_selftest() -> Result<SelftestReport> {
    let start = Instant::now();
    let quad = quadrature_oracle(QUADRATURE_PAIRS, 7);
    let linalg = linalg_properties(100, 11)?;
    let resolvent = resolvent_residuals(60, 13)?;
    let golden = golden_fixtures()?;
    let direct = direct_sum_residuals(20, 17)?;
    let runtime_secs = start.elapsed().as_secs_f64();
    let checks = vec![
        Check {
            name: format!("symbolic vs quadrature inner products ({QUADRATURE_PAIRS} pairs)"),
            passed: quad <= 1e-9,
            detail: format!("max deviation {quad:.2e}"),
        },
        Check {
            name: "linear-algebra identities".into(),
            passed: linalg <= 1e-10,
            detail: format!("max residual {linalg:.2e}"),
        },
        Check {
            name: "resolvent residuals".into(),
            passed: resolvent <= 1e-10,
            detail: format!("max relative residual {resolvent:.2e}"),
        },
        Check {
            name: "golden ExpPoly fixtures".into(),
            passed: golden <= 1e-14,
            detail: format!("max deviation {golden:.2e}"),
        },
        Check {
            name: "direct-sum reconstruction".into(),
            passed: direct <= 1e-9,
            detail: format!("max relative residual {direct:.2e}"),
        },
        Check {
            name: "runtime".into(),
            passed: runtime_secs < RUNTIME_BUDGET_SECS,
            detail: format!("{runtime_secs:.2} s"),
        },
    ];
    let pass = checks.iter().all(|c| c.passed);
    Ok(SelftestReport { schema_version: super::sweep::SCHEMA_VERSION, checks, runtime_secs, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_fixtures_parse_and_match() {
        assert!(golden_fixtures().unwrap() < 1e-14);
    }

    #[test]
    fn small_oracle_runs() {
        assert!(quadrature_oracle(10, 1) < 1e-9);
        assert!(resolvent_residuals(9, 2).unwrap() < 1e-10);
        assert!(linalg_properties(10, 3).unwrap() < 1e-10);
    }
}

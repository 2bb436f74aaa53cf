//! Dense complex linear algebra for the small matrices that show up here:
//! Gram matrices of deficiency vectors, projection differences, the `d x d`
//! von Neumann parameter. Dimensions stay well below 32.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tol::{HERMITIAN_TOL, RANK_TOL};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, entries: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let entries = rows
            .iter()
            .flat_map(|row| {
                assert_eq!(row.len(), c, "ragged rows");
                row.iter().map(|&x| Complex64::new(x, 0.0))
            })
            .collect();
        ComplexMatrix { rows: r, cols: c, entries }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Complex64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|&z| z * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, entries })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, entries })
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        }))
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum()).collect())
    }

    /// `max |M - M^H|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M^H) / 2`; requires a square matrix.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `max |U^H U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.adjoint().matmul(self).expect("square product");
        g.sub(&Self::identity(self.cols)).expect("same shape").max_abs()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix shapes must agree")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>11.4e}{:+.4e}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

/// Cyclic Jacobi eigen-solver for Hermitian matrices.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenproblem needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let scale = m.max_abs();
    let asym = m.hermitian_asymmetry();
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let total = a.frobenius_norm();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

/// One Jacobi rotation annihilating `a[p][q]`; accumulates into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag < 1e-300 || mag <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    // phase that makes the pivot real and positive
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ph = phase.conj();
    // V = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let vpp = Complex64::new(c, 0.0);
    let vpq = Complex64::new(s, 0.0);
    let vqp = ph * (-s);
    let vqq = ph * c;

    let n = a.rows;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * vpp + akq * vqp;
        a[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * vpp + vkq * vqp;
        v[(k, q)] = vkp * vpq + vkq * vqq;
    }
}

/// Singular values, descending.
///
/// Taken from the eigenvalues `±s` of the Hermitian dilation `[[0, M], [M^H, 0]]`,
/// which keeps small singular values accurate to `~1e-16 |M|` (the `M^H M`
/// route only resolves them down to `~1e-8 |M|`).
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let (r, c) = (m.rows, m.cols);
    let dilation = ComplexMatrix::from_fn(r + c, r + c, |i, j| match (i < r, j < r) {
        (true, false) => m[(i, j - r)],
        (false, true) => m[(j, i - r)].conj(),
        _ => Complex64::new(0.0, 0.0),
    });
    let eig = hermitian_eigen(&dilation).expect("dilation is Hermitian");
    let mut s: Vec<f64> = eig.eigenvalues.iter().rev().take(r.min(c)).map(|&l| l.max(0.0)).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Squared relative cutoff for eigenvalues of `M^H M`, floored at its rounding level.
fn gram_cutoff(rtol: f64) -> f64 {
    (rtol * rtol).max(1e-14)
}

/// Moore-Penrose pseudo-inverse; singular values below `rtol * s_max` are cut
/// (`rtol` is floored at `1e-7`, the resolution of the `M^H M` route).
pub fn pseudo_inverse(m: &ComplexMatrix, rtol: f64) -> ComplexMatrix {
    let mhm = m.adjoint().matmul(m).expect("M^H M is always defined");
    let eig = hermitian_eigen(&mhm).expect("M^H M is Hermitian");
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let n = m.cols;
    let cutoff = gram_cutoff(rtol) * top;
    // (M^H M)^+ = V diag(1/l) V^H over the retained eigenpairs
    let inv = ComplexMatrix::from_fn(n, n, |i, j| {
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > cutoff && l > 0.0)
            .map(|(k, &l)| eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)].conj() / l)
            .sum()
    });
    inv.matmul(&m.adjoint()).expect("shapes agree")
}

/// Orthonormal basis of the null space of `m` (columns), with relative tolerance
/// floored at `1e-7`.
pub fn null_space(m: &ComplexMatrix, rtol: f64) -> Vec<Vec<Complex64>> {
    let mhm = m.adjoint().matmul(m).expect("M^H M is always defined");
    let eig = hermitian_eigen(&mhm).expect("M^H M is Hermitian");
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= gram_cutoff(rtol) * top.max(f64::MIN_POSITIVE))
        .map(|(k, _)| eig.eigenvectors.column(k))
        .collect()
}

/// A space with a sesquilinear inner product (anti-linear in the first slot).
pub trait InnerProductSpace: Clone {
    fn inner(&self, other: &Self) -> Complex64;

    /// `self += a * x`
    fn axpy(&mut self, a: Complex64, x: &Self);

    fn scaled(&self, a: Complex64) -> Self;

    fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }
}

impl InnerProductSpace for Vec<Complex64> {
    fn inner(&self, other: &Self) -> Complex64 {
        self.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }

    fn axpy(&mut self, a: Complex64, x: &Self) {
        for (s, xi) in self.iter_mut().zip(x) {
            *s += a * xi;
        }
    }

    fn scaled(&self, a: Complex64) -> Self {
        self.iter().map(|z| z * a).collect()
    }
}

/// `G_ij = inner(v_i, v_j)`.
pub fn gram<V>(vectors: &[V], inner: impl Fn(&V, &V) -> Complex64) -> ComplexMatrix {
    let n = vectors.len();
    let mut g = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = inner(&vectors[i], &vectors[j]);
            g[(i, j)] = v;
            if i != j {
                g[(j, i)] = v.conj();
            } else {
                g[(i, i)] = Complex64::new(v.re, 0.0);
            }
        }
    }
    g
}

/// Pivoted modified Gram-Schmidt with one re-orthogonalization pass.
///
/// At each step the remaining vector with the largest residual is taken; the
/// process stops once every residual is below `rank_tol` times the largest
/// input norm.
pub fn orthonormalize<V: InnerProductSpace>(vectors: &[V], rank_tol: f64) -> Vec<V> {
    let largest = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if largest == 0.0 {
        return Vec::new();
    }
    let threshold = rank_tol * largest;
    let mut work: Vec<V> = vectors.to_vec();
    let mut basis: Vec<V> = Vec::new();
    while !work.is_empty() {
        let (idx, best) = work
            .iter()
            .map(|w| w.norm())
            .enumerate()
            .fold((0, -1.0), |acc, (i, n)| if n > acc.1 { (i, n) } else { acc });
        if best < threshold {
            break;
        }
        let mut q = work.swap_remove(idx);
        for b in &basis {
            let c = b.inner(&q);
            q.axpy(-c, b);
        }
        let nq = q.norm();
        if nq < threshold {
            continue;
        }
        let q = q.scaled(Complex64::new(1.0 / nq, 0.0));
        for w in work.iter_mut() {
            let c = q.inner(w);
            w.axpy(-c, &q);
        }
        basis.push(q);
    }
    basis
}

pub fn orthonormalize_default<V: InnerProductSpace>(vectors: &[V]) -> Vec<V> {
    orthonormalize(vectors, RANK_TOL)
}

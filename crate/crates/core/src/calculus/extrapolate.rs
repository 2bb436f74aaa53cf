//! Linear Richardson extrapolation of vector sequences to `eps = 0`.

use num_complex::Complex64;

use crate::tol::check_eps;
use crate::{Error, Result};

/// Limit estimate with an error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub limit: Vec<Complex64>,
    /// Largest entrywise difference between the last two pairwise estimates.
    pub residual: f64,
}

/// Extrapolates `values[i] ≈ L + c eps_grid[i] + O(eps^2)` to `L`.
///
/// Every consecutive pair `(a, b)` gives `L_ab = (eps_a v_b - eps_b v_a) / (eps_a - eps_b)`;
/// the last pair (smallest `eps`) is the estimate, and its distance to the
/// previous pair's estimate is the residual. Requires a strictly decreasing
/// grid of at least three points.
pub fn richardson(eps_grid: &[f64], values: &[Vec<Complex64>]) -> Result<Extrapolated> {
    if eps_grid.len() < 3 {
        return Err(Error::DimensionMismatch(format!(
            "extrapolation needs at least 3 grid points, got {}",
            eps_grid.len()
        )));
    }
    if values.len() != eps_grid.len() {
        return Err(Error::DimensionMismatch(format!("{} values for {} grid points", values.len(), eps_grid.len())));
    }
    for &e in eps_grid {
        check_eps(e)?;
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("eps grid must be strictly decreasing".into()));
    }
    let dim = values[0].len();
    if values.iter().any(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch("extrapolated vectors differ in length".into()));
    }
    let pair = |i: usize| -> Vec<Complex64> {
        let (ea, eb) = (eps_grid[i], eps_grid[i + 1]);
        values[i].iter().zip(&values[i + 1]).map(|(va, vb)| (vb * ea - va * eb) / (ea - eb)).collect()
    };
    let n = eps_grid.len();
    let last = pair(n - 2);
    let previous = pair(n - 3);
    let residual = last.iter().zip(&previous).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(Extrapolated { limit: last, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exact_on_linear_sequences() {
        let grid = [0.1, 0.05, 0.025];
        let values: Vec<Vec<Complex64>> = grid.iter().map(|&e| vec![c(2.0 + 3.0 * e), Complex64::new(1.0, -e)]).collect();
        let r = richardson(&grid, &values).unwrap();
        assert!((r.limit[0] - c(2.0)).norm() < 1e-14);
        assert!((r.limit[1] - c(1.0)).norm() < 1e-14);
        assert!(r.residual < 1e-14);
    }

    #[test]
    fn residual_tracks_second_order_term() {
        let grid = [1e-2, 5e-3, 2.5e-3];
        let values: Vec<Vec<Complex64>> = grid.iter().map(|&e| vec![c(1.0 + e + 4.0 * e * e)]).collect();
        let r = richardson(&grid, &values).unwrap();
        // pair estimates are 1 - 4 eps_a eps_b
        assert!((r.limit[0].re - (1.0 - 4.0 * 5e-3 * 2.5e-3)).abs() < 1e-14);
        assert!((r.residual - 4.0 * 5e-3 * (1e-2 - 2.5e-3)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_grids() {
        let v = vec![vec![c(1.0)]; 3];
        assert!(richardson(&[0.1, 0.05], &v[..2]).is_err());
        assert!(richardson(&[0.1, 0.1, 0.05], &v).is_err());
        assert!(matches!(richardson(&[0.9, 0.1, 0.05], &v), Err(Error::EpsOutOfRange(_))));
    }
}

//! Log-log least-squares rate fits.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    /// 95% confidence half-width of the slope (NaN for two-point fits).
    pub half_width: f64,
    pub points: usize,
}

/// OLS fit of `log value = a + slope * log eps`; `None` with fewer than two points.
pub fn fit_loglog(eps: &[f64], values: &[f64]) -> Option<SlopeFit> {
    let n = eps.len().min(values.len());
    if n < 2 {
        return None;
    }
    let xs: Vec<f64> = eps[..n].iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = values[..n].iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let half_width = if n > 2 {
        let intercept = my - slope * mx;
        let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let se = (sse / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("positive degrees of freedom").inverse_cdf(0.975);
        t * se
    } else {
        f64::NAN
    };
    Some(SlopeFit { slope, half_width, points: n })
}

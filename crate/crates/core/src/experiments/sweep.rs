//! Convergence sweep over `eps`: boundary-map errors, projection gaps and the
//! `eps -> 0` limits of the decomposition components, with bound checks and
//! log-log rate fits.
//!
//! CSV schema (version 1): `eps,quantity_id,value,bound,slope_window`, one row
//! per `(eps, quantity)`. Per-probe quantities carry the probe index as
//! `name@p<k>`; `bound` is empty where no bound is claimed; `slope_window` is
//! 1 when the row entered the slope fit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{
    decompose_kvb, gamma0, gamma0_eps, gamma1, gamma1_eps, kvb_components, projection_gap_norm, vn_components, Sign,
};
use crate::experiments::config::SweepConfig;
use crate::experiments::fit::{fit_loglog, SlopeFit};
use crate::linalg::InnerProductSpace;
use crate::models::{extension_by_spec, model_by_name, Extension, HilbertElement, Model};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub quantity_id: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub slope_window: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub quantity_id: String,
    pub eps: f64,
    pub value: f64,
    pub bound: f64,
    pub inequality: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantitySlope {
    pub quantity_id: String,
    /// `None` when fewer than two rows lie in the window above the noise floor.
    pub fit: Option<SlopeFit>,
    /// `|slope - 1| <= slope_band`.
    pub within_band: Option<bool>,
    /// Rows in the window that fell below the noise floor.
    pub below_floor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub model: String,
    pub extension: String,
    pub eps_grid: Vec<f64>,
    pub probes: usize,
    pub seed: u64,
    #[serde(skip)]
    pub rows: Vec<SweepRow>,
    pub row_count: usize,
    pub slopes: Vec<QuantitySlope>,
    pub bounds: Vec<BoundVerdict>,
    /// All bound checks hold.
    pub pass: bool,
}

impl SweepReport {
    pub fn slope(&self, quantity_id: &str) -> Option<&QuantitySlope> {
        self.slopes.iter().find(|s| s.quantity_id == quantity_id)
    }

    pub fn values(&self, quantity_id: &str) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.quantity_id == quantity_id).map(|r| (r.eps, r.value)).collect()
    }
}

/// Probe-level data that does not depend on `eps`.
struct ProbeData {
    g: HilbertElement,
    gamma0: HilbertElement,
    gamma1: HilbertElement,
    /// `S_D^{-1} u1 + u0`
    upsilon_limit: HilbertElement,
    f: HilbertElement,
    s_f: HilbertElement,
    /// `f^{(g)}` of the extension split
    ext_f: HilbertElement,
    /// `g - f^{(g)} = S_D^{-1}(Tu + w) + u`
    ext_singular: HilbertElement,
    /// `|g| + |S^{-1}| |S* g|`
    c: f64,
}

struct Measurement {
    id: &'static str,
    value: f64,
    bound: Option<(f64, &'static str)>,
}

fn probe_data(model: &dyn Model, ext: &Extension, g: HilbertElement) -> Result<ProbeData> {
    let kvb = decompose_kvb(model, &g)?;
    let upsilon_limit = &model.distinguished_resolvent(&kvb.u1)? + &kvb.u0;
    let comps = kvb_components(ext, &g)?;
    let c = g.norm() + model.closure_inverse_bound() * model.apply_adjoint(&g).norm();
    Ok(ProbeData {
        gamma0: gamma0(model, &g)?,
        gamma1: gamma1(model, &g)?,
        upsilon_limit,
        s_f: model.apply_adjoint(&kvb.f),
        f: kvb.f,
        ext_singular: &g - &comps.f,
        ext_f: comps.f,
        g,
        c,
    })
}

fn measure_probe(model: &dyn Model, ext: &Extension, p: &ProbeData, eps: f64) -> Result<Vec<Measurement>> {
    let s_inv = model.closure_inverse_bound();
    let sd_inv = model.distinguished_inverse_bound();
    let ie2 = Complex64::new(0.0, 2.0 * eps);
    let dist = |a: &HilbertElement, b: &HilbertElement| (a - b).norm();

    let g1m = gamma1_eps(model, &p.g, eps, Sign::Minus)?;
    let g1p = gamma1_eps(model, &p.g, eps, Sign::Plus)?;
    let g0e = gamma0_eps(model, &p.g, eps)?;
    let vn = crate::calculus::decompose_vn(model, &p.g, eps)?;
    let diff = &vn.u_eps - &vn.v_eps;
    let comps = vn_components(ext, &p.g, eps)?;
    let f_err = &comps.f_eps - &p.ext_f;

    let gamma1_bound = eps * p.c;
    Ok(vec![
        Measurement {
            id: "gamma1_minus",
            value: dist(&g1m, &p.gamma1),
            bound: Some((gamma1_bound, "|G1eps- g - G1 g| <= eps (|g| + |S^-1| |S* g|)")),
        },
        Measurement {
            id: "gamma1_plus",
            value: dist(&g1p, &p.gamma1),
            bound: Some((gamma1_bound, "|G1eps+ g - G1 g| <= eps (|g| + |S^-1| |S* g|)")),
        },
        Measurement {
            id: "gamma0",
            value: dist(&g0e, &p.gamma0),
            bound: Some((
                eps * (s_inv + sd_inv) * p.c,
                "|G0eps g - G0 g| <= eps (|S^-1| + |SD^-1|) (|g| + |S^-1| |S* g|)",
            )),
        },
        Measurement { id: "cor_one_minus_sd_s", value: dist(&gamma0(model, &diff)?, &p.gamma0), bound: None },
        Measurement { id: "cor_2ieps_u", value: dist(&vn.u_eps.scale(ie2), &p.gamma1), bound: None },
        Measurement { id: "cor_2ieps_v", value: dist(&vn.v_eps.scale(ie2), &p.gamma1), bound: None },
        Measurement {
            id: "cor_upsilon",
            value: dist(&diff, &p.upsilon_limit),
            bound: Some((eps * s_inv * p.c, "|Ups_eps g - (SD^-1 u1 + u0)| <= eps |S^-1| (|g| + |S^-1| |S* g|)")),
        },
        Measurement { id: "cor_s_upsilon", value: dist(&model.apply_adjoint(&diff), &p.gamma1), bound: None },
        Measurement { id: "cor_f", value: dist(&vn.f_eps, &p.f), bound: None },
        Measurement { id: "cor_s_f", value: dist(&model.apply_adjoint(&vn.f_eps), &p.s_f), bound: None },
        Measurement { id: "ext_f", value: f_err.norm(), bound: None },
        Measurement { id: "ext_f_graph", value: f_err.norm() + model.apply_adjoint(&f_err).norm(), bound: None },
        Measurement {
            id: "ext_one_minus_u",
            value: dist(&(&comps.u_eps - &comps.u_eps_image), &p.ext_singular),
            bound: None,
        },
        Measurement { id: "ext_eps_u_norm", value: eps * comps.u_eps.norm(), bound: None },
    ])
}

/// Runs the sweep without touching the filesystem.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let model = model_by_name(&config.model)?;
    let ext = extension_by_spec(model.clone(), &config.extension)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let probes = ext.domain_probes(config.probes, &mut rng)?;
    run_sweep_with(config, &ext, probes)
}

/// Sweep with explicit probes (elements of the extension domain).
pub fn run_sweep_with(config: &SweepConfig, ext: &Extension, probes: Vec<HilbertElement>) -> Result<SweepReport> {
    let model = ext.model().as_ref();
    let grid = config.eps.values();
    let data: Vec<ProbeData> = probes.into_iter().map(|g| probe_data(model, ext, g)).collect::<Result<_>>()?;
    let n_probes = data.len();

    type Raw = (f64, String, f64, Option<(f64, String)>);
    let per_eps: Vec<Vec<Raw>> = grid
        .par_iter()
        .map(|&eps| -> Result<Vec<Raw>> {
            let mut out: Vec<Raw> = Vec::new();
            let s_inv = model.closure_inverse_bound();
            out.push((
                eps,
                "proj_gap_minus".into(),
                projection_gap_norm(model, eps, Sign::Minus)?,
                Some((eps * s_inv, "|P_ker(S*-i eps) - P_ker S*| <= eps |S^-1|".into())),
            ));
            out.push((
                eps,
                "proj_gap_plus".into(),
                projection_gap_norm(model, eps, Sign::Plus)?,
                Some((eps * s_inv, "|P_ker(S*+i eps) - P_ker S*| <= eps |S^-1|".into())),
            ));
            for (k, p) in data.iter().enumerate() {
                for m in measure_probe(model, ext, p, eps)? {
                    out.push((eps, format!("{}@p{k}", m.id), m.value, m.bound.map(|(b, s)| (b, s.to_string()))));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for (eps, id, value, bound) in per_eps.into_iter().flatten() {
        if !value.is_finite() {
            return Err(Error::ConsistencyFailure { what: "non-finite sweep value", residual: value });
        }
        let in_fit = config.in_window(eps) && value >= config.noise_floor;
        if let Some((b, inequality)) = &bound {
            bounds.push(BoundVerdict {
                quantity_id: id.clone(),
                eps,
                value,
                bound: *b,
                inequality: inequality.clone(),
                holds: value <= b * (1.0 + 1e-12) + 1e-14,
            });
        }
        rows.push(SweepRow { eps, quantity_id: id, value, bound: bound.map(|(b, _)| b), slope_window: in_fit });
    }

    let mut grouped: BTreeMap<&str, Vec<&SweepRow>> = BTreeMap::new();
    for r in &rows {
        grouped.entry(r.quantity_id.as_str()).or_default().push(r);
    }
    let slopes = grouped
        .into_iter()
        .map(|(id, rs)| {
            let fitted: Vec<&&SweepRow> = rs.iter().filter(|r| r.slope_window).collect();
            let below_floor = rs.iter().filter(|r| config.in_window(r.eps) && !r.slope_window).count();
            let eps: Vec<f64> = fitted.iter().map(|r| r.eps).collect();
            let vals: Vec<f64> = fitted.iter().map(|r| r.value).collect();
            let fit = fit_loglog(&eps, &vals);
            QuantitySlope {
                quantity_id: id.to_string(),
                within_band: fit.map(|f| (f.slope - 1.0).abs() <= config.slope_band),
                fit,
                below_floor,
            }
        })
        .collect();

    let pass = bounds.iter().all(|b| b.holds);
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        model: model.name().to_string(),
        extension: ext.name().to_string(),
        eps_grid: grid,
        probes: n_probes,
        seed: config.seed,
        row_count: rows.len(),
        rows,
        slopes,
        bounds,
        pass,
    })
}

pub fn write_csv(report: &SweepReport, path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(["eps", "quantity_id", "value", "bound", "slope_window"]).map_err(io)?;
    for r in &report.rows {
        let bound = r.bound.map(|b| format!("{b:e}")).unwrap_or_default();
        w.write_record([
            format!("{:e}", r.eps),
            r.quantity_id.clone(),
            format!("{:e}", r.value),
            bound,
            u8::from(r.slope_window).to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

pub fn summary_json(report: &SweepReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

/// Runs the sweep and writes the CSV and the JSON summary.
pub fn cmd_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let report = run_sweep(config)?;
    write_csv(&report, &config.out)?;
    fs::write(&config.summary, summary_json(&report))
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", config.summary.display())))?;
    Ok(report)
}

/// Human-readable summary.
pub fn render_summary(report: &SweepReport) -> String {
    let mut s = format!(
        "sweep {} / {}: {} eps values, {} probes, {} rows\n",
        report.model,
        report.extension,
        report.eps_grid.len(),
        report.probes,
        report.row_count
    );
    let failed: Vec<&BoundVerdict> = report.bounds.iter().filter(|b| !b.holds).collect();
    s += &format!("bound checks: {} of {} hold\n", report.bounds.len() - failed.len(), report.bounds.len());
    for b in failed.iter().take(10) {
        s += &format!("  FAILED {} at eps={:e}: {:e} > {:e}  [{}]\n", b.quantity_id, b.eps, b.value, b.bound, b.inequality);
    }
    // one line per quantity; probes are folded into a slope range
    let mut by_quantity: BTreeMap<&str, (f64, f64, usize, usize)> = BTreeMap::new();
    for q in &report.slopes {
        let base = q.quantity_id.split('@').next().unwrap_or(&q.quantity_id);
        let e = by_quantity.entry(base).or_insert((f64::INFINITY, f64::NEG_INFINITY, 0, 0));
        match q.fit {
            Some(f) => {
                e.0 = e.0.min(f.slope);
                e.1 = e.1.max(f.slope);
                e.2 += 1;
            }
            None => e.3 += 1,
        }
    }
    s += "slopes (min..max over probes):\n";
    for (id, (lo, hi, fitted, floored)) in by_quantity {
        if fitted == 0 {
            s += &format!("  {id:<20} below noise floor\n");
        } else {
            s += &format!("  {id:<20} {lo:>7.4} .. {hi:.4}");
            if floored > 0 {
                s += &format!(" ({floored} below noise floor)");
            }
            s += "\n";
        }
    }
    s += if report.pass { "PASS\n" } else { "FAIL\n" };
    s
}

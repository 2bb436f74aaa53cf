//! Sweep configuration: defaults, TOML file, command-line overrides.
//!
//! Config file keys (all optional):
//!
//! ```toml
//! model = "twohalflines"        # halfline | twohalflines
//! extension = "salpha:1.5"      # friedrichs | salpha:<alpha>
//! eps = "1e-1:1e-4:7"           # start:stop:count, geometric
//! probes = 5
//! seed = 0
//! out = "sweep.csv"
//! summary = "sweep.json"        # default: `out` with a .json extension
//! noise_floor = 1e-11
//! slope_band = 0.1
//! slope_window = [1e-4, 1e-1]   # eps range used by the slope fits
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tol::{EPS_MAX, EPS_MIN};
use crate::{Error, Result};

/// Geometric grid `start, ..., stop` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid { start: 1e-1, stop: 1e-4, count: 7 }
    }
}

impl EpsGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let grid = EpsGrid { start, stop, count };
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        let in_range = |e: f64| e.is_finite() && (EPS_MIN..=EPS_MAX).contains(&e);
        if !in_range(self.start) || !in_range(self.stop) {
            return Err(Error::Config(format!(
                "eps grid endpoints must lie in [{EPS_MIN:e}, {EPS_MAX}], got {}:{}",
                self.start, self.stop
            )));
        }
        if self.count == 0 || (self.count > 1 && self.start <= self.stop) {
            return Err(Error::Config("eps grid must be strictly decreasing with at least one point".into()));
        }
        if self.count == 1 && self.start != self.stop {
            return Err(Error::Config("a one-point grid needs start == stop".into()));
        }
        Ok(())
    }

    /// Grid values, strictly decreasing.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let (a, b) = (self.start.ln(), self.stop.ln());
        let steps = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| match i {
                0 => self.start,
                i if i == self.count - 1 => self.stop,
                i => (a + (b - a) * i as f64 / steps).exp(),
            })
            .collect()
    }
}

impl FromStr for EpsGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("bad eps grid `{s}` (expected start:stop:count)"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        EpsGrid::new(start, stop, count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub model: String,
    pub extension: String,
    pub eps: EpsGrid,
    pub probes: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub summary: PathBuf,
    pub noise_floor: f64,
    pub slope_band: f64,
    pub slope_window: Option<(f64, f64)>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            model: "halfline".into(),
            extension: "friedrichs".into(),
            eps: EpsGrid::default(),
            probes: 5,
            seed: 0,
            out: PathBuf::from("sweep.csv"),
            summary: PathBuf::from("sweep.json"),
            noise_floor: 1e-11,
            slope_band: 0.1,
            slope_window: None,
        }
    }
}

/// Every key optional; used both for the file and for command-line overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOverrides {
    pub model: Option<String>,
    pub extension: Option<String>,
    pub eps: Option<String>,
    pub probes: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub noise_floor: Option<f64>,
    pub slope_band: Option<f64>,
    pub slope_window: Option<(f64, f64)>,
}

impl SweepOverrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

impl SweepConfig {
    /// Defaults, then `file`, then `cli`; later layers win.
    pub fn resolve(file: Option<SweepOverrides>, cli: SweepOverrides) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        let mut summary_given = false;
        for layer in file.into_iter().chain(std::iter::once(cli)) {
            if let Some(v) = layer.model {
                cfg.model = v;
            }
            if let Some(v) = layer.extension {
                cfg.extension = v;
            }
            if let Some(v) = layer.eps {
                cfg.eps = v.parse()?;
            }
            if let Some(v) = layer.probes {
                cfg.probes = v;
            }
            if let Some(v) = layer.seed {
                cfg.seed = v;
            }
            if let Some(v) = layer.out {
                cfg.out = v;
            }
            if let Some(v) = layer.summary {
                cfg.summary = v;
                summary_given = true;
            }
            if let Some(v) = layer.noise_floor {
                cfg.noise_floor = v;
            }
            if let Some(v) = layer.slope_band {
                cfg.slope_band = v;
            }
            if let Some(v) = layer.slope_window {
                cfg.slope_window = Some(v);
            }
        }
        if !summary_given {
            cfg.summary = cfg.out.with_extension("json");
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.eps.validate()?;
        if !["halfline", "twohalflines"].contains(&self.model.as_str()) {
            return Err(Error::Config(format!("unknown model `{}`", self.model)));
        }
        if self.probes == 0 {
            return Err(Error::Config("need at least one probe".into()));
        }
        if !(self.noise_floor >= 0.0) || !(self.slope_band > 0.0) {
            return Err(Error::Config("noise_floor must be >= 0 and slope_band > 0".into()));
        }
        if let Some((lo, hi)) = self.slope_window {
            if !(lo > 0.0 && lo <= hi) {
                return Err(Error::Config(format!("bad slope window [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn in_window(&self, eps: f64) -> bool {
        match self.slope_window {
            None => true,
            Some((lo, hi)) => eps >= lo * (1.0 - 1e-12) && eps <= hi * (1.0 + 1e-12),
        }
    }
}

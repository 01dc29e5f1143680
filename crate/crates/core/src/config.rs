//! Solver configuration and its flat `key = value` file format.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFormat::Csv => write!(f, "csv"),
            OutputFormat::Json => write!(f, "json"),
        }
    }
}

/// Inclusive arithmetic grid `start, start + step, …, ≤ stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BetaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl BetaGrid {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for BetaGrid {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("beta grid '{s}' is not START:STOP:STEP")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad number '{p}' in beta grid")))
        };
        Ok(BetaGrid {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            step: num(parts[2])?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Relative size below which a Kummer series term counts as negligible.
    pub series_rel_tol: f64,
    /// Hard cap on Kummer series terms; `None` means `20 (z + 50)`.
    pub max_terms: Option<usize>,
    pub quad_rel_tol: f64,
    pub eig_rel_tol: f64,
    pub eta_scan_step: f64,
    pub cross_rel_tol: f64,
    pub newton_max_iter: usize,
    /// Node count of the coarse disk finite-difference grid.
    pub fd_grid_count: usize,
    /// Node count of the coarse half-line finite-difference grid.
    pub degennes_grid_count: usize,
    pub degennes_l: f64,
    pub n_max: usize,
    pub beta_grid: BetaGrid,
    pub deriv_xcheck_tol: f64,
    pub const_tol: f64,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            series_rel_tol: 1e-16,
            max_terms: None,
            quad_rel_tol: 1e-12,
            eig_rel_tol: 1e-13,
            eta_scan_step: 0.02,
            cross_rel_tol: 1e-12,
            newton_max_iter: 50,
            fd_grid_count: 4001,
            degennes_grid_count: 8001,
            degennes_l: 15.0,
            n_max: 400,
            beta_grid: BetaGrid {
                start: 0.5,
                stop: 900.0,
                step: 0.5,
            },
            deriv_xcheck_tol: 1e-5,
            const_tol: 1e-5,
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

impl SolverConfig {
    pub fn max_terms_for(&self, z: f64) -> usize {
        self.max_terms
            .unwrap_or_else(|| (20.0 * (z.abs() + 50.0)).ceil() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("series_rel_tol", self.series_rel_tol),
            ("quad_rel_tol", self.quad_rel_tol),
            ("eig_rel_tol", self.eig_rel_tol),
            ("eta_scan_step", self.eta_scan_step),
            ("cross_rel_tol", self.cross_rel_tol),
            ("deriv_xcheck_tol", self.deriv_xcheck_tol),
            ("const_tol", self.const_tol),
            ("degennes_L", self.degennes_l),
            ("beta_grid step", self.beta_grid.step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.beta_grid.start <= 0.0 || self.beta_grid.stop < self.beta_grid.start {
            return Err(Error::Config("beta grid must satisfy 0 < start <= stop".into()));
        }
        if self.fd_grid_count < 16 || self.degennes_grid_count < 16 {
            return Err(Error::Config("grid counts must be at least 16".into()));
        }
        if self.max_terms == Some(0) {
            return Err(Error::Config("max_terms must be positive".into()));
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = SolverConfig::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse::<T>()
                .map_err(|_| Error::Config(format!("bad value '{v}' for {key}")))
        }
        match key {
            "series_rel_tol" => self.series_rel_tol = num(key, value)?,
            "max_terms" => {
                self.max_terms = if value == "auto" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "quad_rel_tol" => self.quad_rel_tol = num(key, value)?,
            "eig_rel_tol" => self.eig_rel_tol = num(key, value)?,
            "eta_scan_step" => self.eta_scan_step = num(key, value)?,
            "cross_rel_tol" => self.cross_rel_tol = num(key, value)?,
            "newton_max_iter" => self.newton_max_iter = num(key, value)?,
            "fd_grid_count" => self.fd_grid_count = num(key, value)?,
            "degennes_grid_count" => self.degennes_grid_count = num(key, value)?,
            "degennes_L" | "degennes_l" => self.degennes_l = num(key, value)?,
            "n_max" => self.n_max = num(key, value)?,
            "beta_grid" => self.beta_grid = value.parse()?,
            "deriv_xcheck_tol" => self.deriv_xcheck_tol = num(key, value)?,
            "const_tol" => self.const_tol = num(key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "format" => self.format = value.parse()?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

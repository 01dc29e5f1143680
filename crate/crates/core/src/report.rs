//! Table and report writers behind the command-line subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asymptotics::{
    beta_expansion_check, delta_at_crossings_check, eta_star_expansion_check, gamma_sequence, log_log_slope,
    richardson_table, ExpansionReport, HalfPowerSequence,
};
use crate::config::{OutputFormat, SolverConfig};
use crate::degennes::{compute_constants, minimize_theta0, DeGennesConstants, Lambda2Profile};
use crate::diamagnetism::{conjecture_scan, crossing_derivatives, derivative_limits_check, ConjectureReport};
use crate::error::{Error, Result};
use crate::intersections::{crossing_by_curves, crossing_by_phi, crossing_by_system, CrossingMethod, CrossingPoint};
use crate::spectrum::lowest_eigenvalue;

/// Modes listed by `derivatives`.
pub const DERIVATIVE_ROWS: [u32; 17] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 25, 50, 100, 200, 300, 400];

/// Largest `n` plotted by `curves`.
pub const CURVE_N_MAX: usize = 20;

/// Decimal with 16 significant digits, scientific outside `[1e-5, 1e16)`.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..16).contains(&e) {
        let decimals = (15 - e).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.15e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Blank,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => fmt_sig(*v),
            Cell::Text(s) => s.clone(),
            Cell::Blank => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Num(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Blank => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Blank, Cell::Num)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.header.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Writes `table` as `<stem>.csv` or `<stem>.json` under the output directory.
pub fn write_table(cfg: &SolverConfig, stem: &str, table: &Table) -> Result<PathBuf> {
    match cfg.format {
        OutputFormat::Csv => write_file(&cfg.output_dir.join(format!("{stem}.csv")), &table.to_csv()),
        OutputFormat::Json => write_file(
            &cfg.output_dir.join(format!("{stem}.json")),
            &(serde_json::to_string_pretty(&table.to_json()).expect("tables serialize") + "\n"),
        ),
    }
}

pub fn write_json<T: Serialize>(cfg: &SolverConfig, stem: &str, value: &T) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    write_file(&cfg.output_dir.join(format!("{stem}.json")), &text)
}

fn n_max(cfg: &SolverConfig) -> Result<u32> {
    u32::try_from(cfg.n_max).map_err(|_| Error::Config(format!("n_max = {} is too large", cfg.n_max)))
}

/// Crossings `n = 0..=n_max` by one method, in order.
pub fn compute_crossings(method: CrossingMethod, cfg: &SolverConfig) -> Result<Vec<CrossingPoint>> {
    let solve = match method {
        CrossingMethod::CurveIntersection => crossing_by_curves,
        CrossingMethod::KummerSystem => crossing_by_system,
        CrossingMethod::ImplicitPhi => crossing_by_phi,
    };
    (0..=n_max(cfg)?).into_par_iter().map(|n| solve(n, cfg)).collect()
}

/// `η(n, β)` over the grid for `n ≤ min(n_max, 20)` and the reference levels
/// `1` and `Θ₀`.
pub fn cmd_curves(cfg: &SolverConfig) -> Result<Vec<PathBuf>> {
    let grid = cfg.beta_grid.points();
    let top = cfg.n_max.min(CURVE_N_MAX) as u32;
    let curves: Vec<Table> = (0..=top)
        .into_par_iter()
        .map(|n| {
            let mut t = Table::new(&["beta", "eta"]);
            for &b in &grid {
                let p = lowest_eigenvalue(n, b, cfg)?;
                t.push(vec![b.into(), p.eta.into()]);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut written = Vec::new();
    for (n, t) in curves.iter().enumerate() {
        written.push(write_table(cfg, &format!("curve_n{n:02}"), t)?);
    }
    let theta0 = minimize_theta0(cfg)?.theta0;
    let mut refs = Table::new(&["name", "value"]);
    refs.push(vec!["one".into(), 1.0.into()]);
    refs.push(vec!["theta0".into(), theta0.into()]);
    written.push(write_table(cfg, "curve_reference", &refs)?);
    Ok(written)
}

fn crossing_table(points: &[CrossingPoint], reference: Option<&[CrossingPoint]>) -> Table {
    let mut header = vec!["n", "beta", "eta_star", "lambda_star", "sj_residual", "residual_n", "residual_n1", "method"];
    if reference.is_some() {
        header.push("epsilon");
    }
    let mut t = Table::new(&header);
    for (i, c) in points.iter().enumerate() {
        let mut row = vec![
            c.n.into(),
            c.beta_n.into(),
            c.eta_star.into(),
            c.lambda_star.into(),
            c.sj_residual.into(),
            c.sys_residuals.0.into(),
            c.sys_residuals.1.into(),
            c.method.to_string().into(),
        ];
        if let Some(r) = reference {
            row.push(((c.eta_star - r[i].eta_star).abs() / r[i].eta_star).into());
        }
        t.push(row);
    }
    t
}

/// Crossings from the two-mode system, and from the implicit equation with
/// the relative variation `εₙ = |η⁽²⁾ - η⁽¹⁾| / η⁽¹⁾` against the first.
pub fn cmd_crossings(cfg: &SolverConfig) -> Result<Vec<PathBuf>> {
    let system = compute_crossings(CrossingMethod::KummerSystem, cfg)?;
    let phi = compute_crossings(CrossingMethod::ImplicitPhi, cfg)?;
    Ok(vec![
        write_table(cfg, "crossings_system", &crossing_table(&system, None))?,
        write_table(cfg, "crossings_implicit", &crossing_table(&phi, Some(&system)))?,
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub theta0: f64,
    pub xi0: f64,
    pub c1: f64,
    pub u0_trace: f64,
    pub delta0_formula: f64,
    pub delta0_fit: f64,
    pub c0_fit: f64,
    pub lambda1_check: f64,
    pub theta0_minus_xi0_sq: f64,
    pub lambda2_leading: f64,
    pub lambda2_curvature: f64,
    pub lambda2_samples: Vec<(f64, f64)>,
}

impl ConstantsReport {
    pub fn new(k: &DeGennesConstants, p: &Lambda2Profile) -> Self {
        ConstantsReport {
            theta0: k.theta0,
            xi0: k.xi0,
            c1: k.c1,
            u0_trace: k.u0_trace,
            delta0_formula: k.delta0_formula,
            delta0_fit: k.delta0_fit,
            c0_fit: k.c0_fit,
            lambda1_check: k.lambda1_check,
            theta0_minus_xi0_sq: k.theta0 - k.xi0 * k.xi0,
            lambda2_leading: p.leading,
            lambda2_curvature: k.lambda2_curvature(),
            lambda2_samples: p.samples.clone(),
        }
    }
}

pub fn cmd_constants(cfg: &SolverConfig) -> Result<Vec<PathBuf>> {
    let (k, profile) = compute_constants(cfg)?;
    let report = ConstantsReport::new(&k, &profile);
    match cfg.format {
        OutputFormat::Json => Ok(vec![write_json(cfg, "constants", &report)?]),
        OutputFormat::Csv => {
            let mut t = Table::new(&["name", "value"]);
            let scalars = [
                ("theta0", report.theta0),
                ("xi0", report.xi0),
                ("c1", report.c1),
                ("u0_trace", report.u0_trace),
                ("delta0_formula", report.delta0_formula),
                ("delta0_fit", report.delta0_fit),
                ("c0_fit", report.c0_fit),
                ("lambda1_check", report.lambda1_check),
                ("theta0_minus_xi0_sq", report.theta0_minus_xi0_sq),
                ("lambda2_leading", report.lambda2_leading),
                ("lambda2_curvature", report.lambda2_curvature),
            ];
            for (name, v) in scalars {
                t.push(vec![name.into(), v.into()]);
            }
            let mut s = Table::new(&["delta", "lambda2"]);
            for &(d, l) in &report.lambda2_samples {
                s.push(vec![d.into(), l.into()]);
            }
            Ok(vec![write_table(cfg, "constants", &t)?, write_table(cfg, "lambda2_profile", &s)?])
        }
    }
}

/// One-sided derivatives at selected crossings with `R₄` columns, blank where
/// the extrapolation has no entry.
pub fn cmd_derivatives(cfg: &SolverConfig) -> Result<Vec<PathBuf>> {
    let crossings = compute_crossings(CrossingMethod::CurveIntersection, cfg)?;
    let derivs = crossing_derivatives(&crossings, cfg)?;
    let (left_r4, right_r4) = match compute_constants(cfg).and_then(|(k, _)| derivative_limits_check(&derivs, &k)) {
        Ok(l) => (Some(l.left_r4), Some(l.right_r4)),
        Err(Error::InsufficientData(_)) => (None, None),
        Err(e) => return Err(e),
    };
    let lookup = |s: &Option<HalfPowerSequence>, n: u32| s.as_ref().and_then(|s| s.get(n));
    let mut t = Table::new(&["n", "beta", "dlambda_left", "dlambda_right", "r4_left", "r4_right"]);
    for d in derivs.iter().filter(|d| DERIVATIVE_ROWS.contains(&d.crossing.n)) {
        let n = d.crossing.n;
        t.push(vec![
            n.into(),
            d.crossing.beta_n.into(),
            d.left.dlambda.into(),
            d.right.dlambda.into(),
            lookup(&left_r4, n).into(),
            lookup(&right_r4, n).into(),
        ]);
    }
    Ok(vec![write_table(cfg, "derivatives", &t)?])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub beta_expansion: ExpansionReport,
    pub eta_star_expansion: ExpansionReport,
    pub delta_at_crossings: ExpansionReport,
    /// Log-log slope of `|R₄γₙ - 2|` over the last octave of `R₄γ`.
    pub gamma_r4_slope: Option<f64>,
}

/// `γₙ` and `R₄γₙ` plus the expansion checks.
pub fn cmd_richardson(cfg: &SolverConfig) -> Result<Vec<PathBuf>> {
    let crossings = compute_crossings(CrossingMethod::CurveIntersection, cfg)?;
    let gamma = gamma_sequence(&crossings)?;
    let r4 = richardson_table(&gamma, 4).ok().map(|t| t[3].clone());
    let mut t = Table::new(&["n", "gamma", "r4_gamma"]);
    for &(n, g) in gamma.values() {
        t.push(vec![n.into(), g.into(), r4.as_ref().and_then(|s| s.get(n)).into()]);
    }
    let mut written = vec![write_table(cfg, "gamma", &t)?];
    if let Some(r4) = r4 {
        let (k, _) = compute_constants(cfg)?;
        let last = r4.last().expect("non-empty").0;
        let report = AsymptoticsReport {
            beta_expansion: beta_expansion_check(&crossings, &k)?,
            eta_star_expansion: eta_star_expansion_check(&crossings, &k)?,
            delta_at_crossings: delta_at_crossings_check(&crossings, &k)?,
            gamma_r4_slope: log_log_slope(&r4, 2.0, last / 2, last).ok(),
        };
        written.push(write_json(cfg, "asymptotics", &report)?);
    }
    Ok(written)
}

/// Runs the scans; the flag is `true` when every item passes.
pub fn cmd_conjectures(cfg: &SolverConfig) -> Result<(Vec<PathBuf>, ConjectureReport)> {
    let crossings = compute_crossings(CrossingMethod::CurveIntersection, cfg)?;
    let derivs = crossing_derivatives(&crossings, cfg)?;
    let theta0 = minimize_theta0(cfg)?.theta0;
    let report = conjecture_scan(&cfg.beta_grid.points(), &derivs, theta0, cfg)?;
    let path = match cfg.format {
        OutputFormat::Json => write_json(cfg, "conjectures", &report)?,
        OutputFormat::Csv => {
            let mut t = Table::new(&["item", "value", "witness", "passed"]);
            for i in &report.items {
                t.push(vec![
                    i.label.as_str().into(),
                    i.value.into(),
                    i.witness.into(),
                    if i.passed { "true" } else { "false" }.into(),
                ]);
            }
            write_table(cfg, "conjectures", &t)?
        }
    };
    Ok((vec![path], report))
}

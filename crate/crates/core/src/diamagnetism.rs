//! Derivatives of `λ(n, β)` in `β` from the boundary trace of the normalized
//! eigenfunction, one-sided derivatives of the ground state at the crossings,
//! and finite-range scans of the monotonicity conjectures.

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{richardson_table, HalfPowerSequence, LimitCheck};
use crate::config::SolverConfig;
use crate::degennes::DeGennesConstants;
use crate::error::{Error, Result};
use crate::intersections::CrossingPoint;
use crate::spectrum::{eigenfunction, ground_state, lowest_eigenvalue};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeRecord {
    pub n: u32,
    pub beta: f64,
    pub lambda: f64,
    /// `λ'(n, β)` from the boundary trace.
    pub dlambda: f64,
    /// `f_{n,β}(1)²`
    pub boundary_trace_sq: f64,
    pub fd_derivative: f64,
    pub fh_vs_fd_gap: f64,
}

fn trace_sq(n: u32, beta: f64, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let p = lowest_eigenvalue(n, beta, cfg)?;
    let t = eigenfunction(&p, cfg)?.boundary_trace;
    Ok((p.lambda, t * t))
}

/// `λ' = λ/β - (λ - (n - β/2)²) f(1)² / (2β)`.
fn derivative_formula(n: u32, beta: f64, lambda: f64, trace_sq: f64) -> f64 {
    let w = (f64::from(n) - 0.5 * beta).powi(2);
    lambda / beta - (lambda - w) * trace_sq / (2.0 * beta)
}

pub fn lambda_prime(n: u32, beta: f64, cfg: &SolverConfig) -> Result<DerivativeRecord> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
    }
    let (lambda, t2) = trace_sq(n, beta, cfg)?;
    let dlambda = derivative_formula(n, beta, lambda, t2);
    let h = 1e-5 * beta.max(1.0);
    let fd = (lowest_eigenvalue(n, beta + h, cfg)?.lambda - lowest_eigenvalue(n, beta - h, cfg)?.lambda) / (2.0 * h);
    Ok(DerivativeRecord {
        n,
        beta,
        lambda,
        dlambda,
        boundary_trace_sq: t2,
        fd_derivative: fd,
        fh_vs_fd_gap: (dlambda - fd).abs(),
    })
}

/// `η'(n, β) = f(1)² ((n - β/2)²/β - η) / (2β)`.
pub fn eta_prime(n: u32, beta: f64, cfg: &SolverConfig) -> Result<f64> {
    let (lambda, t2) = trace_sq(n, beta, cfg)?;
    let w = (f64::from(n) - 0.5 * beta).powi(2);
    Ok(t2 * (w / beta - lambda / beta) / (2.0 * beta))
}

/// `(λ'₋(βₙ), λ'₊(βₙ)) = (λ'(n, βₙ), λ'(n+1, βₙ))`.
pub fn one_sided_derivatives(crossing: &CrossingPoint, cfg: &SolverConfig) -> Result<(DerivativeRecord, DerivativeRecord)> {
    Ok((
        lambda_prime(crossing.n, crossing.beta_n, cfg)?,
        lambda_prime(crossing.n + 1, crossing.beta_n, cfg)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingDerivatives {
    pub crossing: CrossingPoint,
    pub left: DerivativeRecord,
    pub right: DerivativeRecord,
}

pub fn crossing_derivatives(crossings: &[CrossingPoint], cfg: &SolverConfig) -> Result<Vec<CrossingDerivatives>> {
    crossings
        .par_iter()
        .map(|c| {
            let (left, right) = one_sided_derivatives(c, cfg)?;
            Ok(CrossingDerivatives {
                crossing: *c,
                left,
                right,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanItem {
    pub label: String,
    pub value: f64,
    /// `β` or `n` at which `value` is attained.
    pub witness: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub items: Vec<ScanItem>,
    pub grid_points: usize,
    pub crossings: usize,
}

impl ConjectureReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

fn extremum(values: impl Iterator<Item = (f64, f64)>, largest: bool) -> (f64, f64) {
    let init = if largest { f64::NEG_INFINITY } else { f64::INFINITY };
    values.fold((init, f64::NAN), |best, (w, v)| {
        if (largest && v > best.0) || (!largest && v < best.0) {
            (v, w)
        } else {
            best
        }
    })
}

/// Scans on `beta_grid` and at the supplied crossings:
/// (a) `max η(β) - Θ₀ < 0`, (b) `min ηₙ₊₁* - ηₙ* > 0`,
/// (c) `min λ'₊(βₙ) > 0`, (d) `min` of grid slopes of `λ(β)` `> 0`.
pub fn conjecture_scan(
    beta_grid: &[f64],
    derivs: &[CrossingDerivatives],
    theta0: f64,
    cfg: &SolverConfig,
) -> Result<ConjectureReport> {
    if beta_grid.windows(2).any(|w| !(w[0] < w[1])) || beta_grid.first().is_some_and(|&b| !(b > 0.0)) {
        return Err(Error::InvalidParams("beta grid must be positive and increasing".into()));
    }
    let lambdas: Vec<f64> = beta_grid
        .par_iter()
        .map(|&b| ground_state(b, cfg).map(|(p, _)| p.lambda))
        .collect::<Result<_>>()?;

    let etas = beta_grid
        .iter()
        .zip(&lambdas)
        .map(|(&b, &l)| (b, l / b - theta0))
        .chain(derivs.iter().map(|d| (d.crossing.beta_n, d.crossing.eta_star - theta0)));
    let (a, a_at) = extremum(etas, true);

    let (b, b_at) = extremum(
        derivs
            .windows(2)
            .map(|w| (f64::from(w[0].crossing.n), w[1].crossing.eta_star - w[0].crossing.eta_star)),
        false,
    );
    let (c, c_at) = extremum(derivs.iter().map(|d| (f64::from(d.crossing.n), d.right.dlambda)), false);
    let (d, d_at) = extremum(
        beta_grid
            .windows(2)
            .zip(lambdas.windows(2))
            .map(|(b, l)| (b[0], (l[1] - l[0]) / (b[1] - b[0]))),
        false,
    );

    let item = |label: &str, value: f64, witness: f64, passed: bool| ScanItem {
        label: label.to_string(),
        value,
        witness,
        passed,
    };
    Ok(ConjectureReport {
        items: vec![
            item("eta_below_theta0", a, a_at, a < 0.0),
            item("eta_star_increasing", b, b_at, derivs.len() < 2 || b > 0.0),
            item("right_derivative_positive", c, c_at, derivs.is_empty() || c > 0.0),
            item("lambda_increasing", d, d_at, beta_grid.len() < 2 || d > 0.0),
        ],
        grid_points: beta_grid.len(),
        crossings: derivs.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeLimits {
    pub left_r4: HalfPowerSequence,
    pub right_r4: HalfPowerSequence,
    pub checks: Vec<LimitCheck>,
}

impl DerivativeLimits {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(LimitCheck::passed)
    }

    pub fn find(&self, label: &str) -> Option<&LimitCheck> {
        self.checks.iter().find(|c| c.label == label)
    }
}

fn check_from_table(label: &str, table: &[HalfPowerSequence], target: f64, tolerance: f64) -> LimitCheck {
    let (index, value) = table[3].last().expect("non-empty");
    let r3 = table[2].get(index).expect("R3 covers every R4 index");
    LimitCheck {
        label: label.to_string(),
        index,
        value,
        target,
        tolerance,
        depth_gap: (r3 - value).abs(),
    }
}

/// Extrapolates `λ'(n, βₙ)`, `λ'(n+1, βₙ)` and `βₙ^{-1/2} f_{n,βₙ}(1)²` and
/// compares with `Θ₀ ± (3/2)C₁|ξ₀|` and `u₀(0)²`.
pub fn derivative_limits_check(derivs: &[CrossingDerivatives], constants: &DeGennesConstants) -> Result<DerivativeLimits> {
    let usable: Vec<&CrossingDerivatives> = derivs.iter().filter(|d| d.crossing.n > 0).collect();
    if usable.len() < 17 {
        return Err(Error::InsufficientData(format!(
            "{} crossings, four extrapolations need at least 17",
            usable.len()
        )));
    }
    let seq = |f: &dyn Fn(&CrossingDerivatives) -> f64| {
        HalfPowerSequence::new(usable.iter().map(|d| (d.crossing.n, f(d))).collect())
    };
    let left = richardson_table(&seq(&|d| d.left.dlambda)?, 4)?;
    let right = richardson_table(&seq(&|d| d.right.dlambda)?, 4)?;
    let trace = richardson_table(&seq(&|d| d.left.boundary_trace_sq / d.crossing.beta_n.sqrt())?, 4)?;
    let shift = 1.5 * constants.c1 * constants.xi0.abs();
    let checks = vec![
        check_from_table("left_limit", &left, constants.theta0 + shift, 2e-3),
        check_from_table("right_limit", &right, constants.theta0 - shift, 2e-3),
        check_from_table("trace_limit", &trace, constants.u0_trace.powi(2), 2e-3),
    ];
    Ok(DerivativeLimits {
        left_r4: left[3].clone(),
        right_r4: right[3].clone(),
        checks,
    })
}

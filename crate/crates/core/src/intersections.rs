//! Crossing points `βₙ` where `λ(n, ·)` and `λ(n+1, ·)` meet, located three
//! ways: nested root finding on the two curves, Newton on the pair of Neumann
//! conditions, and a scalar equation in `ν` after eliminating `x` with the
//! Saint-James relation.

use std::fmt;

use serde::Serialize;

use crate::config::SolverConfig;
use crate::diamagnetism::eta_prime;
use crate::error::{Error, Result};
use crate::roots;
use crate::spectrum::{lowest_eigenvalue, neumann_defect, XI0_ESTIMATE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingMethod {
    CurveIntersection,
    KummerSystem,
    ImplicitPhi,
}

impl fmt::Display for CrossingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CrossingMethod::CurveIntersection => "curve_intersection",
            CrossingMethod::KummerSystem => "kummer_system",
            CrossingMethod::ImplicitPhi => "implicit_phi",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossingPoint {
    pub n: u32,
    pub beta_n: f64,
    pub eta_star: f64,
    pub lambda_star: f64,
    /// `|βₙ - SJ(n, ηₙ*)|`
    pub sj_residual: f64,
    /// Scaled Neumann residuals of modes `n` and `n + 1`.
    pub sys_residuals: (f64, f64),
    pub method: CrossingMethod,
}

impl CrossingPoint {
    fn build(n: u32, beta: f64, eta: f64, method: CrossingMethod, cfg: &SolverConfig) -> Result<Self> {
        Ok(CrossingPoint {
            n,
            beta_n: beta,
            eta_star: eta,
            lambda_star: beta * eta,
            sj_residual: (beta - saint_james_beta(n, eta)).abs(),
            sys_residuals: (
                neumann_defect(n, beta, eta, cfg)?,
                neumann_defect(n + 1, beta, eta, cfg)?,
            ),
            method,
        })
    }

    /// `(βₙ - (2n+1))² - (4λₙ* + 1)`, zero by the Saint-James relation.
    pub fn alt_sj_defect(&self) -> f64 {
        (self.beta_n - (2.0 * f64::from(self.n) + 1.0)).powi(2) - (4.0 * self.lambda_star + 1.0)
    }
}

/// Larger root of `β² - 2(2η + 2n + 1)β + 4n(n+1) = 0`.
pub fn saint_james_beta(n: u32, eta: f64) -> f64 {
    let nf = f64::from(n);
    2.0 * eta + 2.0 * nf + 1.0 + ((2.0 * eta + 1.0).powi(2) + 8.0 * nf * eta).sqrt()
}

/// Leading terms of the large-`n` expansion of `βₙ`.
pub fn crossing_guess(n: u32) -> f64 {
    let nf = f64::from(n);
    2.0 * nf - 2f64.powf(1.5) * XI0_ESTIMATE * nf.sqrt() + 2.0
}

fn crossing_bracket(n: u32) -> (f64, f64) {
    (2.0 * (f64::from(n) + 1.0), saint_james_beta(n, 0.99) + 10.0)
}

/// Expands outward from `guess` until `f` changes sign, staying inside
/// `[lo, hi]`; `f` is negative left of the root.
fn bracket_from_guess<F>(mut f: F, guess: f64, lo: f64, hi: f64) -> Result<(f64, f64, f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let g = guess.clamp(lo, hi);
    let fg = f(g)?;
    if fg == 0.0 {
        return Ok((g, fg, g, fg));
    }
    let mut step = 0.25;
    let mut prev = (g, fg);
    loop {
        let x = if fg < 0.0 { (prev.0 + step).min(hi) } else { (prev.0 - step).max(lo) };
        let fx = f(x)?;
        if fx == 0.0 || fx.signum() != fg.signum() {
            return Ok(if x > prev.0 {
                (prev.0, prev.1, x, fx)
            } else {
                (x, fx, prev.0, prev.1)
            });
        }
        if x == lo || x == hi {
            return Err(Error::BracketFailure(format!(
                "no crossing of curves {} and {} in [{lo}, {hi}]",
                guess, hi
            )));
        }
        prev = (x, fx);
        step *= 2.0;
    }
}

pub fn crossing_by_curves(n: u32, cfg: &SolverConfig) -> Result<CrossingPoint> {
    let (lo, hi) = crossing_bracket(n);
    let gap = |beta: f64| -> Result<f64> {
        Ok(lowest_eigenvalue(n, beta, cfg)?.lambda - lowest_eigenvalue(n + 1, beta, cfg)?.lambda)
    };
    let (a, fa, b, fb) = bracket_from_guess(gap, crossing_guess(n), lo, hi)
        .map_err(|_| Error::BracketFailure(format!("curves {n} and {} do not cross in [{lo}, {hi}]", n + 1)))?;
    let beta = roots::brent_with_values(gap, a, fa, b, fb, 0.0, cfg.cross_rel_tol, 200)?;
    let p = lowest_eigenvalue(n, beta, cfg)?;
    CrossingPoint::build(n, beta, p.eta.expect("beta > 0"), CrossingMethod::CurveIntersection, cfg)
}

/// Neumann conditions of modes `n` and `n + 1` at `(x, ν)`.
fn system(n: u32, x: f64, nu: f64, cfg: &SolverConfig) -> Result<[f64; 2]> {
    let beta = 2.0 * x;
    let eta = 1.0 - 2.0 * nu;
    Ok([neumann_defect(n, beta, eta, cfg)?, neumann_defect(n + 1, beta, eta, cfg)?])
}

fn norm2(v: &[f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn newton_system(n: u32, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let beta0 = crossing_guess(n).max(crossing_bracket(n).0);
    let eta0 = lowest_eigenvalue(n, beta0, cfg)?.eta.expect("beta > 0");
    let (mut x, mut nu) = (0.5 * beta0, 0.5 * (1.0 - eta0));
    let mut f = system(n, x, nu, cfg)?;
    for _ in 0..cfg.newton_max_iter {
        if norm2(&f) < 1e-14 {
            return Ok((x, nu));
        }
        let hx = 1e-7 * x;
        let hn = 1e-7 * nu.abs().max(1e-3);
        let fxp = system(n, x + hx, nu, cfg)?;
        let fxm = system(n, x - hx, nu, cfg)?;
        let fnp = system(n, x, nu + hn, cfg)?;
        let fnm = system(n, x, nu - hn, cfg)?;
        let j = [
            [(fxp[0] - fxm[0]) / (2.0 * hx), (fnp[0] - fnm[0]) / (2.0 * hn)],
            [(fxp[1] - fxm[1]) / (2.0 * hx), (fnp[1] - fnm[1]) / (2.0 * hn)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dn = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        let mut t = 1.0;
        let current = norm2(&f);
        let mut accepted = false;
        for _ in 0..30 {
            let trial = system(n, x + t * dx, nu + t * dn, cfg)?;
            if norm2(&trial) < current {
                x += t * dx;
                nu += t * dn;
                f = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Stalled at the noise floor of the residuals.
            if current < 1e-12 {
                return Ok((x, nu));
            }
            break;
        }
        if (t * dx).abs() <= 1e-16 * x && (t * dn).abs() <= 1e-16 * nu.abs().max(1e-3) {
            return Ok((x, nu));
        }
    }
    Err(Error::NewtonDivergence {
        iterations: cfg.newton_max_iter,
    })
}

/// Damped Newton on the two Neumann conditions in `(x, ν)`; falls back to
/// the nested curve method when Newton fails.
pub fn crossing_by_system(n: u32, cfg: &SolverConfig) -> Result<CrossingPoint> {
    match newton_system(n, cfg) {
        Ok((x, nu)) => CrossingPoint::build(n, 2.0 * x, 1.0 - 2.0 * nu, CrossingMethod::KummerSystem, cfg),
        Err(Error::NewtonDivergence { .. }) => crossing_by_curves(n, cfg),
        Err(e) => Err(e),
    }
}

/// `x(ν)` from the Saint-James relation at `η = 1 - 2ν`.
pub fn x_of_nu(n: u32, nu: f64) -> f64 {
    let nf = f64::from(n);
    (1.0 - 2.0 * nu + nf + 0.5) + 0.5 * ((3.0 - 4.0 * nu).powi(2) + 8.0 * (1.0 - 2.0 * nu) * nf).sqrt()
}

/// `Φ(ν, n)`: the mode-`n` Neumann condition along the Saint-James curve.
pub fn phi(n: u32, nu: f64, cfg: &SolverConfig) -> Result<f64> {
    neumann_defect(n, 2.0 * x_of_nu(n, nu), 1.0 - 2.0 * nu, cfg)
}

pub fn crossing_by_phi(n: u32, cfg: &SolverConfig) -> Result<CrossingPoint> {
    let f = |nu: f64| phi(n, nu, cfg);
    let (lo, hi) = (1e-12, 0.5 - 1e-12);
    let (a, fa, b, fb) = roots::scan_for_sign_change(f, lo, hi, |_| 0.01)?
        .ok_or_else(|| Error::BracketFailure(format!("Phi(., {n}) has no sign change in (0, 1/2)")))?;
    let nu = roots::brent_with_values(f, a, fa, b, fb, 0.0, 1e-15, 200)?;
    CrossingPoint::build(n, 2.0 * x_of_nu(n, nu), 1.0 - 2.0 * nu, CrossingMethod::ImplicitPhi, cfg)
}

/// `(η'(n, βₙ), η'(n+1, βₙ))`; interlacing requires the first positive and
/// the second negative.
pub fn interlacing_check(crossing: &CrossingPoint, cfg: &SolverConfig) -> Result<(f64, f64)> {
    Ok((
        eta_prime(crossing.n, crossing.beta_n, cfg)?,
        eta_prime(crossing.n + 1, crossing.beta_n, cfg)?,
    ))
}

/// The unique minimizer `βₘᵢₙ(n) > 2n` of `β ↦ η(n, β)`, `n ≥ 1`: the root of
/// `λ(n, β) = (n - β/2)²`.
pub fn beta_min(n: u32, cfg: &SolverConfig) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("eta(0, .) is increasing and has no minimum".into()));
    }
    let nf = f64::from(n);
    let g = |beta: f64| -> Result<f64> { Ok(lowest_eigenvalue(n, beta, cfg)?.lambda - (nf - 0.5 * beta).powi(2)) };
    let (lo, hi) = (2.0 * nf, crossing_bracket(n).1);
    roots::brent(g, lo, hi, 0.0, cfg.cross_rel_tol, 200)
}

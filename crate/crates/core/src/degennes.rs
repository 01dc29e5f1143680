//! De Gennes model operator `-d²/dt² + (t + ξ)²` on the half-line with
//! Neumann data at `t = 0`, its minimal ground energy `Θ₀` and the second
//! order boundary-layer perturbation profile `λ₂(δ)`.
//!
//! Every quantity is computed on two FD grids (`count` and `2 count - 1`)
//! and Richardson-combined.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::fd::{fd_degennes_eigen, richardson_h2, Grid1D, TridiagSystem};
use crate::roots;

/// Bracket for the minimizer: `Θ₀ = ξ₀² < 1` forces `ξ₀ ∈ (-1, 0)`.
const XI_BRACKET: (f64, f64) = (-2.0, 0.0);
const XI_TOL: f64 = 1e-8;
/// Residual bound for the constrained resolvent solve.
const SOLVE_RESIDUAL_MAX: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeGennesConstants {
    pub theta0: f64,
    pub xi0: f64,
    pub c1: f64,
    pub u0_trace: f64,
    /// `½ Θ₀^{-1/2} C₁`
    pub delta0_formula: f64,
    pub delta0_fit: f64,
    pub c0_fit: f64,
    pub lambda1_check: f64,
    pub grid_count: usize,
    pub domain_length: f64,
}

impl DeGennesConstants {
    fn from_minimum(theta0: f64, xi0: f64, u0_trace: f64, cfg: &SolverConfig) -> Self {
        let c1 = u0_trace * u0_trace / 3.0;
        DeGennesConstants {
            theta0,
            xi0,
            c1,
            u0_trace,
            delta0_formula: 0.5 * c1 / theta0.sqrt(),
            delta0_fit: f64::NAN,
            c0_fit: f64::NAN,
            lambda1_check: f64::NAN,
            grid_count: cfg.degennes_grid_count,
            domain_length: cfg.degennes_l,
        }
    }

    /// `3 C₁ Θ₀^{1/2}`, the curvature of `λ₂(δ)` and half of `λ^{DG}''(ξ₀)`.
    pub fn lambda2_curvature(&self) -> f64 {
        3.0 * self.c1 * self.theta0.sqrt()
    }
}

/// Quadratic fit `λ₂(δ) = A ((δ - δ₀)² + C₀)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lambda2Profile {
    pub delta0_fit: f64,
    pub c0_fit: f64,
    /// Leading coefficient `A`.
    pub leading: f64,
    /// `(δ, λ₂(δ))` after Richardson combination.
    pub samples: Vec<(f64, f64)>,
    pub max_fit_residual: f64,
    pub c0_coarse: f64,
    pub c0_fine: f64,
}

fn domain_length(xi: f64, cfg: &SolverConfig) -> f64 {
    cfg.degennes_l.max(8.0 + xi.abs())
}

/// `λ^{DG}(ξ)`.
pub fn lambda_dg(xi: f64, cfg: &SolverConfig) -> Result<f64> {
    let l = domain_length(xi, cfg);
    let grid = Grid1D::new(0.0, l, cfg.degennes_grid_count)?;
    Ok(fd_degennes_eigen(xi, l, grid)?.lambda)
}

/// Ground state of one discretization together with the grid calculus
/// needed by the perturbation formulas.
struct Discrete {
    sys: TridiagSystem,
    lambda: f64,
    /// Ground state on the free nodes, `Σ m u² = 1`, `u > 0`.
    u: Vec<f64>,
    t: Vec<f64>,
    h: f64,
}

impl Discrete {
    fn new(xi: f64, grid: Grid1D) -> Result<Self> {
        let sys = TridiagSystem::degennes(xi, grid)?;
        let pair = sys.lowest()?;
        let u = sys.restrict(&pair.vector).to_vec();
        let t = (0..sys.len()).map(|i| grid.node(i)).collect();
        Ok(Discrete {
            sys,
            lambda: pair.lambda,
            u,
            t,
            h: grid.spacing,
        })
    }

    fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.sys.mass_inner(f, g)
    }

    /// Second-order derivative: one-sided at `t = 0`, central inside, with
    /// the Dirichlet value 0 past the last free node.
    fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let at = |i: usize| if i < n { f[i] } else { 0.0 };
        (0..n)
            .map(|i| {
                if i == 0 {
                    (-3.0 * f[0] + 4.0 * at(1) - at(2)) / (2.0 * self.h)
                } else {
                    (at(i + 1) - f[i - 1]) / (2.0 * self.h)
                }
            })
            .collect()
    }

    /// `Σ m (t + ξ) u²`, i.e. half of `dλ/dξ`.
    fn stationarity(&self, xi: f64) -> f64 {
        self.u
            .iter()
            .zip(&self.t)
            .zip(&self.sys.mass)
            .map(|((u, t), m)| m * (t + xi) * u * u)
            .sum()
    }

    /// `𝔥₁ f = f' + [2(τ+ξ)(δ - τ²/2) + 2τ(τ+ξ)²] f`
    fn apply_h1(&self, f: &[f64], xi: f64, delta: f64) -> Vec<f64> {
        let df = self.derivative(f);
        f.iter()
            .zip(&df)
            .zip(&self.t)
            .map(|((v, d), &t)| {
                let s = t + xi;
                d + (2.0 * s * (delta - 0.5 * t * t) + 2.0 * t * s * s) * v
            })
            .collect()
    }

    /// `𝔥₂ f = τ f' + [(δ - τ²/2)² + 4τ(τ+ξ)(δ - τ²/2) + 3τ²(τ+ξ)²] f`
    fn apply_h2(&self, f: &[f64], xi: f64, delta: f64) -> Vec<f64> {
        let df = self.derivative(f);
        f.iter()
            .zip(&df)
            .zip(&self.t)
            .map(|((v, d), &t)| {
                let s = t + xi;
                let p = delta - 0.5 * t * t;
                t * d + (p * p + 4.0 * t * s * p + 3.0 * t * t * s * s) * v
            })
            .collect()
    }

    fn lambda1(&self, xi: f64, delta: f64) -> f64 {
        self.inner(&self.u, &self.apply_h1(&self.u, xi, delta))
    }

    /// Solves `(A - λ M) y = M g` on the `M`-orthogonal complement of `u`
    /// by shifted solves with iterative refinement.
    fn reduced_resolvent(&self, g: &[f64]) -> Result<Vec<f64>> {
        let n = g.len();
        let project = |v: &mut Vec<f64>| {
            let c = self.inner(&self.u, v);
            v.iter_mut().zip(&self.u).for_each(|(x, u)| *x -= c * u);
        };
        let mut g = g.to_vec();
        project(&mut g);
        let rhs: Vec<f64> = g.iter().zip(&self.sys.mass).map(|(v, m)| v * m).collect();
        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let shift = self.lambda - 1e-2;
        let residual = |y: &[f64]| -> Vec<f64> {
            let ay = self.sys.apply(y);
            (0..n)
                .map(|i| rhs[i] - (ay[i] - self.lambda * self.sys.mass[i] * y[i]))
                .collect()
        };
        let mut y = vec![0.0; n];
        let mut rel = f64::INFINITY;
        for _ in 0..60 {
            let r = residual(&y);
            rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / rhs_norm;
            if rel < 1e-13 {
                break;
            }
            let dy = self.sys.solve_shifted(shift, &r)?;
            y.iter_mut().zip(&dy).for_each(|(a, b)| *a += b);
            project(&mut y);
        }
        if rel > SOLVE_RESIDUAL_MAX {
            return Err(Error::IllConditioned { residual: rel });
        }
        Ok(y)
    }

    /// `λ₂(δ) = ⟨u, 𝔥₂ u⟩ + ⟨u, (𝔥₁ - λ₁) u₁⟩` with `u₁ = -R₀ (𝔥₁ - λ₁) u`.
    fn lambda2(&self, xi: f64, delta: f64) -> Result<f64> {
        let lambda1 = self.lambda1(xi, delta);
        let g: Vec<f64> = self
            .apply_h1(&self.u, xi, delta)
            .iter()
            .zip(&self.u)
            .map(|(a, u)| a - lambda1 * u)
            .collect();
        let u1: Vec<f64> = self.reduced_resolvent(&g)?.iter().map(|v| -v).collect();
        let h1u1 = self.apply_h1(&u1, xi, delta);
        let coupling: Vec<f64> = h1u1.iter().zip(&u1).map(|(a, b)| a - lambda1 * b).collect();
        Ok(self.inner(&self.u, &self.apply_h2(&self.u, xi, delta)) + self.inner(&self.u, &coupling))
    }
}

fn grids(cfg: &SolverConfig, xi: f64) -> Result<(Grid1D, Grid1D)> {
    let coarse = Grid1D::new(0.0, domain_length(xi, cfg), cfg.degennes_grid_count)?;
    Ok((coarse, coarse.refined()))
}

fn pair(xi: f64, cfg: &SolverConfig) -> Result<(Discrete, Discrete)> {
    let (coarse, fine) = grids(cfg, xi)?;
    Ok((Discrete::new(xi, coarse)?, Discrete::new(xi, fine)?))
}

/// `⟨u, (t + ξ) u⟩` for the normalized ground state at `ξ`.
pub fn stationarity_at(xi: f64, cfg: &SolverConfig) -> Result<f64> {
    let (c, f) = pair(xi, cfg)?;
    Ok(richardson_h2(c.stationarity(xi), f.stationarity(xi)))
}

/// Golden-section search for the minimum of `λ^{DG}`, polished by the root of
/// the discrete Feynman-Hellmann derivative.
pub fn minimize_theta0(cfg: &SolverConfig) -> Result<DeGennesConstants> {
    let (xi_golden, _) = roots::golden_section(|xi| lambda_dg(xi, cfg), XI_BRACKET.0, XI_BRACKET.1, XI_TOL)?;
    let slope = |xi: f64| stationarity_at(xi, cfg);
    let width = 1e-3;
    let xi0 = roots::brent(slope, xi_golden - width, xi_golden + width, 1e-15, 1e-15, 200)?;
    if (xi0 - xi_golden).abs() > 1e-5 {
        return Err(Error::MinimizationFailure { at: xi0 });
    }
    let (c, f) = pair(xi0, cfg)?;
    let theta0 = richardson_h2(c.lambda, f.lambda);
    let u0_trace = richardson_h2(c.u[0], f.u[0]);
    Ok(DeGennesConstants::from_minimum(theta0, xi0, u0_trace, cfg))
}

/// `⟨u₀, 𝔥₁ u₀⟩` at the given `δ`; equals `-C₁` for every `δ`.
pub fn lambda1_at(constants: &DeGennesConstants, delta: f64, cfg: &SolverConfig) -> Result<f64> {
    let (c, f) = pair(constants.xi0, cfg)?;
    Ok(richardson_h2(
        c.lambda1(constants.xi0, delta),
        f.lambda1(constants.xi0, delta),
    ))
}

pub fn lambda1_check(constants: &DeGennesConstants, cfg: &SolverConfig) -> Result<f64> {
    lambda1_at(constants, 0.0, cfg)
}

/// `⟨u₀, u₀'⟩` on the grid; `-u₀(0)²/2` by integration by parts.
pub fn trace_identity(constants: &DeGennesConstants, cfg: &SolverConfig) -> Result<f64> {
    let (c, f) = pair(constants.xi0, cfg)?;
    let value = |d: &Discrete| d.inner(&d.u, &d.derivative(&d.u));
    Ok(richardson_h2(value(&c), value(&f)))
}

pub fn stationarity_check(constants: &DeGennesConstants, cfg: &SolverConfig) -> Result<f64> {
    stationarity_at(constants.xi0, cfg)
}

/// Least-squares quadratic through `(x, y)`: returns `(a, b, c, max residual)`
/// for `y ≈ a x² + b x + c`.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::InsufficientData("quadratic fit needs 3 points".into()));
    }
    // Normal equations in the centered variable for conditioning.
    let mean = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let mut s = [0.0f64; 5];
    let mut r = [0.0f64; 3];
    for &(x, y) in points {
        let u = x - mean;
        let mut p = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += p;
            if k < 3 {
                r[k] += p * y;
            }
            p *= u;
        }
    }
    let m = [[s[4], s[3], s[2]], [s[3], s[2], s[1]], [s[2], s[1], s[0]]];
    let rhs = [r[2], r[1], r[0]];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let det = det3(&m);
    if det == 0.0 {
        return Err(Error::InsufficientData("degenerate abscissae in quadratic fit".into()));
    }
    let solve = |col: usize| {
        let mut mm = m;
        for row in 0..3 {
            mm[row][col] = rhs[row];
        }
        det3(&mm) / det
    };
    let (a, bu, cu) = (solve(0), solve(1), solve(2));
    // back to x: a(x-μ)² + bu(x-μ) + cu
    let b = bu - 2.0 * a * mean;
    let c = a * mean * mean - bu * mean + cu;
    let max_res = points
        .iter()
        .map(|&(x, y)| (a * x * x + b * x + c - y).abs())
        .fold(0.0, f64::max);
    Ok((a, b, c, max_res))
}

fn vertex_form(a: f64, b: f64, c: f64) -> (f64, f64) {
    let delta0 = -b / (2.0 * a);
    (delta0, c / a - delta0 * delta0)
}

pub fn lambda2_profile(delta_grid: &[f64], constants: &DeGennesConstants, cfg: &SolverConfig) -> Result<Lambda2Profile> {
    if delta_grid.len() < 5 {
        return Err(Error::InsufficientData("lambda2 profile needs at least 5 delta values".into()));
    }
    let lo = delta_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = delta_grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo > -1.0 || hi < 1.0 {
        return Err(Error::InsufficientData("delta grid must span [-1, 1]".into()));
    }
    let xi = constants.xi0;
    let (c, f) = pair(xi, cfg)?;
    let values: Vec<(f64, f64, f64)> = delta_grid
        .par_iter()
        .map(|&d| Ok((d, c.lambda2(xi, d)?, f.lambda2(xi, d)?)))
        .collect::<Result<_>>()?;
    let coarse: Vec<(f64, f64)> = values.iter().map(|v| (v.0, v.1)).collect();
    let fine: Vec<(f64, f64)> = values.iter().map(|v| (v.0, v.2)).collect();
    let samples: Vec<(f64, f64)> = values.iter().map(|v| (v.0, richardson_h2(v.1, v.2))).collect();
    let (a, b, cc, max_fit_residual) = fit_quadratic(&samples)?;
    let (delta0_fit, c0_fit) = vertex_form(a, b, cc);
    let c0_of = |pts: &[(f64, f64)]| -> Result<f64> {
        let (a, b, c, _) = fit_quadratic(pts)?;
        Ok(vertex_form(a, b, c).1)
    };
    Ok(Lambda2Profile {
        delta0_fit,
        c0_fit,
        leading: a,
        samples,
        max_fit_residual,
        c0_coarse: c0_of(&coarse)?,
        c0_fine: c0_of(&fine)?,
    })
}

/// The default `δ` grid: `-1, -0.75, …, 1`.
pub fn default_delta_grid() -> Vec<f64> {
    (0..=8).map(|i| -1.0 + 0.25 * f64::from(i)).collect()
}

/// Minimization, trace, `λ₁` and `λ₂` profile in one pass.
pub fn compute_constants(cfg: &SolverConfig) -> Result<(DeGennesConstants, Lambda2Profile)> {
    let mut k = minimize_theta0(cfg)?;
    k.lambda1_check = lambda1_check(&k, cfg)?;
    let profile = lambda2_profile(&default_delta_grid(), &k, cfg)?;
    k.delta0_fit = profile.delta0_fit;
    k.c0_fit = profile.c0_fit;
    Ok((k, profile))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn constants() -> &'static (DeGennesConstants, Lambda2Profile) {
        static K: OnceLock<(DeGennesConstants, Lambda2Profile)> = OnceLock::new();
        K.get_or_init(|| compute_constants(&cfg()).unwrap())
    }

    /// RK4 shooting with Neumann data at 0; bisects on the sign of `u(T)`.
    fn shooting(xi: f64, lo: f64, hi: f64) -> f64 {
        let sign_at_end = |lambda: f64| {
            let steps = 8000;
            let h = 7.0 / steps as f64;
            let rhs = |t: f64, u: f64, p: f64| (p, ((t + xi).powi(2) - lambda) * u);
            let (mut u, mut p) = (1.0, 0.0);
            for k in 0..steps {
                let t = k as f64 * h;
                let (a1, b1) = rhs(t, u, p);
                let (a2, b2) = rhs(t + 0.5 * h, u + 0.5 * h * a1, p + 0.5 * h * b1);
                let (a3, b3) = rhs(t + 0.5 * h, u + 0.5 * h * a2, p + 0.5 * h * b2);
                let (a4, b4) = rhs(t + h, u + h * a3, p + h * b3);
                u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
                p += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            }
            u.signum()
        };
        let (mut lo, mut hi) = (lo, hi);
        let s = sign_at_end(lo);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if sign_at_end(mid) == s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn lambda_dg_reference_points() {
        assert!((lambda_dg(-0.768, &cfg()).unwrap() - 0.590_106).abs() < 1e-5);
        assert!((lambda_dg(-10.0, &cfg()).unwrap() - 1.0).abs() < 1e-4);
        let shot = shooting(0.0, 0.5, 1.5);
        assert!((lambda_dg(0.0, &cfg()).unwrap() - shot).abs() < 1e-8);
    }

    #[test]
    fn minimum_and_constants() {
        let (k, _) = constants();
        assert!((k.theta0 - 0.590_106).abs() < 1e-5);
        assert!((k.xi0 + 0.768).abs() < 1e-3);
        assert!((k.c1 - 0.254).abs() < 1e-3);
        assert!((k.theta0 - k.xi0 * k.xi0).abs() < 1e-5);
        assert!(k.theta0 > 0.0 && k.theta0 < 1.0 && k.xi0 < 0.0);
        assert_eq!(k.c1, k.u0_trace * k.u0_trace / 3.0);
    }

    #[test]
    fn stationarity_signs() {
        let (k, _) = constants();
        assert!(stationarity_check(k, &cfg()).unwrap().abs() < 1e-6);
        let right = stationarity_at(k.xi0 + 0.1, &cfg()).unwrap();
        let left = stationarity_at(k.xi0 - 0.1, &cfg()).unwrap();
        assert!(right > 0.0 && left < 0.0);
        // Finite-difference slope of λ^{DG} agrees in sign and vanishes at ξ₀.
        let h = 1e-4;
        let d = |x: f64| (lambda_dg(x + h, &cfg()).unwrap() - lambda_dg(x - h, &cfg()).unwrap()) / (2.0 * h);
        assert!(d(k.xi0).abs() < 1e-5);
        assert!(d(k.xi0 + 0.1) > 0.0 && d(k.xi0 - 0.1) < 0.0);
        assert!((d(k.xi0 + 0.1) - 2.0 * right).abs() < 1e-5);
    }

    #[test]
    fn strict_convexity_at_minimum() {
        let (k, _) = constants();
        let s = 0.05;
        let v: Vec<f64> = (-2..=2)
            .map(|i| lambda_dg(k.xi0 + f64::from(i) * s, &cfg()).unwrap())
            .collect();
        for w in v.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] > 0.0);
        }
        // λ'' = 2·3C₁Θ₀^{1/2}
        let second = (v[1] - 2.0 * v[2] + v[3]) / (s * s);
        assert!((second / (2.0 * k.lambda2_curvature()) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn first_order_coefficient() {
        let (k, _) = constants();
        assert!((k.lambda1_check + 0.254).abs() < 2e-3);
        assert!((k.lambda1_check + k.c1).abs() < 2e-3);
        let at_one = lambda1_at(k, 1.0, &cfg()).unwrap();
        assert!((at_one - k.lambda1_check).abs() < 1e-6);
        let ibp = trace_identity(k, &cfg()).unwrap();
        assert!((ibp + 0.5 * k.u0_trace * k.u0_trace).abs() < 1e-6);
    }

    #[test]
    fn second_order_profile_is_the_predicted_parabola() {
        let (k, p) = constants();
        assert!((p.leading / k.lambda2_curvature() - 1.0).abs() < 1e-3);
        assert!(p.max_fit_residual < 1e-9);
        assert!((p.c0_coarse - p.c0_fine).abs() < 1e-3);
        // symmetry about the vertex
        let lam = |d: f64| p.leading * ((d - p.delta0_fit).powi(2) + p.c0_fit);
        for &(d, v) in &p.samples {
            assert!((lam(2.0 * p.delta0_fit - d) - v).abs() < 1e-8);
        }
        assert!((k.delta0_fit - k.delta0_formula).abs() < 2e-3);
    }

    #[test]
    fn quadratic_fit_exact_on_parabola() {
        let pts: Vec<(f64, f64)> = (-3..=3)
            .map(|i| {
                let x = f64::from(i) * 0.5;
                (x, 2.0 * x * x - 0.3 * x + 0.7)
            })
            .collect();
        let (a, b, c, r) = fit_quadratic(&pts).unwrap();
        assert!((a - 2.0).abs() < 1e-13 && (b + 0.3).abs() < 1e-13 && (c - 0.7).abs() < 1e-13);
        assert!(r < 1e-13);
        assert!(fit_quadratic(&pts[..2]).is_err());
    }

    #[test]
    fn profile_rejects_short_grid() {
        let (k, _) = constants();
        assert!(lambda2_profile(&[-1.0, 0.0, 1.0], k, &cfg()).is_err());
        assert!(lambda2_profile(&[-0.5, -0.2, 0.0, 0.2, 0.5], k, &cfg()).is_err());
    }
}

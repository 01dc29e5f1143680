//! Lowest eigenvalue `λ(n, β)` of the radial operator
//! `H_{n,β} = -f'' - f'/r + (n/r - βr/2)² f` on `(0, 1)` with Neumann data at
//! `r = 1`, and the global ground state `λ(β) = min_n λ(n, β)`.
//!
//! The regular solution is `r^n e^{-βr²/4} M(ν, n+1, βr²/2)` with
//! `ν = (1 - η)/2`, `η = λ/β`, so the eigenvalues are the roots in `η` of the
//! Neumann condition at `r = 1`.

use std::collections::HashMap;

use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::kummer::{kummer_m, kummer_sign_and_ratio, KummerArgs};
use crate::quadrature;
use crate::roots;
use crate::special::bessel_j_prime_first_zero;

/// Published value of the De Gennes minimizer, used only for initial guesses.
pub const XI0_ESTIMATE: f64 = -0.768;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenPoint {
    pub n: u32,
    pub beta: f64,
    pub lambda: f64,
    /// `λ / β`; `None` at `β = 0`.
    pub eta: Option<f64>,
    /// `(1 - η)/2` to full relative precision, which `eta` cannot carry
    /// when `η` is exponentially close to 1.
    pub nu: Option<f64>,
}

impl EigenPoint {
    fn from_nu(n: u32, beta: f64, nu: f64) -> Self {
        let eta = 1.0 - 2.0 * nu;
        EigenPoint {
            n,
            beta,
            lambda: beta * eta,
            eta: Some(eta),
            nu: Some(nu),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenfunctionHandle {
    pub point: EigenPoint,
    /// `C` with `f = C r^n e^{-βr²/4} M(ν, n+1, βr²/2)` normalized in `L²(r dr)`.
    /// Over- or underflows for extreme `β`; `log_norm_const` is always finite.
    pub norm_const: f64,
    pub log_norm_const: f64,
    /// `f(1)` of the normalized eigenfunction.
    pub boundary_trace: f64,
}

/// Neumann condition scaled to an O(1) quantity, valid for every `η`:
/// `[(n+1)(n-x) M(ν,n+1,x) + 2xν M(ν+1,n+2,x)] / ((n+1) max(1,x) |M(ν,n+1,x)|)`.
///
/// It equals `f'(1)/f(1)` divided by `max(1, x)` up to the sign of `f(1)`, and
/// is positive below the lowest eigenvalue.
pub(crate) fn neumann_defect(n: u32, beta: f64, eta: f64, cfg: &SolverConfig) -> Result<f64> {
    neumann_defect_nu(n, beta, 0.5 * (1.0 - eta), cfg)
}

fn neumann_defect_nu(n: u32, beta: f64, nu: f64, cfg: &SolverConfig) -> Result<f64> {
    let nf = f64::from(n);
    let x = 0.5 * beta;
    let (sign, ratio) = kummer_sign_and_ratio(KummerArgs::new(nu, nf + 1.0, x), cfg)?;
    let scale = x.max(1.0);
    Ok(sign * (nf - x) / scale + 2.0 * nu * x * ratio / ((nf + 1.0) * scale))
}

/// Scaled Neumann residual at `r = 1` for a trial ratio `η < 1`.
pub fn boundary_residual(n: u32, beta: f64, eta_trial: f64, cfg: &SolverConfig) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
    }
    if !(eta_trial < 1.0) {
        return Err(Error::InvalidParams(format!("eta = {eta_trial} must be below 1")));
    }
    neumann_defect(n, beta, eta_trial, cfg)
}

/// Rigorous bounds `(lower, upper)` on `λ(n, β)`: the minimum of the potential
/// and the Rayleigh quotient of the trial function `r^n`.
pub fn lambda_bounds(n: u32, beta: f64) -> (f64, f64) {
    let nf = f64::from(n);
    let lower = if beta < 2.0 * nf {
        (nf - 0.5 * beta).powi(2)
    } else {
        0.0
    };
    let upper = 2.0 * nf * (nf + 1.0) - nf * beta + beta * beta * (nf + 1.0) / (4.0 * (nf + 2.0));
    (lower, upper)
}

pub fn lowest_eigenvalue(n: u32, beta: f64, cfg: &SolverConfig) -> Result<EigenPoint> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!("beta = {beta} must be non-negative")));
    }
    if beta == 0.0 {
        let lambda = if n == 0 {
            0.0
        } else {
            bessel_j_prime_first_zero(n)?.powi(2)
        };
        return Ok(EigenPoint {
            n,
            beta,
            lambda,
            eta: None,
            nu: None,
        });
    }
    let (lower, upper) = lambda_bounds(n, beta);
    let sqrt_beta = beta.sqrt();
    let eta_max = 2f64
        .max((f64::from(n) / sqrt_beta - 0.5 * sqrt_beta).powi(2) + 5.0)
        .max(upper / beta * (1.0 + 2.0 * cfg.eta_scan_step));
    let eta_start = lower / beta;
    let f = |eta: f64| neumann_defect(n, beta, eta, cfg);
    let step = cfg.eta_scan_step;
    let bracket = roots::scan_for_sign_change(f, eta_start, eta_max, |eta| step * eta.max(1.0))?
        .ok_or_else(|| {
            Error::BracketFailure(format!("no eigenvalue for n={n}, beta={beta} with eta < {eta_max}"))
        })?;
    let (a, fa, b, fb) = bracket;
    if a == eta_start && fa < 0.0 {
        return Err(Error::BracketFailure(format!(
            "residual negative at the lower bound eta={eta_start} (n={n}, beta={beta})"
        )));
    }
    // Refine in ν = (1 - η)/2, which keeps relative precision when
    // 1 - η is exponentially small (large β).
    let g = |nu: f64| neumann_defect_nu(n, beta, nu, cfg);
    let nu = roots::brent_with_values(
        g,
        0.5 * (1.0 - a),
        fa,
        0.5 * (1.0 - b),
        fb,
        1e-300,
        cfg.eig_rel_tol,
        1000,
    )?;
    Ok(EigenPoint::from_nu(n, beta, nu))
}

/// `ln |r^n e^{-βr²/4} M(ν, n+1, βr²/2)|` and its sign.
fn log_unnormalized(point: &EigenPoint, r: f64, cfg: &SolverConfig) -> Result<(f64, i8)> {
    let nu = point.nu.expect("beta > 0");
    let nf = f64::from(point.n);
    let m = kummer_m(
        KummerArgs::new(nu, nf + 1.0, 0.5 * point.beta * r * r),
        cfg,
    )?;
    let radial = if point.n == 0 { 0.0 } else { nf * r.ln() };
    Ok((radial - 0.25 * point.beta * r * r + m.log_mag(), m.sign()))
}

pub fn eigenfunction(point: &EigenPoint, cfg: &SolverConfig) -> Result<EigenfunctionHandle> {
    if point.nu.is_none() || !(point.beta > 0.0) {
        return Err(Error::InvalidParams("eigenfunction needs beta > 0".into()));
    }
    let (log_at_one, sign_at_one) = log_unnormalized(point, 1.0, cfg)?;
    let log_abs = |r: f64| -> Result<f64> {
        if r == 0.0 {
            return Ok(if point.n == 0 { 0.0 } else { f64::NEG_INFINITY });
        }
        Ok(log_unnormalized(point, r, cfg)?.0)
    };
    // Mass sits near the boundary when β ≲ 2n and near r* = √(2n/β) otherwise;
    // both get breakpoints at the scale β^{-1/2}.
    let width = point.beta.powf(-0.5).min(1.0);
    let peak = (2.0 * f64::from(point.n) / point.beta).sqrt().min(1.0);
    let mut breaks = quadrature::graded_toward_right(0.0, 1.0, width);
    breaks.extend((-6..=6).map(|k| peak + f64::from(k) * width).filter(|&r| r > 0.0 && r < 1.0));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let log_ref = breaks
        .iter()
        .map(|&r| log_abs(r))
        .try_fold(log_at_one, |m, v| v.map(|v| m.max(v)))?;
    let integral = quadrature::integrate(
        |r| Ok((2.0 * (log_abs(r)? - log_ref)).exp() * r),
        &breaks,
        cfg.quad_rel_tol,
        0.0,
        4000,
    )?;
    let log_norm_const = -log_ref - 0.5 * integral.ln();
    Ok(EigenfunctionHandle {
        point: *point,
        norm_const: log_norm_const.exp(),
        log_norm_const,
        boundary_trace: f64::from(sign_at_one) * (log_at_one + log_norm_const).exp(),
    })
}

impl EigenfunctionHandle {
    /// Normalized `f(r)`.
    pub fn eval(&self, r: f64, cfg: &SolverConfig) -> Result<f64> {
        if r == 0.0 && self.point.n > 0 {
            return Ok(0.0);
        }
        let (log, sign) = log_unnormalized(&self.point, r, cfg)?;
        Ok(f64::from(sign) * (log + self.log_norm_const).exp())
    }

    /// `f'(1) / f(1)`, zero for an exact eigenfunction.
    pub fn boundary_log_derivative(&self, cfg: &SolverConfig) -> Result<f64> {
        let nu = self.point.nu.expect("beta > 0");
        let d = neumann_defect_nu(self.point.n, self.point.beta, nu, cfg)?;
        Ok(d * (0.5 * self.point.beta).max(1.0))
    }
}

/// `λ(β) = min_n λ(n, β)` with the minimizing mode; ties go to the smaller mode.
pub fn ground_state(beta: f64, cfg: &SolverConfig) -> Result<(EigenPoint, u32)> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParams(format!("beta = {beta} must be positive")));
    }
    let mut cache: HashMap<u32, EigenPoint> = HashMap::new();
    let mut eval = |k: u32| -> Result<EigenPoint> {
        if let Some(p) = cache.get(&k) {
            return Ok(*p);
        }
        let p = lowest_eigenvalue(k, beta, cfg)?;
        cache.insert(k, p);
        Ok(p)
    };
    let start = (0.5 * beta + XI0_ESTIMATE * beta.sqrt()).round().max(0.0);
    let mut k = start as u32;
    let mut current = eval(k)?;
    let tie = |a: f64, b: f64| (a - b).abs() <= cfg.eig_rel_tol * a.abs().max(b.abs());
    loop {
        if k > 0 {
            let below = eval(k - 1)?;
            if below.lambda < current.lambda || tie(below.lambda, current.lambda) {
                k -= 1;
                current = below;
                continue;
            }
        }
        let above = eval(k + 1)?;
        if above.lambda < current.lambda && !tie(above.lambda, current.lambda) {
            k += 1;
            current = above;
            continue;
        }
        return Ok((current, k));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{fd_disk_eigen, Grid1D, TridiagSystem};
    use crate::kummer::kummer_ratio_shift_b;
    use crate::special::bessel_j_prime;
    use proptest::prelude::*;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn residual_vanishes_at_first_crossings() {
        let r = boundary_residual(0, 3.847_538_710_016_439, 0.461_884_677_504_109_33, &cfg()).unwrap();
        assert!(r.abs() < 1e-10, "{r}");
        let r = boundary_residual(1, 6.784_689_992_385_673, 0.490_953_836_999_826, &cfg()).unwrap();
        assert!(r.abs() < 1e-10, "{r}");
        assert!(boundary_residual(0, 3.0, 1.0, &cfg()).is_err());
    }

    #[test]
    fn shifted_ratio_balances_residual_at_first_crossing() {
        let (beta, eta) = (3.847_538_710_016_439, 0.461_884_677_504_109_33);
        let (nu, x) = (0.5 * (1.0 - eta), 0.5 * beta);
        let ratio = kummer_ratio_shift_b(KummerArgs::new(nu, 1.0, x), &cfg()).unwrap();
        // n = 0: -x M(ν,1,x) + 2xν M(ν+1,2,x) = 0  ⇔  2ν R = 1
        assert!((2.0 * nu * ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn residual_sign_matches_fd_inertia() {
        let (n, beta, eta) = (0, 1.0, 0.01);
        let sys = TridiagSystem::disk(n, beta, Grid1D::new(0.0, 1.0, 1001).unwrap()).unwrap();
        let below = sys.count_below(eta * beta).unwrap() == 0;
        let r = boundary_residual(n, beta, eta, &cfg()).unwrap();
        assert_eq!(below, r > 0.0);
        // and above the eigenvalue
        let lam = lowest_eigenvalue(n, beta, &cfg()).unwrap().lambda;
        let eta_above = 1.5 * lam / beta;
        assert_eq!(sys.count_below(eta_above * beta).unwrap(), 1);
        assert!(boundary_residual(n, beta, eta_above, &cfg()).unwrap() < 0.0);
    }

    #[test]
    fn zero_field_limits() {
        assert_eq!(lowest_eigenvalue(0, 0.0, &cfg()).unwrap().lambda, 0.0);
        let (mut lo, mut hi) = (1.5, 2.5);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if bessel_j_prime(1, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = lowest_eigenvalue(1, 0.0, &cfg()).unwrap();
        assert!((p.lambda - lo * lo).abs() < 1e-12);
        assert!(p.eta.is_none());
        // continuity as β → 0⁺
        let small = lowest_eigenvalue(1, 1e-6, &cfg()).unwrap();
        assert!((small.lambda - p.lambda).abs() < 1e-5);
    }

    #[test]
    fn table_value_mode_ten() {
        let p = lowest_eigenvalue(10, 28.989_490_930_878_333, &cfg()).unwrap();
        assert!((p.eta.unwrap() - 0.541_851_230_540_765_7).abs() < 1e-12);
    }

    #[test]
    fn large_eta_regime() {
        // β ≪ 2n: λ far above β, so ν < 0.
        let p = lowest_eigenvalue(10, 1.0, &cfg()).unwrap();
        let fd = fd_disk_eigen(10, 1.0, Grid1D::new(0.0, 1.0, 4001).unwrap()).unwrap();
        assert!(p.eta.unwrap() > 1.0);
        assert!((p.lambda / fd.lambda - 1.0).abs() < 1e-6, "{} vs {}", p.lambda, fd.lambda);
    }

    #[test]
    fn agrees_with_fd_oracle() {
        let grid = Grid1D::new(0.0, 1.0, cfg().fd_grid_count).unwrap();
        for n in [0u32, 1, 2, 5, 10] {
            for beta in [1.0, 5.0, 10.0, 30.0, 100.0] {
                let k = lowest_eigenvalue(n, beta, &cfg()).unwrap().lambda;
                let f = fd_disk_eigen(n, beta, grid).unwrap().lambda;
                assert!((k / f - 1.0).abs() < 1e-6, "n={n} beta={beta}: {k} vs {f}");
            }
        }
    }

    #[test]
    fn constant_limit_of_eigenfunction() {
        let p = lowest_eigenvalue(0, 1e-8, &cfg()).unwrap();
        let e = eigenfunction(&p, &cfg()).unwrap();
        assert!((e.boundary_trace - 2f64.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn eigenfunction_normalization_and_fd_trace() {
        let beta = 17.084_570_978_426_45;
        let p = lowest_eigenvalue(5, beta, &cfg()).unwrap();
        let e = eigenfunction(&p, &cfg()).unwrap();
        // Composite Simpson on a fine uniform grid as an independent check.
        let m = 20_000;
        let h = 1.0 / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let r = i as f64 * h;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let f = e.eval(r, &cfg()).unwrap();
            s += w * f * f * r;
        }
        s *= h / 3.0;
        assert!((s - 1.0).abs() < 1e-10, "{s}");
        let fd = fd_disk_eigen(5, beta, Grid1D::new(0.0, 1.0, 4001).unwrap()).unwrap();
        let fd_trace = *fd.eigvec.last().unwrap();
        assert!((e.boundary_trace - fd_trace).abs() < 1e-4);
        assert!((e.eval(1.0, &cfg()).unwrap() - e.boundary_trace).abs() < 1e-12);
        assert!(e.boundary_log_derivative(&cfg()).unwrap().abs() < 1e-9);
        assert!(e.norm_const > 0.0);
        for i in 1..100 {
            assert!(e.eval(f64::from(i) / 100.0, &cfg()).unwrap() > 0.0);
        }
    }

    #[test]
    fn neumann_condition_by_differencing() {
        let p = lowest_eigenvalue(3, 12.0, &cfg()).unwrap();
        let e = eigenfunction(&p, &cfg()).unwrap();
        let h = 1e-5;
        let d = (3.0 * e.eval(1.0, &cfg()).unwrap() - 4.0 * e.eval(1.0 - h, &cfg()).unwrap()
            + e.eval(1.0 - 2.0 * h, &cfg()).unwrap())
            / (2.0 * h);
        assert!(d.abs() < 1e-6 * e.boundary_trace.abs(), "{d}");
    }

    #[test]
    fn ground_state_modes() {
        assert_eq!(ground_state(2.0, &cfg()).unwrap().1, 0);
        assert_eq!(ground_state(5.0, &cfg()).unwrap().1, 1);
        let (p, k) = ground_state(28.0, &cfg()).unwrap();
        let (best_k, best) = (0..=60u32)
            .map(|n| (n, lowest_eigenvalue(n, 28.0, &cfg()).unwrap().lambda))
            .fold((0, f64::INFINITY), |acc, (n, l)| if l < acc.1 { (n, l) } else { acc });
        assert_eq!(k, best_k);
        assert_eq!(p.lambda, best);
    }

    #[test]
    fn ground_mode_non_decreasing() {
        let mut last = 0;
        for i in 1..=120 {
            let (_, k) = ground_state(0.5 * f64::from(i), &cfg()).unwrap();
            assert!(k >= last, "beta={}", 0.5 * f64::from(i));
            last = k;
        }
    }

    #[test]
    fn zero_mode_below_trial_bound() {
        for i in 1..=200 {
            let beta = 0.5 * f64::from(i);
            let l = lowest_eigenvalue(0, beta, &cfg()).unwrap().lambda;
            assert!(l <= beta * beta / 8.0, "beta={beta}");
        }
    }

    #[test]
    fn exponentially_small_gap_to_one() {
        for n in 0u32..=2 {
            let fact: f64 = (1..=n).map(f64::from).product();
            for beta in [40.0, 45.0, 50.0, 55.0, 60.0] {
                let eta = lowest_eigenvalue(n, beta, &cfg()).unwrap().eta.unwrap();
                let scale = beta.powi(n as i32 + 1) * (-0.5 * beta).exp() / (2f64.powi(n as i32) * fact);
                let ratio = (1.0 - eta) / scale;
                assert!((0.5..=2.0).contains(&ratio), "n={n} beta={beta}: {ratio}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eigen_point_invariants(n in 0u32..=30, beta in 0.05f64..200.0) {
            let p = lowest_eigenvalue(n, beta, &cfg()).unwrap();
            prop_assert!(p.lambda > 0.0);
            prop_assert!((p.eta.unwrap() * beta - p.lambda).abs() <= 1e-15 * p.lambda);
            // 1 - η ~ e^{-β/2} drops below the f64 resolution of η near β ≈ 70.
            if beta > 2.0 * f64::from(n) {
                prop_assert!(p.lambda <= beta);
                if beta < 60.0 {
                    prop_assert!(p.lambda < beta);
                }
            }
            let (lo, hi) = lambda_bounds(n, beta);
            prop_assert!(p.lambda >= lo && p.lambda <= hi * (1.0 + 1e-12));
        }
    }
}

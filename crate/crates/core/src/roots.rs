//! Scalar root finding and minimization on brackets.
//!
//! All objective closures return `Result<f64>` so that failures deep inside a
//! Kummer evaluation surface unchanged through nested solves.

use crate::error::{Error, Result};

/// Brent's method on `[a, b]`.
///
/// `fa` and `fb` must have opposite signs (or one of them be zero). Stops when
/// the bracket is narrower than `xtol + rtol * |x|` or `f` vanishes exactly.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, rtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    brent_with_values(f, a, fa, b, fb, xtol, rtol, max_iter)
}

/// Same as [`brent`] when the endpoint values are already known.
#[allow(clippy::too_many_arguments)]
pub fn brent_with_values<F>(
    mut f: F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    xtol: f64,
    rtol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketFailure(format!(
            "f({a}) = {fa} and f({b}) = {fb} have the same sign"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (xtol + rtol * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence(format!(
        "Brent iteration exceeded {max_iter} steps near {b}"
    )))
}

/// Scans `f` upward from `start` with `step(x)` until the sign differs from
/// `f(start)`; returns the bracket and its endpoint values.
pub fn scan_for_sign_change<F, S>(
    mut f: F,
    start: f64,
    stop: f64,
    mut step: S,
) -> Result<Option<(f64, f64, f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
    S: FnMut(f64) -> f64,
{
    let mut x0 = start;
    let mut f0 = f(x0)?;
    if f0 == 0.0 {
        return Ok(Some((x0, f0, x0, f0)));
    }
    while x0 < stop {
        let x1 = (x0 + step(x0)).min(stop);
        let f1 = f(x1)?;
        if f1 == 0.0 || f1.signum() != f0.signum() {
            return Ok(Some((x0, f0, x1, f1)));
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(None)
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f(x_min))`. Fails with `MinimizationFailure` when the
/// minimizer sits on the bracket boundary.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > xtol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let (x, fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let edge = 4.0 * xtol;
    if x - a < edge || b - x < edge {
        return Err(Error::MinimizationFailure { at: x });
    }
    Ok((x, fx))
}

//! Kummer's confluent hypergeometric function `M(a, b, z)` for real `z ≥ 0`.
//!
//! Two independent routes are provided: the power series with running
//! rescaling ([`kummer_m`]) and the Euler integral ([`kummer_m_integral`]),
//! which serves as a cross-check for the series.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::scaled::ScaledReal;
use crate::special::ln_gamma;

/// Rescale the running sums whenever they pass this magnitude.
const RESCALE_AT: f64 = 1e200;
/// Number of consecutive negligible tail estimates required before stopping.
const SMALL_TERMS_TO_STOP: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KummerArgs {
    pub a: f64,
    pub b: f64,
    pub z: f64,
}

impl KummerArgs {
    pub fn new(a: f64, b: f64, z: f64) -> Self {
        KummerArgs { a, b, z }
    }

    pub fn validate(&self) -> Result<()> {
        let KummerArgs { a, b, z } = *self;
        if !(a.is_finite() && b.is_finite() && z.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite Kummer argument ({a}, {b}, {z})")));
        }
        if b <= 0.0 && b == b.round() {
            return Err(Error::InvalidParams(format!("b = {b} is a non-positive integer")));
        }
        if z < 0.0 {
            return Err(Error::InvalidParams(format!("z = {z} must be non-negative")));
        }
        Ok(())
    }
}

/// Largest tolerated ratio of peak term to final sum before the result is
/// rejected, per arithmetic: plain `f64` and double-double.
const MAX_CANCELLATION_F64: f64 = 1e4;
const MAX_CANCELLATION_DD: f64 = 1e16;

/// Scalar used to accumulate a series. `f64` for the all-positive case
/// (`a ≥ 0`), double-double when terms alternate and cancel.
trait SeriesScalar: Copy {
    const MAX_CANCELLATION: f64;
    fn one() -> Self;
    fn hi(self) -> f64;
    fn plus(self, other: Self) -> Self;
    /// `self · (a + k) z / ((b + k)(k + 1))`
    fn next_term(self, a: f64, b: f64, k: f64, z: f64) -> Self;
    fn scale(self, factor: f64) -> Self;
}

impl SeriesScalar for f64 {
    const MAX_CANCELLATION: f64 = MAX_CANCELLATION_F64;
    fn one() -> Self {
        1.0
    }
    fn hi(self) -> f64 {
        self
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn next_term(self, a: f64, b: f64, k: f64, z: f64) -> Self {
        self * ((a + k) * z / ((b + k) * (k + 1.0)))
    }
    fn scale(self, factor: f64) -> Self {
        self * factor
    }
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Clone, Copy, Debug)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    DoubleDouble { hi: s, lo: b - (s - a) }
}

impl DoubleDouble {
    fn exact_sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        DoubleDouble { hi, lo }
    }

    fn mul_f64(self, y: f64) -> Self {
        let p = self.hi * y;
        let e = self.hi.mul_add(y, -p) + self.lo * y;
        quick_two_sum(p, e)
    }

    fn mul(self, y: Self) -> Self {
        let p = self.hi * y.hi;
        let e = self.hi.mul_add(y.hi, -p) + (self.hi * y.lo + self.lo * y.hi);
        quick_two_sum(p, e)
    }

    fn div(self, y: Self) -> Self {
        let q1 = self.hi / y.hi;
        let r = self.plus(y.mul_f64(-q1));
        let q2 = r.hi / y.hi;
        let r = r.plus(y.mul_f64(-q2));
        let q3 = r.hi / y.hi;
        let q = quick_two_sum(q1, q2);
        q.plus(DoubleDouble { hi: q3, lo: 0.0 })
    }
}

impl SeriesScalar for DoubleDouble {
    const MAX_CANCELLATION: f64 = MAX_CANCELLATION_DD;
    fn one() -> Self {
        DoubleDouble { hi: 1.0, lo: 0.0 }
    }
    fn hi(self) -> f64 {
        self.hi
    }
    fn plus(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        quick_two_sum(s, e + self.lo + other.lo)
    }
    fn next_term(self, a: f64, b: f64, k: f64, z: f64) -> Self {
        let num = DoubleDouble::exact_sum(a, k).mul_f64(z);
        let den = DoubleDouble::exact_sum(b, k).mul_f64(k + 1.0);
        self.mul(num.div(den))
    }
    fn scale(self, factor: f64) -> Self {
        // factor is a power of two, so this is exact
        DoubleDouble {
            hi: self.hi * factor,
            lo: self.lo * factor,
        }
    }
}

struct SeriesState<T> {
    a: f64,
    b: f64,
    term: T,
    sum: T,
    small: usize,
    done: bool,
    prev_ratio: f64,
    peak: f64,
}

/// Several series summed at one `z`: the values are `sums[i] * e^{log_scale}`.
struct SharedSums {
    sums: Vec<f64>,
    log_scale: f64,
}

impl SharedSums {
    fn scaled(&self) -> Vec<ScaledReal> {
        let scale = ScaledReal::exp(self.log_scale);
        self.sums
            .iter()
            .map(|&s| ScaledReal::from_f64(s) * scale)
            .collect()
    }
}

fn kummer_series_shared(params: &[(f64, f64)], z: f64, cfg: &SolverConfig) -> Result<Vec<ScaledReal>> {
    Ok(kummer_sums(params, z, cfg)?.scaled())
}

/// Sums several Kummer series at the same `z` with one shared rescaling
/// exponent, so ratios come straight from the mantissas at full precision.
fn kummer_sums(params: &[(f64, f64)], z: f64, cfg: &SolverConfig) -> Result<SharedSums> {
    for &(a, b) in params {
        KummerArgs::new(a, b, z).validate()?;
    }
    if z == 0.0 {
        return Ok(SharedSums {
            sums: vec![1.0; params.len()],
            log_scale: 0.0,
        });
    }
    if params.iter().any(|&(a, _)| a < 0.0) {
        sum_series::<DoubleDouble>(params, z, cfg)
    } else {
        sum_series::<f64>(params, z, cfg)
    }
}

fn sum_series<T: SeriesScalar>(params: &[(f64, f64)], z: f64, cfg: &SolverConfig) -> Result<SharedSums> {
    let max_terms = cfg.max_terms_for(z);
    let tol = cfg.series_rel_tol;
    let mut states: Vec<SeriesState<T>> = params
        .iter()
        .map(|&(a, b)| SeriesState {
            a,
            b,
            term: T::one(),
            sum: T::one(),
            small: 0,
            done: false,
            prev_ratio: f64::INFINITY,
            peak: 1.0,
        })
        .collect();
    let mut log_scale = 0.0;
    let mut k = 0usize;
    while states.iter().any(|s| !s.done) {
        if k >= max_terms {
            let s = states.iter().find(|s| !s.done).expect("unfinished series");
            return Err(Error::NonConvergence {
                a: s.a,
                b: s.b,
                z,
                terms: k,
            });
        }
        let kf = k as f64;
        let mut biggest: f64 = 0.0;
        for s in states.iter_mut().filter(|s| !s.done) {
            s.term = s.term.next_term(s.a, s.b, kf, z);
            s.sum = s.sum.plus(s.term);
            let term = s.term.hi().abs();
            let sum = s.sum.hi().abs();
            s.peak = s.peak.max(term);
            if term == 0.0 {
                // a is a non-positive integer: the series is a polynomial.
                s.done = true;
                continue;
            }
            let next = ((s.a + kf + 1.0) * z / ((s.b + kf + 1.0) * (kf + 2.0))).abs();
            // Past the peak (ratios below one and decreasing, signs settled)
            // the geometric bound term * r / (1 - r) caps the remaining tail.
            let settled = next < 1.0 && next <= s.prev_ratio && s.a + kf + 1.0 > 0.0;
            let tail = if settled {
                term * next / (1.0 - next)
            } else {
                f64::INFINITY
            };
            if tail <= tol * sum {
                s.small += 1;
                if s.small >= SMALL_TERMS_TO_STOP {
                    s.done = true;
                }
            } else {
                s.small = 0;
            }
            s.prev_ratio = next;
            biggest = biggest.max(sum).max(term);
        }
        if biggest > RESCALE_AT {
            let exponent = biggest.log2().floor() as i32;
            let factor = 2f64.powi(-exponent);
            for s in states.iter_mut() {
                s.sum = s.sum.scale(factor);
                s.term = s.term.scale(factor);
                s.peak *= factor;
            }
            log_scale += f64::from(exponent) * std::f64::consts::LN_2;
        }
        k += 1;
    }
    if let Some(s) = states
        .iter()
        .find(|s| s.peak > T::MAX_CANCELLATION * s.sum.hi().abs())
    {
        return Err(Error::Cancellation { a: s.a, b: s.b, z });
    }
    Ok(SharedSums {
        sums: states.iter().map(|s| s.sum.hi()).collect(),
        log_scale,
    })
}

/// `M(a, b, z)` from its power series.
pub fn kummer_m(args: KummerArgs, cfg: &SolverConfig) -> Result<ScaledReal> {
    Ok(kummer_series_shared(&[(args.a, args.b)], args.z, cfg)?[0])
}

/// `(M(a, b, z), M(a + 1, b + 1, z))` from one shared-scale evaluation.
pub fn kummer_pair(args: KummerArgs, cfg: &SolverConfig) -> Result<(ScaledReal, ScaledReal)> {
    let v = kummer_series_shared(&[(args.a, args.b), (args.a + 1.0, args.b + 1.0)], args.z, cfg)?;
    Ok((v[0], v[1]))
}

/// `M(a + 1, b + 1, z) / M(a, b, z)` as an ordinary float.
pub fn kummer_ratio_shift_b(args: KummerArgs, cfg: &SolverConfig) -> Result<f64> {
    let s = kummer_sums(&[(args.a, args.b), (args.a + 1.0, args.b + 1.0)], args.z, cfg)?;
    Ok(s.sums[1] / s.sums[0])
}

/// `(sign M(a, b, z), M(a + 1, b + 1, z) / |M(a, b, z)|)`; finite even where
/// `M(a, b, z)` is tiny relative to its neighbor (possible for `a < 0`).
pub fn kummer_sign_and_ratio(args: KummerArgs, cfg: &SolverConfig) -> Result<(f64, f64)> {
    let s = kummer_sums(&[(args.a, args.b), (args.a + 1.0, args.b + 1.0)], args.z, cfg)?;
    Ok((s.sums[0].signum(), s.sums[1] / s.sums[0].abs()))
}

/// Relative residuals of the two contiguous relations used to eliminate
/// `M(ν+1, ·)` in favor of `M(ν, n+1)` and `M(ν, n+2)`:
///
/// * `z M(a+1, b+2) - (b+1) M(a+1, b+1) + (b+1) M(a, b+1)`
/// * `a M(a+1, b+1) - b M(a, b) - (a-b) M(a, b+1)`
///
/// each divided by its largest term.
pub fn check_recurrences(args: KummerArgs, cfg: &SolverConfig) -> Result<(f64, f64)> {
    args.validate()?;
    if args.z == 0.0 {
        // Every M equals 1 and both relations collapse identically.
        return Ok((0.0, 0.0));
    }
    let KummerArgs { a, b, z } = args;
    let params = [
        (a, b),
        (a + 1.0, b + 1.0),
        (a + 1.0, b + 2.0),
        (a, b + 1.0),
    ];
    let m = kummer_series_shared(&params, z, cfg)?;
    let combine = |terms: &[ScaledReal]| {
        let largest = terms
            .iter()
            .map(|t| t.abs())
            .fold(ScaledReal::ZERO, |acc, t| if t > acc { t } else { acc });
        let total = terms.iter().fold(ScaledReal::ZERO, |acc, &t| acc + t);
        if largest.is_zero() {
            0.0
        } else {
            total.ratio(largest)
        }
    };
    let r1 = combine(&[
        m[2].scale(z),
        m[1].scale(-(b + 1.0)),
        m[3].scale(b + 1.0),
    ]);
    let r2 = combine(&[m[1].scale(a), m[0].scale(-b), m[3].scale(-(a - b))]);
    Ok((r1, r2))
}

/// `M(a, b, z)` from the Euler integral
/// `Γ(b) / (Γ(b-a) Γ(a)) ∫₀¹ e^{zt} t^{a-1} (1-t)^{b-a-1} dt`, valid for `0 < a < b`.
///
/// The endpoint singularities are removed by `t = u^{1/a}` on `[0, ½]` and
/// `1 - t = v^{1/(b-a)}` on `[½, 1]`; the factor `e^z` is kept outside.
pub fn kummer_m_integral(args: KummerArgs, cfg: &SolverConfig) -> Result<ScaledReal> {
    args.validate()?;
    let KummerArgs { a, b, z } = args;
    if !(a > 0.0 && a < b) {
        return Err(Error::InvalidParams(format!(
            "integral representation needs 0 < a < b, got a={a}, b={b}"
        )));
    }
    let c = b - a;
    let tol = cfg.quad_rel_tol;
    let max_panels = 4000;

    // Left half, t = u^{1/a}: t^{a-1} dt = du / a.
    let u_max = 0.5f64.powf(a);
    let left_width = if z > 0.0 {
        (a * 0.5f64.powf(a - 1.0) / z).min(u_max)
    } else {
        u_max
    };
    let left_breaks = quadrature::graded_toward_right(0.0, u_max, left_width);
    let left = quadrature::integrate(
        |u| {
            let t = u.powf(1.0 / a);
            Ok((z * (t - 0.5)).exp() * (1.0 - t).powf(c - 1.0))
        },
        &left_breaks,
        tol,
        0.0,
        max_panels,
    )? / a;

    // Right half, 1 - t = s = v^{1/c}: (1-t)^{c-1} dt = dv / c.
    let v_max = 0.5f64.powf(c);
    let right_width = if z > 0.0 {
        (1.0 / z).powf(c).min(v_max)
    } else {
        v_max
    };
    let right_breaks = quadrature::graded_toward_left(0.0, v_max, right_width.max(1e-300));
    let right = quadrature::integrate(
        |v| {
            let s = v.powf(1.0 / c);
            Ok((-z * s).exp() * (1.0 - s).powf(a - 1.0))
        },
        &right_breaks,
        tol,
        0.0,
        max_panels,
    )? / c;

    let log_prefactor = ln_gamma(b) - ln_gamma(c) - ln_gamma(a);
    let body = ScaledReal::from_f64(left) * ScaledReal::exp(-0.5 * z);
    let total = body + ScaledReal::from_f64(right);
    Ok(total * ScaledReal::exp(log_prefactor + z))
}

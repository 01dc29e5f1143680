//! Gamma function and integer-order Bessel functions of the first kind.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::roots;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln |Γ(x)|` via the Lanczos approximation (g = 7), with reflection below ½.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    ln_gamma(x).exp()
}

/// `J_n(x)` from the ascending series. Accurate while `x` stays moderate
/// (cancellation grows like `e^x / x`); used only for `x ≲ 30` here.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (ln_gamma(f64::from(n) + 1.0)).exp();
    let mut sum = term;
    let q = -half * half;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (f64::from(k) * f64::from(k + n));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && f64::from(k) > half {
            break;
        }
        if k > 2000 {
            break;
        }
    }
    sum
}

pub fn bessel_j_prime(n: u32, x: f64) -> f64 {
    if n == 0 {
        -bessel_j(1, x)
    } else {
        0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
    }
}

/// Smallest positive zero `j'_{n,1}` of `J_n'`.
pub fn bessel_j_prime_first_zero(n: u32) -> Result<f64> {
    let nf = f64::from(n);
    // j'_{n,1} > sqrt(n(n+2)) for n ≥ 1; the n = 0 zero is j_{1,1} ≈ 3.83.
    let start = if n == 0 { 1.0 } else { (nf * (nf + 2.0)).sqrt() };
    let f = |x: f64| Ok(bessel_j_prime(n, x));
    let (a, fa, b, fb) = roots::scan_for_sign_change(f, start, start + 20.0 + nf, |_| 0.05)?
        .ok_or_else(|| Error::BracketFailure(format!("no zero of J'_{n} found")))?;
    roots::brent_with_values(f, a, fa, b, fb, 0.0, 1e-16, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_reference_values() {
        assert!((gamma(1.0) - 1.0).abs() < 1e-14);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        let mut fact = 1.0;
        for n in 1..=20u32 {
            fact *= f64::from(n);
            let g = gamma(f64::from(n) + 1.0);
            assert!((g / fact - 1.0).abs() < 1e-13, "n={n}");
        }
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bessel_values() {
        // Abramowitz & Stegun Table 9.1
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 2.0) - 0.576_724_807_756_873_4).abs() < 1e-15);
        assert!((bessel_j(0, 2.404_825_557_695_773).abs()) < 1e-14);
    }

    #[test]
    fn derivative_zero_bracketing_vs_bisection() {
        // Independent plain bisection on J_1' over a hand-picked bracket.
        let f = |x: f64| bessel_j_prime(1, x);
        let (mut lo, mut hi) = (1.0, 3.0);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let z = bessel_j_prime_first_zero(1).unwrap();
        assert!((z - lo).abs() < 1e-14);
        assert!((z - 1.841_183_781_340_659_3).abs() < 1e-13);
        assert!((bessel_j_prime_first_zero(0).unwrap() - 3.831_705_970_207_512_3).abs() < 1e-13);
        assert!((bessel_j_prime_first_zero(2).unwrap() - 3.054_236_928_227_140_3).abs() < 1e-13);
    }
}

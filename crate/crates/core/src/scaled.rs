//! Reals stored as `(ln|x|, sign)`.
//!
//! Kummer functions at the crossing points reach magnitudes around `e^425`,
//! well past `f64::MAX`, so every series in this crate is accumulated in this
//! representation and only collapsed to an ordinary float once ratios are taken.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledReal {
    log_mag: f64,
    sign: i8,
}

impl ScaledReal {
    pub const ZERO: ScaledReal = ScaledReal {
        log_mag: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: ScaledReal = ScaledReal {
        log_mag: 0.0,
        sign: 1,
    };

    /// Builds a value from its parts; a zero sign or a `-inf` log forces zero.
    pub fn from_parts(log_mag: f64, sign: i8) -> Self {
        if sign == 0 || log_mag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            ScaledReal {
                log_mag,
                sign: sign.signum(),
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            ScaledReal {
                log_mag: x.abs().ln(),
                sign: if x > 0.0 { 1 } else { -1 },
            }
        }
    }

    /// `exp(log)`, always positive.
    pub fn exp(log: f64) -> Self {
        Self::from_parts(log, 1)
    }

    pub fn log_mag(self) -> f64 {
        self.log_mag
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Collapses to `f64`; overflows to `±inf` and underflows to `0`.
    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.log_mag.exp()
        }
    }

    pub fn abs(self) -> Self {
        ScaledReal {
            log_mag: self.log_mag,
            sign: self.sign.abs(),
        }
    }

    pub fn powi(self, k: i32) -> Self {
        if self.sign == 0 {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if k % 2 == 0 { 1 } else { self.sign };
        ScaledReal {
            log_mag: self.log_mag * f64::from(k),
            sign,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        self * ScaledReal::from_f64(factor)
    }

    /// Ratio as an ordinary float.
    pub fn ratio(self, other: Self) -> f64 {
        (self / other).to_f64()
    }
}

impl Add for ScaledReal {
    type Output = Self;

        /// Signed sum, computed relative to the larger magnitude.
        fn add(self, other: Self) -> Self {
            if self.sign == 0 {
                return other;
            }
            if other.sign == 0 {
                return self;
            }
            let (big, small) = if self.log_mag >= other.log_mag {
                (self, other)
            } else {
                (other, self)
            };
            let ratio = (small.log_mag - big.log_mag).exp();
            let rel = if big.sign == small.sign {
                1.0 + ratio
            } else {
                1.0 - ratio
            };
            if rel == 0.0 {
                return Self::ZERO;
            }
            ScaledReal {
                log_mag: big.log_mag + rel.ln(),
                sign: big.sign,
            }
        }
}

impl Sub for ScaledReal {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        self + (-other)
    }
}

impl Mul for ScaledReal {
    type Output = ScaledReal;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        ScaledReal {
            log_mag: self.log_mag + rhs.log_mag,
            sign: self.sign * rhs.sign,
        }
    }
}

impl Div for ScaledReal {
    type Output = ScaledReal;
    fn div(self, rhs: Self) -> Self {
        if rhs.sign == 0 {
            return ScaledReal {
                log_mag: f64::INFINITY,
                sign: if self.sign == 0 { 1 } else { self.sign },
            };
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        ScaledReal {
            log_mag: self.log_mag - rhs.log_mag,
            sign: self.sign * rhs.sign,
        }
    }
}

impl Neg for ScaledReal {
    type Output = ScaledReal;
    fn neg(self) -> Self {
        ScaledReal {
            log_mag: self.log_mag,
            sign: -self.sign,
        }
    }
}

impl PartialOrd for ScaledReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {}
            ord => return Some(ord),
        }
        match self.sign {
            0 => Some(Ordering::Equal),
            1 => self.log_mag.partial_cmp(&other.log_mag),
            _ => other.log_mag.partial_cmp(&self.log_mag),
        }
    }
}

impl fmt::Display for ScaledReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        let log10 = self.log_mag / std::f64::consts::LN_10;
        let exponent = log10.floor();
        let mantissa = 10f64.powf(log10 - exponent) * f64::from(self.sign);
        write!(f, "{mantissa}e{exponent}")
    }
}

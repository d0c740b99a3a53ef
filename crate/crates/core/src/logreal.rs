//! Signed real numbers carried by their sign and log-magnitude.
//!
//! Factorial ratios such as `(2(n+m))! / (n+m)!` leave the `f64` range long
//! before the amplitudes built from them do, so every combinatorial quantity is
//! assembled here and exponentiated only at the end.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `sign * 2^exp2 * e^frac`, with `frac` kept in `[0, ln 2)`.
///
/// The binary exponent is carried exactly, so the log-magnitude of values
/// near `1e±300` keeps full mantissa precision.
#[derive(Clone, Copy, PartialEq)]
pub struct LogReal {
    sign: i8,
    exp2: i64,
    frac: f64,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal {
        sign: 0,
        exp2: 0,
        frac: 0.0,
    };
    pub const ONE: LogReal = LogReal {
        sign: 1,
        exp2: 0,
        frac: 0.0,
    };

    fn normalized(sign: i8, exp2: i64, frac: f64) -> Self {
        if sign == 0 || frac == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let k = (frac / LN_2).floor();
        let (mut exp2, mut frac) = (exp2 + k as i64, frac - k * LN_2);
        // guard the boundary against rounding in the subtraction above
        if frac < 0.0 {
            frac += LN_2;
            exp2 -= 1;
        } else if frac >= LN_2 {
            frac -= LN_2;
            exp2 += 1;
        }
        LogReal { sign, exp2, frac }
    }

    /// Positive number `exp(log_mag)`.
    pub fn from_ln(log_mag: f64) -> Self {
        Self::normalized(1, 0, log_mag)
    }

    pub fn from_parts(sign: i8, log_mag: f64) -> Self {
        Self::normalized(sign.signum(), 0, log_mag)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            return Self::ZERO;
        }
        let sign = if x > 0.0 { 1 } else { -1 };
        let (mantissa, exp2) = split_binary(x.abs());
        Self::normalized(sign, exp2, mantissa.ln())
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        f64::from(self.sign) * scale_pow2(self.frac.exp(), self.exp2)
    }

    /// -1, 0 or +1.
    pub fn sign(self) -> i8 {
        self.sign
    }

    /// Natural log of `|self|`; `-inf` for zero.
    pub fn log_mag(self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.exp2 as f64 * LN_2 + self.frac
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        LogReal {
            sign: self.sign.abs(),
            ..self
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        Self::normalized(self.sign, -self.exp2, -self.frac)
    }

    pub fn powi(self, n: i32) -> Self {
        match (self.sign, n) {
            (_, 0) => Self::ONE,
            (0, n) if n > 0 => Self::ZERO,
            (0, _) => panic!("negative power of zero"),
            (s, n) => Self::normalized(
                if n % 2 == 0 { 1 } else { s },
                self.exp2 * i64::from(n),
                self.frac * f64::from(n),
            ),
        }
    }

    /// `|self|^p` for real `p`; the sign is dropped.
    pub fn powf_abs(self, p: f64) -> Self {
        if self.sign == 0 {
            return if p > 0.0 { Self::ZERO } else { Self::ONE };
        }
        // split exp2 * p into an exact integer part and a remainder
        let whole = self.exp2 as f64 * p;
        let int = whole.floor();
        Self::normalized(1, int as i64, (whole - int) * LN_2 + self.frac * p)
    }

    pub fn sqrt(self) -> Self {
        assert!(self.sign >= 0, "square root of a negative LogReal");
        if self.sign == 0 {
            return Self::ZERO;
        }
        let half = self.exp2.div_euclid(2);
        let odd = self.exp2.rem_euclid(2) as f64;
        Self::normalized(1, half, 0.5 * (self.frac + odd * LN_2))
    }

    /// Log of `|self / other|` without leaving log space.
    fn log_ratio(self, other: LogReal) -> f64 {
        (self.exp2 - other.exp2) as f64 * LN_2 + (self.frac - other.frac)
    }
}

/// `x = m * 2^e` with `m` in `[1, 2)`, exact for normal and subnormal inputs.
fn split_binary(x: f64) -> (f64, i64) {
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        let (m, e) = split_binary(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let mantissa = f64::from_bits((bits & !(0x7ff << 52)) | (1023 << 52));
    (mantissa, biased - 1023)
}

fn scale_pow2(mut x: f64, mut e: i64) -> f64 {
    // stepwise so intermediate powers never overflow before the product does
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl Default for LogReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "LogReal(0)"),
            1 => write!(f, "LogReal(+e^{})", self.log_mag()),
            _ => write!(f, "LogReal(-e^{})", self.log_mag()),
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == 0 {
            return write!(f, "0");
        }
        // decimal mantissa/exponent even when the value is outside f64
        let log10 = self.log_mag() / std::f64::consts::LN_10;
        let exp = log10.floor();
        let mant = 10f64.powf(log10 - exp);
        let s = if self.sign < 0 { "-" } else { "" };
        write!(f, "{s}{mant:.6}e{exp}")
    }
}

impl Neg for LogReal {
    type Output = LogReal;
    fn neg(self) -> LogReal {
        LogReal {
            sign: -self.sign,
            ..self
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        Self::normalized(
            self.sign * rhs.sign,
            self.exp2 + rhs.exp2,
            self.frac + rhs.frac,
        )
    }
}

impl Div for LogReal {
    type Output = LogReal;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: LogReal) -> LogReal {
        self * rhs.recip()
    }
}

impl Add for LogReal {
    type Output = LogReal;
    fn add(self, rhs: LogReal) -> LogReal {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_ratio(rhs) >= 0.0 {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let d = small.log_ratio(big);
        let shift = if big.sign == small.sign {
            d.exp().ln_1p()
        } else if d == 0.0 {
            return Self::ZERO;
        } else {
            (-d.exp()).ln_1p()
        };
        Self::normalized(big.sign, big.exp2, big.frac + shift)
    }
}

impl Sub for LogReal {
    type Output = LogReal;
    fn sub(self, rhs: LogReal) -> LogReal {
        self + (-rhs)
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => {
                let by_mag = (self.exp2, self.frac).partial_cmp(&(other.exp2, other.frac));
                match self.sign {
                    0 => Some(Ordering::Equal),
                    1 => by_mag,
                    _ => by_mag.map(Ordering::reverse),
                }
            }
            ord => Some(ord),
        }
    }
}

impl Sum for LogReal {
    /// Scales every term against the largest magnitude before adding, so long
    /// positive series do not lose precision to repeated pairwise rescaling.
    fn sum<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        let terms: Vec<LogReal> = iter.filter(|t| t.sign != 0).collect();
        let Some(peak) = terms
            .iter()
            .copied()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(Ordering::Equal))
        else {
            return LogReal::ZERO;
        };
        let acc: f64 = terms
            .iter()
            .map(|t| f64::from(t.sign) * t.log_ratio(peak).exp())
            .sum();
        LogReal::from_f64(acc) * peak.abs()
    }
}

impl Product for LogReal {
    fn product<I: Iterator<Item = LogReal>>(iter: I) -> LogReal {
        iter.fold(LogReal::ONE, |a, b| a * b)
    }
}

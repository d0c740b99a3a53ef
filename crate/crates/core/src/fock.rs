//! Overflow-safe combinatorics, parity-tagged Fock vectors and the generating
//! function `Z(y) = 1/sqrt(1 - 4y^2) = sum_n C(2n, n) y^(2n)`.

use crate::error::{check_y, Error, Result};
use crate::logreal::LogReal;

/// Relative weight `amps[cutoff]^2 / max amps^2` a stored vector may keep in its last slot.
pub const TAIL_BOUND: f64 = 1e-14;

/// Photon-number parity of a state (and of the photons that heralded it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u64) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Photon number of the lowest basis state: 0 or 1.
    pub fn offset(self) -> u64 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// Photon number held at storage index `i`.
    pub fn photon_number(self, i: usize) -> u64 {
        2 * i as u64 + self.offset()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Parity {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            other => Err(format!("unknown parity `{other}` (expected even or odd)")),
        }
    }
}

/// `ln(n!)`.
///
/// Exact integer products up to `34!` (the largest factorial below `u128::MAX`),
/// the Stirling series beyond.
pub fn log_factorial(n: u64) -> LogReal {
    LogReal::from_ln(ln_factorial(n))
}

pub(crate) fn ln_factorial(n: u64) -> f64 {
    if n <= 34 {
        let prod: u128 = (1..=u128::from(n)).product();
        return (prod as f64).ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    x * (x.ln() - 1.0) + 0.5 * (std::f64::consts::TAU * x).ln() + series
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `1 - 4y^2`, factored to keep precision as `y -> 1/2`.
fn one_minus_4y2(y: f64) -> f64 {
    (1.0 - 2.0 * y) * (1.0 + 2.0 * y)
}

/// `Z^(m)(y)`, the `m`-th derivative of `1/sqrt(1 - 4y^2)`.
///
/// Differentiating `(1 - 4y^2) Z' = 4y Z` gives the all-positive recurrence
/// `(1 - 4y^2) Z^(j+1) = (8j + 4) y Z^(j) + 4 j^2 Z^(j-1)`, which is carried
/// as consecutive ratios so nothing overflows. [`z_derivative_series`] sums
/// the differentiated power series instead and serves as the independent check.
pub fn z_derivative(m: u32, y: f64) -> Result<LogReal> {
    check_y(y)?;
    if y == 0.0 {
        return Ok(z_derivative_at_zero(m));
    }
    let d = one_minus_4y2(y);
    let mut acc = LogReal::from_ln(-0.5 * d.ln());
    let mut ratio = 4.0 * y / d;
    for j in 0..m {
        if j > 0 {
            let j = f64::from(j);
            ratio = ((8.0 * j + 4.0) * y + 4.0 * j * j / ratio) / d;
        }
        acc = acc * LogReal::from_f64(ratio);
    }
    Ok(acc)
}

/// `Z^(m)(0) = m! [y^m] Z`: `(2j)! C(2j, j)` for `m = 2j`, zero for odd `m`.
fn z_derivative_at_zero(m: u32) -> LogReal {
    if m % 2 == 1 {
        return LogReal::ZERO;
    }
    let m = u64::from(m);
    LogReal::from_ln(ln_factorial(m) + ln_binomial(m, m / 2))
}

/// Number of consecutive negligible terms required before the series stops.
const SERIES_QUIET_RUN: usize = 50;
const SERIES_REL_CUTOFF: f64 = 1e-18;

/// `Z^(m)(y)` by term-wise differentiation of `sum_j C(2j, j) y^(2j)`.
///
/// Terms are `C(2j, j) (2j)!/(2j - m)! y^(2j - m)` for `2j >= m`, assembled in
/// log space; summation stops once 50 consecutive terms all fall below `1e-18`
/// of the largest term seen. The number of terms grows like
/// `m/(1 - 2y) + 40/(1 - 4y^2)`, so this is meant for checking, not for
/// evaluation arbitrarily close to `y = 1/2`.
pub fn z_derivative_series(m: u32, y: f64) -> Result<LogReal> {
    check_y(y)?;
    if y == 0.0 {
        return Ok(z_derivative_at_zero(m));
    }
    let ln_y = y.ln();
    let m = u64::from(m);
    let first = m.div_ceil(2);
    let ln_cut = SERIES_REL_CUTOFF.ln();
    let mut terms = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    let mut quiet = 0;
    for j in first.. {
        let p = 2 * j - m;
        let t = ln_binomial(2 * j, j) + ln_factorial(2 * j) - ln_factorial(p) + p as f64 * ln_y;
        peak = peak.max(t);
        if t < peak + ln_cut {
            quiet += 1;
            if quiet >= SERIES_QUIET_RUN {
                break;
            }
        } else {
            quiet = 0;
        }
        terms.push(LogReal::from_ln(t));
    }
    Ok(terms.into_iter().sum())
}

/// A truncated state over one parity sector of the photon-number basis.
///
/// Storage index `i` holds the amplitude of photon number `2i` (even) or
/// `2i + 1` (odd).
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    parity: Parity,
    amps: Vec<f64>,
    normalized: bool,
}

impl FockVector {
    /// Wraps raw amplitudes without normalizing them.
    pub fn new(parity: Parity, amps: Vec<f64>) -> Self {
        assert!(
            !amps.is_empty(),
            "a Fock vector needs at least one amplitude"
        );
        FockVector {
            parity,
            amps,
            normalized: false,
        }
    }

    /// Builds a vector whose amplitudes are already unit-normalized
    /// (up to truncation), checking the norm.
    pub(crate) fn from_normalized(parity: Parity, amps: Vec<f64>) -> Self {
        let mut v = FockVector::new(parity, amps);
        v.normalized = (v.norm_sqr() - 1.0).abs() <= 1e-10;
        v
    }

    /// Rescales to unit norm.
    pub fn normalize(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.amps.iter_mut().for_each(|a| *a /= n);
        self.normalized = true;
        self
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    /// Largest stored index.
    pub fn cutoff(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a * a).sum()
    }

    /// Amplitude of photon number `n` (zero outside the stored sector).
    pub fn amp_at(&self, n: u64) -> f64 {
        if Parity::of(n) != self.parity {
            return 0.0;
        }
        self.amps.get((n / 2) as usize).copied().unwrap_or(0.0)
    }

    /// `sum_n n |c_n|^2 / sum_n |c_n|^2`.
    pub fn mean_photon(&self) -> f64 {
        let weighted: f64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| self.parity.photon_number(i) as f64 * a * a)
            .sum();
        weighted / self.norm_sqr()
    }

    /// `amps[cutoff]^2 / max amps^2`.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.amps.iter().fold(0.0f64, |m, a| m.max(a * a));
        let last = self.amps[self.cutoff()];
        if max == 0.0 {
            0.0
        } else {
            last * last / max
        }
    }

    pub fn satisfies_tail_bound(&self) -> bool {
        self.tail_ratio() <= TAIL_BOUND
    }
}

/// `sum_n a_n b_n` over the photon numbers both vectors store; zero across parities.
pub fn inner_product(a: &FockVector, b: &FockVector) -> f64 {
    if a.parity != b.parity {
        return 0.0;
    }
    a.amps.iter().zip(&b.amps).map(|(x, y)| x * y).sum()
}

/// Smallest storage index at which a log-amplitude profile has passed its
/// peak and dropped below `rel` (in squared amplitude) of it.
///
/// `ln_amp(i)` must be unimodal or decreasing beyond its peak.
pub(crate) fn tail_cutoff(ln_amp: impl Fn(usize) -> f64, min: usize, rel: f64) -> usize {
    let half_ln_rel = 0.5 * rel.ln();
    let mut peak = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for i in 0.. {
        let a = ln_amp(i);
        peak = peak.max(a);
        if i >= min && a <= peak + half_ln_rel && a <= prev {
            return i;
        }
        prev = a;
    }
    unreachable!()
}

/// Exponentiates normalized log-amplitudes for indices `0..=cutoff`, enforcing
/// the tail bound.
pub(crate) fn vector_from_ln_amps(
    parity: Parity,
    cutoff: usize,
    ln_amp: impl Fn(usize) -> f64,
    required: impl FnOnce() -> usize,
) -> Result<FockVector> {
    let ln_amps: Vec<f64> = (0..=cutoff).map(&ln_amp).collect();
    let peak = ln_amps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if 2.0 * (ln_amps[cutoff] - peak) > TAIL_BOUND.ln() {
        return Err(Error::Truncation {
            cutoff,
            required: required(),
        });
    }
    let amps = ln_amps.into_iter().map(f64::exp).collect();
    Ok(FockVector::from_normalized(parity, amps))
}

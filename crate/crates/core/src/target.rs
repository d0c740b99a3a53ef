//! Even/odd cat-state targets, fidelity against the heralded family, the mean
//! photon number, and the one-parameter search for the best `y`.

use crate::error::{Error, Result};
use crate::fock::{self, ln_factorial, tail_cutoff, vector_from_ln_amps, FockVector, Parity};
use crate::hub::{ln_cosh, HeraldedFamily};

/// Tail level for automatically sized cat states; their amplitudes fall off
/// super-exponentially, so a very small level costs only a few extra terms.
const SCS_TAIL: f64 = 1e-40;

/// Lower and upper ends of the `y` search window.
pub const Y_MIN: f64 = 1e-6;
pub const Y_MAX: f64 = 0.5 - 1e-6;
pub const SCAN_POINTS: usize = 256;
pub const BRACKET_TOL: f64 = 1e-10;

/// `ln sinh x` for `x > 0`, accurate for small `x`.
fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp_m1()).ln() - std::f64::consts::LN_2
}

fn scs_ln_amp(beta: f64, parity: Parity) -> Result<impl Fn(usize) -> f64> {
    if !(beta.is_finite() && beta >= 0.0) || (parity == Parity::Odd && beta == 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "cat amplitude must be positive (even parity also admits 0)",
        });
    }
    let b2 = beta * beta;
    let ln_beta = beta.ln();
    let ln_norm = match parity {
        Parity::Even => -0.5 * ln_cosh(b2),
        Parity::Odd => -0.5 * ln_sinh(b2),
    };
    Ok(move |i: usize| {
        let n = parity.photon_number(i);
        if beta == 0.0 {
            return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        ln_norm + n as f64 * ln_beta - 0.5 * ln_factorial(n)
    })
}

/// Cat state `N_± (|β> ± |-β>)` in its parity sector with an explicit cutoff.
pub fn scs_state(beta: f64, parity: Parity, cutoff: usize) -> Result<FockVector> {
    let f = scs_ln_amp(beta, parity)?;
    vector_from_ln_amps(parity, cutoff, &f, || tail_cutoff(&f, 1, fock::TAIL_BOUND))
}

pub fn scs_state_auto(beta: f64, parity: Parity) -> Result<FockVector> {
    let f = scs_ln_amp(beta, parity)?;
    let cutoff = tail_cutoff(&f, 1, SCS_TAIL);
    vector_from_ln_amps(parity, cutoff, &f, || cutoff)
}

/// `|<target|candidate>|^2`; zero when the parities differ.
pub fn fidelity(candidate: &FockVector, target: &FockVector) -> f64 {
    fock::inner_product(candidate, target).powi(2)
}

fn check_subtracted(parity: Parity, n: u64) -> Result<()> {
    if Parity::of(n) != parity {
        return Err(Error::InvalidParameter {
            name: "N",
            value: n as f64,
            reason: "number of subtracted photons must have the requested parity",
        });
    }
    Ok(())
}

/// Mean photon number `y Z^(N+1)(y) / Z^(N)(y)` of the state heralded by `N` photons.
pub fn mean_photon(parity: Parity, n: u64, y: f64) -> Result<f64> {
    check_subtracted(parity, n)?;
    crate::error::check_y(y)?;
    if y == 0.0 {
        return if n == 0 {
            Ok(0.0)
        } else {
            Err(Error::InvalidParameter {
                name: "y",
                value: y,
                reason: "heralded states need y > 0",
            })
        };
    }
    let num = fock::z_derivative(n as u32 + 1, y)?;
    let den = fock::z_derivative(n as u32, y)?;
    Ok(y * (num / den).to_f64())
}

/// Fidelity between the `N`-photon heralded family and a fixed cat state as a
/// function of `y`.
///
/// Only the indices where the cat state carries weight are summed; the
/// heralded amplitudes are normalized analytically through `Z^(N)`, so no
/// state vector is materialized, which keeps evaluation cheap right up to the
/// `y -> 1/2` edge of the window.
#[derive(Debug, Clone)]
pub struct FidelityObjective {
    parity: Parity,
    n: u64,
    target_ln: Vec<f64>,
    /// y-independent part of each heralded log-amplitude
    family_ln: Vec<f64>,
}

impl FidelityObjective {
    pub fn new(parity: Parity, n: u64, beta: f64) -> Result<Self> {
        check_subtracted(parity, n)?;
        let f = scs_ln_amp(beta, parity)?;
        let cutoff = tail_cutoff(&f, 1, SCS_TAIL);
        let target_ln: Vec<f64> = (0..=cutoff).map(&f).collect();
        let m = n / 2;
        let off = parity.offset();
        let family_ln = (0..=cutoff as u64)
            .map(|i| {
                let j = i + m + off;
                ln_factorial(2 * j) - ln_factorial(j) - 0.5 * ln_factorial(2 * i + off)
            })
            .collect();
        Ok(FidelityObjective {
            parity,
            n,
            target_ln,
            family_ln,
        })
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        let fam = HeraldedFamily::new(self.parity, self.n / 2, y)?;
        let base = fam.ln_amp(0) - self.family_ln[0];
        let ln_y = y.ln();
        let overlap: f64 = self
            .target_ln
            .iter()
            .zip(&self.family_ln)
            .enumerate()
            .map(|(i, (t, c))| (t + c + base + i as f64 * ln_y).exp())
            .sum();
        Ok(overlap * overlap)
    }
}

/// Fidelity of the `N`-photon heralded state at `y` with the cat of amplitude `beta`.
pub fn heralded_fidelity(parity: Parity, n: u64, y: f64, beta: f64) -> Result<f64> {
    FidelityObjective::new(parity, n, beta)?.eval(y)
}

/// Outcome of [`optimal_y`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub y_star: f64,
    pub fidelity: f64,
    /// Objective evaluations, scan included.
    pub evaluations: usize,
    /// Final golden-section bracket.
    pub bracket: (f64, f64),
    /// Separated local maxima seen on the coarse scan; more than one means the
    /// objective was not unimodal on the window.
    pub scan_peaks: usize,
}

/// Maximizes [`heralded_fidelity`] over `y` in `[Y_MIN, Y_MAX]`.
///
/// A 256-point scan picks the global bracket (ties go to the smaller `y`),
/// then golden-section search narrows it to `BRACKET_TOL`.
pub fn optimal_y(parity: Parity, n: u64, beta: f64) -> Result<OptResult> {
    let objective = FidelityObjective::new(parity, n, beta)?;
    let f = |y: f64| objective.eval(y).expect("y stays inside the search window");

    let step = (Y_MAX - Y_MIN) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| Y_MIN + step * i as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&y| f(y)).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let scan_peaks = count_peaks(&values);
    if scan_peaks > 1 {
        log::warn!(
            "fidelity scan for {parity} N={n} beta={beta} has {scan_peaks} separated maxima; keeping the global one at y={}",
            grid[best]
        );
    }

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(SCAN_POINTS - 1)];
    let golden = golden_section_max(&f, lo, hi, BRACKET_TOL);
    let (y_star, fidelity) = if golden.fx >= values[best] {
        (golden.x, golden.fx)
    } else {
        (grid[best], values[best])
    };
    Ok(OptResult {
        y_star,
        fidelity,
        evaluations: SCAN_POINTS + golden.evaluations,
        bracket: golden.bracket,
        scan_peaks,
    })
}

/// Local maxima standing clear of their neighbours by more than rounding noise
/// and holding at least 1e-3 of the global maximum.
fn count_peaks(values: &[f64]) -> usize {
    let max = values.iter().copied().fold(0.0f64, f64::max);
    let floor = 1e-3 * max;
    let noise = 1e-12 * max.max(f64::MIN_POSITIVE);
    let mut peaks = 0;
    let mut i = 0;
    while i < values.len() {
        // collapse plateaus
        let mut j = i;
        while j + 1 < values.len() && (values[j + 1] - values[i]).abs() <= noise {
            j += 1;
        }
        let left_lower = i == 0 || values[i - 1] < values[i] - noise;
        let right_lower = j + 1 == values.len() || values[j + 1] < values[j] - noise;
        if left_lower && right_lower && values[i] >= floor {
            peaks += 1;
        }
        i = j + 1;
    }
    peaks
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Golden {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    pub bracket: (f64, f64),
}

/// Golden-section maximization of `f` on `[lo, hi]` down to width `tol`.
/// The returned point is the bracket midpoint, evaluated once more.
pub(crate) fn golden_section_max(
    f: &impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Golden {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut evaluations = 2;
    while hi - lo > tol {
        // `>=` keeps the left point on ties, favouring smaller y
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        evaluations += 1;
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    Golden {
        x,
        fx,
        evaluations: evaluations + 1,
        bracket: (lo, hi),
    }
}

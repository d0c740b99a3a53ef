//! Success probabilities with ideal photon-number-resolving detectors.
//!
//! For a hub with transmittances `t_1..t_k` and counts `n_1..n_k`,
//!
//! ```text
//! P = (1/cosh s) prod_l ((1-t_l^2)/t_l^2)^(n_l) y_l^(n_l) / n_l!  Z^(N_k)(y_k)
//! ```
//!
//! Everything is carried as [`LogReal`]; values far below `1e-300` occur for
//! large counts.

use crate::error::{check_y, Error, Result};
use crate::fock::{self, ln_factorial, Parity};
use crate::hub::{HubConfig, Outcome};
use crate::logreal::LogReal;

/// `((1-t^2)/t^2)^n y^n / n!`, one detector's factor in the joint probability.
fn detector_factor(t: f64, y: f64, n: u64) -> LogReal {
    if n == 0 {
        return LogReal::ONE;
    }
    let r2 = (1.0 - t) * (1.0 + t);
    if r2 == 0.0 || y == 0.0 {
        return LogReal::ZERO;
    }
    let nf = n as f64;
    LogReal::from_ln(nf * (r2.ln() - 2.0 * t.ln() + y.ln()) - ln_factorial(n))
}

/// Joint probability of registering `outcome` on the hub `cfg`.
pub fn joint_success_prob(cfg: &HubConfig, outcome: &Outcome) -> Result<LogReal> {
    outcome.check_against(cfg)?;
    let z = fock::z_derivative(outcome.total() as u32, cfg.y_final())?;
    let detectors: LogReal = cfg
        .transmittances()
        .iter()
        .zip(outcome.counts())
        .enumerate()
        .map(|(l, (&t, &n))| detector_factor(t, cfg.y(l + 1), n))
        .product();
    Ok(LogReal::from_ln(-cfg.ln_cosh_s()) * detectors * z)
}

/// Probability that a single splitter with transmittance `t1` reflects exactly
/// `2m` (even) or `2m + 1` (odd) photons of a squeezed vacuum with amplitude `s`.
pub fn success_prob_single(m: u64, parity: Parity, t1: f64, s: f64) -> Result<LogReal> {
    let cfg = HubConfig::new(s, vec![t1])?;
    joint_success_prob(&cfg, &Outcome::new(vec![2 * m + parity.offset()])?)
}

/// Probability that detector `i` (1-based) registers `n_i` photons given that
/// the detectors before it registered `prior`.
///
/// `((1-t_i^2)/t_i^2)^(n_i) y_i^(n_i)/n_i!  Z^(N_i)(y_i) / Z^(N_{i-1})(y_{i-1})`,
/// which sums to one over `n_i` because the sum is the Taylor series of
/// `Z^(N_{i-1})` about `y_i` evaluated at `y_i / t_i^2 = y_{i-1}`.
pub fn conditional_prob(cfg: &HubConfig, i: usize, n_i: u64, prior: &[u64]) -> Result<f64> {
    if i == 0 || i > cfg.k() {
        return Err(Error::InvalidParameter {
            name: "i",
            value: i as f64,
            reason: "detector index must lie in 1..=k",
        });
    }
    if prior.len() != i - 1 {
        return Err(Error::DimensionMismatch {
            expected: i - 1,
            got: prior.len(),
        });
    }
    let before: u64 = prior.iter().sum();
    let z_now = fock::z_derivative((before + n_i) as u32, cfg.y(i))?;
    let z_before = fock::z_derivative(before as u32, cfg.y(i - 1))?;
    let t = cfg.transmittances()[i - 1];
    Ok((detector_factor(t, cfg.y(i), n_i) * z_now / z_before).to_f64())
}

/// Sum of [`conditional_prob`] over `n_i = 0..=cutoff`.
pub fn conditional_normalization(
    cfg: &HubConfig,
    i: usize,
    prior: &[u64],
    cutoff: u64,
) -> Result<f64> {
    (0..=cutoff)
        .map(|n| conditional_prob(cfg, i, n, prior))
        .sum()
}

/// Gain of a `k`-splitter hub of identical transmittance `t` over a single
/// splitter registering the same total, both tuned to the same `y_k`:
/// `t^(-2((k-1)n_1 + (k-2)n_2 + ... + n_{k-1})) N_k! / (n_1! ... n_k!)`.
///
/// `t` must lie in `(0, 1]`.
pub fn demux_ratio(outcome: &Outcome, t: f64) -> LogReal {
    let counts = outcome.counts();
    let k = counts.len();
    let exponent: u64 = counts
        .iter()
        .enumerate()
        .map(|(l, &n)| (k - 1 - l) as u64 * n)
        .sum();
    let ln_multinomial =
        ln_factorial(outcome.total()) - counts.iter().map(|&n| ln_factorial(n)).sum::<f64>();
    LogReal::from_ln(-2.0 * exponent as f64 * t.ln() + ln_multinomial)
}

/// Integer multinomial coefficient `N! / (n_1! ... n_k!)`, `None` on overflow.
pub fn multinomial(counts: &[u64]) -> Option<u128> {
    let mut acc: u128 = 1;
    let mut seen: u128 = 0;
    for &n in counts {
        for j in 1..=u128::from(n) {
            seen += 1;
            // acc * seen / j stays integral: it is a running binomial product
            acc = acc.checked_mul(seen)? / j;
        }
    }
    Some(acc)
}

/// The probability ratio of [`demux_ratio`] measured directly: the hub and the
/// single splitter are each back-solved to end at `y_final`, and the `1/cosh s`
/// prefactors are divided out so both share the same source normalization.
pub fn demux_ratio_matched(outcome: &Outcome, t: f64, y_final: f64) -> Result<LogReal> {
    let hub = HubConfig::with_final_y(y_final, vec![t; outcome.k()])?;
    let single = HubConfig::with_final_y(y_final, vec![t])?;
    let joint = joint_success_prob(&hub, outcome)? * LogReal::from_ln(hub.ln_cosh_s());
    let lone = joint_success_prob(&single, &Outcome::new(vec![outcome.total()])?)?
        * LogReal::from_ln(single.ln_cosh_s());
    Ok(joint / lone)
}

/// Two identical splitters registering `(2 m1, 2 m2)` with the hub tuned to
/// `y_2 = y`, written in closed form:
///
/// `sqrt(1 - 4 (y/t^4)^2) ((1-t^2)/t^2)^N t^(-4 m1) y^N / ((2m1)! (2m2)!) Z^(N)(y)`,
/// `N = 2m1 + 2m2`. The square root is `1/cosh s` for `y_0 = y / t^4`.
pub fn two_identical_even_prob(t: f64, y: f64, m1: u64, m2: u64) -> Result<LogReal> {
    check_y(y)?;
    let y0 = y / t.powi(4);
    check_y(y0)?;
    let (n1, n2) = (2 * m1, 2 * m2);
    let n = n1 + n2;
    let nf = n as f64;
    let r2 = (1.0 - t) * (1.0 + t);
    let ln_prefactor = 0.5 * ((1.0 - 2.0 * y0) * (1.0 + 2.0 * y0)).ln();
    let ln_rest = nf * (r2.ln() - 2.0 * t.ln()) - 2.0 * n1 as f64 * t.ln() + nf * y.ln()
        - ln_factorial(n1)
        - ln_factorial(n2);
    Ok(LogReal::from_ln(ln_prefactor + ln_rest) * fock::z_derivative(n as u32, y)?)
}

/// All outcomes of `k` detectors with `N_k <= max_total`, ordered by `N_k`
/// and lexicographically within each total.
pub fn enumerate_outcomes(k: usize, max_total: u64) -> Vec<Outcome> {
    let mut out = Vec::new();
    for total in 0..=max_total {
        let mut counts = vec![0; k];
        compositions(total, 0, &mut counts, &mut out);
    }
    out
}

fn compositions(remaining: u64, pos: usize, counts: &mut Vec<u64>, out: &mut Vec<Outcome>) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(Outcome::new(counts.clone()).expect("k >= 1"));
        return;
    }
    for n in 0..=remaining {
        counts[pos] = n;
        compositions(remaining - n, pos + 1, counts, out);
    }
}

/// `sum` of [`joint_success_prob`] over every outcome with `N_k <= max_total`.
pub fn total_probability(cfg: &HubConfig, max_total: u64) -> Result<f64> {
    let outcomes = enumerate_outcomes(cfg.k(), max_total);
    let probs: Result<Vec<LogReal>> = crate::par::map(&outcomes, |o| joint_success_prob(cfg, o))
        .into_iter()
        .collect();
    Ok(probs?.into_iter().sum::<LogReal>().to_f64())
}

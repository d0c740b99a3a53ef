//! Photon-number-resolving detectors with efficiency `eta < 1`.
//!
//! A detector that reports `m` clicks was hit by `j >= m` photons with
//! probability `C(j, m) eta^m (1-eta)^(j-m)`. With one splitter the heralded
//! state for `j` true photons depends only on `j` and `y_1`, so the lossy
//! conditional state is a mixture of ideal heralded states over `j`; branches
//! of the wrong parity contribute nothing to the overlap with a cat.
//!
//! The closed forms expand the exact mixture in `1 - eta`:
//!
//! - fidelity: `F(eta) / F(1) = 1 - (1-eta) R <n>_N + (1-eta)^2 f_2`
//! - probability: `P(eta) = eta^N P(1) (1 + (1-eta) R <n>_N)`
//!
//! with `R = (1 - T) / T` and `T = t_1^2 ... t_k^2`.

use crate::error::{Error, Result};
use crate::fock::{ln_binomial, Parity};
use crate::hub::{HubConfig, Outcome};
use crate::logreal::LogReal;
use crate::probability::joint_success_prob;
use crate::target::{mean_photon, FidelityObjective};

/// Loss branches are summed until their weight drops below this fraction of
/// the largest one.
pub const BRANCH_TAIL: f64 = 1e-16;

/// Hard cap on the number of loss branches; reached only for `eta` near zero.
const MAX_BRANCHES: u64 = 4096;

/// Quantum efficiency shared by every detector of a hub.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    eta: f64,
}

impl DetectorSpec {
    pub fn new(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(DetectorSpec { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_ideal(&self) -> bool {
        self.eta == 1.0
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "detector efficiency must lie in (0, 1]",
        })
    }
}

/// Diagonal POVM element for `m` reported clicks, stored for true photon
/// numbers `0..=cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    reported_count: u64,
    weights: Vec<f64>,
}

impl PovmElement {
    pub fn reported_count(&self) -> u64 {
        self.reported_count
    }

    /// Weight of true photon number `j`; zero below the reported count and
    /// beyond the cutoff.
    pub fn weight(&self, j: u64) -> f64 {
        self.weights.get(j as usize).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cutoff(&self) -> u64 {
        self.weights.len() as u64 - 1
    }
}

/// `ln(C(j, m) eta^m (1-eta)^(j-m))`.
fn ln_loss_weight(m: u64, j: u64, eta: f64) -> f64 {
    if j < m {
        return f64::NEG_INFINITY;
    }
    let x = j - m;
    let lost = if x == 0 {
        0.0
    } else {
        x as f64 * (1.0 - eta).ln()
    };
    ln_binomial(j, m) + m as f64 * eta.ln() + lost
}

/// Binomial-loss POVM element for `m` clicks.
///
/// Panics if `cutoff < m` or `eta` is outside `(0, 1]`.
pub fn povm_element(m: u64, eta: f64, cutoff: u64) -> PovmElement {
    assert!(cutoff >= m, "cutoff {cutoff} below reported count {m}");
    check_eta(eta).expect("eta in (0, 1]");
    let weights = (0..=cutoff)
        .map(|j| ln_loss_weight(m, j, eta).exp())
        .collect();
    PovmElement {
        reported_count: m,
        weights,
    }
}

fn check_single(cfg: &HubConfig) -> Result<f64> {
    if cfg.k() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: cfg.k(),
        });
    }
    Ok(cfg.transmittances()[0])
}

/// One loss branch of a single-splitter hub: `j = n + x` photons were
/// reflected and `n` of them were counted.
#[derive(Debug, Clone, Copy)]
struct Branch {
    lost: u64,
    /// `C(j, n) eta^n (1-eta)^x P_j`
    weight: LogReal,
}

/// Branches in order of `x`, truncated at [`BRANCH_TAIL`] of the largest.
fn loss_branches(cfg: &HubConfig, n: u64, eta: f64) -> Result<Vec<Branch>> {
    let mut out = Vec::new();
    if eta == 1.0 {
        let weight = joint_success_prob(cfg, &Outcome::new(vec![n])?)?;
        out.push(Branch { lost: 0, weight });
        return Ok(out);
    }
    let ln_tail = BRANCH_TAIL.ln();
    let mut peak = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    for x in 0..MAX_BRANCHES {
        let j = n + x;
        let p = joint_success_prob(cfg, &Outcome::new(vec![j])?)?;
        let weight = LogReal::from_ln(ln_loss_weight(n, j, eta)) * p;
        let ln_w = weight.log_mag();
        peak = peak.max(ln_w);
        out.push(Branch { lost: x, weight });
        if ln_w < peak + ln_tail && ln_w <= prev {
            break;
        }
        prev = ln_w;
    }
    Ok(out)
}

/// Exact probability that a single-splitter hub reports `n` clicks:
/// `sum_x C(n+x, n) eta^n (1-eta)^x P_{n+x}`.
pub fn lossy_prob(cfg: &HubConfig, n: u64, eta: f64) -> Result<LogReal> {
    check_single(cfg)?;
    check_eta(eta)?;
    Ok(loss_branches(cfg, n, eta)?
        .into_iter()
        .map(|b| b.weight)
        .sum())
}

/// Exact fidelity of the lossy single-splitter state heralded by `n` clicks
/// with the cat of amplitude `beta` and parity `n mod 2`.
pub fn lossy_fidelity_exact(cfg: &HubConfig, n: u64, eta: f64, beta: f64) -> Result<f64> {
    check_single(cfg)?;
    check_eta(eta)?;
    let parity = Parity::of(n);
    let y = cfg.y_final();
    let branches = loss_branches(cfg, n, eta)?;
    let total: LogReal = branches.iter().map(|b| b.weight).sum();
    let mut matched = LogReal::ZERO;
    for b in branches.iter().filter(|b| b.lost % 2 == 0) {
        let f = FidelityObjective::new(parity, n + b.lost, beta)?.eval(y)?;
        matched = matched + b.weight * LogReal::from_f64(f);
    }
    Ok((matched / total).to_f64())
}

/// `(1 - T) / T`.
pub fn hub_penalty(t_product_sq: f64) -> f64 {
    (1.0 - t_product_sq) / t_product_sq
}

/// `<n> (1 - T) / T`, the factor multiplying `1 - eta` in both expansions.
pub fn reduction_factor(t_product_sq: f64, mean_n: f64) -> f64 {
    mean_n * hub_penalty(t_product_sq)
}

/// `1 - (1-eta) (1-T)/T <n>` for a given mean photon number.
pub fn firstorder_multiplier(t_product_sq: f64, mean_n: f64, eta: f64) -> f64 {
    1.0 - (1.0 - eta) * reduction_factor(t_product_sq, mean_n)
}

/// First-order fidelity multiplier `1 - (1-eta) (1-T)/T <n>_N(y)`.
pub fn lossy_fidelity_firstorder(
    t_product_sq: f64,
    n: u64,
    parity: Parity,
    eta: f64,
    y: f64,
) -> Result<f64> {
    check_eta(eta)?;
    Ok(firstorder_multiplier(
        t_product_sq,
        mean_photon(parity, n, y)?,
        eta,
    ))
}

/// Second-order coefficient `f_2` of the single-splitter fidelity expansion,
///
/// `f_2 = (<n>_N / 2) R^2 (2 <n>_N - <n>_{N+1} (1 - F_{N+2}(y) / F_N(y)))`,
///
/// with every quantity evaluated at the same `y`.
pub fn second_order_coefficient(t1: f64, n: u64, y: f64, beta: f64) -> Result<f64> {
    let parity = Parity::of(n);
    let r = hub_penalty(t1 * t1);
    let mean_n = mean_photon(parity, n, y)?;
    let mean_next = mean_photon(Parity::of(n + 1), n + 1, y)?;
    let f_n = FidelityObjective::new(parity, n, beta)?.eval(y)?;
    let f_n2 = FidelityObjective::new(parity, n + 2, beta)?.eval(y)?;
    Ok(0.5 * mean_n * r * r * (2.0 * mean_n - mean_next * (1.0 - f_n2 / f_n)))
}

/// Fidelity multiplier through second order for a single splitter.
pub fn lossy_fidelity_secondorder(t1: f64, n: u64, eta: f64, y: f64, beta: f64) -> Result<f64> {
    let first = lossy_fidelity_firstorder(t1 * t1, n, Parity::of(n), eta, y)?;
    let d = 1.0 - eta;
    Ok(first + d * d * second_order_coefficient(t1, n, y, beta)?)
}

/// First-order probability multiplier `1 + (1-eta) (1-T)/T <n>_N(y)`, applied
/// to `eta^N P(eta = 1)`.
pub fn lossy_prob_firstorder(
    t_product_sq: f64,
    n: u64,
    parity: Parity,
    eta: f64,
    y: f64,
) -> Result<f64> {
    check_eta(eta)?;
    let mean_n = mean_photon(parity, n, y)?;
    Ok(1.0 + (1.0 - eta) * reduction_factor(t_product_sq, mean_n))
}

/// Fidelity and probability shifts caused by the detector and their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeOff {
    /// `(1-eta)^2 ((1-T)/T)^2 <n>^2 F(1) P(1)`
    pub closed_form: f64,
    /// `F(1) - F(eta)` from the first-order multiplier
    pub delta_f: f64,
    /// `P(eta) - P(1)` from the first-order multiplier
    pub delta_p: f64,
}

impl TradeOff {
    pub fn product(&self) -> f64 {
        self.delta_f * self.delta_p
    }
}

/// The fidelity/probability trade-off of a hub with transmission product `T`
/// heralding `N` photons at `y`, given the ideal fidelity and probability.
pub fn tradeoff_product(
    t_product_sq: f64,
    n: u64,
    parity: Parity,
    eta: f64,
    y: f64,
    fidelity_ideal: f64,
    prob_ideal: f64,
) -> Result<TradeOff> {
    check_eta(eta)?;
    let mean_n = mean_photon(parity, n, y)?;
    let shift = (1.0 - eta) * reduction_factor(t_product_sq, mean_n);
    Ok(TradeOff {
        closed_form: shift * shift * fidelity_ideal * prob_ideal,
        delta_f: fidelity_ideal * shift,
        delta_p: prob_ideal * shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::success_prob_single;
    use crate::target::heralded_fidelity;
    use approx::assert_relative_eq;

    #[test]
    fn lossless_povm_is_projector() {
        let p = povm_element(3, 1.0, 10);
        for j in 0..=10 {
            assert_eq!(p.weight(j), if j == 3 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn povm_binomial_value() {
        let p = povm_element(2, 0.98, 8);
        assert_relative_eq!(p.weight(4), 6.0 * 0.9604 * 0.0004, max_relative = 1e-12);
        assert_eq!(p.weight(1), 0.0);
        assert_eq!(p.reported_count(), 2);
        assert_eq!(p.cutoff(), 8);
    }

    #[test]
    fn povm_completeness() {
        let cutoff = 40;
        for eta in [0.3, 0.9, 0.98] {
            let elems: Vec<_> = (0..=cutoff).map(|m| povm_element(m, eta, cutoff)).collect();
            for j in 0..=cutoff {
                let s: f64 = elems.iter().map(|e| e.weight(j)).sum();
                assert!((s - 1.0).abs() <= 1e-12, "eta {eta} j {j}: {s}");
            }
        }
    }

    #[test]
    fn bad_efficiency_rejected() {
        assert!(DetectorSpec::new(0.0).is_err());
        assert!(DetectorSpec::new(1.01).is_err());
        assert!(DetectorSpec::new(1.0).unwrap().is_ideal());
        let cfg = HubConfig::new(0.5, vec![0.9]).unwrap();
        assert!(lossy_prob(&cfg, 1, -0.1).is_err());
        let two = HubConfig::new(0.5, vec![0.9, 0.9]).unwrap();
        assert!(matches!(
            lossy_prob(&two, 1, 0.9),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ideal_detector_limits() {
        let cfg = HubConfig::with_final_y(0.2, vec![0.9]).unwrap();
        let f = lossy_fidelity_exact(&cfg, 4, 1.0, 1.6).unwrap();
        assert_relative_eq!(
            f,
            heralded_fidelity(Parity::Even, 4, 0.2, 1.6).unwrap(),
            max_relative = 1e-13
        );
        let p = lossy_prob(&cfg, 4, 1.0).unwrap();
        let ideal = success_prob_single(2, Parity::Even, 0.9, cfg.s()).unwrap();
        assert_relative_eq!(p.to_f64(), ideal.to_f64(), max_relative = 1e-13);
        assert_eq!(
            lossy_fidelity_firstorder(0.81, 4, Parity::Even, 1.0, 0.2).unwrap(),
            1.0
        );
        assert_eq!(
            lossy_prob_firstorder(0.81, 4, Parity::Even, 1.0, 0.2).unwrap(),
            1.0
        );
        let tr = tradeoff_product(0.81, 4, Parity::Even, 1.0, 0.2, 0.9, 1e-3).unwrap();
        assert_eq!(tr.closed_form, 0.0);
        assert_eq!(tr.product(), 0.0);
    }

    #[test]
    fn lossy_prob_sums_over_reported_counts() {
        // losses only move probability between reported counts
        let cfg = HubConfig::new(0.6, vec![0.8]).unwrap();
        let total: f64 = (0..80)
            .map(|n| lossy_prob(&cfg, n, 0.7).unwrap().to_f64())
            .sum();
        assert!((total - 1.0).abs() < 1e-10, "{total}");
    }

    #[test]
    fn first_order_matches_expansions() {
        let (t, n, y, beta) = (0.9, 6, 0.17, 2.0);
        let cfg = HubConfig::with_final_y(y, vec![t]).unwrap();
        let f1 = heralded_fidelity(Parity::Even, n, y, beta).unwrap();
        let p1 = lossy_prob(&cfg, n, 1.0).unwrap().to_f64();
        let mut prev: Option<(f64, f64, f64)> = None;
        for d in [0.04, 0.02, 0.01, 0.005] {
            let eta = 1.0 - d;
            let exact_f = lossy_fidelity_exact(&cfg, n, eta, beta).unwrap() / f1;
            let first = lossy_fidelity_firstorder(t * t, n, Parity::Even, eta, y).unwrap();
            let second = lossy_fidelity_secondorder(t, n, eta, y, beta).unwrap();
            let exact_p = lossy_prob(&cfg, n, eta).unwrap().to_f64() / (eta.powi(n as i32) * p1);
            let first_p = lossy_prob_firstorder(t * t, n, Parity::Even, eta, y).unwrap();
            let errs = (
                (exact_f - first).abs(),
                (exact_f - second).abs(),
                (exact_p - first_p).abs(),
            );
            if let Some(p) = prev {
                // halving 1 - eta: quarter the first-order gap, an eighth of the second-order one
                assert!((p.0 / errs.0 - 4.0).abs() < 0.4, "{p:?} {errs:?}");
                assert!((p.1 / errs.1 - 8.0).abs() < 1.0, "{p:?} {errs:?}");
                assert!((p.2 / errs.2 - 4.0).abs() < 0.4, "{p:?} {errs:?}");
            }
            prev = Some(errs);
        }
    }

    #[test]
    fn reduction_factors() {
        assert_relative_eq!(reduction_factor(0.81, 35.0), 8.2099, max_relative = 1e-4);
        assert_relative_eq!(
            reduction_factor(0.81f64.powi(2), 35.0),
            18.3462,
            max_relative = 1e-4
        );
    }

    #[test]
    fn tradeoff_identity() {
        let tr = tradeoff_product(0.9025, 10, Parity::Even, 0.97, 0.18, 0.97, 2e-5).unwrap();
        assert_relative_eq!(tr.product(), tr.closed_form, max_relative = 1e-12);
        let t_k1 = HubConfig::new(1.0, vec![0.9025])
            .unwrap()
            .transmission_product();
        let t_k2 = HubConfig::new(1.0, vec![0.95, 0.95])
            .unwrap()
            .transmission_product();
        let k1 = tradeoff_product(t_k1, 10, Parity::Even, 0.97, 0.18, 0.97, 2e-5).unwrap();
        let k2 = tradeoff_product(t_k2, 10, Parity::Even, 0.97, 0.18, 0.97, 2e-5).unwrap();
        assert_relative_eq!(k1.closed_form, k2.closed_form, max_relative = 1e-14);
    }
}

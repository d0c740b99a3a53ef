//! Brute-force reference simulation of the hub in the photon-number basis.
//!
//! The splitter acts on creation operators as `a_0^+ -> t a_0^+ - r a_i^+`,
//! `a_i^+ -> r a_0^+ + t a_i^+`. Each splitter is applied to the pair
//! (signal, fresh vacuum ancilla) as an explicit matrix on every photon-number
//! sector, the ancilla is projected onto its count and dropped, and the signal
//! is renormalized before the next splitter. Nothing here uses the generating
//! function or the closed-form amplitudes, so agreement with [`crate::hub`]
//! and [`crate::probability`] certifies them.

use crate::detector::povm_element;
use crate::error::{Error, Result};
use crate::fock::{self, ln_binomial, ln_factorial, FockVector, Parity};
use crate::hub::{heralded_state_auto, HeraldedFamily, HubConfig, Outcome};
use crate::logreal::LogReal;
use crate::probability::{enumerate_outcomes, joint_success_prob};

/// Default oracle cutoff in storage-index units (photon numbers up to `2 * 40 + 1`).
pub const DEFAULT_CUTOFF: usize = 40;

/// Tail level used by [`adequate_cutoff`].
const ORACLE_TAIL: f64 = 1e-24;

/// `<out0, out1| U(t) |in0, in1>`, zero unless photon number is conserved.
///
/// Expands `(t a_0^+ - r a_1^+)^in0 (r a_0^+ + t a_1^+)^in1 |0,0>` and reads
/// off the coefficient of `|out0, out1>`; terms are summed in log space.
pub fn bs_matrix_element(t: f64, in0: u64, in1: u64, out0: u64, out1: u64) -> f64 {
    if in0 + in1 != out0 + out1 {
        return 0.0;
    }
    let r = ((1.0 - t) * (1.0 + t)).sqrt();
    let (lt, lr) = (LogReal::from_f64(t), LogReal::from_f64(r));
    // a photons of in0 and b = out0 - a photons of in1 end up in mode 0
    let lo = out0.saturating_sub(in1);
    let hi = in0.min(out0);
    if lo > hi {
        return 0.0;
    }
    let sum: LogReal = (lo..=hi)
        .map(|a| {
            let b = out0 - a;
            let mag = LogReal::from_ln(ln_binomial(in0, a) + ln_binomial(in1, b))
                * lt.powi((a + in1 - b) as i32)
                * lr.powi((in0 - a + b) as i32);
            if (in0 - a) % 2 == 1 {
                -mag
            } else {
                mag
            }
        })
        .sum();
    let ln_scale =
        0.5 * (ln_factorial(out0) + ln_factorial(out1) - ln_factorial(in0) - ln_factorial(in1));
    (sum * LogReal::from_ln(ln_scale)).to_f64()
}

/// The `(n+1) x (n+1)` block of the splitter on the `n`-photon sector;
/// row and column index the photons in mode 1.
pub fn splitter_block(t: f64, n: u64) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|o1| {
            (0..=n)
                .map(|i1| bs_matrix_element(t, n - i1, i1, n - o1, o1))
                .collect()
        })
        .collect()
}

/// Largest deviation of `U U^T` from the identity on the `n`-photon sector.
pub fn unitarity_defect(t: f64, n: u64) -> f64 {
    let u = splitter_block(t, n);
    let mut worst = 0.0f64;
    for (i, row_i) in u.iter().enumerate() {
        for (j, row_j) in u.iter().enumerate() {
            let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

/// Two-mode state on all photon-number sectors up to a total of `max_photons`.
///
/// Sector `n` stores the amplitudes of `|n - j, j>` for `j = 0..=n`
/// (signal first, ancilla second).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    sectors: Vec<Vec<f64>>,
}

impl TwoModeState {
    /// `|signal> |0>` with `signal[n]` the amplitude of `|n>`.
    pub fn with_vacuum_ancilla(signal: &[f64]) -> Self {
        let sectors = signal
            .iter()
            .enumerate()
            .map(|(n, &a)| {
                let mut s = vec![0.0; n + 1];
                s[0] = a;
                s
            })
            .collect();
        TwoModeState { sectors }
    }

    pub fn max_photons(&self) -> usize {
        self.sectors.len() - 1
    }

    /// Amplitude of `|n_signal, n_ancilla>`.
    pub fn amp(&self, n_signal: usize, n_ancilla: usize) -> f64 {
        self.sectors
            .get(n_signal + n_ancilla)
            .map_or(0.0, |s| s[n_ancilla])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sectors.iter().flatten().map(|a| a * a).sum()
    }

    /// Weight in the highest sector relative to the largest sector weight.
    pub fn tail_ratio(&self) -> f64 {
        let weights: Vec<f64> = self
            .sectors
            .iter()
            .map(|s| s.iter().map(|a| a * a).sum())
            .collect();
        let max = weights.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            0.0
        } else {
            weights[weights.len() - 1] / max
        }
    }

    /// Applies the splitter with transmittance `t`, sector by sector.
    pub fn apply_splitter(&self, t: f64) -> TwoModeState {
        let sectors = self
            .sectors
            .iter()
            .enumerate()
            .map(|(n, input)| {
                let n64 = n as u64;
                let mut out = vec![0.0; n + 1];
                for (i1, &a) in input.iter().enumerate().filter(|(_, &a)| a != 0.0) {
                    let i1 = i1 as u64;
                    for (o1, slot) in out.iter_mut().enumerate() {
                        let o1 = o1 as u64;
                        *slot += a * bs_matrix_element(t, n64 - i1, i1, n64 - o1, o1);
                    }
                }
                out
            })
            .collect();
        TwoModeState { sectors }
    }

    /// Unnormalized signal left after the ancilla registers `count` photons;
    /// index is the signal photon number.
    pub fn project_ancilla(&self, count: usize) -> Vec<f64> {
        if count > self.max_photons() {
            return vec![0.0];
        }
        (0..=self.max_photons() - count)
            .map(|n0| self.amp(n0, count))
            .collect()
    }
}

/// Squeezed vacuum up to photon number `max_photons`, built by the ratio
/// `c_{2n+2} / c_{2n} = y0 sqrt((2n+1)(2n+2)) / (n+1)` from `c_0 = 1/sqrt(cosh s)`.
fn squeezed_vacuum(s: f64, max_photons: usize) -> Vec<f64> {
    let y0 = s.tanh() / 2.0;
    let mut out = vec![0.0; max_photons + 1];
    let mut c = 1.0 / s.cosh().sqrt();
    for n in 0..=max_photons / 2 {
        out[2 * n] = c;
        let k = n as f64;
        c *= y0 * ((2.0 * k + 1.0) * (2.0 * k + 2.0)).sqrt() / (k + 1.0);
    }
    out
}

/// Result of one heralded run of the oracle.
#[derive(Debug, Clone)]
pub struct OracleRun {
    /// Normalized heralded signal, in its parity sector.
    pub state: FockVector,
    pub probability: LogReal,
    /// Sign of the lowest nonzero heralded amplitude.
    pub sign: i8,
}

/// Storage-index cutoff at which the source and every intermediate heralded
/// state keep their tails below `1e-24`.
///
/// The signal after `i` detectors is the `N_i`-photon heralded state at `y_i`,
/// whose component `|n>` came from `|n + N_i>` of the source, so each stage
/// needs `N_i` plus its own tail length.
pub fn adequate_cutoff(cfg: &HubConfig, outcome: &Outcome) -> Result<usize> {
    outcome.check_against(cfg)?;
    let mut need = 0;
    let mut n_i = 0;
    for i in 0..=cfg.k() {
        if i > 0 {
            n_i += outcome.counts()[i - 1];
        }
        let parity = Parity::of(n_i);
        let fam = HeraldedFamily::new(parity, n_i / 2, cfg.y(i))?;
        let photons = parity.photon_number(fam.cutoff_for(ORACLE_TAIL)) + n_i;
        need = need.max(photons.div_ceil(2) as usize);
    }
    Ok(need)
}

/// Runs the hub on the squeezed vacuum with joint photon numbers up to
/// `2 cutoff + 1`, projecting ancilla `i` onto `outcome[i]`.
pub fn simulate_hub(cfg: &HubConfig, outcome: &Outcome, cutoff: usize) -> Result<OracleRun> {
    outcome.check_against(cfg)?;
    let max_photons = 2 * cutoff + 1;
    let mut signal = squeezed_vacuum(cfg.s(), max_photons);
    let mut probability = LogReal::ONE;
    for (&t, &n) in cfg.transmittances().iter().zip(outcome.counts()) {
        let joint = TwoModeState::with_vacuum_ancilla(&signal).apply_splitter(t);
        let projected = joint.project_ancilla(n as usize);
        let norm_sqr: f64 = projected.iter().map(|a| a * a).sum();
        if norm_sqr == 0.0 {
            return Ok(OracleRun {
                state: FockVector::new(outcome.parity(), vec![0.0]),
                probability: LogReal::ZERO,
                sign: 0,
            });
        }
        probability = probability * LogReal::from_f64(norm_sqr);
        let norm = norm_sqr.sqrt();
        signal = projected.into_iter().map(|a| a / norm).collect();
    }
    let parity = outcome.parity();
    let amps: Vec<f64> = signal
        .iter()
        .skip(parity.offset() as usize)
        .step_by(2)
        .copied()
        .collect();
    let wrong: f64 = signal
        .iter()
        .skip(1 - parity.offset() as usize)
        .step_by(2)
        .map(|a| a * a)
        .sum();
    debug_assert!(
        wrong == 0.0,
        "heralded signal leaked into the other parity: {wrong}"
    );
    let sign = match amps.iter().find(|a| **a != 0.0) {
        Some(a) if *a < 0.0 => -1,
        _ => 1,
    };
    let state = FockVector::new(parity, amps);
    if !state.satisfies_tail_bound() {
        return Err(Error::Truncation {
            cutoff,
            required: adequate_cutoff(cfg, outcome)?,
        });
    }
    Ok(OracleRun {
        state: state.normalize(),
        probability,
        sign,
    })
}

/// Lossy conditional state as an ensemble of heralded branches.
#[derive(Debug, Clone)]
pub struct LossyRun {
    /// `(joint weight of true counts and reported counts, branch state)`
    pub branches: Vec<(LogReal, FockVector)>,
    /// Probability of the reported outcome: the sum of the branch weights.
    pub probability: LogReal,
}

impl LossyRun {
    /// Weighted branch fidelity with a pure target.
    pub fn fidelity(&self, target: &FockVector) -> f64 {
        let mut acc = LogReal::ZERO;
        for (w, state) in &self.branches {
            acc = acc + *w * LogReal::from_f64(fock::inner_product(state, target).powi(2));
        }
        (acc / self.probability).to_f64()
    }
}

/// Runs the oracle for every vector of true counts `j_i >= n_i` and weights
/// each by the detectors' binomial-loss POVM elements. Total loss levels are
/// added until a whole level falls below `1e-16` of the largest branch.
pub fn simulate_lossy(
    cfg: &HubConfig,
    outcome: &Outcome,
    eta: f64,
    cutoff: usize,
) -> Result<LossyRun> {
    outcome.check_against(cfg)?;
    let max_photons = (2 * cutoff + 1) as u64;
    let mut branches = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    let mut prev_level = f64::NEG_INFINITY;
    let max_extra = max_photons.saturating_sub(outcome.total());
    for extra in 0..=max_extra {
        let mut level = f64::NEG_INFINITY;
        for lost in enumerate_outcomes(cfg.k(), extra)
            .into_iter()
            .filter(|o| o.total() == extra)
        {
            let truth: Vec<u64> = outcome
                .counts()
                .iter()
                .zip(lost.counts())
                .map(|(n, x)| n + x)
                .collect();
            let weight: LogReal = outcome
                .counts()
                .iter()
                .zip(&truth)
                .map(|(&n, &j)| LogReal::from_f64(povm_element(n, eta, j).weight(j)))
                .product();
            if weight.is_zero() {
                continue;
            }
            let run = simulate_hub(cfg, &Outcome::new(truth)?, cutoff)?;
            let w = weight * run.probability;
            if w.is_zero() {
                continue;
            }
            level = level.max(w.log_mag());
            branches.push((w, run.state));
        }
        peak = peak.max(level);
        if eta == 1.0 || (level < peak + crate::detector::BRANCH_TAIL.ln() && level <= prev_level) {
            break;
        }
        prev_level = level;
    }
    let probability = branches.iter().map(|(w, _)| *w).sum();
    Ok(LossyRun {
        branches,
        probability,
    })
}

/// Oracle-versus-closed-form comparison for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub s: f64,
    pub transmittances: Vec<f64>,
    pub counts: Vec<u64>,
    pub cutoff: usize,
    /// `1 - |<oracle|heralded>|^2`
    pub fidelity_deficit: f64,
    /// `|P_oracle / P_closed - 1|`
    pub prob_rel_error: f64,
    /// Oracle amplitude sign agrees with the closed-form `(-1)^N`.
    pub sign_ok: bool,
}

/// Compares [`simulate_hub`] with the closed-form state and probability.
/// The cutoff is raised to [`adequate_cutoff`] when `cutoff` is smaller.
pub fn compare(cfg: &HubConfig, outcome: &Outcome, cutoff: usize) -> Result<Comparison> {
    let cutoff = cutoff.max(adequate_cutoff(cfg, outcome)?);
    let run = simulate_hub(cfg, outcome, cutoff)?;
    let closed = heralded_state_auto(outcome.parity(), outcome.m_n(), cfg.y_final())?;
    let overlap = fock::inner_product(&run.state, &closed);
    let p = joint_success_prob(cfg, outcome)?;
    let expected_sign = if outcome.total() % 2 == 1 { -1 } else { 1 };
    Ok(Comparison {
        s: cfg.s(),
        transmittances: cfg.transmittances().to_vec(),
        counts: outcome.counts().to_vec(),
        cutoff,
        fidelity_deficit: 1.0 - overlap * overlap,
        prob_rel_error: ((run.probability / p).to_f64() - 1.0).abs(),
        sign_ok: run.sign == expected_sign,
    })
}

/// Parameter grid for the oracle equivalence check.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleGrid {
    pub max_k: usize,
    pub max_total: u64,
    pub transmittances: Vec<f64>,
    pub squeezing: Vec<f64>,
    pub cutoff: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        OracleGrid {
            max_k: 3,
            max_total: 6,
            transmittances: vec![0.7, 0.8, 0.9],
            squeezing: vec![0.3, 0.6, 1.0],
            cutoff: DEFAULT_CUTOFF,
        }
    }
}

impl OracleGrid {
    /// Every `(s, t_1..t_k, outcome)` in grid order: `k`, then `s`, then the
    /// transmittance tuple, then the outcome enumeration order.
    pub fn cases(&self) -> Result<Vec<(HubConfig, Outcome)>> {
        let mut out = Vec::new();
        for k in 1..=self.max_k {
            let outcomes = enumerate_outcomes(k, self.max_total);
            for &s in &self.squeezing {
                for ts in tuples(&self.transmittances, k) {
                    let cfg = HubConfig::new(s, ts)?;
                    for o in &outcomes {
                        out.push((cfg.clone(), o.clone()));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn tuples(values: &[f64], k: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Worst-case deviations over an oracle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub cases: usize,
    pub worst_fidelity: Comparison,
    pub worst_probability: Comparison,
    pub sign_failures: Vec<Comparison>,
}

impl OracleReport {
    pub fn passes(&self, fidelity_tol: f64, prob_tol: f64) -> bool {
        self.worst_fidelity.fidelity_deficit <= fidelity_tol
            && self.worst_probability.prob_rel_error <= prob_tol
            && self.sign_failures.is_empty()
    }
}

/// Runs [`compare`] over every case of `grid`, in parallel when enabled.
pub fn run_grid(grid: &OracleGrid) -> Result<OracleReport> {
    let cases = grid.cases()?;
    let results: Result<Vec<Comparison>> =
        crate::par::map(&cases, |(cfg, o)| compare(cfg, o, grid.cutoff))
            .into_iter()
            .collect();
    let results = results?;
    let pick = |key: fn(&Comparison) -> f64| {
        results
            .iter()
            .fold(
                &results[0],
                |best, c| if key(c) > key(best) { c } else { best },
            )
            .clone()
    };
    Ok(OracleReport {
        cases: results.len(),
        worst_fidelity: pick(|c| c.fidelity_deficit),
        worst_probability: pick(|c| c.prob_rel_error),
        sign_failures: results.iter().filter(|c| !c.sign_ok).cloned().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::success_prob_single;
    use approx::assert_relative_eq;

    #[test]
    fn identity_splitter() {
        for (i0, i1) in [(0, 0), (2, 1), (3, 3)] {
            for o0 in 0..=(i0 + i1) {
                let o1 = i0 + i1 - o0;
                let e = bs_matrix_element(1.0, i0, i1, o0, o1);
                assert_eq!(e, if o0 == i0 { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(bs_matrix_element(0.7, 1, 1, 1, 0), 0.0);
    }

    #[test]
    fn one_photon_split() {
        let t: f64 = 0.83;
        assert_relative_eq!(
            bs_matrix_element(t, 1, 0, 1, 0).powi(2),
            t * t,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            bs_matrix_element(t, 1, 0, 0, 1).powi(2),
            1.0 - t * t,
            max_relative = 1e-14
        );
        assert!(bs_matrix_element(t, 1, 0, 0, 1) < 0.0);
    }

    #[test]
    fn hong_ou_mandel() {
        let t = std::f64::consts::FRAC_1_SQRT_2;
        assert!(bs_matrix_element(t, 1, 1, 1, 1).abs() < 1e-15);
    }

    #[test]
    fn splitter_blocks_are_orthogonal() {
        for t in [0.3, 0.7, 0.9, 0.99] {
            for n in 0..=12 {
                assert!(unitarity_defect(t, n) <= 1e-12, "t {t} n {n}");
            }
        }
    }

    #[test]
    fn two_mode_state_bookkeeping() {
        let st = TwoModeState::with_vacuum_ancilla(&[0.6, 0.0, 0.8]);
        assert_eq!(st.max_photons(), 2);
        assert_relative_eq!(st.norm_sqr(), 1.0);
        let out = st.apply_splitter(0.9);
        assert_relative_eq!(out.norm_sqr(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(out.tail_ratio(), 1.0, max_relative = 1e-14);
        assert_eq!(out.project_ancilla(5), vec![0.0]);
    }

    #[test]
    fn transparent_hub_returns_source() {
        let cfg = HubConfig::new(0.5, vec![1.0, 1.0]).unwrap();
        let o = Outcome::new(vec![0, 0]).unwrap();
        let run = simulate_hub(&cfg, &o, 30).unwrap();
        assert_relative_eq!(run.probability.to_f64(), 1.0, max_relative = 1e-12);
        let smsv = crate::hub::smsv_state_auto(0.5).unwrap();
        assert!(1.0 - fock::inner_product(&run.state, &smsv).powi(2) < 1e-12);
    }

    #[test]
    fn single_splitter_probability() {
        let cfg = HubConfig::new(0.8, vec![0.9]).unwrap();
        let run = simulate_hub(&cfg, &Outcome::new(vec![2]).unwrap(), 60).unwrap();
        let p = success_prob_single(1, Parity::Even, 0.9, 0.8).unwrap();
        assert_relative_eq!(run.probability.to_f64(), p.to_f64(), max_relative = 1e-10);
    }

    #[test]
    fn partition_independence() {
        let cfg = HubConfig::new(0.9, vec![0.9, 0.85, 0.8]).unwrap();
        let c = compare(&cfg, &Outcome::new(vec![1, 2, 1]).unwrap(), 40).unwrap();
        assert!(c.fidelity_deficit <= 1e-9, "{c:?}");
        assert!(c.prob_rel_error <= 1e-9, "{c:?}");
        assert!(c.sign_ok);
    }

    #[test]
    fn odd_outcome_sign() {
        let cfg = HubConfig::new(0.7, vec![0.8, 0.9]).unwrap();
        let c = compare(&cfg, &Outcome::new(vec![2, 1]).unwrap(), 30).unwrap();
        assert!(c.sign_ok && c.fidelity_deficit < 1e-9);
    }

    #[test]
    fn sign_survives_vacuum_stage() {
        let cfg = HubConfig::new(0.5, vec![0.8, 0.9, 0.7]).unwrap();
        for counts in [vec![1, 0, 0], vec![1, 1, 0], vec![0, 1, 2], vec![3, 0, 1]] {
            let c = compare(&cfg, &Outcome::new(counts).unwrap(), 30).unwrap();
            assert!(c.sign_ok, "{c:?}");
        }
    }

    #[test]
    fn truncation_detected() {
        let cfg = HubConfig::new(1.5, vec![0.95]).unwrap();
        let err = simulate_hub(&cfg, &Outcome::new(vec![1]).unwrap(), 8).unwrap_err();
        assert!(matches!(err, Error::Truncation { cutoff: 8, .. }));
    }

    #[test]
    fn lossless_ensemble_is_single_run() {
        let cfg = HubConfig::new(0.6, vec![0.9]).unwrap();
        let o = Outcome::new(vec![2]).unwrap();
        let lossy = simulate_lossy(&cfg, &o, 1.0, 40).unwrap();
        let run = simulate_hub(&cfg, &o, 40).unwrap();
        assert_eq!(lossy.branches.len(), 1);
        assert_relative_eq!(
            lossy.probability.to_f64(),
            run.probability.to_f64(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn lossy_ensemble_matches_analytic_single_splitter() {
        let cfg = HubConfig::with_final_y(0.17, vec![0.9]).unwrap();
        let o = Outcome::new(vec![4]).unwrap();
        let lossy = simulate_lossy(&cfg, &o, 0.9, 50).unwrap();
        let total: LogReal = lossy.branches.iter().map(|(w, _)| *w).sum();
        assert_relative_eq!(
            total.to_f64(),
            lossy.probability.to_f64(),
            max_relative = 1e-12
        );
        let p = crate::detector::lossy_prob(&cfg, 4, 0.9).unwrap();
        assert_relative_eq!(lossy.probability.to_f64(), p.to_f64(), max_relative = 1e-9);
        let target = crate::target::scs_state_auto(1.8, Parity::Even).unwrap();
        let f = crate::detector::lossy_fidelity_exact(&cfg, 4, 0.9, 1.8).unwrap();
        assert_relative_eq!(lossy.fidelity(&target), f, max_relative = 1e-9);
    }
}

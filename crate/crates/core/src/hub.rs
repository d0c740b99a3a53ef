//! The squeezed-vacuum source, the splitter chain and the heralded states it
//! produces.
//!
//! A squeezed vacuum with amplitude `s` enters mode 0; splitter `i` taps the
//! signal into ancilla `i` with transmittance `t_i`. Every quantity downstream
//! depends on the chain only through `y_i = t_1^2 ... t_i^2 tanh(s) / 2`.

use crate::error::{check_y, Error, Result};
use crate::fock::{self, ln_factorial, tail_cutoff, vector_from_ln_amps, FockVector, Parity};
use crate::logreal::LogReal;

/// Tail level used when a cutoff is chosen automatically; tighter than
/// [`fock::TAIL_BOUND`] so the discarded weight stays far below test tolerances.
pub(crate) const AUTO_TAIL: f64 = 1e-24;

/// Squeezing amplitude plus the transmittances of the splitter chain.
#[derive(Debug, Clone, PartialEq)]
pub struct HubConfig {
    s: f64,
    transmittances: Vec<f64>,
    /// `y_0 ..= y_k`
    y_chain: Vec<f64>,
}

impl HubConfig {
    pub fn new(s: f64, transmittances: Vec<f64>) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter {
                name: "s",
                value: s,
                reason: "squeezing amplitude must be positive and finite",
            });
        }
        if transmittances.is_empty() {
            return Err(Error::EmptyHub);
        }
        if let Some(&t) = transmittances.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                reason: "transmittance must lie in (0, 1]",
            });
        }
        let mut y_chain = Vec::with_capacity(transmittances.len() + 1);
        y_chain.push(s.tanh() / 2.0);
        for &t in &transmittances {
            let prev = *y_chain.last().unwrap();
            y_chain.push(prev * t * t);
        }
        Ok(HubConfig {
            s,
            transmittances,
            y_chain,
        })
    }

    /// Back-solves the squeezing so the chain ends at `y_final`.
    ///
    /// Fails when that would need `tanh(s) >= 1`, i.e. `y_final / prod t_i^2 >= 1/2`.
    pub fn with_final_y(y_final: f64, transmittances: Vec<f64>) -> Result<Self> {
        let product: f64 = transmittances.iter().map(|t| t * t).product();
        let tanh_s = 2.0 * y_final / product;
        if !(tanh_s > 0.0 && tanh_s < 1.0) {
            return Err(Error::InvalidParameter {
                name: "y0",
                value: tanh_s / 2.0,
                reason: "required source y0 must lie in (0, 0.5)",
            });
        }
        HubConfig::new(tanh_s.atanh(), transmittances)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Number of splitters.
    pub fn k(&self) -> usize {
        self.transmittances.len()
    }

    pub fn transmittances(&self) -> &[f64] {
        &self.transmittances
    }

    /// `r_i = sqrt(1 - t_i^2)`.
    pub fn reflectances(&self) -> Vec<f64> {
        self.transmittances
            .iter()
            .map(|&t| ((1.0 - t) * (1.0 + t)).sqrt())
            .collect()
    }

    pub fn y0(&self) -> f64 {
        self.y_chain[0]
    }

    /// `y_i` after the first `i` splitters (`y(0)` is the source value).
    pub fn y(&self, i: usize) -> f64 {
        self.y_chain[i]
    }

    /// `y_k`, the parameter of every heralded state this hub produces.
    pub fn y_final(&self) -> f64 {
        *self.y_chain.last().unwrap()
    }

    pub fn y_chain(&self) -> &[f64] {
        &self.y_chain
    }

    /// `T = t_1^2 ... t_k^2`.
    pub fn transmission_product(&self) -> f64 {
        self.transmittances.iter().map(|t| t * t).product()
    }

    /// `ln cosh s`.
    pub fn ln_cosh_s(&self) -> f64 {
        ln_cosh(self.s)
    }

    /// Squeezing in dB, `-10 log10(exp(-2s))`.
    pub fn squeezing_db(&self) -> f64 {
        20.0 * self.s / std::f64::consts::LN_10
    }

    /// `sinh^2 s`.
    pub fn mean_photons_source(&self) -> f64 {
        self.s.sinh().powi(2)
    }
}

pub(crate) fn ln_cosh(s: f64) -> f64 {
    let a = s.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Photon counts registered by the `k` detectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Outcome {
    counts: Vec<u64>,
}

impl Outcome {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyHub);
        }
        Ok(Outcome { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// `N_k`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.total())
    }

    /// `m_N = floor(N_k / 2)`.
    pub fn m_n(&self) -> u64 {
        self.total() / 2
    }

    /// Counts of the first `i` detectors.
    pub fn prefix(&self, i: usize) -> &[u64] {
        &self.counts[..i]
    }

    pub(crate) fn check_against(&self, cfg: &HubConfig) -> Result<()> {
        if self.k() != cfg.k() {
            return Err(Error::DimensionMismatch {
                expected: cfg.k(),
                got: self.k(),
            });
        }
        Ok(())
    }
}

/// Normalized log-amplitudes of the state heralded by `N` subtracted photons
/// at parameter `y`.
///
/// Even (`N = 2m`): `c_n = y^n (2(n+m))! / (sqrt((2n)!) (n+m)!) / sqrt(Z^(2m)(y))` on `|2n>`.
/// Odd (`N = 2m+1`): `c_n = sqrt(y / Z^(2m+1)(y)) y^n (2(n+m+1))! / (sqrt((2n+1)!) (n+m+1)!)` on `|2n+1>`.
#[derive(Debug, Clone, Copy)]
pub struct HeraldedFamily {
    parity: Parity,
    m: u64,
    ln_y: f64,
    ln_prefactor: f64,
}

impl HeraldedFamily {
    pub fn new(parity: Parity, m_n: u64, y: f64) -> Result<Self> {
        check_y(y)?;
        if y == 0.0 {
            return Err(Error::InvalidParameter {
                name: "y",
                value: y,
                reason: "heralded states need y > 0",
            });
        }
        let order = 2 * m_n + parity.offset();
        let z = fock::z_derivative(order as u32, y)?;
        let ln_prefactor = match parity {
            Parity::Even => -0.5 * z.log_mag(),
            Parity::Odd => 0.5 * (y.ln() - z.log_mag()),
        };
        Ok(HeraldedFamily {
            parity,
            m: m_n,
            ln_y: y.ln(),
            ln_prefactor,
        })
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Log of the normalized amplitude at storage index `n`.
    pub fn ln_amp(&self, n: usize) -> f64 {
        let n64 = n as u64;
        let j = n64 + self.m + self.parity.offset();
        self.ln_prefactor + n as f64 * self.ln_y + ln_factorial(2 * j)
            - ln_factorial(j)
            - 0.5 * ln_factorial(2 * n64 + self.parity.offset())
    }

    /// Cutoff at which the last amplitude drops to `rel` (squared) of the peak.
    pub fn cutoff_for(&self, rel: f64) -> usize {
        tail_cutoff(|i| self.ln_amp(i), 1, rel)
    }
}

/// Cutoff from the heuristic envelope: smallest `n` with `2n >= 8(m+1) + 40/(1-2y)`.
pub fn default_cutoff(m_n: u64, y: f64) -> usize {
    let need = 8.0 * (m_n as f64 + 1.0) + 40.0 / (1.0 - 2.0 * y);
    (need / 2.0).ceil() as usize
}

/// Heralded state with an explicit cutoff; fails if the tail bound is violated.
pub fn heralded_state(parity: Parity, m_n: u64, y: f64, cutoff: usize) -> Result<FockVector> {
    let fam = HeraldedFamily::new(parity, m_n, y)?;
    vector_from_ln_amps(
        parity,
        cutoff,
        |i| fam.ln_amp(i),
        || fam.cutoff_for(fock::TAIL_BOUND),
    )
}

/// Heralded state with the default cutoff, extended when the envelope
/// heuristic falls short of the tail bound (large `m_N` close to `y = 1/2`).
pub fn heralded_state_auto(parity: Parity, m_n: u64, y: f64) -> Result<FockVector> {
    let fam = HeraldedFamily::new(parity, m_n, y)?;
    let cutoff = default_cutoff(m_n, y).max(fam.cutoff_for(AUTO_TAIL));
    vector_from_ln_amps(parity, cutoff, |i| fam.ln_amp(i), || cutoff)
}

fn smsv_ln_amp(s: f64) -> impl Fn(usize) -> f64 {
    let ln_y0 = (s.tanh() / 2.0).ln();
    let ln_norm = -0.5 * ln_cosh(s);
    move |n| {
        let n = n as u64;
        ln_norm + n as f64 * ln_y0 + 0.5 * ln_factorial(2 * n) - ln_factorial(n)
    }
}

fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "squeezing amplitude must be positive and finite",
        })
    }
}

/// Squeezed vacuum `cosh(s)^(-1/2) sum_n y0^n sqrt((2n)!)/n! |2n>`, `y0 = tanh(s)/2`.
pub fn smsv_state(s: f64, cutoff: usize) -> Result<FockVector> {
    check_s(s)?;
    let f = smsv_ln_amp(s);
    vector_from_ln_amps(Parity::Even, cutoff, &f, || {
        tail_cutoff(&f, 1, fock::TAIL_BOUND)
    })
}

pub fn smsv_state_auto(s: f64) -> Result<FockVector> {
    check_s(s)?;
    let f = smsv_ln_amp(s);
    let cutoff = default_cutoff(0, s.tanh() / 2.0).max(tail_cutoff(&f, 1, AUTO_TAIL));
    vector_from_ln_amps(Parity::Even, cutoff, &f, || cutoff)
}

/// Signed amplitude `(-1)^N_k C` of the heralded branch in the output of the hub:
/// `C = prod_l ((1-t_l^2)/t_l^2)^(n_l/2) y_l^(n_l/2) / sqrt(n_l!) * sqrt(Z^(N_k)(y_k))`.
///
/// The branch probability is `C^2 / cosh s`.
pub fn herald_amplitude(cfg: &HubConfig, outcome: &Outcome) -> Result<LogReal> {
    outcome.check_against(cfg)?;
    let z = fock::z_derivative(outcome.total() as u32, cfg.y_final())?;
    let mut c = z.sqrt();
    for (l, (&t, &n)) in cfg
        .transmittances()
        .iter()
        .zip(outcome.counts())
        .enumerate()
    {
        let ratio = LogReal::from_f64((1.0 - t) * (1.0 + t) / (t * t));
        let half = 0.5 * n as f64;
        c = c
            * ratio.powf_abs(half)
            * LogReal::from_f64(cfg.y(l + 1)).powf_abs(half)
            * LogReal::from_ln(-0.5 * ln_factorial(n));
    }
    Ok(if outcome.total() % 2 == 1 { -c } else { c })
}

//! Heralded generation of even/odd Schrödinger cat states from a single-mode
//! squeezed vacuum passed through a chain of `k` beam splitters whose reflected
//! light is counted by photon-number-resolving detectors.
//!
//! The heralded state depends only on the parity of the total count `N_k` and on
//! one parameter `y_k = t_1^2 ... t_k^2 tanh(s)/2`; the success probability also
//! depends on how the photons are shared between the detectors. Modules:
//!
//! - [`logreal`], [`fock`]: log-domain arithmetic, Fock vectors and `Z^(m)(y)`.
//! - [`hub`]: source, splitter chain, heralded states and branch amplitudes.
//! - [`target`]: cat targets, fidelity, mean photon number, optimal `y`.
//! - [`probability`]: ideal-detector success probabilities.
//! - [`detector`]: binomial-loss detectors, exact and perturbative.
//! - [`oracle`]: brute-force two-mode simulation used to certify the formulas.

pub mod detector;
pub mod error;
pub mod fock;
pub mod hub;
pub mod logreal;
pub mod oracle;
pub mod par;
pub mod probability;
pub mod target;

pub use error::{Error, Result};
pub use fock::{
    inner_product, log_factorial, z_derivative, z_derivative_series, FockVector, Parity,
};
pub use hub::{
    herald_amplitude, heralded_state, heralded_state_auto, smsv_state, smsv_state_auto, HubConfig,
    Outcome,
};
pub use logreal::LogReal;
pub use target::{fidelity, mean_photon, optimal_y, scs_state, scs_state_auto, OptResult};

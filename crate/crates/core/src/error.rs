use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The generating-function argument left the physical window `0 <= y < 0.5`.
    #[error("y = {0} is outside the physical range [0, 0.5)")]
    YOutOfRange(f64),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The requested Fock cutoff leaves too much weight in the last stored amplitude.
    #[error("cutoff {cutoff} too small for the tail bound; need at least {required}")]
    Truncation { cutoff: usize, required: usize },

    #[error("outcome has {got} detector counts but the hub has {expected} splitters")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("a hub needs at least one beam splitter")]
    EmptyHub,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_y(y: f64) -> Result<()> {
    if (0.0..0.5).contains(&y) {
        Ok(())
    } else {
        Err(Error::YOutOfRange(y))
    }
}

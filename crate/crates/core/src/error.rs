use thiserror::Error;

/// Errors raised by the link, frame and optimizer models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid frame: {n_t} bits is shorter than one {n}-bit codeword")]
    InvalidFrame { n_t: u32, n: u32 },

    #[error("invalid BCH code ({n},{k};{t}): {reason}")]
    InvalidCode {
        n: u32,
        k: u32,
        t: u32,
        reason: &'static str,
    },

    #[error("unsupported pulses-per-burst value {0}; expected one of 1, 2, 4, 8, 16, 32")]
    UnknownMode(u32),

    #[error("{name} = {value} is outside the valid domain ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain {
            name,
            value,
            reason: "must be finite and >= 0",
        })
    }
}

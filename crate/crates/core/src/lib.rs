//! Quantum divergences, channel divergences and executable checks of their
//! chain rules.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex Hermitian linear algebra (Jacobi eigensolver,
//!   matrix functions on supports, Kronecker products, partial traces).
//! - [`divergences`]: state-level divergences (relative entropy, max-relative
//!   entropy and its smoothed form, Belavkin–Staszewski divergence,
//!   hypothesis-testing divergence, conditional entropy) and fidelities.
//! - [`channels`]: Kraus-form channels, Choi matrices, the generalized
//!   amplitude damping family and JSON channel files.
//! - [`channel_div`]: channel relative entropies by optimization over input
//!   states, channel max-relative entropy, and the non-additivity experiments.
//! - [`chain_checks`]: numerical verification of chain-rule inequalities.
//!
//! All logarithms are base 2. [`LogBase`] converts reported values to nats.

pub mod chain_checks;
pub mod channel_div;
pub mod channels;
pub mod divergences;
pub mod error;
pub mod linalg;
pub mod random;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Unit for reported entropic quantities. Computations run in bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    /// Converts a value expressed in bits into this base.
    pub fn from_bits(self, bits: f64) -> f64 {
        match self {
            LogBase::Two => bits,
            LogBase::E => bits * std::f64::consts::LN_2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(Error::InvalidParameter(format!("log base must be 2 or e, got {other}"))),
        }
    }
}

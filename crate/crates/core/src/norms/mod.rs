//! Certified two-sided brackets for cb norms of maps between matrix spaces,
//! Haagerup norms of tensors, classical Schur-multiplier norms and the
//! multiplier norm.

mod amplify;
mod bracket;
mod cb;
mod choi;
mod multiplier;
mod schur_norm;

pub use amplify::{cb_lower_amplification, multiplier_lower_amplification};
pub use bracket::{Method, NormBracket};
pub use cb::{cb_norm, haagerup_norm};
pub use choi::ChoiForm;
pub use multiplier::multiplier_norm;
pub use schur_norm::{schur_norm, SchurNorm, SCHUR_SDP_MAX};

pub(crate) use amplify::swap_witness;

use crate::error::{Error, Result};

/// Options shared by the norm computations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    /// Target relative width of the bracket.
    pub tol: f64,
    /// Seed of the random restarts.
    pub seed: u64,
    /// Random restarts of the nonconvex lower-bound search.
    pub restarts: usize,
    /// Run the semidefinite program even when cheaper bounds already agree.
    pub force_sdp: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { tol: 1e-6, seed: 0, restarts: 25, force_sdp: false }
    }
}

impl NormOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} outside (0, 1)", self.tol)));
        }
        Ok(())
    }
}

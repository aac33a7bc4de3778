//! Operator multipliers at finite dimension.
//!
//! A multiplier `φ ∈ M_{d_1} ⊗ ··· ⊗ M_{d_n}` acts on chains of
//! Hilbert-Schmidt kernels. This crate evaluates that action, builds the
//! symbol of `φ`, computes two-sided certified brackets for multiplier, cb,
//! Haagerup and Schur norms, and runs truncation-based compactness
//! diagnostics, including the block-transposition example separating
//! compact from completely compact multipliers.

pub mod compactness;
pub mod error;
pub mod linalg;
pub mod norms;
pub mod saar;
pub mod schur;
pub mod sdp;
pub mod tensorrep;

pub use compactness::{
    cc_vs_c_gap_ratio, corner_multiplier, finite_rank_approx, tail_norm_profile, CompactnessReport, MultiplierData,
    TruncationSchedule, Verdict,
};
pub use error::{Error, Result};
pub use linalg::{hs_norm, op_norm, psd_project, CMatrix, CTensor, C64};
pub use norms::{
    cb_lower_amplification, cb_norm, haagerup_norm, multiplier_norm, schur_norm, ChoiForm, Method, NormBracket,
    NormOptions, SchurNorm,
};
pub use saar::{
    block_condition_report, build_saar, minimal_block_domination, saar_apply, saar_compactness_profile,
    saar_obstruction, ConditionReport, ObstructionCertificate, SaarMap,
};
pub use schur::{amplify_apply, gamma_apply, phi_apply, schur_apply_2d, schur_apply_nd, KernelTuple};
pub use tensorrep::{
    eh_pair, factorization_pair, left_slice, opposite, right_slice, symbol_of, to_factorization,
    BlockFactorization, ElementaryTensorSum, Symbol, VectorFunctional,
};

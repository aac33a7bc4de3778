//! The multiplier norm `‖φ‖_m`.
//!
//! For two legs this is the cb norm of `Φ_φ`. For more legs the value is
//! bracketed: from above by an explicit block factorization of the symbol
//! whose interfaces are rebalanced one at a time, from below by alternating
//! maximization over amplified kernels.

use crate::error::Result;
use crate::linalg::op_norm;
use crate::tensorrep::{symbol_of, to_factorization, BlockFactorization, ElementaryTensorSum};

use super::amplify::multiplier_lower_amplification;
use super::cb::{balance, cb_norm};
use super::choi::ChoiForm;
use super::{Method, NormBracket, NormOptions};

/// Two-sided bracket on `‖φ‖_m`.
pub fn multiplier_norm(phi: &ElementaryTensorSum, opts: &NormOptions) -> Result<NormBracket> {
    opts.validate()?;
    if phi.is_empty() || zero_sum(phi) {
        return Ok(NormBracket::zero(opts.tol));
    }
    if phi.arity() == 2 {
        return cb_norm(&ChoiForm::of_multiplier(phi)?, opts);
    }
    let mut fac = to_factorization(&symbol_of(phi).into_tensor());
    let projective = phi.projective_bound();
    let (upper, method) = {
        let before = fac.norm_bound();
        rebalance(&mut fac, 6);
        let after = fac.norm_bound();
        if projective <= before.min(after) {
            (projective, Method::CanonicalFactorization)
        } else if after < before {
            (after, Method::AlsFactorization)
        } else {
            (before, Method::CanonicalFactorization)
        }
    };
    let level = phi.dims().iter().copied().max().unwrap_or(1).min(3);
    let restarts = opts.restarts.min(8);
    let lower = (1..=level)
        .map(|m| multiplier_lower_amplification(phi, m, restarts, opts.seed))
        .fold(0.0, f64::max);
    Ok(NormBracket::new(lower, upper, Method::Amplification, method, opts.tol))
}

fn zero_sum(phi: &ElementaryTensorSum) -> bool {
    phi.kron_matrix().max_abs() == 0.0
}

/// Alternating interface rebalancing: at interface `i` the factors
/// `A_i (S ⊗ 1)` and `(S^{-1} ⊗ 1) A_{i+1}` are optimized jointly, which
/// never increases `Π ‖A_j‖`.
pub(crate) fn rebalance(fac: &mut BlockFactorization, sweeps: usize) {
    let n = fac.arity();
    let dims = fac.dims().to_vec();
    for _ in 0..sweeps {
        let start = fac.norm_bound();
        for i in 0..n - 1 {
            let r = fac.counts()[i];
            let (left, right) = (fac.factor(i).clone(), fac.factor(i + 1).clone());
            let Ok(Some(bal)) = balance(&left, &right, r, dims[i], dims[i + 1], 1e-9) else {
                continue;
            };
            let old = op_norm(&left) * op_norm(&right);
            if bal.upper < old * (1.0 - 1e-12) {
                // keep the pair at equal norms so later interfaces see a fair split
                let (nl, nr) = (op_norm(&bal.b), op_norm(&bal.a));
                let w = (nr / nl).sqrt();
                let f = fac.factors_mut();
                f[i] = bal.b.scale_re(w);
                f[i + 1] = bal.a.scale_re(1.0 / w);
            }
        }
        if fac.norm_bound() >= start * (1.0 - 1e-9) {
            break;
        }
    }
}

//! Evaluation of multiplier maps.
//!
//! Kernels are stored in "S-order": `T_i` is a `d_i x d_{i+1}` array with
//! row index in the basis of `H_i^d` and column index in `H_{i+1}`. The
//! operator `H_i^d → H_{i+1}` it represents has matrix `T_i^T`. Evaluation
//! of `Φ_φ` contracts kernels left to right, `T_1` first.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CTensor, C64, ZERO};
use crate::tensorrep::{BlockFactorization, ElementaryTensorSum};

/// Kernels `T_1, …, T_{n-1}` with `T_i` of size `d_i x d_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTuple {
    kernels: Vec<CMatrix>,
}

impl KernelTuple {
    pub fn new(kernels: Vec<CMatrix>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::InvalidArgument("empty kernel tuple".into()));
        }
        for i in 1..kernels.len() {
            if kernels[i - 1].cols() != kernels[i].rows() {
                return Err(Error::DimensionMismatch(format!(
                    "kernel {} has {} columns but kernel {} has {} rows",
                    i,
                    kernels[i - 1].cols(),
                    i + 1,
                    kernels[i].rows()
                )));
            }
        }
        Ok(Self { kernels })
    }

    pub fn kernels(&self) -> &[CMatrix] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    /// `[d_1, …, d_n]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.kernels.iter().map(|k| k.rows()).collect();
        d.push(self.kernels.last().map_or(0, |k| k.cols()));
        d
    }

    /// Operator matrices in the argument order of [`gamma_apply`] on a
    /// symbol: `T_{n-1}^T, …, T_1^T`.
    pub fn gamma_args(&self) -> Vec<CMatrix> {
        self.kernels.iter().rev().map(|k| k.transpose()).collect()
    }

    /// Checks `dims()` against the leg dimensions of a multiplier.
    pub fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.kernels.len() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} kernels for {} legs",
                self.kernels.len(),
                dims.len()
            )));
        }
        for (i, k) in self.kernels.iter().enumerate() {
            if k.shape() != (dims[i], dims[i + 1]) {
                return Err(Error::DimensionMismatch(format!(
                    "leg {}: kernel {} is {}x{}, expected {}x{}",
                    i + 1,
                    i + 1,
                    k.rows(),
                    k.cols(),
                    dims[i],
                    dims[i + 1]
                )));
            }
        }
        Ok(())
    }
}

/// Entrywise product `(φ(i,j) T_ij)`.
pub fn schur_apply_2d(phi: &CTensor, t: &CMatrix) -> Result<CMatrix> {
    if phi.dims() != [t.rows(), t.cols()] {
        return Err(Error::DimensionMismatch(format!(
            "multiplier dims {:?} vs kernel {}x{}",
            phi.dims(),
            t.rows(),
            t.cols()
        )));
    }
    let data = phi.as_slice().iter().zip(t.as_slice()).map(|(a, b)| a * b).collect();
    CMatrix::new(t.rows(), t.cols(), data)
}

/// `S_φ(T_1 ⊗ ··· ⊗ T_{n-1})(x_1, x_n) =
/// Σ φ(x_1, …, x_n) T_1(x_1, x_2) ··· T_{n-1}(x_{n-1}, x_n)`.
pub fn schur_apply_nd(phi: &CTensor, ts: &KernelTuple) -> Result<CMatrix> {
    ts.check_dims(phi.dims())?;
    let dims = phi.dims();
    let n = dims.len();
    if n == 2 {
        return schur_apply_2d(phi, &ts.kernels[0]);
    }
    let mut out = CMatrix::zeros(dims[0], dims[n - 1]);
    let mut idx = vec![0; n];
    for &v in phi.as_slice() {
        if v != ZERO {
            let mut p = v;
            for i in 0..n - 1 {
                p *= ts.kernels[i][(idx[i], idx[i + 1])];
            }
            out[(idx[0], idx[n - 1])] += p;
        }
        phi.advance(&mut idx);
    }
    Ok(out)
}

/// `Φ_φ(T_{n-1} ⊗ ··· ⊗ T_1) = Σ_r A_n T_{n-1}^T A'_{n-1} ··· T_1^T A'_1`,
/// where `A'_i = A_i^T` when `n - i` is odd and `A_i` otherwise.
///
/// For `n = 2` this is `Σ b T^T a^T`; for `n = 3` it is
/// `Σ c T_2^T b^T T_1^T a`. The result is `d_n x d_1`.
pub fn phi_apply(phi: &ElementaryTensorSum, ts: &KernelTuple) -> Result<CMatrix> {
    ts.check_dims(phi.dims())?;
    let n = phi.arity();
    let ops: Vec<CMatrix> = ts.kernels.iter().map(|k| k.transpose()).collect();
    let dims = phi.dims();
    let mut out = CMatrix::zeros(dims[n - 1], dims[0]);
    for term in phi.terms() {
        let mut acc = leg_factor(&term[0], n, 0);
        for i in 1..n {
            acc = ops[i - 1].matmul(&acc);
            acc = leg_factor(&term[i], n, i).matmul(&acc);
        }
        out += &acc;
    }
    Ok(out)
}

// factor for 0-based leg i of an n-leg multiplier
pub(crate) fn leg_factor(a: &CMatrix, n: usize, i: usize) -> CMatrix {
    if (n - 1 - i) % 2 == 1 {
        a.transpose()
    } else {
        a.clone()
    }
}

/// `A_1 (T_1 ⊗ I) A_2 ··· A_{n-1} (T_{n-1} ⊗ I) A_n`, where `T_i` is an
/// operator matrix of size `d_i x d_{i+1}` acting blockwise.
pub fn gamma_apply(u: &BlockFactorization, ops: &[CMatrix]) -> Result<CMatrix> {
    let dims = u.dims();
    let n = dims.len();
    if ops.len() != n - 1 {
        return Err(Error::DimensionMismatch(format!(
            "{} operators for {} factors",
            ops.len(),
            n
        )));
    }
    for (i, t) in ops.iter().enumerate() {
        if t.shape() != (dims[i], dims[i + 1]) {
            return Err(Error::DimensionMismatch(format!(
                "operator {} is {}x{}, expected {}x{}",
                i + 1,
                t.rows(),
                t.cols(),
                dims[i],
                dims[i + 1]
            )));
        }
    }
    let counts = u.counts();
    let mut acc = u.factor(0).clone();
    for i in 0..n - 1 {
        acc = block_apply(&acc, &ops[i], counts[i]);
        acc = acc.matmul(u.factor(i + 1));
    }
    Ok(acc)
}

// acc · (1_J ⊗ t), exploiting the block-diagonal structure
fn block_apply(acc: &CMatrix, t: &CMatrix, j: usize) -> CMatrix {
    let (p, q) = t.shape();
    let mut out = CMatrix::zeros(acc.rows(), j * q);
    for s in 0..j {
        let blk = acc.block(0, s * p, acc.rows(), p).matmul(t);
        out.set_block(0, s * q, &blk);
    }
    out
}

/// Replaces every factor `a_i` by `1_m ⊗ a_i` (the block-diagonal
/// `diag(a_i, …, a_i)`).
pub fn inflate(phi: &ElementaryTensorSum, m: usize) -> ElementaryTensorSum {
    phi.map_factors(|_, a| a.inflate(m))
}

/// `Φ_φ^{(m)}` on block kernels: `T_i` is a `d_i m x d_{i+1} m` array whose
/// `(s, t)` block (outer index first) is the `(s, t)` entry of the amplified
/// kernel. Evaluated as `Φ_ψ` for `ψ = inflate(φ, m)`.
pub fn amplify_apply(phi: &ElementaryTensorSum, m: usize, ts: &KernelTuple) -> Result<CMatrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("amplification level 0".into()));
    }
    let dims: Vec<usize> = phi.dims().iter().map(|d| d * m).collect();
    ts.check_dims(&dims)?;
    phi_apply(&inflate(phi, m), ts)
}

/// Kernel tuple of the block-diagonal inflations `1_m ⊗ T_i`.
pub fn inflate_kernels(ts: &KernelTuple, m: usize) -> KernelTuple {
    KernelTuple { kernels: ts.kernels.iter().map(|k| k.inflate(m)).collect() }
}

/// Dense evaluation of `S_φ` from the Kronecker matrix of `φ`, used to
/// cross-check the factored formulas: the vector `T_1 ⊗ ··· ⊗ T_{n-1}`
/// pairing is expanded explicitly.
pub fn multiplier_action_dense(phi: &ElementaryTensorSum, ts: &KernelTuple) -> Result<CMatrix> {
    ts.check_dims(phi.dims())?;
    // Φ_φ is linear in each kernel, so expand over matrix units.
    let dims = phi.dims().to_vec();
    let n = dims.len();
    let mut out = CMatrix::zeros(dims[n - 1], dims[0]);
    let shape: Vec<usize> = (0..n - 1).flat_map(|i| [dims[i], dims[i + 1]]).collect();
    let index = CTensor::zeros(shape.clone());
    let mut idx = vec![0; shape.len()];
    for _ in 0..index.len() {
        let mut coeff = C64::new(1.0, 0.0);
        for i in 0..n - 1 {
            coeff *= ts.kernels[i][(idx[2 * i], idx[2 * i + 1])];
        }
        if coeff != ZERO {
            let units = (0..n - 1)
                .map(|i| CMatrix::unit(dims[i], dims[i + 1], idx[2 * i], idx[2 * i + 1]))
                .collect();
            let y = phi_apply(phi, &KernelTuple { kernels: units })?;
            out += &y.scale(coeff);
        }
        index.advance(&mut idx);
    }
    Ok(out)
}

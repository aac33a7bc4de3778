//! The block-diagonal map `Φ = ⊕_k s_k τ_k` of scaled transpositions,
//! truncated to blocks `k = 1, …, K`.
//!
//! With `s_k = 1/k` every block is completely contractive with cb norm 1,
//! while its operator norm `1/k` and Hilbert-Schmidt norm `1/k` decay. The
//! map is therefore compact, and the swap witnesses show that no positive
//! operator with decaying block norms can dominate its amplifications.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{lambda_min, op_norm, CMatrix, C64};
use crate::norms::{cb_lower_amplification, cb_norm, swap_witness, ChoiForm, Method, NormBracket, NormOptions};
use crate::sdp::{solve, Coeff, SdpProblem, SdpStatus};
use crate::tensorrep::ElementaryTensorSum;

/// Largest supported number of blocks.
pub const MAX_BLOCKS: usize = 12;

/// Certified data of one block `Φ_k` of a block map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockData {
    pub k: usize,
    pub scale: f64,
    /// `‖Φ_k‖` on the operator norm.
    pub level1_norm: f64,
    /// `‖Φ_k‖_2` on the Hilbert-Schmidt norm.
    pub hs_norm: f64,
    pub cb: NormBracket,
}

/// `⊕_{k ≤ K} s_k τ_k` with its per-block certificates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaarMap {
    pub max_block: usize,
    pub blocks: Vec<BlockData>,
}

impl SaarMap {
    /// `Σ_{k ≤ K} k`, the side of the ambient matrix algebra.
    pub fn ambient(&self) -> usize {
        self.max_block * (self.max_block + 1) / 2
    }

    /// Start of block `k` (1-based) in the ambient basis.
    pub fn offset(&self, k: usize) -> usize {
        (k - 1) * k / 2
    }

    pub fn block(&self, k: usize) -> Result<&BlockData> {
        if k == 0 || k > self.max_block {
            return Err(Error::BlockOutOfRange { k, max: self.max_block });
        }
        Ok(&self.blocks[k - 1])
    }

    /// `s_k τ_k` as a map on `M_k`.
    pub fn block_map(&self, k: usize) -> Result<ChoiForm> {
        let b = self.block(k)?;
        Ok(ChoiForm::transposition(k).scale(C64::new(b.scale, 0.0)))
    }

    /// `Σ_k s_k Σ_ij e_ji ⊗ e_ij`, embedded block by block in `M_N ⊗ M_N`:
    /// the two-leg multiplier whose map is this block map.
    pub fn multiplier(&self) -> ElementaryTensorSum {
        let n = self.ambient();
        let mut terms = Vec::new();
        for b in &self.blocks {
            let o = self.offset(b.k);
            for i in 0..b.k {
                for j in 0..b.k {
                    let a = CMatrix::unit(n, n, o + j, o + i).scale_re(b.scale);
                    terms.push(vec![a, CMatrix::unit(n, n, o + i, o + j)]);
                }
            }
        }
        ElementaryTensorSum::new(vec![n, n], terms).expect("block units fit the ambient space")
    }
}

/// Builds `⊕_{k ≤ K} k^{-1} τ_k` and certifies each block.
pub fn build_saar(max_block: usize, opts: &NormOptions) -> Result<SaarMap> {
    if !(2..=MAX_BLOCKS).contains(&max_block) {
        return Err(Error::InvalidArgument(format!("max block {max_block} outside 2..={MAX_BLOCKS}")));
    }
    let blocks: Vec<BlockData> = (1..=max_block)
        .into_par_iter()
        .map(|k| {
            let s = 1.0 / k as f64;
            let map = ChoiForm::transposition(k).scale(C64::new(s, 0.0));
            certify_block(k, s, &map, opts)
        })
        .collect::<Result<_>>()?;
    Ok(SaarMap { max_block, blocks })
}

fn certify_block(k: usize, scale: f64, map: &ChoiForm, opts: &NormOptions) -> Result<BlockData> {
    let cb = cb_norm(map, opts)?;
    let level1_norm = cb_lower_amplification(map, 1, 0, opts.seed);
    let hs_norm = op_norm(map.natural());
    Ok(BlockData { k, scale, level1_norm, hs_norm, cb })
}

/// `⊕_k s_k (q_k x q_k)^T`: the diagonal blocks of `x`, transposed and
/// scaled; off-diagonal blocks are discarded.
pub fn saar_apply(s: &SaarMap, x: &CMatrix) -> Result<CMatrix> {
    let n = s.ambient();
    if x.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("input is {}x{}, expected {n}x{n}", x.rows(), x.cols())));
    }
    let mut out = CMatrix::zeros(n, n);
    for b in &s.blocks {
        let o = s.offset(b.k);
        out.set_block(o, o, &x.block(o, o, b.k, b.k).transpose().scale_re(b.scale));
    }
    Ok(out)
}

/// `(n, ‖Φ - p_n Φ(·) p_n‖)` for `n = 0, …, K`, where `p_n` projects onto
/// the first `n` blocks; the tail norm is the largest remaining block norm.
pub fn saar_compactness_profile(s: &SaarMap) -> Vec<(usize, f64)> {
    (0..=s.max_block)
        .map(|n| (n, s.blocks[n..].iter().map(|b| b.level1_norm).fold(0.0, f64::max)))
        .collect()
}

/// Swap-witness certificate that `‖q_k c q_k‖ ≥ bound` for every positive
/// `c` with `Φ^{(m)}(x) ≤ c ⊗ 1_m` on Hermitian contractions `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCertificate {
    pub k: usize,
    /// `Σ_st e_st ⊗ e_ts` in `M_k(M_k)`.
    pub witness: CMatrix,
    pub witness_norm: f64,
    /// `‖Φ_k^{(k)}(witness)‖`.
    pub achieved: f64,
    /// Implied lower bound on `‖q_k c q_k‖`.
    pub bound: f64,
    image: CMatrix,
}

impl ObstructionCertificate {
    /// `Φ_k^{(k)}(witness)`.
    pub fn image(&self) -> &CMatrix {
        &self.image
    }

    /// Whether `c_k ⊗ 1_k - Φ_k^{(k)}(witness) ⪰ 0` up to `1e-12`. The
    /// amplification index is the outer one, so `c_k ⊗ 1_k` is stored as
    /// `1_k ⊗ c_k`.
    pub fn dominated_by(&self, c_k: &CMatrix) -> Result<bool> {
        let k = self.k;
        if c_k.shape() != (k, k) {
            return Err(Error::DimensionMismatch(format!("candidate is {}x{}, block is {k}x{k}", c_k.rows(), c_k.cols())));
        }
        let gap = &CMatrix::identity(k).kron(c_k) - &self.image;
        Ok(lambda_min(&gap.hermitian_part())? >= -1e-12)
    }
}

/// Certificate for block `k` from the swap witness.
pub fn saar_obstruction(s: &SaarMap, k: usize) -> Result<ObstructionCertificate> {
    let map = s.block_map(k)?;
    let witness = swap_witness((k, k), k);
    let image = map.apply_amplified(&witness, k)?;
    let witness_norm = op_norm(&witness);
    let achieved = op_norm(&image);
    Ok(ObstructionCertificate { k, witness, witness_norm, achieved, bound: achieved / witness_norm.max(1.0), image })
}

/// `min ‖c_k‖` over positive `c_k` with `c_k ⊗ 1_k ⪰ Φ_k^{(k)}(witness)`,
/// solved as a semidefinite program independent of the certificate.
pub fn minimal_block_domination(cert: &ObstructionCertificate, tol: f64) -> Result<f64> {
    let k = cert.k;
    // dual variables: t, then the real symmetric basis of c_k
    let basis: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let mut p = SdpProblem::new(vec![k, k, k * k]);
    p.set_cost(2, cert.image.scale_re(-1.0))?;
    // c_k = Σ y_ij H_ij with H_ij = e_ij + e_ji (i < j) or e_ii
    let h = |i: usize, j: usize, v: f64| Coeff::Sparse(vec![(i, j, C64::new(v, 0.0))]);
    p.add_constraint(vec![(1, Coeff::Dense(CMatrix::identity(k).scale_re(-1.0)))], -1.0)?;
    for &(i, j) in &basis {
        let mut big = Vec::with_capacity(2 * k);
        for s in 0..k {
            big.push((s * k + i, s * k + j, C64::new(-1.0, 0.0)));
        }
        p.add_constraint(vec![(0, h(i, j, -1.0)), (1, h(i, j, 1.0)), (2, Coeff::Sparse(big))], 0.0)?;
    }
    let sol = solve(&p, tol)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::SolverFailed {
            reason: format!("domination program ended with status {:?}", sol.status),
            bracket: NormBracket::new(0.0, cert.achieved, Method::SdpWitness, Method::ClosedForm, tol),
        });
    }
    Ok(-sol.dual_objective)
}

/// Per-block conditions of a candidate block map `⊕_k Φ_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub blocks: Vec<BlockData>,
    /// Every cb bracket contains 1 within `tol`.
    pub cb_norms_one: bool,
    /// Operator norms strictly decrease along the blocks.
    pub level1_decreasing: bool,
    /// `Σ_k ‖Φ_k‖_2^2`.
    pub hs_square_sum: f64,
}

/// Certifies the conditions on an arbitrary list of square block maps.
/// Makes no claim about the structure of the maps beyond these numbers.
pub fn block_condition_report(maps: &[ChoiForm], opts: &NormOptions) -> Result<ConditionReport> {
    let blocks: Vec<BlockData> = maps
        .par_iter()
        .map(|m| {
            let (k, q) = m.input_shape();
            if k != q || m.output_shape() != (k, k) {
                return Err(Error::NonSquare { rows: k, cols: q });
            }
            certify_block(k, 1.0, m, opts)
        })
        .collect::<Result<_>>()?;
    let cb_norms_one = blocks.iter().all(|b| b.cb.contains(1.0, opts.tol));
    let level1_decreasing = blocks.windows(2).all(|w| w[1].level1_norm < w[0].level1_norm);
    let hs_square_sum = blocks.iter().map(|b| b.hs_norm * b.hs_norm).sum();
    Ok(ConditionReport { blocks, cb_norms_one, level1_decreasing, hs_square_sum })
}

impl SaarMap {
    /// The conditions report of this map's blocks.
    pub fn conditions(&self, opts: &NormOptions) -> Result<ConditionReport> {
        let maps: Vec<ChoiForm> = (1..=self.max_block).map(|k| self.block_map(k)).collect::<Result<_>>()?;
        block_condition_report(&maps, opts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_gaussian;
    use crate::schur::{phi_apply, KernelTuple};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn saar(k: usize) -> SaarMap {
        build_saar(k, &NormOptions::default()).unwrap()
    }

    #[test]
    fn block_data_for_two_blocks() {
        let s = saar(2);
        let level1: Vec<f64> = s.blocks.iter().map(|b| b.level1_norm).collect();
        assert!((level1[0] - 1.0).abs() < 1e-12 && (level1[1] - 0.5).abs() < 1e-12, "{level1:?}");
        for b in &s.blocks {
            assert!(b.cb.contains(1.0, 1e-9) && b.cb.is_tight(), "{}", b.cb);
            assert!((b.hs_norm - 1.0 / b.k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_sizes_are_rejected() {
        assert!(build_saar(1, &NormOptions::default()).is_err());
        assert!(build_saar(13, &NormOptions::default()).is_err());
        let s = saar(3);
        assert!(matches!(saar_obstruction(&s, 4), Err(Error::BlockOutOfRange { k: 4, max: 3 })));
        assert!(matches!(saar_obstruction(&s, 0), Err(Error::BlockOutOfRange { .. })));
    }

    #[test]
    fn apply_transposes_diagonal_blocks() {
        let s = saar(4);
        let n = s.ambient();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_gaussian(n, n, &mut rng);
        let y = saar_apply(&s, &x).unwrap();
        for k in 1..=4 {
            let o = s.offset(k);
            let want = x.block(o, o, k, k).transpose().scale_re(1.0 / k as f64);
            assert!((&y.block(o, o, k, k) - &want).max_abs() < 1e-14);
        }
        let mut off = x.clone();
        for k in 1..=4 {
            let o = s.offset(k);
            off.set_block(o, o, &CMatrix::zeros(k, k));
        }
        assert_eq!(saar_apply(&s, &off).unwrap().max_abs(), 0.0);
        assert!(saar_apply(&s, &CMatrix::zeros(n + 1, n + 1)).is_err());
    }

    #[test]
    fn multiplier_matches_block_map() {
        let s = saar(4);
        let n = s.ambient();
        let phi = s.multiplier();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_gaussian(n, n, &mut rng);
        // the multiplier acts on the operator whose kernel is x^T
        let got = phi_apply(&phi, &KernelTuple::new(vec![x.transpose()]).unwrap()).unwrap();
        let want = saar_apply(&s, &x).unwrap();
        assert!((&got - &want).max_abs() < 1e-13);
    }

    #[test]
    fn profile_is_largest_remaining_block() {
        let s = saar(8);
        let prof = saar_compactness_profile(&s);
        assert_eq!(prof.len(), 9);
        for &(n, t) in &prof {
            let want = if n == 8 { 0.0 } else { 1.0 / (n + 1) as f64 };
            assert!((t - want).abs() < 1e-12, "n={n}: {t}");
        }
    }

    #[test]
    fn obstruction_bounds_do_not_decay() {
        let s = saar(5);
        for k in 1..=5 {
            let c = saar_obstruction(&s, k).unwrap();
            assert!(c.witness.is_hermitian(0.0));
            assert!((c.witness_norm - 1.0).abs() < 1e-12);
            assert!((c.achieved - 1.0).abs() < 1e-10 && c.bound >= 1.0 - 1e-9);
            assert!(c.dominated_by(&CMatrix::identity(k)).unwrap());
            if k > 1 {
                // a candidate of norm below one fails the witness inequality
                assert!(!c.dominated_by(&CMatrix::identity(k).scale_re(0.99)).unwrap());
            }
        }
    }

    #[test]
    fn domination_program_agrees_with_certificate() {
        let s = saar(4);
        for k in 1..=4 {
            let c = saar_obstruction(&s, k).unwrap();
            let v = minimal_block_domination(&c, 1e-8).unwrap();
            assert!((v - c.bound).abs() < 1e-6, "k={k}: {v} vs {}", c.bound);
        }
    }

    #[test]
    fn condition_report_of_default_map() {
        let s = saar(6);
        let r = s.conditions(&NormOptions::default()).unwrap();
        assert!(r.cb_norms_one && r.level1_decreasing);
        let want: f64 = (1..=6).map(|k| 1.0 / (k * k) as f64).sum();
        assert!((r.hs_square_sum - want).abs() < 1e-12 && r.hs_square_sum < 1.65);
    }
}

//! Completely bounded norms of maps between matrix spaces and Haagerup norms
//! of two-fold tensors.
//!
//! Upper bounds come from explicit factorizations `Φ(x) = B (1_r ⊗ x) A`,
//! for which `‖Φ‖_cb ≤ ‖B‖ ‖A‖`. Starting from a shortest representation,
//! the change of basis `B ↦ B (S ⊗ 1)`, `A ↦ (S^{-1} ⊗ 1) A` is optimized by
//! the semidefinite program
//!
//! ```text
//! min t  s.t.  t·1 - B (P ⊗ 1) B^* ⪰ 0,   [[t·1, A^*], [A, P ⊗ 1]] ⪰ 0
//! ```
//!
//! and the bound is re-evaluated at the rounded `S = P^{1/2}`. Lower bounds
//! are amplification values of explicit contractions.

use crate::error::{Error, Result};
use crate::linalg::{eigh, op_norm, svd, CMatrix, C64};
use crate::sdp::{self, Coeff, SdpProblem, SdpSolution, SdpStatus};
use crate::tensorrep::ElementaryTensorSum;

use super::amplify::{alternate, search};
use super::choi::ChoiForm;
use super::{Method, NormBracket, NormOptions};

/// Largest side of the balancing program handled by the SDP path.
pub(crate) const SDP_MAX_SIDE: usize = 240;

/// An optimized two-factor bound.
#[derive(Clone, Debug)]
pub(crate) struct Balanced {
    pub upper: f64,
    pub b: CMatrix,
    pub a: CMatrix,
    pub solution: SdpSolution,
}

/// `[b_1, …, b_r]` and `[a_1; …; a_r]`.
pub(crate) fn stack_terms(terms: &[(CMatrix, CMatrix)]) -> (CMatrix, CMatrix) {
    let (p2, p) = terms[0].0.shape();
    let (q, q2) = terms[0].1.shape();
    let r = terms.len();
    let mut b = CMatrix::zeros(p2, r * p);
    let mut a = CMatrix::zeros(r * q, q2);
    for (k, (bk, ak)) in terms.iter().enumerate() {
        b.set_block(0, k * p, bk);
        a.set_block(k * q, 0, ak);
    }
    (b, a)
}

fn inflate_right(s: &CMatrix, p: usize) -> CMatrix {
    s.kron(&CMatrix::identity(p))
}

/// Rebalances `B (S ⊗ 1_p)`, `(S^{-1} ⊗ 1_q) A` over invertible `r x r`
/// matrices `S`. `None` when the program is too large.
pub(crate) fn balance(b: &CMatrix, a: &CMatrix, r: usize, p: usize, q: usize, tol: f64) -> Result<Option<Balanced>> {
    let (ml, mr) = (b.rows(), a.cols());
    if ml.max(mr + r * q) > SDP_MAX_SIDE || r > 60 {
        return Ok(None);
    }
    // normalize both factors to unit norm; the product scales back
    let (nb, na) = (op_norm(b), op_norm(a));
    if nb == 0.0 || na == 0.0 {
        return Ok(None);
    }
    let bs = b.scale_re(1.0 / nb);
    let as_ = a.scale_re(1.0 / na);
    let real = bs.is_real() && as_.is_real();
    let blocks: Vec<CMatrix> = (0..r).map(|k| bs.block(0, k * p, ml, p)).collect();
    let gram = |i: usize, j: usize| blocks[i].matmul(&blocks[j].adjoint());

    let side = mr + r * q;
    let mut prob = SdpProblem::new(vec![ml, side]);
    let mut c_right = CMatrix::zeros(side, side);
    c_right.set_block(mr, 0, &as_);
    c_right.set_block(0, mr, &as_.adjoint());
    prob.set_cost(1, c_right)?;
    let top: Vec<(usize, usize, C64)> = (0..mr).map(|i| (i, i, C64::new(-1.0, 0.0))).collect();
    prob.add_constraint(
        vec![(0, Coeff::Dense(CMatrix::identity(ml).scale_re(-1.0))), (1, Coeff::Sparse(top))],
        -1.0,
    )?;
    // Hermitian basis of P, remembered for reconstruction
    let mut basis: Vec<(usize, usize, C64)> = Vec::new();
    for i in 0..r {
        for j in i..r {
            let kinds: &[C64] = if i == j || real {
                &[C64::new(1.0, 0.0)]
            } else {
                &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]
            };
            for &w in kinds {
                let left = if i == j {
                    gram(i, i)
                } else {
                    let g = gram(i, j).scale(w);
                    &g + &g.adjoint()
                };
                let right: Vec<(usize, usize, C64)> =
                    (0..q).map(|c| (mr + i * q + c, mr + j * q + c, -w)).collect();
                prob.add_constraint(vec![(0, Coeff::Dense(left.hermitian_part())), (1, Coeff::Sparse(right))], 0.0)?;
                basis.push((i, j, w));
            }
        }
    }
    let solution = sdp::solve(&prob, tol.clamp(1e-10, 1e-4))?;
    let mut pm = CMatrix::zeros(r, r);
    for (&(i, j, w), &y) in basis.iter().zip(&solution.dual[1..]) {
        pm[(i, j)] += w * y;
        if i != j {
            pm[(j, i)] += w.conj() * y;
        }
    }
    let e = eigh(&pm.hermitian_part())?;
    let lmax = e.values.last().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Ok(Some(Balanced { upper: f64::INFINITY, b: b.clone(), a: a.clone(), solution }));
    }
    let floor = 1e-12 * lmax;
    let s = e.map_values(|x| x.max(floor).sqrt());
    let s_inv = e.map_values(|x| 1.0 / x.max(floor).sqrt());
    let nb2 = b.matmul(&inflate_right(&s, p));
    let na2 = inflate_right(&s_inv, q).matmul(a);
    let upper = op_norm(&nb2) * op_norm(&na2);
    Ok(Some(Balanced { upper, b: nb2, a: na2, solution }))
}

/// Seed built from the optimal dual states `ρ_0`, `ρ_1` of the balancing
/// program: the polar factor of `(id ⊗ Φ^†)(ξ η^*)` for the purifications
/// `ξ = Σ e_s ⊗ ρ_0^{1/2} e_s`, `η = Σ e_t ⊗ ρ_1^{1/2} e_t`.
fn dual_witness(map: &ChoiForm, sol: &SdpSolution) -> Option<(usize, CMatrix)> {
    let (p2, q2) = map.output_shape();
    let xl = &sol.primal[0];
    let xr = sol.primal[1].block(0, 0, q2, q2);
    let (tl, tr) = (xl.trace().re, xr.trace().re);
    if !(tl > 0.0 && tr > 0.0) {
        return None;
    }
    let r0 = eigh(&xl.scale_re(1.0 / tl).hermitian_part()).ok()?.map_values(|x| x.max(0.0).sqrt());
    let r1 = eigh(&xr.scale_re(1.0 / tr).hermitian_part()).ok()?.map_values(|x| x.max(0.0).sqrt());
    let m = p2.max(q2);
    let mut xi = vec![C64::new(0.0, 0.0); m * p2];
    for s in 0..p2 {
        for a in 0..p2 {
            xi[s * p2 + a] = r0[(a, s)];
        }
    }
    let mut eta = vec![C64::new(0.0, 0.0); m * q2];
    for t in 0..q2 {
        for b in 0..q2 {
            eta[t * q2 + b] = r1[(b, t)];
        }
    }
    let w = CMatrix::column(&xi).matmul(&CMatrix::column(&eta).adjoint());
    let g = map.adjoint().apply_amplified(&w, m).ok()?;
    Some((m, svd(&g).polar_factor()))
}

/// Level at which amplification attains the cb norm in exact arithmetic.
pub(crate) fn smith_level(map: &ChoiForm) -> usize {
    let (p, q) = map.input_shape();
    let (p2, q2) = map.output_shape();
    p.max(q).min(p2.max(q2)).max(1)
}

/// Two-sided bracket on `‖Φ‖_cb`.
pub fn cb_norm(map: &ChoiForm, opts: &NormOptions) -> Result<NormBracket> {
    opts.validate()?;
    if map.is_zero() {
        return Ok(NormBracket::zero(opts.tol));
    }
    let terms = map.elementary_terms();
    let (p, q) = map.input_shape();
    let (b, a) = stack_terms(&terms);
    let canonical = op_norm(&b) * op_norm(&a);
    let m = smith_level(map);
    let (lower, _) = search(map, m, 0, opts.seed, vec![], None);
    let mut br = NormBracket::new(lower, canonical, Method::Amplification, Method::CanonicalFactorization, opts.tol);
    if br.is_tight() && !opts.force_sdp {
        return Ok(br);
    }
    let bal = balance(&b, &a, terms.len(), p, q, 1e-9)?;
    let mut solved = false;
    if let Some(bal) = &bal {
        br.lower_upper(bal.upper, Method::SdpFactorization);
        solved = bal.solution.status == SdpStatus::Optimal;
        if let Some((mw, x0)) = dual_witness(map, &bal.solution) {
            let (v, _) = alternate(map, &map.adjoint(), mw, x0);
            br.raise_lower(v, Method::SdpWitness);
        }
    }
    if !br.is_tight() {
        let target = br.upper * (1.0 - opts.tol);
        let (v, _) = search(map, m, opts.restarts, opts.seed, vec![], Some(target));
        br.raise_lower(v, Method::Amplification);
    }
    if !br.is_tight() && !solved {
        let reason = match &bal {
            None => "balancing program too large for the SDP path".to_string(),
            Some(b) => format!("SDP ended with status {:?}", b.solution.status),
        };
        return Err(Error::SolverFailed { reason, bracket: br });
    }
    Ok(br)
}

/// `‖u‖_h` for `u = Σ a_r ⊗ b_r`, as the cb norm of `T ↦ Σ a_r T b_r`.
pub fn haagerup_norm(u: &ElementaryTensorSum, opts: &NormOptions) -> Result<NormBracket> {
    cb_norm(&ChoiForm::of_tensor(u)?, opts)
}

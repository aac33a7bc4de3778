//! Lower bounds on completely bounded norms by alternating maximization over
//! amplifications.
//!
//! For a fixed input `x` the best output functional is the top singular pair
//! `(ξ, η)` of `Φ^{(m)}(x)`; for fixed `(ξ, η)` the best contraction is the
//! polar factor of `(id ⊗ Φ^†)(ξ η^*)`. Each half-step can only increase
//! `|⟨ξ, Φ^{(m)}(x) η⟩|`, and every evaluated `x` is a certificate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{op_norm, random_gaussian, svd, CMatrix, C64};
use crate::schur::{amplify_apply, inflate, leg_factor, phi_apply, KernelTuple};
use crate::tensorrep::ElementaryTensorSum;

use super::choi::ChoiForm;

const MAX_SWEEPS: usize = 4000;
/// Alternation stops after three sweeps with relative gain below this.
pub(crate) const GAIN_TOL: f64 = 1e-9;

/// Certified value `‖Φ^{(m)}(x)‖ / max(1, ‖x‖)`.
pub(crate) fn certify(map: &ChoiForm, x: &CMatrix, m: usize) -> f64 {
    let y = map.apply_amplified(x, m).expect("shape checked by caller");
    op_norm(&y) / op_norm(x).max(1.0)
}

/// `x_{st} = E_{ts}` where defined: the flip `Σ e_st ⊗ e_ts`.
pub(crate) fn swap_witness(input: (usize, usize), m: usize) -> CMatrix {
    let (p, q) = input;
    let mut x = CMatrix::zeros(m * p, m * q);
    for s in 0..m {
        for t in 0..m {
            if t < p && s < q {
                x[(s * p + t, t * q + s)] = C64::new(1.0, 0.0);
            }
        }
    }
    x
}

/// `1_m ⊗ I_{p×q}`.
pub(crate) fn identity_witness(input: (usize, usize), m: usize) -> CMatrix {
    let (p, q) = input;
    let mut x = CMatrix::zeros(m * p, m * q);
    for s in 0..m {
        for i in 0..p.min(q) {
            x[(s * p + i, s * q + i)] = C64::new(1.0, 0.0);
        }
    }
    x
}

/// Runs the alternation from `x0`; returns the certified value and the
/// final contraction.
pub(crate) fn alternate(map: &ChoiForm, adj: &ChoiForm, m: usize, x0: CMatrix) -> (f64, CMatrix) {
    let mut x = x0;
    let nx = op_norm(&x);
    if nx == 0.0 {
        return (0.0, x);
    }
    if nx > 1.0 {
        x = x.scale_re(1.0 / nx);
    }
    let mut best = (certify(map, &x, m), x.clone());
    let mut last = best.0;
    let mut flat = 0;
    for _ in 0..MAX_SWEEPS {
        let y = map.apply_amplified(&x, m).expect("shape");
        let dy = svd(&y);
        if dy.s.first().copied().unwrap_or(0.0) == 0.0 {
            break;
        }
        let xi = CMatrix::column(&dy.left(0));
        let eta = CMatrix::column(&dy.right(0));
        let g = adj.apply_amplified(&xi.matmul(&eta.adjoint()), m).expect("shape");
        let dg = svd(&g);
        x = dg.polar_factor();
        let val = dg.s.iter().sum::<f64>();
        if val <= last * (1.0 + GAIN_TOL) {
            flat += 1;
            if flat >= 3 {
                break;
            }
        } else {
            flat = 0;
        }
        last = last.max(val);
    }
    let v = certify(map, &x, m);
    if v > best.0 {
        best = (v, x);
    }
    best
}

fn random_seed(input: (usize, usize), m: usize, seed: u64, restart: usize) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    random_gaussian(m * input.0, m * input.1, &mut rng)
}

/// Best value at level `m` over the structured seeds, `extra`, and then
/// `restarts` random seeds; random restarts are skipped once `stop_at` is
/// reached. Ties keep the first seed found.
pub(crate) fn search(
    map: &ChoiForm,
    m: usize,
    restarts: usize,
    seed: u64,
    extra: Vec<CMatrix>,
    stop_at: Option<f64>,
) -> (f64, CMatrix) {
    let adj = map.adjoint();
    let input = map.input_shape();
    let mut seeds = vec![swap_witness(input, m), identity_witness(input, m)];
    seeds.extend(extra);
    let mut best = (f64::NEG_INFINITY, CMatrix::zeros(0, 0));
    let structured: Vec<(f64, CMatrix)> =
        seeds.into_par_iter().map(|x0| alternate(map, &adj, m, x0)).collect();
    for cand in structured {
        if cand.0 > best.0 {
            best = cand;
        }
    }
    if stop_at.is_some_and(|target| best.0 >= target) {
        return best;
    }
    let randomized: Vec<(f64, CMatrix)> = (0..restarts)
        .into_par_iter()
        .map(|r| alternate(map, &adj, m, random_seed(input, m, seed, r)))
        .collect();
    for cand in randomized {
        if cand.0 > best.0 {
            best = cand;
        }
    }
    best
}

/// Lower bound on `‖Φ‖_cb` from the amplifications at levels `1..=m`:
/// nondecreasing in `m` by construction.
pub fn cb_lower_amplification(map: &ChoiForm, m: usize, restarts: usize, seed: u64) -> f64 {
    assert!(m >= 1, "amplification level must be positive");
    if map.is_zero() {
        return 0.0;
    }
    (1..=m).map(|level| search(map, level, restarts, seed, vec![], None).0).fold(0.0, f64::max)
}

/// Certified value of `‖Φ_φ^{(m)}(K_1, …, K_{n-1})‖` over the contraction
/// norms of the block kernels.
pub(crate) fn certify_multilinear(phi: &ElementaryTensorSum, m: usize, ks: &[CMatrix]) -> f64 {
    let denom: f64 = ks.iter().map(|k| op_norm(k).max(1.0)).product();
    let ts = KernelTuple::new(ks.to_vec()).expect("chain checked by caller");
    op_norm(&amplify_apply(phi, m, &ts).expect("dims checked by caller")) / denom
}

/// Lower bound on `‖φ‖_m` at amplification level `m` by alternating over
/// the block kernels one leg at a time.
pub fn multiplier_lower_amplification(phi: &ElementaryTensorSum, m: usize, restarts: usize, seed: u64) -> f64 {
    assert!(m >= 1, "amplification level must be positive");
    if phi.is_empty() {
        return 0.0;
    }
    let dims: Vec<usize> = phi.dims().iter().map(|d| d * m).collect();
    let n = dims.len();
    let mut starts: Vec<Vec<CMatrix>> = vec![(0..n - 1)
        .map(|i| CMatrix::from_fn(dims[i], dims[i + 1], |a, b| C64::new((a == b) as u8 as f64, 0.0)))
        .collect()];
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r as u64 + 1).wrapping_mul(0xA24B_AED4_963E_E407));
        starts.push((0..n - 1).map(|i| random_gaussian(dims[i], dims[i + 1], &mut rng)).collect());
    }
    let vals: Vec<f64> = starts.into_par_iter().map(|ks| alternate_multilinear(phi, m, ks)).collect();
    vals.into_iter().fold(0.0, f64::max)
}

fn alternate_multilinear(phi: &ElementaryTensorSum, m: usize, mut ks: Vec<CMatrix>) -> f64 {
    for k in ks.iter_mut() {
        let nk = op_norm(k);
        if nk > 1.0 {
            *k = k.scale_re(1.0 / nk);
        }
    }
    let psi = inflate(phi, m);
    let n = psi.arity();
    let factors: Vec<Vec<CMatrix>> = psi
        .terms()
        .iter()
        .map(|t| t.iter().enumerate().map(|(i, a)| leg_factor(a, n, i)).collect())
        .collect();
    let mut best = certify_multilinear(phi, m, &ks);
    let mut last = best;
    let mut flat = 0;
    let legs = ks.len();
    for sweep in 0..MAX_SWEEPS {
        let i = sweep % legs;
        let y = phi_apply(&psi, &KernelTuple::new(ks.clone()).expect("chain")).expect("dims");
        let dy = svd(&y);
        if dy.s.first().copied().unwrap_or(0.0) == 0.0 {
            break;
        }
        let (xi, eta) = (dy.left(0), dy.right(0));
        // ξ^* Φ η = Σ_r ξ^* L_r K_i^T R_r η = Σ_ab K_ab M_ab with M = Σ_r (R_r η)(ξ^* L_r)
        let mut g = CMatrix::zeros(ks[i].rows(), ks[i].cols());
        for f in &factors {
            let mut v = f[0].matvec(&eta);
            for j in 1..=i {
                v = f[j].matvec(&ks[j - 1].transpose().matvec(&v));
            }
            let mut w = f[n - 1].adjoint_matvec(&xi);
            for j in (i + 1..n - 1).rev() {
                w = f[j].adjoint_matvec(&ks[j].conj().matvec(&w));
            }
            g += &CMatrix::column(&v).matmul(&CMatrix::column(&w).adjoint());
        }
        let dg = svd(&g.conj());
        ks[i] = dg.polar_factor();
        let val = dg.s.iter().sum::<f64>();
        if val <= last * (1.0 + GAIN_TOL) {
            flat += 1;
            if flat >= 3 * legs {
                break;
            }
        } else {
            flat = 0;
        }
        last = last.max(val);
        if i + 1 == legs {
            best = best.max(certify_multilinear(phi, m, &ks));
        }
    }
    best.max(certify_multilinear(phi, m, &ks))
}

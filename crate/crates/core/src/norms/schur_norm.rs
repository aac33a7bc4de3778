//! Norms of classical Schur multipliers `T ↦ [φ(i,j) T_ij]`.
//!
//! Upper bounds are factorizations `φ(i,j) = Σ_k a_i[k] conj(b_j[k])` with
//! value `max_i ‖a_i‖ · max_j ‖b_j‖`; lower bounds use the duality
//! `‖S_φ‖ = sup_{ξ,η} ‖D_ξ̄ φ D_η‖_1` over unit vectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eigh, op_norm, random_gaussian, svd, CMatrix, CTensor, C64};
use crate::sdp::{self, Coeff, SdpProblem, SdpStatus};

use super::{Method, NormBracket, NormOptions};
use super::amplify::GAIN_TOL;

/// Largest `d_1 + d_2` sent to the semidefinite program.
pub const SCHUR_SDP_MAX: usize = 48;

/// Bracket on `‖S_φ‖` together with the factorization realizing its upper
/// end: `φ(i,j) = Σ_k left[i][k] · conj(right[j][k])`.
#[derive(Clone, Debug)]
pub struct SchurNorm {
    pub bracket: NormBracket,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Factorization value, after appending coordinates that absorb the
/// residual `E = φ - [⟨a_i, b_j⟩]` exactly.
fn certified(f: &CMatrix, mut a: Vec<Vec<C64>>, mut b: Vec<Vec<C64>>) -> (f64, Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let (d1, d2) = f.shape();
    let e = CMatrix::from_fn(d1, d2, |i, j| {
        f[(i, j)] - a[i].iter().zip(&b[j]).map(|(x, y)| x * y.conj()).sum::<C64>()
    });
    let emax = (0..d1).map(|i| vec_norm(e.row(i))).fold(0.0, f64::max);
    if emax > 0.0 {
        let eps = emax.sqrt();
        for (i, ai) in a.iter_mut().enumerate() {
            ai.extend(e.row(i).iter().map(|z| z / eps));
        }
        for (j, bj) in b.iter_mut().enumerate() {
            bj.extend((0..d2).map(|k| C64::new(if k == j { eps } else { 0.0 }, 0.0)));
        }
    }
    let na = a.iter().map(|v| vec_norm(v)).fold(0.0, f64::max);
    let nb = b.iter().map(|v| vec_norm(v)).fold(0.0, f64::max);
    (na * nb, a, b)
}

/// Representatives of the distinct nonzero rows of `f`, and the class of
/// each row (`None` for zero rows).
fn classes(f: &CMatrix) -> (Vec<usize>, Vec<Option<usize>>) {
    let zero = C64::new(0.0, 0.0);
    let mut reps: Vec<usize> = Vec::new();
    let class = (0..f.rows())
        .map(|i| {
            let row = f.row(i);
            if row.iter().all(|&z| z == zero) {
                return None;
            }
            Some(reps.iter().position(|&r| f.row(r) == row).unwrap_or_else(|| {
                reps.push(i);
                reps.len() - 1
            }))
        })
        .collect();
    (reps, class)
}

fn row_factorization(f: &CMatrix) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let (d1, d2) = f.shape();
    let a = (0..d1).map(|i| f.row(i).to_vec()).collect();
    let b = (0..d2).map(|j| (0..d2).map(|k| C64::new((k == j) as u8 as f64, 0.0)).collect()).collect();
    (a, b)
}

fn column_factorization(f: &CMatrix) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let (d1, d2) = f.shape();
    let a = (0..d1).map(|i| (0..d1).map(|k| C64::new((k == i) as u8 as f64, 0.0)).collect()).collect();
    let b = (0..d2).map(|j| f.col(j).iter().map(|z| z.conj()).collect()).collect();
    (a, b)
}

fn svd_factorization(f: &CMatrix) -> (Vec<Vec<C64>>, Vec<Vec<C64>>) {
    let (d1, d2) = f.shape();
    let dec = svd(f);
    let k = dec.s.len();
    let a = (0..d1).map(|i| (0..k).map(|r| dec.u[(i, r)] * dec.s[r].sqrt()).collect()).collect();
    let b = (0..d2).map(|j| (0..k).map(|r| dec.v[(j, r)] * dec.s[r].sqrt()).collect()).collect();
    (a, b)
}

fn hadamard(f: &CMatrix, t: &CMatrix) -> CMatrix {
    CMatrix::from_fn(f.rows(), f.cols(), |i, j| f[(i, j)] * t[(i, j)])
}

/// Alternating maximization of `‖D_ξ̄ φ D_η‖_1` from the weights `(ξ, η)`;
/// returns the certified value `‖φ ∘ T‖ / max(1, ‖T‖)`.
fn alternate(f: &CMatrix, mut xi: Vec<C64>, mut eta: Vec<C64>) -> f64 {
    let (d1, d2) = f.shape();
    let mut best: f64 = 0.0;
    let mut last: f64 = 0.0;
    let mut flat = 0;
    for _ in 0..4000 {
        let m = CMatrix::from_fn(d1, d2, |i, j| xi[i].conj() * f[(i, j)] * eta[j]);
        let dm = svd(&m.conj());
        let t = dm.polar_factor();
        let val: f64 = dm.s.iter().sum();
        let y = hadamard(f, &t);
        let dy = svd(&y);
        best = best.max(dy.s.first().copied().unwrap_or(0.0) / op_norm(&t).max(1.0));
        xi = dy.left(0);
        eta = dy.right(0);
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
    best
}

fn lower_search(f: &CMatrix, restarts: usize, seed: u64, extra: Option<(Vec<C64>, Vec<C64>)>) -> f64 {
    let (d1, d2) = f.shape();
    let uniform = |d: usize| vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d];
    let top = svd(f);
    let mut seeds = vec![(uniform(d1), uniform(d2)), (top.left(0), top.right(0))];
    seeds.extend(extra);
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (r as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
        let x = random_gaussian(d1, 1, &mut rng).into_vec();
        let y = random_gaussian(d2, 1, &mut rng).into_vec();
        let (nx, ny) = (vec_norm(&x), vec_norm(&y));
        seeds.push((x.iter().map(|z| z / nx).collect(), y.iter().map(|z| z / ny).collect()));
    }
    seeds.into_par_iter().map(|(x, y)| alternate(f, x, y)).collect::<Vec<_>>().into_iter().fold(0.0, f64::max)
}

struct SdpOutcome {
    factors: (Vec<Vec<C64>>, Vec<Vec<C64>>),
    weights: (Vec<C64>, Vec<C64>),
    optimal: bool,
}

/// `min t` over `X = [[P, φ], [φ^*, Q]] ⪰ 0` with `diag(X) ≤ t`.
fn schur_sdp(f: &CMatrix) -> Result<SdpOutcome> {
    let (d1, d2) = f.shape();
    let n = d1 + d2;
    let real = f.is_real();
    // blocks: X, t, then one slack per diagonal entry
    let mut blocks = vec![n, 1];
    blocks.extend(std::iter::repeat_n(1, n));
    let mut prob = SdpProblem::new(blocks);
    prob.set_cost(1, CMatrix::identity(1))?;
    let half = C64::new(0.5, 0.0);
    let ihalf = C64::new(0.0, 0.5);
    for i in 0..d1 {
        for j in 0..d2 {
            let v = f[(i, j)];
            prob.add_constraint(vec![(0, Coeff::Sparse(vec![(i, d1 + j, half)]))], v.re)?;
            if !real {
                prob.add_constraint(vec![(0, Coeff::Sparse(vec![(i, d1 + j, ihalf)]))], v.im)?;
            }
        }
    }
    let first_diag = prob.constraints().len();
    let one = C64::new(1.0, 0.0);
    for i in 0..n {
        prob.add_constraint(
            vec![
                (0, Coeff::Sparse(vec![(i, i, one)])),
                (1, Coeff::Sparse(vec![(0, 0, -one)])),
                (2 + i, Coeff::Sparse(vec![(0, 0, one)])),
            ],
            0.0,
        )?;
    }
    let sol = sdp::solve(&prob, 1e-9)?;
    let e = eigh(&sol.primal[0].hermitian_part())?;
    let k = e.values.len();
    let v = CMatrix::from_fn(n, k, |i, r| e.vectors[(i, r)] * e.values[r].max(0.0).sqrt());
    let a = (0..d1).map(|i| v.row(i).to_vec()).collect();
    let b = (0..d2).map(|j| v.row(d1 + j).to_vec()).collect();
    let w: Vec<f64> = sol.dual[first_diag..].iter().map(|y| y.abs()).collect();
    let normed = |w: &[f64]| {
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            w.iter().map(|x| C64::new((x / s).sqrt(), 0.0)).collect()
        } else {
            vec![C64::new(1.0 / (w.len() as f64).sqrt(), 0.0); w.len()]
        }
    };
    Ok(SdpOutcome {
        factors: (a, b),
        weights: (normed(&w[..d1]), normed(&w[d1..])),
        optimal: sol.status == SdpStatus::Optimal,
    })
}

/// Two-sided bracket on `‖S_φ‖ = ‖S_φ‖_cb` for a 2-tensor `φ`.
pub fn schur_norm(phi: &CTensor, opts: &NormOptions) -> Result<SchurNorm> {
    opts.validate()?;
    if phi.arity() != 2 {
        return Err(Error::InvalidArgument(format!("Schur multiplier of arity {} is not 2", phi.arity())));
    }
    let (d1, d2) = (phi.dims()[0], phi.dims()[1]);
    let scale = phi.max_abs();
    if scale == 0.0 {
        return Ok(SchurNorm {
            bracket: NormBracket::zero(opts.tol),
            left: vec![vec![]; d1],
            right: vec![vec![]; d2],
        });
    }
    let full = phi.to_matrix()?.scale_re(1.0 / scale);
    // repeated rows or columns share their factor vectors and zero ones get
    // zero vectors, so the norm is that of the distinct nonzero part
    let (rows, row_class) = classes(&full);
    let (cols, col_class) = classes(&full.transpose());
    let f = CMatrix::from_fn(rows.len(), cols.len(), |i, j| full[(rows[i], cols[j])]);
    let (d1, d2) = f.shape();

    let mut best: Option<(f64, Method, Vec<Vec<C64>>, Vec<Vec<C64>>)> = None;
    let mut consider = |(a, b): (Vec<Vec<C64>>, Vec<Vec<C64>>), method: Method| {
        let (v, a, b) = certified(&f, a, b);
        if best.as_ref().is_none_or(|c| v < c.0) {
            best = Some((v, method, a, b));
        }
    };
    consider(row_factorization(&f), Method::RowFactorization);
    consider(column_factorization(&f), Method::ColumnFactorization);
    consider(svd_factorization(&f), Method::SvdFactorization);

    // every entry is the image of a matrix unit
    let mut br = NormBracket::new(1.0, f64::INFINITY, Method::MatrixUnit, Method::RowFactorization, opts.tol);
    let lower = lower_search(&f, 0, opts.seed, None);
    br.raise_lower(lower, Method::Amplification);
    {
        let c = best.as_ref().expect("candidates");
        br.lower_upper(c.0, c.1);
    }
    let mut failed = false;
    if (!br.is_tight() || opts.force_sdp) && d1 + d2 <= SCHUR_SDP_MAX {
        let out = schur_sdp(&f)?;
        failed = !out.optimal;
        let (v, a, b) = certified(&f, out.factors.0, out.factors.1);
        if v < br.upper {
            br.lower_upper(v, Method::GramFactorization);
            best = Some((v, Method::GramFactorization, a, b));
        }
        let w = lower_search(&f, 0, opts.seed, Some(out.weights));
        br.raise_lower(w, Method::SdpWitness);
    }
    if !br.is_tight() {
        br.raise_lower(lower_search(&f, opts.restarts, opts.seed, None), Method::Amplification);
    }
    if !br.is_tight() && failed {
        br.lower *= scale;
        br.upper *= scale;
        return Err(Error::SolverFailed { reason: "Schur factorization SDP did not converge".into(), bracket: br });
    }
    let (_, _, a, b) = best.expect("candidates");
    // φ = scale · f: split the scale evenly
    let s = scale.sqrt();
    let rescale = |v: Vec<Vec<C64>>| -> Vec<Vec<C64>> { v.into_iter().map(|x| x.into_iter().map(|z| z * s).collect()).collect() };
    br.lower *= scale;
    br.upper *= scale;
    let expand = |v: Vec<Vec<C64>>, class: &[Option<usize>]| -> Vec<Vec<C64>> {
        let width = v.first().map_or(0, Vec::len);
        class.iter().map(|c| c.map_or_else(|| vec![C64::new(0.0, 0.0); width], |c| v[c].clone())).collect()
    };
    Ok(SchurNorm { bracket: br, left: expand(rescale(a), &row_class), right: expand(rescale(b), &col_class) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::random_matrix;

    fn opts() -> NormOptions {
        NormOptions::default()
    }

    fn tensor(m: &CMatrix) -> CTensor {
        CTensor::from_matrix(m)
    }

    fn check_factorization(phi: &CMatrix, s: &SchurNorm) {
        for i in 0..phi.rows() {
            for j in 0..phi.cols() {
                let v: C64 = s.left[i].iter().zip(&s.right[j]).map(|(a, b)| a * b.conj()).sum();
                assert!((v - phi[(i, j)]).norm() < 1e-12);
            }
        }
        let na = s.left.iter().map(|v| vec_norm(v)).fold(0.0, f64::max);
        let nb = s.right.iter().map(|v| vec_norm(v)).fold(0.0, f64::max);
        assert!((na * nb - s.bracket.upper).abs() <= 1e-12 * s.bracket.upper.max(1.0));
    }

    #[test]
    fn constant_multiplier_has_norm_one() {
        let ones = CMatrix::from_fn(5, 4, |_, _| C64::new(1.0, 0.0));
        let s = schur_norm(&tensor(&ones), &opts()).unwrap();
        assert!(s.bracket.contains(1.0, 1e-12), "{}", s.bracket);
        check_factorization(&ones, &s);
    }

    #[test]
    fn rank_one_multiplier() {
        let x = random_matrix(4, 1, 1).into_vec();
        let y = random_matrix(3, 1, 2).into_vec();
        let phi = CMatrix::from_fn(4, 3, |i, j| x[i] * y[j]);
        let want = x.iter().map(|z| z.norm()).fold(0.0, f64::max) * y.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let s = schur_norm(&tensor(&phi), &opts()).unwrap();
        assert!(s.bracket.contains(want, 1e-10), "{} vs {want}", s.bracket);
        check_factorization(&phi, &s);
    }

    #[test]
    fn hadamard_sign_pattern() {
        let h = CMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]).unwrap();
        let s = schur_norm(&tensor(&h), &opts()).unwrap();
        assert!(s.bracket.is_tight(), "{}", s.bracket);
        assert!(s.bracket.contains(2f64.sqrt(), 1e-6), "{}", s.bracket);
        check_factorization(&h, &s);
    }

    #[test]
    fn permutation_invariance() {
        for seed in 0..4 {
            let phi = random_matrix(4, 3, seed);
            let perm = CMatrix::from_fn(4, 3, |i, j| phi[((i + 1) % 4, (j + 2) % 3)]);
            let a = schur_norm(&tensor(&phi), &opts()).unwrap().bracket;
            let b = schur_norm(&tensor(&perm), &opts()).unwrap().bracket;
            assert!(a.is_tight() && b.is_tight(), "{a} {b}");
            assert!((a.midpoint() - b.midpoint()).abs() <= 2e-6 * a.upper, "{a} {b}");
        }
    }

    #[test]
    fn norm_is_at_least_max_entry_and_at_most_row_bound() {
        for seed in 10..16 {
            let phi = random_matrix(3, 5, seed);
            let s = schur_norm(&tensor(&phi), &opts()).unwrap();
            assert!(s.bracket.lower >= phi.max_abs() * (1.0 - 1e-12));
            let rows = (0..3).map(|i| vec_norm(phi.row(i))).fold(0.0, f64::max);
            assert!(s.bracket.upper <= rows * (1.0 + 1e-12));
            check_factorization(&phi, &s);
        }
    }

    #[test]
    fn zero_multiplier() {
        let s = schur_norm(&CTensor::zeros(vec![2, 3]), &opts()).unwrap();
        assert_eq!(s.bracket.upper, 0.0);
    }

    #[test]
    fn repeated_and_zero_lines_do_not_change_the_norm() {
        // the block pattern [[0, J], [J, J]] has the norm of [[0, 1], [1, 1]]
        let small = schur_norm(&tensor(&CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 1.0]).unwrap()), &opts()).unwrap();
        let big = CMatrix::from_fn(40, 30, |i, j| C64::new(if i < 25 && j < 20 { 0.0 } else { 1.0 }, 0.0));
        let s = schur_norm(&tensor(&big), &opts()).unwrap();
        assert!(s.bracket.is_tight() && small.bracket.is_tight());
        assert!((s.bracket.upper - 2.0 / 3f64.sqrt()).abs() < 1e-6, "{}", s.bracket);
        assert!((s.bracket.midpoint() - small.bracket.midpoint()).abs() < 1e-6);
        check_factorization(&big, &s);
        let mut z = random_matrix(3, 4, 5);
        for j in 0..4 {
            z[(1, j)] = C64::new(0.0, 0.0);
        }
        let s = schur_norm(&tensor(&z), &opts()).unwrap();
        check_factorization(&z, &s);
    }
}

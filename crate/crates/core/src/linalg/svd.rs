//! One-sided Jacobi singular value decomposition.

use super::matrix::{CMatrix, C64, ZERO};

/// Relative orthogonality threshold between column pairs.
pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 80;

/// Thin SVD `a = u · diag(s) · v^*` with `s` sorted decreasingly.
///
/// For an `m x n` input, `u` is `m x k`, `v` is `n x k` with `k = min(m, n)`.
/// Columns belonging to zero singular values are left at zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    /// Number of singular values above `rel * s[0]`.
    pub fn rank(&self, rel: f64) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        self.s.iter().filter(|&&x| x > rel * top && x > 0.0).count()
    }

    /// Left singular vector `j`.
    pub fn left(&self, j: usize) -> Vec<C64> {
        self.u.col(j)
    }

    /// Right singular vector `j`.
    pub fn right(&self, j: usize) -> Vec<C64> {
        self.v.col(j)
    }

    /// Partial isometry `u v^*` restricted to nonzero singular values.
    pub fn polar_factor(&self) -> CMatrix {
        let k = self.rank(0.0);
        let (m, n) = (self.u.rows(), self.v.rows());
        CMatrix::from_fn(m, n, |i, j| {
            (0..k).map(|r| self.u[(i, r)] * self.v[(j, r)].conj()).sum()
        })
    }
}

pub fn svd(a: &CMatrix) -> Svd {
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.adjoint());
        Svd { u: t.v, s: t.s, v: t.u }
    }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    svd(a).s
}

fn jacobi_tall(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut norms: Vec<f64> = cols.iter().map(|c| norm_sqr(c)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s) = rotation(alpha, beta, g);
                let phase = (gamma / g).conj();
                rotate(&mut cols, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
                norms[p] = norm_sqr(&cols[p]);
                norms[q] = norm_sqr(&cols[q]);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let sv: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let mut u = CMatrix::zeros(m, n);
    let mut vm = CMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        s.push(sv[j]);
        if sv[j] > 0.0 {
            for i in 0..m {
                u[(i, k)] = cols[j][i] / sv[j];
            }
        }
        for i in 0..n {
            vm[(i, k)] = v[j][i];
        }
    }
    Svd { u, s, v: vm }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Real Jacobi rotation diagonalizing `[[alpha, g], [g, beta]]`.
pub(crate) fn rotation(alpha: f64, beta: f64, g: f64) -> (f64, f64) {
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, c * t)
}

// [x_p, x_q] <- [x_p, phase * x_q] * [[c, s], [-s, c]]
fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, phase: C64) {
    let (lo, hi) = cols.split_at_mut(q);
    let xp = &mut lo[p];
    let xq = &mut hi[0];
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let bp = *b * phase;
        let na = *a * c - bp * s;
        let nb = *a * s + bp * c;
        *a = na;
        *b = nb;
    }
}

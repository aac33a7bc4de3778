//! Cyclic Jacobi eigensolver for Hermitian matrices.

use super::matrix::{CMatrix, C64};
use super::svd::rotation;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Eigenpairs of a Hermitian matrix: `a = vectors · diag(values) · vectors^*`,
/// values ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    /// Rebuilds `V f(Λ) V^*`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj()).sum()
        })
    }
}

/// Hermitian tolerance used for input validation.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix. Errors if `a` is not square or
/// deviates from Hermitian by more than `1e-12` relative to its size.
pub fn eigh(a: &CMatrix) -> Result<Eigh> {
    a.check_square()?;
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL * a.max_abs().max(1.0) {
        return Err(Error::NonHermitian(defect));
    }
    Ok(eigh_unchecked(&a.hermitian_part()))
}

pub(crate) fn eigh_unchecked(a: &CMatrix) -> Eigh {
    let n = a.rows();
    let mut h = a.clone();
    let mut v = CMatrix::identity(n);
    let total = a.hs_norm();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || total == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let hpq = h[(p, q)];
                let g = hpq.norm();
                if g <= 1e-300 || g <= 1e-17 * (h[(p, p)].re.abs() + h[(q, q)].re.abs()) {
                    continue;
                }
                let (c, s) = rotation(h[(p, p)].re, h[(q, q)].re, g);
                let ph = (hpq / g).conj();
                // H <- H J, J = diag(1, ph) * [[c, s], [-s, c]]
                for k in 0..n {
                    let hp = h[(k, p)];
                    let hq = h[(k, q)] * ph;
                    h[(k, p)] = hp * c - hq * s;
                    h[(k, q)] = hp * s + hq * c;
                    let vp = v[(k, p)];
                    let vq = v[(k, q)] * ph;
                    v[(k, p)] = vp * c - vq * s;
                    v[(k, q)] = vp * s + vq * c;
                }
                // H <- J^* H
                let phc = ph.conj();
                for k in 0..n {
                    let hp = h[(p, k)];
                    let hq = h[(q, k)] * phc;
                    h[(p, k)] = hp * c - hq * s;
                    h[(q, k)] = hp * s + hq * c;
                }
                h[(p, q)] = C64::new(0.0, 0.0);
                h[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| h[(i, i)].re.total_cmp(&h[(j, j)].re));
    let values = order.iter().map(|&i| h[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Eigh { values, vectors }
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn psd_project(m: &CMatrix) -> Result<CMatrix> {
    let e = eigh(m)?;
    Ok(e.map_values(|x| x.max(0.0)))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.values.first().copied().unwrap_or(0.0))
}

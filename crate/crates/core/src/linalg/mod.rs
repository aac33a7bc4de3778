//! Dense complex linear algebra: matrices, tensors, decompositions and norms.

mod eigen;
mod matrix;
pub mod real;
mod svd;
mod tensor;

pub use eigen::{eigh, lambda_min, psd_project, Eigh, HERMITIAN_TOL};
pub use matrix::{CMatrix, C64};
pub(crate) use matrix::{ONE, ZERO};
pub use svd::{singular_values, svd, Svd, JACOBI_TOL};
pub use tensor::CTensor;

use rand::Rng;
use rand_distr::StandardNormal;

/// Largest singular value; 0 for an empty matrix.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Frobenius norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.hs_norm()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).iter().sum()
}

/// Square root of a positive semidefinite matrix; negative eigenvalues are
/// clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> crate::Result<CMatrix> {
    Ok(eigh(m)?.map_values(|x| x.max(0.0).sqrt()))
}

/// Matrix with independent standard complex Gaussian entries.
pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-ish random unitary from the polar factor of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    svd(&random_gaussian(n, n, rng)).polar_factor()
}

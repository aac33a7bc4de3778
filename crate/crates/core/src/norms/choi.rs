//! Linear maps between rectangular matrix spaces in coordinates.

use crate::error::{Error, Result};
use crate::linalg::{svd, CMatrix, C64};
use crate::schur::{gamma_apply, phi_apply, KernelTuple};
use crate::tensorrep::{to_factorization, ElementaryTensorSum};

/// A linear map `Φ: M_{p×q} → M_{p'×q'}` stored through its natural
/// matrix `L[(α,β),(i,j)] = Φ(E_ij)[α,β]` (row-major vectorization), i.e.
/// the coefficient 4-tensor of `Φ` in matrix-unit bases.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiForm {
    input: (usize, usize),
    output: (usize, usize),
    natural: CMatrix,
}

impl ChoiForm {
    pub fn from_natural(input: (usize, usize), output: (usize, usize), natural: CMatrix) -> Result<Self> {
        if natural.shape() != (output.0 * output.1, input.0 * input.1) {
            return Err(Error::DimensionMismatch(format!(
                "natural matrix is {}x{}, expected {}x{}",
                natural.rows(),
                natural.cols(),
                output.0 * output.1,
                input.0 * input.1
            )));
        }
        if !natural.is_finite() {
            return Err(Error::NonFinite("natural matrix".into()));
        }
        Ok(Self { input, output, natural })
    }

    /// Tabulates `f` on matrix units.
    pub fn from_fn(
        input: (usize, usize),
        output: (usize, usize),
        f: impl Fn(&CMatrix) -> Result<CMatrix>,
    ) -> Result<Self> {
        let (p, q) = input;
        let mut natural = CMatrix::zeros(output.0 * output.1, p * q);
        for i in 0..p {
            for j in 0..q {
                let y = f(&CMatrix::unit(p, q, i, j))?;
                if y.shape() != output {
                    return Err(Error::DimensionMismatch(format!(
                        "map output is {}x{}, expected {}x{}",
                        y.rows(),
                        y.cols(),
                        output.0,
                        output.1
                    )));
                }
                for (r, v) in y.as_slice().iter().enumerate() {
                    natural[(r, i * q + j)] = *v;
                }
            }
        }
        Self::from_natural(input, output, natural)
    }

    /// `x ↦ Σ_r b_r x a_r`.
    pub fn from_terms(terms: &[(CMatrix, CMatrix)]) -> Result<Self> {
        let Some((b0, a0)) = terms.first() else {
            return Err(Error::InvalidArgument("no terms".into()));
        };
        let input = (b0.cols(), a0.rows());
        let output = (b0.rows(), a0.cols());
        for (r, (b, a)) in terms.iter().enumerate() {
            if b.shape() != (output.0, input.0) || a.shape() != (input.1, output.1) {
                return Err(Error::DimensionMismatch(format!("term {r} has inconsistent shapes")));
            }
        }
        Self::from_fn(input, output, |x| {
            Ok(terms.iter().fold(CMatrix::zeros(output.0, output.1), |acc, (b, a)| acc + b.matmul(x).matmul(a)))
        })
    }

    pub fn identity(d: usize) -> Self {
        Self { input: (d, d), output: (d, d), natural: CMatrix::identity(d * d) }
    }

    /// `x ↦ x^T` on `M_k`.
    pub fn transposition(k: usize) -> Self {
        let natural = CMatrix::from_fn(k * k, k * k, |r, c| {
            let (a, b) = (r / k, r % k);
            let (i, j) = (c / k, c % k);
            if a == j && b == i {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { input: (k, k), output: (k, k), natural }
    }

    /// The map `Φ_φ` of an arity-2 multiplier on operators `T: H_1 → H_2`
    /// (`d_2 x d_1` matrices), whose kernel is `T^T`.
    pub fn of_multiplier(phi: &ElementaryTensorSum) -> Result<Self> {
        if phi.arity() != 2 {
            return Err(Error::InvalidArgument(format!("arity {} is not 2", phi.arity())));
        }
        let (d1, d2) = (phi.dims()[0], phi.dims()[1]);
        Self::from_fn((d2, d1), (d2, d1), |t| phi_apply(phi, &KernelTuple::new(vec![t.transpose()])?))
    }

    /// The elementary-operator map `T ↦ Σ_r a_r T b_r` of `u = Σ_r a_r ⊗ b_r`
    /// on `d_1 x d_2` matrices.
    pub fn of_tensor(u: &ElementaryTensorSum) -> Result<Self> {
        if u.arity() != 2 {
            return Err(Error::InvalidArgument(format!("arity {} is not 2", u.arity())));
        }
        let shape = (u.dims()[0], u.dims()[1]);
        let fac = to_factorization(u);
        Self::from_fn(shape, shape, |t| gamma_apply(&fac, std::slice::from_ref(t)))
    }

    pub fn input_shape(&self) -> (usize, usize) {
        self.input
    }

    pub fn output_shape(&self) -> (usize, usize) {
        self.output
    }

    pub fn natural(&self) -> &CMatrix {
        &self.natural
    }

    /// `Φ(E_ij)[α, β]`.
    pub fn coefficient(&self, alpha: usize, beta: usize, i: usize, j: usize) -> C64 {
        self.natural[(alpha * self.output.1 + beta, i * self.input.1 + j)]
    }

    pub fn is_zero(&self) -> bool {
        self.natural.max_abs() == 0.0
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.apply_amplified(x, 1)
    }

    /// `(id_m ⊗ Φ)(x)` for `x` an `m x m` block matrix with `p x q` blocks.
    pub fn apply_amplified(&self, x: &CMatrix, m: usize) -> Result<CMatrix> {
        let (p, q) = self.input;
        let (p2, q2) = self.output;
        if m == 0 || x.shape() != (m * p, m * q) {
            return Err(Error::DimensionMismatch(format!(
                "argument is {}x{}, expected {}x{}",
                x.rows(),
                x.cols(),
                m * p,
                m * q
            )));
        }
        // columns of `cols` are the vectorized blocks
        let cols = CMatrix::from_fn(p * q, m * m, |r, c| {
            let (s, t) = (c / m, c % m);
            x[(s * p + r / q, t * q + r % q)]
        });
        let img = self.natural.matmul(&cols);
        Ok(CMatrix::from_fn(m * p2, m * q2, |a, b| {
            let (s, t) = (a / p2, b / q2);
            img[((a % p2) * q2 + b % q2, s * m + t)]
        }))
    }

    /// The Hilbert-Schmidt adjoint `Φ^†`.
    pub fn adjoint(&self) -> Self {
        Self { input: self.output, output: self.input, natural: self.natural.adjoint() }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &ChoiForm) -> Result<Self> {
        if inner.output != self.input {
            return Err(Error::DimensionMismatch(format!(
                "composing a map on {:?} after one into {:?}",
                self.input, inner.output
            )));
        }
        Ok(Self { input: inner.input, output: self.output, natural: self.natural.matmul(&inner.natural) })
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { natural: self.natural.scale(s), ..self.clone() }
    }

    /// `Σ_ij E_ij ⊗ Φ(E_ij)`.
    pub fn choi_matrix(&self) -> CMatrix {
        let (p, q) = self.input;
        let (p2, q2) = self.output;
        CMatrix::from_fn(p * p2, q * q2, |r, c| {
            let (i, a) = (r / p2, r % p2);
            let (j, b) = (c / q2, c % q2);
            self.coefficient(a, b, i, j)
        })
    }

    /// A shortest representation `Φ(x) = Σ_r b_r x a_r`, from the singular
    /// value decomposition of the realigned natural matrix. The `b_r` are
    /// orthogonal, as are the `a_r`, with `‖b_r‖_2 = ‖a_r‖_2`.
    pub fn elementary_terms(&self) -> Vec<(CMatrix, CMatrix)> {
        let (p, q) = self.input;
        let (p2, q2) = self.output;
        // R[(α,i),(j,β)] = Φ(E_ij)[α,β]
        let realigned = CMatrix::from_fn(p2 * p, q * q2, |r, c| {
            let (a, i) = (r / p, r % p);
            let (j, b) = (c / q2, c % q2);
            self.coefficient(a, b, i, j)
        });
        let dec = svd(&realigned);
        let top = dec.s.first().copied().unwrap_or(0.0);
        let rank = dec.s.iter().take_while(|&&s| s > 1e-13 * top && s > 0.0).count();
        (0..rank)
            .map(|r| {
                let w = dec.s[r].sqrt();
                let b = CMatrix::from_fn(p2, p, |a, i| dec.u[(a * p + i, r)] * w);
                let a = CMatrix::from_fn(q, q2, |j, bb| dec.v[(j * q2 + bb, r)].conj() * w);
                (b, a)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::test_util::random_matrix;
    use crate::linalg::{op_norm, random_gaussian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_map(input: (usize, usize), output: (usize, usize), r: usize, seed: u64) -> (ChoiForm, Vec<(CMatrix, CMatrix)>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<_> = (0..r)
            .map(|_| (random_gaussian(output.0, input.0, &mut rng), random_gaussian(input.1, output.1, &mut rng)))
            .collect();
        (ChoiForm::from_terms(&terms).unwrap(), terms)
    }

    #[test]
    fn apply_matches_terms() {
        let (phi, terms) = random_map((2, 3), (4, 2), 3, 1);
        let x = random_matrix(2, 3, 2);
        let want = terms.iter().fold(CMatrix::zeros(4, 2), |acc, (b, a)| acc + b.matmul(&x).matmul(a));
        assert!((&phi.apply(&x).unwrap() - &want).hs_norm() < 1e-12);
        assert!(phi.apply(&random_matrix(3, 2, 3)).is_err());
    }

    #[test]
    fn amplified_apply_is_blockwise() {
        let (phi, _) = random_map((2, 3), (3, 2), 2, 4);
        let x = random_matrix(6, 9, 5);
        let y = phi.apply_amplified(&x, 3).unwrap();
        for s in 0..3 {
            for t in 0..3 {
                let blk = phi.apply(&x.block(2 * s, 3 * t, 2, 3)).unwrap();
                assert!((&y.block(3 * s, 2 * t, 3, 2) - &blk).hs_norm() < 1e-13);
            }
        }
    }

    #[test]
    fn adjoint_pairing() {
        let (phi, _) = random_map((3, 2), (2, 4), 3, 6);
        let x = random_matrix(3, 2, 7);
        let y = random_matrix(2, 4, 8);
        let lhs = y.inner(&phi.apply(&x).unwrap());
        let rhs = phi.adjoint().apply(&y).unwrap().inner(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn elementary_terms_reproduce_map_with_minimal_length() {
        let (phi, _) = random_map((3, 3), (2, 3), 2, 9);
        let terms = phi.elementary_terms();
        assert_eq!(terms.len(), 2);
        let back = ChoiForm::from_terms(&terms).unwrap();
        assert!((back.natural() - phi.natural()).hs_norm() < 1e-12);
        assert_eq!(ChoiForm::transposition(3).elementary_terms().len(), 9);
        assert_eq!(ChoiForm::identity(4).elementary_terms().len(), 1);
    }

    #[test]
    fn transposition_and_identity() {
        let x = random_matrix(3, 3, 10);
        assert_eq!(ChoiForm::transposition(3).apply(&x).unwrap(), x.transpose());
        assert_eq!(ChoiForm::identity(3).apply(&x).unwrap(), x);
        let t = ChoiForm::transposition(3);
        let tt = t.compose(&t).unwrap();
        assert_eq!(tt, ChoiForm::identity(3));
    }

    #[test]
    fn multiplier_map_of_transposition_symbol() {
        let phi = ElementaryTensorSum::transposition(3);
        assert_eq!(ChoiForm::of_multiplier(&phi).unwrap(), ChoiForm::transposition(3));
        let tr = ChoiForm::of_multiplier(&ElementaryTensorSum::matrix_unit_sum(3)).unwrap();
        let x = random_matrix(3, 3, 11);
        let y = tr.apply(&x).unwrap();
        assert!((&y - &CMatrix::identity(3).scale(x.trace())).hs_norm() < 1e-13);
    }

    #[test]
    fn tensor_map_is_elementary_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (a, b) = (random_gaussian(2, 2, &mut rng), random_gaussian(3, 3, &mut rng));
        let u = ElementaryTensorSum::elementary(vec![a.clone(), b.clone()]).unwrap();
        let map = ChoiForm::of_tensor(&u).unwrap();
        let t = random_matrix(2, 3, 13);
        assert!((&map.apply(&t).unwrap() - &a.matmul(&t).matmul(&b)).hs_norm() < 1e-12);
        // level-one norm of x ↦ b x a is at most ‖a‖‖b‖
        assert!(op_norm(&map.apply(&t).unwrap()) <= op_norm(&a) * op_norm(&b) * op_norm(&t) * (1.0 + 1e-12));
    }

    #[test]
    fn choi_matrix_of_identity_is_unnormalized_bell_projector() {
        let c = ChoiForm::identity(2).choi_matrix();
        let v = CMatrix::column(&[1.0, 0.0, 0.0, 1.0].map(|x| C64::new(x, 0.0)));
        assert_eq!(c, v.matmul(&v.adjoint()));
    }
}

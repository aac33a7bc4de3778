//! Multipliers as sums of elementary tensors, their symbols, block
//! factorizations, vector-functional pairings and slice maps.
//!
//! The opposite algebra of `M_d` is realized as transposition in the
//! standard basis, with `H ≅ H^d` given by coordinatewise conjugation.

use crate::error::{Error, Result};
use crate::linalg::{op_norm, CMatrix, CTensor, C64, ONE, ZERO};

/// `φ = Σ_r a_1^{(r)} ⊗ ··· ⊗ a_n^{(r)}` with `a_i^{(r)}` of size `d_i x d_i`.
///
/// An empty term list is the zero element.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryTensorSum {
    dims: Vec<usize>,
    terms: Vec<Vec<CMatrix>>,
}

impl ElementaryTensorSum {
    pub fn new(dims: Vec<usize>, terms: Vec<Vec<CMatrix>>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidArgument(format!("arity {} < 2", dims.len())));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("zero leg dimension".into()));
        }
        for (r, term) in terms.iter().enumerate() {
            if term.len() != dims.len() {
                return Err(Error::DimensionMismatch(format!(
                    "term {r} has {} factors, expected {}",
                    term.len(),
                    dims.len()
                )));
            }
            for (i, (a, &d)) in term.iter().zip(&dims).enumerate() {
                if a.shape() != (d, d) {
                    return Err(Error::DimensionMismatch(format!(
                        "term {r} factor {i} is {}x{}, expected {d}x{d}",
                        a.rows(),
                        a.cols()
                    )));
                }
            }
        }
        Ok(Self { dims, terms })
    }

    pub fn zero(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims, vec![])
    }

    /// A single elementary tensor.
    pub fn elementary(factors: Vec<CMatrix>) -> Result<Self> {
        let dims = factors.iter().map(|a| a.rows()).collect();
        Self::new(dims, vec![factors])
    }

    /// `Σ_{ij} e_ji ⊗ e_ij` on `M_k ⊗ M_k`: the multiplier whose map is the
    /// transposition `T ↦ T^T`.
    pub fn transposition(k: usize) -> Self {
        let mut terms = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                terms.push(vec![CMatrix::unit(k, k, j, i), CMatrix::unit(k, k, i, j)]);
            }
        }
        Self { dims: vec![k, k], terms }
    }

    /// `Σ_{ij} e_ij ⊗ e_ij` on `M_k ⊗ M_k`, whose map is `T ↦ Tr(T)·1`.
    pub fn matrix_unit_sum(k: usize) -> Self {
        let mut terms = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                terms.push(vec![CMatrix::unit(k, k, i, j), CMatrix::unit(k, k, i, j)]);
            }
        }
        Self { dims: vec![k, k], terms }
    }

    /// The diagonal-factor multiplier `Σ_x ψ(x) e_{x1 x1} ⊗ ··· ⊗ e_{xn xn}`
    /// of a Schur function `ψ`.
    pub fn from_schur(psi: &CTensor) -> Result<Self> {
        let dims = psi.dims().to_vec();
        let mut terms = Vec::new();
        let mut idx = vec![0; dims.len()];
        for &v in psi.as_slice() {
            if v != ZERO {
                let term = idx
                    .iter()
                    .zip(&dims)
                    .enumerate()
                    .map(|(i, (&x, &d))| {
                        let u = CMatrix::unit(d, d, x, x);
                        if i == 0 {
                            u.scale(v)
                        } else {
                            u
                        }
                    })
                    .collect();
                terms.push(term);
            }
            psi.advance(&mut idx);
        }
        Self::new(dims, terms)
    }

    /// For a sum of diagonal factors, the Schur function
    /// `ψ(x) = Σ_r Π_i a_i^{(r)}[x_i, x_i]`. `None` if some factor is not
    /// diagonal.
    pub fn schur_function(&self) -> Option<CTensor> {
        let diagonal = self.terms.iter().flatten().all(|a| {
            (0..a.rows()).all(|i| (0..a.cols()).all(|j| i == j || a[(i, j)] == ZERO))
        });
        if !diagonal {
            return None;
        }
        Some(CTensor::from_fn(self.dims.clone(), |x| {
            self.terms
                .iter()
                .map(|t| t.iter().zip(x).map(|(a, &xi)| a[(xi, xi)]).product::<C64>())
                .sum()
        }))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn terms(&self) -> &[Vec<CMatrix>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push_term(&mut self, factors: Vec<CMatrix>) -> Result<()> {
        let checked = Self::new(self.dims.clone(), vec![factors])?;
        self.terms.extend(checked.terms);
        Ok(())
    }

    /// Multiplies the first factor of every term by `s`.
    pub fn scale(&self, s: C64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t[0] = t[0].scale(s);
                t
            })
            .collect();
        Self { dims: self.dims.clone(), terms }
    }

    /// Concatenated term lists.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { dims: self.dims.clone(), terms })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Applies `f(leg, factor)` to every factor.
    pub fn map_factors(&self, f: impl Fn(usize, &CMatrix) -> CMatrix) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| t.iter().enumerate().map(|(i, a)| f(i, a)).collect())
            .collect();
        let dims = match self.terms.first() {
            Some(t) => t.iter().enumerate().map(|(i, a)| f(i, a).rows()).collect(),
            None => self.dims.clone(),
        };
        Self { dims, terms }
    }

    /// The full Kronecker matrix `Σ_r a_1 ⊗ ··· ⊗ a_n` of size `Π d_i`.
    pub fn kron_matrix(&self) -> CMatrix {
        let n: usize = self.dims.iter().product();
        let mut out = CMatrix::zeros(n, n);
        for t in &self.terms {
            let k = t[1..].iter().fold(t[0].clone(), |acc, a| acc.kron(a));
            out += &k;
        }
        out
    }

    /// `Σ_r Π_i ‖a_i^{(r)}‖`, the projective-style bound used for screening.
    pub fn projective_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.iter().map(op_norm).product::<f64>()).sum()
    }
}

/// Transposition `a ↦ a^T`: the matrix of `a^d` in the conjugate basis.
pub fn opposite(a: &CMatrix) -> Result<CMatrix> {
    a.check_square()?;
    Ok(a.transpose())
}

/// The symbol of a multiplier: legs reversed, every second slot (counting
/// from the left, starting with slot 2) in the opposite algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol {
    tensor: ElementaryTensorSum,
    opposite: Vec<bool>,
}

impl Symbol {
    pub fn tensor(&self) -> &ElementaryTensorSum {
        &self.tensor
    }

    pub fn into_tensor(self) -> ElementaryTensorSum {
        self.tensor
    }

    /// `opposite_slots()[s]` is true when slot `s` (0-based) carries a
    /// transposed factor.
    pub fn opposite_slots(&self) -> &[bool] {
        &self.opposite
    }

    /// Inverts [`symbol_of`].
    pub fn multiplier(&self) -> ElementaryTensorSum {
        let n = self.tensor.arity();
        let terms = self
            .tensor
            .terms
            .iter()
            .map(|t| {
                (0..n)
                    .map(|i| {
                        let s = n - 1 - i;
                        if self.opposite[s] {
                            t[s].transpose()
                        } else {
                            t[s].clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let dims = self.tensor.dims.iter().rev().copied().collect();
        ElementaryTensorSum { dims, terms }
    }
}

fn opposite_pattern(n: usize) -> Vec<bool> {
    (0..n).map(|s| s % 2 == 1).collect()
}

/// `a_1 ⊗ ··· ⊗ a_n ↦ a_n ⊗ a_{n-1}^o ⊗ a_{n-2} ⊗ ···`, ending in `a_1^o`
/// for even `n` and in `a_1` for odd `n`; extended linearly.
pub fn symbol_of(phi: &ElementaryTensorSum) -> Symbol {
    let n = phi.arity();
    let opposite = opposite_pattern(n);
    let terms = phi
        .terms
        .iter()
        .map(|t| {
            (0..n)
                .map(|s| {
                    let a = &t[n - 1 - s];
                    if opposite[s] {
                        a.transpose()
                    } else {
                        a.clone()
                    }
                })
                .collect()
        })
        .collect();
    let dims = phi.dims.iter().rev().copied().collect();
    Symbol { tensor: ElementaryTensorSum { dims, terms }, opposite }
}

/// Vector functional `ω_{ξ,η}(a) = (aξ, η) = η^* a ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFunctional {
    pub xi: Vec<C64>,
    pub eta: Vec<C64>,
}

impl VectorFunctional {
    pub fn new(xi: Vec<C64>, eta: Vec<C64>) -> Result<Self> {
        if xi.len() != eta.len() {
            return Err(Error::DimensionMismatch(format!(
                "functional vectors of length {} and {}",
                xi.len(),
                eta.len()
            )));
        }
        Ok(Self { xi, eta })
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn apply(&self, a: &CMatrix) -> Result<C64> {
        if a.shape() != (self.dim(), self.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "functional of dimension {} applied to {}x{} matrix",
                self.dim(),
                a.rows(),
                a.cols()
            )));
        }
        let ax = a.matvec(&self.xi);
        Ok(self.eta.iter().zip(&ax).map(|(e, v)| e.conj() * v).sum())
    }

    /// `ω̃ = ω_{η̄, ξ̄}`, which satisfies `ω̃(a^T) = ω(a)`.
    pub fn conjugated(&self) -> Self {
        Self {
            xi: self.eta.iter().map(|z| z.conj()).collect(),
            eta: self.xi.iter().map(|z| z.conj()).collect(),
        }
    }
}

/// `Σ_r Π_i f_i(a_i^{(r)})`.
pub fn eh_pair(u: &ElementaryTensorSum, fs: &[VectorFunctional]) -> Result<C64> {
    if fs.len() != u.arity() {
        return Err(Error::DimensionMismatch(format!(
            "{} functionals for arity {}",
            fs.len(),
            u.arity()
        )));
    }
    let mut total = ZERO;
    for t in &u.terms {
        let mut p = ONE;
        for (a, f) in t.iter().zip(fs) {
            p *= f.apply(a)?;
        }
        total += p;
    }
    if u.terms.is_empty() {
        for (&d, f) in u.dims.iter().zip(fs) {
            if d != f.dim() {
                return Err(Error::DimensionMismatch("functional dimension".into()));
            }
        }
    }
    Ok(total)
}

fn check_binary(u: &ElementaryTensorSum, leg: usize, w: &VectorFunctional) -> Result<()> {
    if u.arity() != 2 {
        return Err(Error::InvalidArgument(format!("slice of arity {} tensor", u.arity())));
    }
    if u.dims[leg] != w.dim() {
        return Err(Error::DimensionMismatch(format!(
            "functional of dimension {} on leg of dimension {}",
            w.dim(),
            u.dims[leg]
        )));
    }
    Ok(())
}

/// `L_ω(Σ v_r ⊗ w_r) = Σ ω(v_r) w_r`.
pub fn left_slice(u: &ElementaryTensorSum, w: &VectorFunctional) -> Result<CMatrix> {
    check_binary(u, 0, w)?;
    let d = u.dims[1];
    let mut out = CMatrix::zeros(d, d);
    for t in &u.terms {
        out += &t[1].scale(w.apply(&t[0])?);
    }
    Ok(out)
}

/// `R_ω(Σ v_r ⊗ w_r) = Σ ω(w_r) v_r`.
pub fn right_slice(u: &ElementaryTensorSum, w: &VectorFunctional) -> Result<CMatrix> {
    check_binary(u, 1, w)?;
    let d = u.dims[0];
    let mut out = CMatrix::zeros(d, d);
    for t in &u.terms {
        out += &t[0].scale(w.apply(&t[1])?);
    }
    Ok(out)
}

/// `u = A_1 ⊙ ··· ⊙ A_n`: `A_1` a `1 x J_1` block row, `A_i` a
/// `J_{i-1} x J_i` block matrix, `A_n` a `J_{n-1} x 1` block column, with
/// blocks of `A_i` in `M_{d_i}`. Each `A_i` is stored as one dense matrix of
/// size `J_{i-1} d_i x J_i d_i` (block index outer, matrix index inner).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockFactorization {
    dims: Vec<usize>,
    counts: Vec<usize>,
    factors: Vec<CMatrix>,
}

impl BlockFactorization {
    pub fn new(dims: Vec<usize>, factors: Vec<CMatrix>) -> Result<Self> {
        let n = dims.len();
        if n < 2 || factors.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} factors for {} legs",
                factors.len(),
                n
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("zero leg dimension".into()));
        }
        let mut counts = Vec::with_capacity(n - 1);
        for (i, (a, &d)) in factors.iter().zip(&dims).enumerate() {
            if a.rows() % d != 0 || a.cols() % d != 0 {
                return Err(Error::DimensionMismatch(format!(
                    "factor {i} of size {}x{} is not a block matrix over M_{d}",
                    a.rows(),
                    a.cols()
                )));
            }
            let (jr, jc) = (a.rows() / d, a.cols() / d);
            let expect_rows = if i == 0 { 1 } else { counts[i - 1] };
            if jr != expect_rows {
                return Err(Error::DimensionMismatch(format!(
                    "factor {i} has {jr} block rows, expected {expect_rows}"
                )));
            }
            if i + 1 < n {
                counts.push(jc);
            } else if jc != 1 {
                return Err(Error::DimensionMismatch(format!(
                    "last factor has {jc} block columns, expected 1"
                )));
            }
        }
        Ok(Self { dims, counts, factors })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    /// `J_1, …, J_{n-1}`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &CMatrix {
        &self.factors[i]
    }

    pub(crate) fn factors_mut(&mut self) -> &mut [CMatrix] {
        &mut self.factors
    }

    /// Block `(s, t)` of `A_i`.
    pub fn block(&self, i: usize, s: usize, t: usize) -> CMatrix {
        let d = self.dims[i];
        self.factors[i].block(s * d, t * d, d, d)
    }

    /// `‖A_1‖ ··· ‖A_n‖`.
    pub fn norm_bound(&self) -> f64 {
        self.factors.iter().map(op_norm).product()
    }
}

/// Canonical factorization with `J_i = r`: a row of first factors, diagonal
/// middles, a column of last factors.
pub fn to_factorization(phi: &ElementaryTensorSum) -> BlockFactorization {
    let n = phi.arity();
    let r = phi.len();
    let factors = (0..n)
        .map(|i| {
            let d = phi.dims[i];
            let (jr, jc) = match i {
                0 => (1, r),
                _ if i == n - 1 => (r, 1),
                _ => (r, r),
            };
            let mut m = CMatrix::zeros(jr * d, jc * d);
            for (k, t) in phi.terms.iter().enumerate() {
                let (s, c) = match i {
                    0 => (0, k),
                    _ if i == n - 1 => (k, 0),
                    _ => (k, k),
                };
                m.set_block(s * d, c * d, &t[i]);
            }
            m
        })
        .collect();
    BlockFactorization { dims: phi.dims.clone(), counts: vec![r; n - 1], factors }
}

/// `⟨A_1, f_1⟩ ··· ⟨A_n, f_n⟩` with `⟨A, f⟩ = (f(A_st))_{s,t}` scalar matrices.
pub fn factorization_pair(u: &BlockFactorization, fs: &[VectorFunctional]) -> Result<C64> {
    if fs.len() != u.arity() {
        return Err(Error::DimensionMismatch(format!(
            "{} functionals for arity {}",
            fs.len(),
            u.arity()
        )));
    }
    let mut acc = CMatrix::identity(1);
    for (i, f) in fs.iter().enumerate() {
        let d = u.dims[i];
        if f.dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "functional {i} has dimension {}, leg has {d}",
                f.dim()
            )));
        }
        let a = &u.factors[i];
        let (jr, jc) = (a.rows() / d, a.cols() / d);
        let mut scal = CMatrix::zeros(jr, jc);
        for s in 0..jr {
            for t in 0..jc {
                scal[(s, t)] = f.apply(&u.block(i, s, t))?;
            }
        }
        acc = acc.matmul(&scal);
    }
    Ok(acc[(0, 0)])
}

//! Small dense semidefinite programs over complex Hermitian block variables.
//!
//! Problems are stated as
//!
//! ```text
//! min  Σ_k Tr(C_k X_k)   s.t.  Σ_k Tr(A_ik X_k) = b_i,  Tr(X_k) ≤ t_k,  X_k ⪰ 0
//! ```
//!
//! and solved with a primal-dual interior point method on the real
//! embedding `H ↦ ½[[Re H, -Im H], [Im H, Re H]]`. Blocks whose data is
//! entirely real skip the embedding. A dual ADMM iteration takes over when the
//! Newton system breaks down.

mod ipm;
mod real;

use crate::error::{Error, Result};
use crate::linalg::real::RMatrix;
use crate::linalg::{CMatrix, C64};

use ipm::{RealStatus, Settings};
use real::{RCoeff, RealSdp};

/// Hermitian coefficient of a constraint on one block.
#[derive(Clone, Debug)]
pub enum Coeff {
    Dense(CMatrix),
    /// Upper-triangle entries `(i, j, v)` with `i ≤ j`; the entry `(j, i)` is
    /// `conj(v)`. Diagonal entries must be real.
    Sparse(Vec<(usize, usize, C64)>),
}

impl Coeff {
    fn is_real(&self) -> bool {
        match self {
            Coeff::Dense(m) => m.is_real(),
            Coeff::Sparse(e) => e.iter().all(|t| t.2.im == 0.0),
        }
    }

    fn to_dense(&self, n: usize) -> CMatrix {
        match self {
            Coeff::Dense(m) => m.clone(),
            Coeff::Sparse(e) => {
                let mut m = CMatrix::zeros(n, n);
                for &(i, j, v) in e {
                    m[(i, j)] += v;
                    if i != j {
                        m[(j, i)] += v.conj();
                    }
                }
                m
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Coeff::Dense(m) => {
                if m.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!(
                        "coefficient is {}x{}, block is {n}x{n}",
                        m.rows(),
                        m.cols()
                    )));
                }
                if !m.is_finite() {
                    return Err(Error::NonFinite("constraint coefficient".into()));
                }
                let d = m.hermitian_defect();
                if d > 1e-10 * m.max_abs().max(1.0) {
                    return Err(Error::NonHermitian(d));
                }
            }
            Coeff::Sparse(e) => {
                for &(i, j, v) in e {
                    if i > j || j >= n {
                        return Err(Error::InvalidArgument(format!(
                            "sparse entry ({i}, {j}) must satisfy i <= j < {n}"
                        )));
                    }
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::NonFinite("constraint coefficient".into()));
                    }
                    if i == j && v.im.abs() > 1e-12 * v.norm().max(1.0) {
                        return Err(Error::NonHermitian(v.im.abs()));
                    }
                }
            }
        }
        Ok(())
    }

    // Real symmetric form; `embed` selects the doubled real embedding.
    fn to_real(&self, n: usize, embed: bool) -> RCoeff {
        let mut out = Vec::new();
        let mut push = |i: usize, j: usize, v: C64| {
            if embed {
                let (re, im) = (0.5 * v.re, 0.5 * v.im);
                if i == j {
                    out.push((i, i, re));
                    out.push((n + i, n + i, re));
                } else {
                    for (a, b) in [(i, j), (j, i), (n + i, n + j), (n + j, n + i)] {
                        out.push((a, b, re));
                    }
                    out.push((i, n + j, -im));
                    out.push((n + j, i, -im));
                    out.push((j, n + i, im));
                    out.push((n + i, j, im));
                }
            } else if i == j {
                out.push((i, i, v.re));
            } else {
                out.push((i, j, v.re));
                out.push((j, i, v.re));
            }
        };
        match self {
            Coeff::Sparse(e) => {
                for &(i, j, v) in e {
                    if v != C64::new(0.0, 0.0) {
                        push(i, j, v);
                    }
                }
            }
            Coeff::Dense(m) => {
                for i in 0..n {
                    for j in i..n {
                        let v = if i == j {
                            C64::new(m[(i, i)].re, 0.0)
                        } else {
                            (m[(i, j)] + m[(j, i)].conj()) * 0.5
                        };
                        if v != C64::new(0.0, 0.0) {
                            push(i, j, v);
                        }
                    }
                }
            }
        }
        let dim = if embed { 2 * n } else { n };
        RCoeff::Sparse(out).normalize(dim)
    }
}

/// Affine equality `Σ_k Tr(A_k X_k) = rhs`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub terms: Vec<(usize, Coeff)>,
    pub rhs: f64,
}

/// Semidefinite program over Hermitian blocks.
#[derive(Clone, Debug)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    cost: Vec<Option<CMatrix>>,
    constraints: Vec<Constraint>,
    trace_bounds: Vec<(usize, f64)>,
}

impl SdpProblem {
    /// Problem with the given block sizes, zero cost and no constraints.
    pub fn new(blocks: Vec<usize>) -> Self {
        let cost = vec![None; blocks.len()];
        SdpProblem { blocks, cost, constraints: Vec::new(), trace_bounds: Vec::new() }
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_block(&self, k: usize) -> Result<usize> {
        self.blocks.get(k).copied().ok_or_else(|| {
            Error::InvalidArgument(format!("block {k} out of range ({} blocks)", self.blocks.len()))
        })
    }

    /// Sets the Hermitian cost of block `k`.
    pub fn set_cost(&mut self, k: usize, c: CMatrix) -> Result<()> {
        let n = self.check_block(k)?;
        Coeff::Dense(c.clone()).validate(n)?;
        self.cost[k] = Some(c);
        Ok(())
    }

    /// Adds `Σ Tr(A_k X_k) = rhs` and returns its index.
    pub fn add_constraint(&mut self, terms: Vec<(usize, Coeff)>, rhs: f64) -> Result<usize> {
        for (k, c) in &terms {
            let n = self.check_block(*k)?;
            c.validate(n)?;
        }
        if !rhs.is_finite() {
            return Err(Error::NonFinite("constraint right-hand side".into()));
        }
        self.constraints.push(Constraint { terms, rhs });
        Ok(self.constraints.len() - 1)
    }

    /// Adds `Tr(X_k) ≤ bound`.
    pub fn add_trace_bound(&mut self, k: usize, bound: f64) -> Result<()> {
        self.check_block(k)?;
        if !bound.is_finite() || bound < 0.0 {
            return Err(Error::InvalidArgument(format!("trace bound {bound} must be finite and nonnegative")));
        }
        self.trace_bounds.push((k, bound));
        Ok(())
    }

    fn block_is_real(&self, k: usize) -> bool {
        self.cost[k].as_ref().is_none_or(|c| c.is_real())
            && self
                .constraints
                .iter()
                .all(|c| c.terms.iter().all(|(b, a)| *b != k || a.is_real()))
    }

    fn to_real(&self) -> (RealSdp, Vec<bool>) {
        let embed: Vec<bool> = (0..self.blocks.len()).map(|k| !self.block_is_real(k)).collect();
        let mut blocks: Vec<usize> =
            self.blocks.iter().zip(&embed).map(|(&n, &e)| if e { 2 * n } else { n }).collect();
        let mut c: Vec<RMatrix> = Vec::with_capacity(blocks.len());
        for (k, &n) in self.blocks.iter().enumerate() {
            let mut m = RMatrix::zeros(blocks[k]);
            if let Some(ck) = &self.cost[k] {
                Coeff::Dense(ck.clone()).to_real(n, embed[k]).add_to(&mut m, 1.0);
            }
            c.push(m);
        }
        let mut a: Vec<Vec<(usize, RCoeff)>> = self
            .constraints
            .iter()
            .map(|con| {
                con.terms.iter().map(|(k, co)| (*k, co.to_real(self.blocks[*k], embed[*k]))).collect()
            })
            .collect();
        let mut b: Vec<f64> = self.constraints.iter().map(|c| c.rhs).collect();
        for &(k, t) in &self.trace_bounds {
            let n = self.blocks[k];
            let eye = Coeff::Sparse((0..n).map(|i| (i, i, C64::new(1.0, 0.0))).collect());
            let slack = blocks.len();
            blocks.push(1);
            c.push(RMatrix::zeros(1));
            a.push(vec![(k, eye.to_real(n, embed[k])), (slack, RCoeff::Sparse(vec![(0, 0, 1.0)]))]);
            b.push(t);
        }
        (RealSdp { blocks, c, a, b, gap_offset: 1.0 }, embed)
    }

    fn a_op(&self, x: &[CMatrix]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|con| {
                con.terms
                    .iter()
                    .map(|(k, c)| match c {
                        Coeff::Dense(a) => a.inner(&x[*k]).re,
                        Coeff::Sparse(e) => e
                            .iter()
                            .map(|&(i, j, v)| {
                                if i == j {
                                    v.re * x[*k][(i, i)].re
                                } else {
                                    2.0 * (v * x[*k][(j, i)]).re
                                }
                            })
                            .sum(),
                    })
                    .sum()
            })
            .collect()
    }
}

/// Termination status of [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    /// A Farkas certificate shows the constraints admit no PSD solution.
    Infeasible,
    /// A primal improving ray shows the objective is unbounded below.
    Unbounded,
}

/// Result of [`solve`], in the original scaling.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub primal: Vec<CMatrix>,
    /// Multipliers of the equality constraints, followed by those of the
    /// trace bounds.
    pub dual: Vec<f64>,
    /// Dual slack `C_k - Σ_i y_i A_ik` on each block.
    pub slack: Vec<CMatrix>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap `|p - d| / (1 + |p| + |d|)`.
    pub gap: f64,
    /// Largest absolute equality residual `|Σ Tr(A_ik X_k) - b_i|`.
    pub primal_residual: f64,
    pub iterations: usize,
    pub status: SdpStatus,
    pub used_fallback: bool,
}

impl SdpSolution {
    pub fn objective(&self) -> f64 {
        self.primal_objective
    }
}

/// Solver settings beyond the gap tolerance.
#[derive(Clone, Copy, Debug)]
pub struct SdpSettings {
    pub max_iter: usize,
    /// Relative feasibility target of the scaled problem.
    pub feas_tol: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings { max_iter: 500, feas_tol: 1e-10 }
    }
}

/// Solves `p` to relative duality gap `tol ∈ [1e-10, 1e-4]`.
pub fn solve(p: &SdpProblem, tol: f64) -> Result<SdpSolution> {
    solve_with(p, tol, &SdpSettings::default())
}

pub fn solve_with(p: &SdpProblem, tol: f64, settings: &SdpSettings) -> Result<SdpSolution> {
    if !(1e-10..=1e-4).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance {tol:e} outside [1e-10, 1e-4]")));
    }
    if p.blocks.contains(&0) {
        return Err(Error::InvalidArgument("empty SDP block".into()));
    }
    let (mut rp, embed) = p.to_real();
    let (rs, sc, sb) = rp.equilibrate();
    let s = Settings { max_iter: settings.max_iter, gap_tol: tol, feas_tol: settings.feas_tol.min(tol) };
    let mut out = ipm::interior_point(&rp, &s);
    let mut used_fallback = false;
    if out.status == RealStatus::Stalled {
        let iters = out.iterations;
        let fb = ipm::admm(&rp, out.it.clone(), &s);
        used_fallback = true;
        out = ipm::Outcome { iterations: iters + fb.iterations, ..fb };
    }

    let nb = p.blocks.len();
    let primal: Vec<CMatrix> = (0..nb)
        .map(|k| {
            let x = &out.it.x[k];
            let n = p.blocks[k];
            let m = if embed[k] {
                CMatrix::from_fn(n, n, |i, j| {
                    C64::new(
                        0.5 * (x.get(i, j) + x.get(n + i, n + j)),
                        0.5 * (x.get(n + i, j) - x.get(i, n + j)),
                    )
                })
            } else {
                CMatrix::from_fn(n, n, |i, j| C64::new(x.get(i, j), 0.0))
            };
            m.scale_re(sb)
        })
        .collect();
    let dual: Vec<f64> = out.it.y.iter().zip(&rs).map(|(y, r)| sc * r * y).collect();
    let mut slack: Vec<CMatrix> = (0..nb)
        .map(|k| p.cost[k].clone().unwrap_or_else(|| CMatrix::zeros(p.blocks[k], p.blocks[k])))
        .collect();
    for (con, &y) in p.constraints.iter().zip(&dual) {
        for (k, c) in &con.terms {
            slack[*k] -= &c.to_dense(p.blocks[*k]).scale_re(y);
        }
    }
    for (t, &(k, _)) in p.trace_bounds.iter().enumerate() {
        let y = dual[p.constraints.len() + t];
        slack[k] -= &CMatrix::identity(p.blocks[k]).scale_re(y);
    }
    let primal_objective: f64 =
        (0..nb).map(|k| p.cost[k].as_ref().map_or(0.0, |c| c.inner(&primal[k]).re)).sum();
    let dual_objective: f64 = p
        .constraints
        .iter()
        .map(|c| c.rhs)
        .chain(p.trace_bounds.iter().map(|t| t.1))
        .zip(&dual)
        .map(|(b, y)| b * y)
        .sum();
    let ax = p.a_op(&primal);
    let primal_residual =
        ax.iter().zip(&p.constraints).map(|(a, c)| (a - c.rhs).abs()).fold(0.0, f64::max);
    let gap = (primal_objective - dual_objective).abs()
        / (1.0 + primal_objective.abs() + dual_objective.abs());
    let status = match out.status {
        RealStatus::Optimal if gap <= tol * (1.0 + 1e-6) => SdpStatus::Optimal,
        RealStatus::Infeasible => SdpStatus::Infeasible,
        RealStatus::Unbounded => SdpStatus::Unbounded,
        _ => SdpStatus::MaxIter,
    };
    Ok(SdpSolution {
        primal,
        dual,
        slack,
        primal_objective,
        dual_objective,
        gap,
        primal_residual,
        iterations: out.iterations,
        status,
        used_fallback,
    })
}

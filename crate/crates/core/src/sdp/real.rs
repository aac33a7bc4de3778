//! Real block-diagonal semidefinite programs in standard form:
//!
//! ```text
//! min  Σ_k <C_k, X_k>   s.t.  Σ_k <A_ik, X_k> = b_i,  X_k ⪰ 0
//! max  b^T y            s.t.  C_k - Σ_i y_i A_ik = Z_k ⪰ 0
//! ```

use rayon::prelude::*;

use crate::linalg::real::RMatrix;

/// Symmetric coefficient of one constraint on one block.
#[derive(Clone, Debug)]
pub(crate) enum RCoeff {
    /// Entries `(i, j, v)` listing both triangles explicitly.
    Sparse(Vec<(usize, usize, f64)>),
    Dense(RMatrix),
}

impl RCoeff {
    pub fn dot(&self, x: &RMatrix) -> f64 {
        match self {
            RCoeff::Sparse(e) => e.iter().map(|&(i, j, v)| v * x.get(i, j)).sum(),
            RCoeff::Dense(a) => a.dot(x),
        }
    }

    pub fn add_to(&self, out: &mut RMatrix, s: f64) {
        match self {
            RCoeff::Sparse(e) => {
                for &(i, j, v) in e {
                    out.add_at(i, j, s * v);
                }
            }
            RCoeff::Dense(a) => out.axpy(s, a),
        }
    }

    pub fn frob_sq(&self) -> f64 {
        match self {
            RCoeff::Sparse(e) => e.iter().map(|&(_, _, v)| v * v).sum(),
            RCoeff::Dense(a) => a.dot(a),
        }
    }

    fn scale(&mut self, s: f64) {
        match self {
            RCoeff::Sparse(e) => e.iter_mut().for_each(|t| t.2 *= s),
            RCoeff::Dense(a) => a.scale(s),
        }
    }

    /// Chooses the dense form when the sparse one would be crowded.
    pub fn normalize(self, n: usize) -> Self {
        match self {
            RCoeff::Sparse(e) if e.len() > 2 * n + 8 => {
                let mut a = RMatrix::zeros(n);
                for (i, j, v) in e {
                    a.add_at(i, j, v);
                }
                RCoeff::Dense(a)
            }
            other => other,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RealSdp {
    pub blocks: Vec<usize>,
    pub c: Vec<RMatrix>,
    /// Per constraint, the nonzero `(block, coefficient)` pairs.
    pub a: Vec<Vec<(usize, RCoeff)>>,
    pub b: Vec<f64>,
    /// Constant in the relative gap `|p - d| / (offset + |p| + |d|)`; equal
    /// to one in the original scaling.
    pub gap_offset: f64,
}

impl RealSdp {
    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn a_op(&self, x: &[RMatrix]) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().map(|(k, c)| c.dot(&x[*k])).sum()).collect()
    }

    pub fn a_adj(&self, y: &[f64]) -> Vec<RMatrix> {
        let mut out: Vec<RMatrix> = self.blocks.iter().map(|&n| RMatrix::zeros(n)).collect();
        for (row, &yi) in self.a.iter().zip(y) {
            if yi != 0.0 {
                for (k, c) in row {
                    c.add_to(&mut out[*k], yi);
                }
            }
        }
        out
    }

    pub fn objective(&self, x: &[RMatrix]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c.dot(x)).sum()
    }

    /// Rescales rows to unit norm and the data to order one. Returns the row
    /// scales `r_i`, the cost scale `sc` and the right-hand-side scale `sb`:
    /// the scaled problem has `A_i r_i`, `b_i r_i / sb`, `C / sc`.
    pub fn equilibrate(&mut self) -> (Vec<f64>, f64, f64) {
        let mut rs = Vec::with_capacity(self.m());
        for (row, b) in self.a.iter_mut().zip(self.b.iter_mut()) {
            let nrm: f64 = row.iter().map(|(_, c)| c.frob_sq()).sum::<f64>().sqrt();
            let r = if nrm > 0.0 { 1.0 / nrm } else { 1.0 };
            for (_, c) in row.iter_mut() {
                c.scale(r);
            }
            *b *= r;
            rs.push(r);
        }
        let cn = self.c.iter().map(|c| c.dot(c)).sum::<f64>().sqrt();
        let sc = cn.max(1.0);
        for c in &mut self.c {
            c.scale(1.0 / sc);
        }
        let bn = self.b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sb = bn.max(1.0);
        for b in &mut self.b {
            *b /= sb;
        }
        self.gap_offset = 1.0 / (sc * sb);
        (rs, sc, sb)
    }

    /// Schur complement `M_ij = Σ_k Tr(A_ik G_k A_jk H_k)`.
    pub fn schur_complement(&self, g: &[RMatrix], h: &[RMatrix]) -> Vec<f64> {
        let m = self.m();
        let mut mat = vec![0.0; m * m];
        for (k, &n) in self.blocks.iter().enumerate() {
            let active: Vec<(usize, &RCoeff)> = self
                .a
                .iter()
                .enumerate()
                .filter_map(|(i, row)| row.iter().find(|(b, _)| *b == k).map(|(_, c)| (i, c)))
                .collect();
            if active.is_empty() || n == 0 {
                continue;
            }
            let (gk, hk) = (&g[k], &h[k]);
            // F = G A H for the dense coefficients
            let f: Vec<Option<RMatrix>> = active
                .par_iter()
                .map(|(_, c)| match c {
                    RCoeff::Dense(a) => Some(gk.matmul(a).matmul(hk)),
                    RCoeff::Sparse(_) => None,
                })
                .collect();
            let rows: Vec<Vec<f64>> = (0..active.len())
                .into_par_iter()
                .map(|p| {
                    let (_, ci) = active[p];
                    (p..active.len())
                        .map(|q| {
                            let (_, cj) = active[q];
                            if let Some(fj) = &f[q] {
                                trace_with(ci, fj)
                            } else if let Some(fi) = &f[p] {
                                trace_with(cj, fi)
                            } else {
                                sparse_pair(ci, cj, gk, hk)
                            }
                        })
                        .collect()
                })
                .collect();
            for (p, row) in rows.iter().enumerate() {
                let i = active[p].0;
                for (off, &v) in row.iter().enumerate() {
                    let j = active[p + off].0;
                    mat[i * m + j] += v;
                    if i != j {
                        mat[j * m + i] += v;
                    }
                }
            }
        }
        mat
    }
}

// Tr(A F) for symmetric A
fn trace_with(a: &RCoeff, f: &RMatrix) -> f64 {
    match a {
        RCoeff::Sparse(e) => e.iter().map(|&(i, j, v)| v * f.get(j, i)).sum(),
        RCoeff::Dense(a) => {
            let n = a.n;
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += a.data[i * n + j] * f.data[j * n + i];
                }
            }
            s
        }
    }
}

fn sparse_pair(ci: &RCoeff, cj: &RCoeff, g: &RMatrix, h: &RMatrix) -> f64 {
    let (RCoeff::Sparse(ei), RCoeff::Sparse(ej)) = (ci, cj) else {
        unreachable!("dense coefficients are handled through F")
    };
    let mut s = 0.0;
    for &(p, q, v) in ei {
        for &(a, b, w) in ej {
            s += v * w * g.get(q, a) * h.get(b, p);
        }
    }
    s
}

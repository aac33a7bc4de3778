//! Infeasible-start primal-dual interior point method (HKM direction with
//! Mehrotra predictor-corrector) and a dual ADMM fallback.

use crate::linalg::real::{cholesky, cholesky_solve, lower_inverse, spd_inverse, sym_eigen, sym_min_eigenvalue, RMatrix};

use super::real::RealSdp;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Settings {
    pub max_iter: usize,
    pub gap_tol: f64,
    pub feas_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RealStatus {
    Optimal,
    MaxIter,
    Infeasible,
    Unbounded,
    Stalled,
}

#[derive(Clone, Debug)]
pub(crate) struct Iterate {
    pub x: Vec<RMatrix>,
    pub y: Vec<f64>,
    pub z: Vec<RMatrix>,
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub it: Iterate,
    pub status: RealStatus,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Residuals {
    pub pobj: f64,
    pub dobj: f64,
    pub gap: f64,
    pub pinf: f64,
    pub dinf: f64,
}

impl Residuals {
    fn merit(&self) -> f64 {
        self.gap.max(self.pinf).max(self.dinf)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn blocks_norm(v: &[RMatrix]) -> f64 {
    v.iter().map(|m| m.dot(m)).sum::<f64>().sqrt()
}

pub(crate) fn residuals(p: &RealSdp, it: &Iterate) -> Residuals {
    let ax = p.a_op(&it.x);
    let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let aty = p.a_adj(&it.y);
    let mut rd = 0.0;
    for k in 0..p.blocks.len() {
        let mut r = p.c[k].clone();
        r.axpy(-1.0, &it.z[k]);
        r.axpy(-1.0, &aty[k]);
        rd += r.dot(&r);
    }
    let pobj = p.objective(&it.x);
    let dobj: f64 = p.b.iter().zip(&it.y).map(|(b, y)| b * y).sum();
    Residuals {
        pobj,
        dobj,
        gap: (pobj - dobj).abs() / (p.gap_offset + pobj.abs() + dobj.abs()),
        pinf: norm(&rp) / (1.0 + norm(&p.b)),
        dinf: rd.sqrt() / (1.0 + blocks_norm(&p.c)),
    }
}

fn initial_point(p: &RealSdp) -> Iterate {
    let nb = p.blocks.len();
    let mut anorm = vec![0.0f64; nb];
    let mut ratio = vec![0.0f64; nb];
    for (row, b) in p.a.iter().zip(&p.b) {
        for (k, c) in row {
            let f = c.frob_sq().sqrt();
            anorm[*k] = anorm[*k].max(f);
            ratio[*k] = ratio[*k].max((1.0 + b.abs()) / (1.0 + f));
        }
    }
    let mut x = Vec::with_capacity(nb);
    let mut z = Vec::with_capacity(nb);
    for (k, &n) in p.blocks.iter().enumerate() {
        let nf = n as f64;
        let xi = 10f64.max(nf.sqrt()).max(nf * ratio[k]);
        let eta = 10f64.max(nf.sqrt()).max(p.c[k].frob().max(anorm[k]));
        x.push(RMatrix::scaled_identity(n, xi));
        z.push(RMatrix::scaled_identity(n, eta));
    }
    Iterate { x, y: vec![0.0; p.m()], z }
}

// Largest alpha with X + alpha dX ⪰ 0, given the inverse Cholesky factor of X.
fn max_step(li: &RMatrix, dx: &RMatrix) -> f64 {
    let w = li.matmul(dx).matmul(&li.transpose());
    let lmin = sym_min_eigenvalue(&w);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn factor_schur(mut mat: Vec<f64>, m: usize) -> Option<RMatrix> {
    let maxdiag = (0..m).map(|i| mat[i * m + i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 0.0;
    for attempt in 0..6 {
        let mm = RMatrix { n: m, data: mat.clone() };
        if let Some(l) = cholesky(&mm) {
            return Some(l);
        }
        let next = maxdiag * 10f64.powi(-14 + 2 * attempt);
        for i in 0..m {
            mat[i * m + i] += next - reg;
        }
        reg = next;
    }
    None
}

struct Direction {
    dx: Vec<RMatrix>,
    dy: Vec<f64>,
    dz: Vec<RMatrix>,
}

#[allow(clippy::too_many_arguments)]
fn direction(
    p: &RealSdp,
    it: &Iterate,
    rp: &[f64],
    rd: &[RMatrix],
    zinv: &[RMatrix],
    lm: &RMatrix,
    sigma_mu: f64,
    corr: Option<&Direction>,
) -> Direction {
    let nb = p.blocks.len();
    let mut kmat = Vec::with_capacity(nb);
    let mut tmat = Vec::with_capacity(nb);
    for k in 0..nb {
        let mut kk = zinv[k].clone();
        kk.scale(sigma_mu);
        kk.axpy(-1.0, &it.x[k]);
        if let Some(c) = corr {
            let prod = c.dx[k].matmul(&c.dz[k]).matmul(&zinv[k]);
            kk.axpy(-1.0, &prod);
        }
        tmat.push(it.x[k].matmul(&rd[k]).matmul(&zinv[k]));
        kmat.push(kk);
    }
    let ak = p.a_op(&kmat);
    let at = p.a_op(&tmat);
    let mut dy: Vec<f64> = (0..p.m()).map(|i| rp[i] - ak[i] + at[i]).collect();
    cholesky_solve(lm, &mut dy);
    let aty = p.a_adj(&dy);
    let mut dz = Vec::with_capacity(nb);
    let mut dx = Vec::with_capacity(nb);
    for k in 0..nb {
        let mut z = rd[k].clone();
        z.axpy(-1.0, &aty[k]);
        let mut x = kmat[k].clone();
        x.axpy(-1.0, &it.x[k].matmul(&z).matmul(&zinv[k]));
        x.symmetrize();
        dz.push(z);
        dx.push(x);
    }
    Direction { dx, dy, dz }
}

pub(crate) fn interior_point(p: &RealSdp, s: &Settings) -> Outcome {
    let nb = p.blocks.len();
    let ntot: usize = p.blocks.iter().sum();
    let m = p.m();
    let mut it = initial_point(p);
    let mut best = (f64::INFINITY, it.clone());
    let mut stalls = 0;
    for iter in 0..s.max_iter {
        let res = residuals(p, &it);
        if res.merit() < best.0 {
            best = (res.merit(), it.clone());
        }
        if res.gap <= s.gap_tol && res.pinf <= s.feas_tol && res.dinf <= s.feas_tol {
            return Outcome { it, status: RealStatus::Optimal, iterations: iter };
        }
        if iter >= 3 {
            if let Some(st) = certificate(p, &it, &res) {
                return Outcome { it, status: st, iterations: iter };
            }
        }
        let ax = p.a_op(&it.x);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = p.a_adj(&it.y);
        let rd: Vec<RMatrix> = (0..nb)
            .map(|k| {
                let mut r = p.c[k].clone();
                r.axpy(-1.0, &it.z[k]);
                r.axpy(-1.0, &aty[k]);
                r
            })
            .collect();
        let mu: f64 = (0..nb).map(|k| it.x[k].dot(&it.z[k])).sum::<f64>() / ntot as f64;

        let mut zinv = Vec::with_capacity(nb);
        let mut lix = Vec::with_capacity(nb);
        let mut liz = Vec::with_capacity(nb);
        let mut ok = true;
        for k in 0..nb {
            match (cholesky(&it.z[k]), cholesky(&it.x[k])) {
                (Some(lz), Some(lx)) => {
                    zinv.push(spd_inverse(&lz));
                    liz.push(lower_inverse(&lz));
                    lix.push(lower_inverse(&lx));
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            return Outcome { it: best.1, status: RealStatus::Stalled, iterations: iter };
        }
        let mat = p.schur_complement(&it.x, &zinv);
        let Some(lm) = factor_schur(mat, m) else {
            return Outcome { it: best.1, status: RealStatus::Stalled, iterations: iter };
        };

        let pred = direction(p, &it, &rp, &rd, &zinv, &lm, 0.0, None);
        let (ap, ad) = steps(&lix, &liz, &pred);
        let ap = ap.min(1.0);
        let ad = ad.min(1.0);
        let mut mu_aff = 0.0;
        for k in 0..nb {
            let mut x = it.x[k].clone();
            x.axpy(ap, &pred.dx[k]);
            let mut z = it.z[k].clone();
            z.axpy(ad, &pred.dz[k]);
            mu_aff += x.dot(&z);
        }
        mu_aff /= ntot as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).max(0.0).powi(3).min(1.0) } else { 0.0 };
        let dir = direction(p, &it, &rp, &rd, &zinv, &lm, sigma * mu, Some(&pred));
        let (ap, ad) = steps(&lix, &liz, &dir);
        let gamma = 0.95;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        for k in 0..nb {
            it.x[k].axpy(ap, &dir.dx[k]);
            it.z[k].axpy(ad, &dir.dz[k]);
            it.x[k].symmetrize();
            it.z[k].symmetrize();
        }
        for (y, d) in it.y.iter_mut().zip(&dir.dy) {
            *y += ad * d;
        }
        if ap < 1e-8 && ad < 1e-8 {
            stalls += 1;
            if stalls >= 3 {
                return Outcome { it: best.1, status: RealStatus::Stalled, iterations: iter };
            }
        } else {
            stalls = 0;
        }
    }
    let res = residuals(p, &it);
    if res.merit() < best.0 {
        best = (res.merit(), it);
    }
    Outcome { it: best.1, status: RealStatus::MaxIter, iterations: s.max_iter }
}

fn steps(lix: &[RMatrix], liz: &[RMatrix], d: &Direction) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for k in 0..lix.len() {
        ap = ap.min(max_step(&lix[k], &d.dx[k]));
        ad = ad.min(max_step(&liz[k], &d.dz[k]));
    }
    (ap, ad)
}

// Farkas-type rays: a normalized dual ray proves primal infeasibility, a
// normalized primal ray proves dual infeasibility.
fn certificate(p: &RealSdp, it: &Iterate, res: &Residuals) -> Option<RealStatus> {
    if res.dobj > 1e3 {
        let yh: Vec<f64> = it.y.iter().map(|y| -y / res.dobj).collect();
        let s = p.a_adj(&yh);
        if s.iter().all(|b| b.n == 0 || sym_min_eigenvalue(b) >= -1e-9) {
            return Some(RealStatus::Infeasible);
        }
    }
    if res.pobj < -1e3 {
        let xh: Vec<RMatrix> = it
            .x
            .iter()
            .map(|x| {
                let mut x = x.clone();
                x.scale(-1.0 / res.pobj);
                x
            })
            .collect();
        if norm(&p.a_op(&xh)) <= 1e-9 {
            return Some(RealStatus::Unbounded);
        }
    }
    None
}

/// Dual ADMM (Wen, Goldfarb and Yin) warm-started from `start`.
pub(crate) fn admm(p: &RealSdp, start: Iterate, s: &Settings) -> Outcome {
    let nb = p.blocks.len();
    let m = p.m();
    let eye: Vec<RMatrix> = p.blocks.iter().map(|&n| RMatrix::identity(n)).collect();
    let gram = p.schur_complement(&eye, &eye);
    let Some(lg) = factor_schur(gram, m) else {
        return Outcome { it: start, status: RealStatus::Stalled, iterations: 0 };
    };
    let mut it = start;
    let mut mu = 1.0;
    let iters = s.max_iter * 20;
    for iter in 0..iters {
        // y = (A A^*)^{-1} (mu (b - A X) - A(S - C))
        let ax = p.a_op(&it.x);
        let smc: Vec<RMatrix> = (0..nb)
            .map(|k| {
                let mut t = it.z[k].clone();
                t.axpy(-1.0, &p.c[k]);
                t
            })
            .collect();
        let asmc = p.a_op(&smc);
        let mut y: Vec<f64> = (0..m).map(|i| mu * (p.b[i] - ax[i]) - asmc[i]).collect();
        cholesky_solve(&lg, &mut y);
        let aty = p.a_adj(&y);
        for k in 0..nb {
            let mut v = p.c[k].clone();
            v.axpy(-1.0, &aty[k]);
            v.axpy(-mu, &it.x[k]);
            let (vals, vecs) = sym_eigen(&v);
            let n = v.n;
            let mut sp = RMatrix::zeros(n);
            let mut xn = RMatrix::zeros(n);
            for (j, &lam) in vals.iter().enumerate() {
                let (target, w) = if lam > 0.0 { (&mut sp, lam) } else { (&mut xn, -lam / mu) };
                for a in 0..n {
                    let va = vecs.get(a, j) * w;
                    if va == 0.0 {
                        continue;
                    }
                    for b in 0..n {
                        target.add_at(a, b, va * vecs.get(b, j));
                    }
                }
            }
            it.z[k] = sp;
            it.x[k] = xn;
        }
        it.y = y;
        if iter % 25 == 0 || iter + 1 == iters {
            let res = residuals(p, &it);
            if res.gap <= s.gap_tol && res.pinf <= s.feas_tol && res.dinf <= s.feas_tol {
                return Outcome { it, status: RealStatus::Optimal, iterations: iter };
            }
            if res.pinf > 10.0 * res.dinf {
                mu = (mu * 1.6).min(1e6);
            } else if res.dinf > 10.0 * res.pinf {
                mu = (mu / 1.6).max(1e-6);
            }
        }
    }
    Outcome { it, status: RealStatus::MaxIter, iterations: iters }
}

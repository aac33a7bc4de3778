//! Truncation diagnostics for compactness of multipliers.
//!
//! A multiplier is cut down to the leading coordinate corner of its first and
//! last legs, and the norm of what is left over is bracketed along an
//! increasing schedule of cutoffs. Verdicts are evidence drawn from fixed
//! thresholds on certified brackets, not proofs.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CTensor, C64, ZERO};
use crate::norms::{cb_lower_amplification, multiplier_lower_amplification, multiplier_norm, schur_norm};
use crate::norms::{ChoiForm, NormBracket, NormOptions};
use crate::tensorrep::ElementaryTensorSum;

/// Tolerance of the projection checks in [`corner_multiplier`].
pub const PROJECTION_TOL: f64 = 1e-12;

/// Lower tail bounds must stay above `NONCOMPACT_FLOOR · tol` over the last
/// half of the schedule for [`Verdict::NonCompactEvidence`].
pub const NONCOMPACT_FLOOR: f64 = 10.0;

/// Upper tail bounds at or below `DECAY_STALL · (first upper bound)` are
/// roundoff and are left out of the decay fit.
pub const DECAY_STALL: f64 = 1e-13;

/// Strictly increasing cutoffs `r_1 < ··· < r_K` with `r_K ≤` the ambient
/// dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationSchedule {
    cutoffs: Vec<usize>,
}

impl TruncationSchedule {
    pub fn new(cutoffs: Vec<usize>, ambient: usize) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidArgument("empty truncation schedule".into()));
        }
        if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("schedule {cutoffs:?} is not strictly increasing")));
        }
        let last = *cutoffs.last().expect("nonempty");
        if last > ambient {
            return Err(Error::InvalidArgument(format!("cutoff {last} exceeds ambient dimension {ambient}")));
        }
        Ok(Self { cutoffs })
    }

    /// `1, 2, …, ambient - 1`.
    pub fn exhaustive(ambient: usize) -> Result<Self> {
        Self::new((1..ambient).collect(), ambient)
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn len(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cutoffs.is_empty()
    }
}

/// Outcome of a tail-norm profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The last tail upper bound is at or below the tolerance.
    CompactEvidence,
    /// Every tail lower bound in the last half of the schedule is at least
    /// `NONCOMPACT_FLOOR · tol`.
    NonCompactEvidence,
    Inconclusive,
}

/// Tail brackets along a schedule with a verdict and a decay fit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub schedule: TruncationSchedule,
    pub tails: Vec<NormBracket>,
    pub verdict: Verdict,
    /// `-slope` of the least-squares line through `(r, ln upper_r)`; `None`
    /// with fewer than four usable points.
    pub decay_exponent: Option<f64>,
}

/// Input of [`tail_norm_profile`].
#[derive(Clone, Debug)]
pub enum MultiplierData {
    /// A Schur function on a product of index sets.
    Schur(CTensor),
    Tensor(ElementaryTensorSum),
}

impl MultiplierData {
    /// Largest of the first and last leg dimensions.
    pub fn ambient(&self) -> usize {
        let dims = match self {
            MultiplierData::Schur(t) => t.dims(),
            MultiplierData::Tensor(t) => t.dims(),
        };
        dims[0].max(dims[dims.len() - 1])
    }
}

fn check_projection(p: &CMatrix, d: usize, name: &'static str) -> Result<()> {
    if p.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!("{name} is {}x{}, leg is {d}x{d}", p.rows(), p.cols())));
    }
    let idem = (&p.matmul(p) - p).max_abs();
    if p.hermitian_defect() > PROJECTION_TOL || idem > PROJECTION_TOL {
        return Err(Error::NotProjection(name));
    }
    Ok(())
}

/// Compresses `φ` so that `Φ_ψ(T) = q Φ_φ(T) p^T` for even arity and
/// `q Φ_φ(T) p` for odd arity.
///
/// The last factor of each term becomes `q a_n`. The first factor becomes
/// `p a_1` for even arity, where it enters transposed, and `a_1 p` for odd
/// arity.
pub fn corner_multiplier(phi: &ElementaryTensorSum, p: &CMatrix, q: &CMatrix) -> Result<ElementaryTensorSum> {
    let dims = phi.dims();
    let n = dims.len();
    check_projection(p, dims[0], "p")?;
    check_projection(q, dims[n - 1], "q")?;
    let even = n.is_multiple_of(2);
    Ok(phi.map_factors(|i, a| {
        let a = if i == 0 {
            if even {
                p.matmul(a)
            } else {
                a.matmul(p)
            }
        } else {
            a.clone()
        };
        if i == n - 1 {
            q.matmul(&a)
        } else {
            a
        }
    }))
}

/// Projection onto the first `r` coordinates of `C^d`.
pub fn coordinate_projection(d: usize, r: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == j && i < r { C64::new(1.0, 0.0) } else { ZERO })
}

fn complement(d: usize, r: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| if i == j && i >= r { C64::new(1.0, 0.0) } else { ZERO })
}

/// `φ - φ_r` for the leading-`r` coordinate corner `φ_r`, formed without
/// cancellation as `(p^⊥, 1) φ + (p, q^⊥) φ`; terms with a zero factor are
/// dropped, so a multiplier supported in the corner has an exactly zero
/// tail.
pub fn truncation_tail(phi: &ElementaryTensorSum, r: usize) -> ElementaryTensorSum {
    let dims = phi.dims();
    let (d1, dn) = (dims[0], dims[dims.len() - 1]);
    let exact = "coordinate projections are exact";
    let outer = corner_multiplier(phi, &complement(d1, r), &CMatrix::identity(dn)).expect(exact);
    let inner = corner_multiplier(phi, &coordinate_projection(d1, r), &complement(dn, r)).expect(exact);
    let terms = outer
        .terms()
        .iter()
        .chain(inner.terms())
        .filter(|t| t.iter().all(|a| a.max_abs() > 0.0))
        .cloned()
        .collect();
    ElementaryTensorSum::new(dims.to_vec(), terms).expect("same legs as the input")
}

// A solver failure still carries a valid, if loose, bracket.
fn salvage(r: Result<NormBracket>) -> Result<NormBracket> {
    match r {
        Err(Error::SolverFailed { bracket, .. }) => Ok(bracket),
        other => other,
    }
}

fn tensor_tail(phi: &ElementaryTensorSum, r: usize, opts: &NormOptions) -> Result<NormBracket> {
    salvage(multiplier_norm(&truncation_tail(phi, r), opts))
}

fn schur_tail(phi: &CTensor, r: usize, opts: &NormOptions) -> Result<NormBracket> {
    let n = phi.arity();
    let tail = CTensor::from_fn(phi.dims().to_vec(), |x| {
        if x[0] < r && x[n - 1] < r {
            ZERO
        } else {
            phi[x]
        }
    });
    if n == 2 {
        salvage(schur_norm(&tail, opts).map(|s| s.bracket))
    } else {
        salvage(multiplier_norm(&ElementaryTensorSum::from_schur(&tail)?, opts))
    }
}

/// `‖φ - φ_r‖_m` for each cutoff, where `φ_r` is the compression of `φ` to
/// the leading `r` coordinates of its first and last legs.
pub fn finite_rank_approx(
    phi: &ElementaryTensorSum,
    schedule: &TruncationSchedule,
    opts: &NormOptions,
) -> Result<Vec<(usize, NormBracket)>> {
    check_ambient(schedule, phi.dims()[0].max(phi.dims()[phi.arity() - 1]))?;
    schedule
        .cutoffs()
        .par_iter()
        .map(|&r| tensor_tail(phi, r, opts).map(|b| (r, b)))
        .collect()
}

fn check_ambient(schedule: &TruncationSchedule, ambient: usize) -> Result<()> {
    match schedule.cutoffs().last() {
        Some(&r) if r > ambient => {
            Err(Error::InvalidArgument(format!("cutoff {r} exceeds ambient dimension {ambient}")))
        }
        _ => Ok(()),
    }
}

/// Tail brackets of `φ` along `schedule` with a verdict.
pub fn tail_norm_profile(
    phi: &MultiplierData,
    schedule: &TruncationSchedule,
    opts: &NormOptions,
) -> Result<CompactnessReport> {
    check_ambient(schedule, phi.ambient())?;
    let tails: Vec<NormBracket> = schedule
        .cutoffs()
        .par_iter()
        .map(|&r| match phi {
            MultiplierData::Schur(t) => schur_tail(t, r, opts),
            MultiplierData::Tensor(t) => tensor_tail(t, r, opts),
        })
        .collect::<Result<_>>()?;
    let verdict = verdict(&tails, opts.tol);
    let decay_exponent = decay_fit(schedule.cutoffs(), &tails);
    Ok(CompactnessReport { schedule: schedule.clone(), tails, verdict, decay_exponent })
}

fn verdict(tails: &[NormBracket], tol: f64) -> Verdict {
    let Some(last) = tails.last() else {
        return Verdict::Inconclusive;
    };
    if last.upper <= tol {
        return Verdict::CompactEvidence;
    }
    let half = &tails[tails.len() / 2..];
    if half.iter().all(|b| b.lower >= NONCOMPACT_FLOOR * tol) {
        Verdict::NonCompactEvidence
    } else {
        Verdict::Inconclusive
    }
}

fn decay_fit(cutoffs: &[usize], tails: &[NormBracket]) -> Option<f64> {
    let first = tails.first()?.upper;
    let pts: Vec<(f64, f64)> = cutoffs
        .iter()
        .zip(tails)
        .filter(|(_, b)| b.upper > DECAY_STALL * first && b.upper > 0.0)
        .map(|(&r, b)| (r as f64, b.upper.ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(-sxy / sxx)
}

/// Restarts used by [`cc_vs_c_gap_ratio`].
pub const GAP_RATIO_RESTARTS: usize = 25;

/// Ratio of the best amplification value over levels `1..=m` to the best
/// level-1 value. At least 1; equal to 1 for the zero multiplier.
pub fn cc_vs_c_gap_ratio(phi: &ElementaryTensorSum, m: usize) -> f64 {
    let m = m.max(1);
    let (top, base) = if phi.arity() == 2 {
        let Ok(map) = ChoiForm::of_multiplier(phi) else {
            return 1.0;
        };
        let base = cb_lower_amplification(&map, 1, GAP_RATIO_RESTARTS, 0);
        (cb_lower_amplification(&map, m, GAP_RATIO_RESTARTS, 0), base)
    } else {
        let vals: Vec<f64> =
            (1..=m).map(|l| multiplier_lower_amplification(phi, l, GAP_RATIO_RESTARTS, 0)).collect();
        (vals.iter().copied().fold(0.0, f64::max), vals[0])
    };
    if base == 0.0 {
        return 1.0;
    }
    (top / base).max(1.0)
}

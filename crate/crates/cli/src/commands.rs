//! The four subcommands.

use opmult::{
    build_saar, multiplier_norm, phi_apply, saar_compactness_profile, saar_obstruction, schur_apply_nd, schur_norm,
    tail_norm_profile, CMatrix, ElementaryTensorSum, Error, KernelTuple, Method, MultiplierData, NormBracket,
    NormOptions, TruncationSchedule, Verdict,
};
use serde_json::{json, Value};

use crate::report::{fmt_num, json_num, Report};
use crate::{CliError, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_SOLVER};

/// A report with the exit code it implies.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

fn method(m: Method) -> String {
    serde_json::to_value(m).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn bracket_json(b: &NormBracket) -> Value {
    json!({
        "lower": json_num(b.lower),
        "upper": json_num(b.upper),
        "lower_method": method(b.lower_method),
        "upper_method": method(b.upper_method),
        "relative_width": json_num(b.relative_width()),
    })
}

fn dims_of(data: &MultiplierData) -> Vec<usize> {
    match data {
        MultiplierData::Schur(t) => t.dims().to_vec(),
        MultiplierData::Tensor(s) => s.dims().to_vec(),
    }
}

fn kind_of(data: &MultiplierData) -> &'static str {
    match data {
        MultiplierData::Schur(_) => "schur",
        MultiplierData::Tensor(_) => "tensor_sum",
    }
}

fn input_error(e: Error) -> CliError {
    CliError::Input(e.to_string())
}

/// Bracket on the multiplier norm: the Schur norm for two-leg Schur data,
/// the multiplier norm otherwise.
pub fn cmd_norm(data: &MultiplierData, opts: &NormOptions) -> Result<Outcome, CliError> {
    let result = match data {
        MultiplierData::Schur(t) if t.arity() == 2 => schur_norm(t, opts).map(|s| s.bracket),
        MultiplierData::Schur(t) => ElementaryTensorSum::from_schur(t).and_then(|s| multiplier_norm(&s, opts)),
        MultiplierData::Tensor(s) => multiplier_norm(s, opts),
    };
    let (bracket, status, code, reason) = match result {
        Ok(b) if b.is_tight() => (b, "tight", EXIT_OK, None),
        Ok(b) => (b, "inconclusive", EXIT_INCONCLUSIVE, None),
        Err(Error::SolverFailed { reason, bracket }) => (bracket, "solver_failed", EXIT_SOLVER, Some(reason)),
        Err(e) => return Err(input_error(e)),
    };
    let rows = vec![vec![
        fmt_num(bracket.lower),
        fmt_num(bracket.upper),
        method(bracket.lower_method),
        method(bracket.upper_method),
        fmt_num(bracket.relative_width()),
    ]];
    let mut summary = json!({
        "command": "norm",
        "kind": kind_of(data),
        "dims": dims_of(data),
        "tol": json_num(opts.tol),
        "seed": opts.seed,
        "status": status,
        "bracket": bracket_json(&bracket),
    });
    if let Some(r) = reason {
        summary["reason"] = Value::String(r);
    }
    let header = vec!["lower", "upper", "lower_method", "upper_method", "relative_width"];
    Ok(Outcome { report: Report { header, rows, summary }, code })
}

/// The multiplier applied to a kernel tuple.
///
/// Tensor sums use `Φ_φ`, whose output is `d_n x d_1`; Schur data uses the
/// entrywise action, whose output is `d_1 x d_n`.
pub fn cmd_apply(data: &MultiplierData, ks: &KernelTuple) -> Result<Outcome, CliError> {
    let out: CMatrix = match data {
        MultiplierData::Schur(t) => schur_apply_nd(t, ks),
        MultiplierData::Tensor(s) => phi_apply(s, ks),
    }
    .map_err(input_error)?;
    let mut rows = Vec::with_capacity(out.rows() * out.cols());
    for i in 0..out.rows() {
        for j in 0..out.cols() {
            let z = out[(i, j)];
            rows.push(vec![i.to_string(), j.to_string(), fmt_num(z.re), fmt_num(z.im)]);
        }
    }
    let summary = json!({
        "command": "apply",
        "kind": kind_of(data),
        "dims": dims_of(data),
        "rows": out.rows(),
        "cols": out.cols(),
        "op_norm": json_num(opmult::op_norm(&out)),
        "hs_norm": json_num(opmult::hs_norm(&out)),
        "matrix": crate::io::matrix_value(&CMatrix::from_fn(out.rows(), out.cols(), |i, j| round_entry(out[(i, j)]))),
    });
    Ok(Outcome { report: Report { header: vec!["row", "col", "re", "im"], rows, summary }, code: EXIT_OK })
}

fn round_entry(z: opmult::C64) -> opmult::C64 {
    let r = |x: f64| fmt_num(x).parse().unwrap_or(x);
    opmult::C64::new(r(z.re), r(z.im))
}

/// Parses `r1,r2,...`.
pub fn parse_schedule(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|_| CliError::Input(format!("schedule: '{s}' is not a cutoff")))
        })
        .collect()
}

/// Tail-norm profile along a schedule; all cutoffs `1..ambient` by default.
pub fn cmd_compact_test(
    data: &MultiplierData,
    schedule: Option<Vec<usize>>,
    opts: &NormOptions,
) -> Result<Outcome, CliError> {
    let ambient = data.ambient();
    let schedule = match schedule {
        Some(c) => TruncationSchedule::new(c, ambient),
        None => TruncationSchedule::exhaustive(ambient),
    }
    .map_err(|e| CliError::Input(format!("schedule: {e}")))?;
    let rep = tail_norm_profile(data, &schedule, opts).map_err(input_error)?;
    let rows = schedule
        .cutoffs()
        .iter()
        .zip(&rep.tails)
        .map(|(r, b)| vec![r.to_string(), fmt_num(b.lower), fmt_num(b.upper)])
        .collect();
    let verdict = serde_json::to_value(rep.verdict).unwrap_or(Value::Null);
    let summary = json!({
        "command": "compact-test",
        "kind": kind_of(data),
        "dims": dims_of(data),
        "tol": json_num(opts.tol),
        "seed": opts.seed,
        "schedule": schedule.cutoffs(),
        "verdict": verdict,
        "decay_exponent": rep.decay_exponent.map_or(Value::Null, json_num),
    });
    let code = if rep.verdict == Verdict::Inconclusive { EXIT_INCONCLUSIVE } else { EXIT_OK };
    Ok(Outcome { report: Report { header: vec!["cutoff", "tail_lower", "tail_upper"], rows, summary }, code })
}

/// Per-block certificates and the tail profile of the block-transposition
/// map with `max_block` blocks.
pub fn cmd_saar(max_block: usize, opts: &NormOptions) -> Result<Outcome, CliError> {
    let s = match build_saar(max_block, opts) {
        Ok(s) => s,
        Err(Error::InvalidArgument(m)) => return Err(CliError::Input(format!("max-block: {m}"))),
        Err(e) => {
            let summary = json!({"command": "saar-demo", "max_block": max_block, "status": "solver_failed", "reason": e.to_string()});
            let report = Report { header: SAAR_HEADER.to_vec(), rows: vec![], summary };
            return Ok(Outcome { report, code: EXIT_SOLVER });
        }
    };
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    let mut all_tight = true;
    for b in &s.blocks {
        let cert = saar_obstruction(&s, b.k).map_err(input_error)?;
        all_tight &= b.cb.is_tight();
        rows.push(vec![
            "block".into(),
            b.k.to_string(),
            fmt_num(b.level1_norm),
            fmt_num(b.cb.lower),
            fmt_num(b.cb.upper),
            fmt_num(cert.bound),
            String::new(),
        ]);
        blocks.push(json!({
            "k": b.k,
            "level1_norm": json_num(b.level1_norm),
            "hs_norm": json_num(b.hs_norm),
            "cb": bracket_json(&b.cb),
            "obstruction_bound": json_num(cert.bound),
        }));
    }
    let profile = saar_compactness_profile(&s);
    for &(n, t) in &profile {
        rows.push(vec!["tail".into(), n.to_string(), String::new(), String::new(), String::new(), String::new(), fmt_num(t)]);
    }
    let summary = json!({
        "command": "saar-demo",
        "max_block": max_block,
        "tol": json_num(opts.tol),
        "seed": opts.seed,
        "status": if all_tight { "tight" } else { "inconclusive" },
        "blocks": blocks,
        "tail_profile": profile.iter().map(|&(n, t)| json!({"n": n, "tail_norm": json_num(t)})).collect::<Vec<_>>(),
    });
    let code = if all_tight { EXIT_OK } else { EXIT_INCONCLUSIVE };
    Ok(Outcome { report: Report { header: SAAR_HEADER.to_vec(), rows, summary }, code })
}

const SAAR_HEADER: [&str; 7] = ["row", "k", "level1_norm", "cb_lower", "cb_upper", "obstruction_bound", "tail_norm"];

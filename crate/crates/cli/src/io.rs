//! JSON input files: multipliers and kernel tuples.
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.
//! A Schur multiplier is a nested array of depth `dims.len()`; a tensor sum
//! is a list of terms, each a list of square factors.

use opmult::{CMatrix, CTensor, ElementaryTensorSum, KernelTuple, MultiplierData, C64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// On-disk form of a multiplier.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MultiplierFile {
    Schur { dims: Vec<usize>, values: Value },
    TensorSum { dims: Vec<usize>, terms: Vec<TermFile> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub factors: Vec<Value>,
}

/// On-disk form of a kernel tuple `T_1, …, T_{n-1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    pub kernels: Vec<Value>,
}

fn input_err(field: &str, what: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{field}: {what}"))
}

fn parse_complex(v: &Value, field: &str) -> Result<C64, CliError> {
    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| input_err(field, "expected [re, im]"))?;
    let part = |x: &Value| {
        x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| input_err(field, "expected a finite number"))
    };
    Ok(C64::new(part(&pair[0])?, part(&pair[1])?))
}

fn parse_matrix(v: &Value, field: &str) -> Result<CMatrix, CliError> {
    let rows = v.as_array().ok_or_else(|| input_err(field, "expected an array of rows"))?;
    let ncols = rows.first().and_then(Value::as_array).map_or(0, Vec::len);
    let mut data = Vec::with_capacity(rows.len() * ncols);
    for (i, row) in rows.iter().enumerate() {
        let f = format!("{field}[{i}]");
        let row = row.as_array().ok_or_else(|| input_err(&f, "expected a row array"))?;
        if row.len() != ncols {
            return Err(input_err(&f, format!("row has {} entries, expected {ncols}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            data.push(parse_complex(x, &format!("{f}[{j}]"))?);
        }
    }
    CMatrix::new(rows.len(), ncols, data).map_err(|e| input_err(field, e))
}

fn parse_nested(v: &Value, dims: &[usize], field: &str, out: &mut Vec<C64>) -> Result<(), CliError> {
    let Some((&d, rest)) = dims.split_first() else {
        out.push(parse_complex(v, field)?);
        return Ok(());
    };
    let a = v.as_array().ok_or_else(|| input_err(field, "expected an array"))?;
    if a.len() != d {
        return Err(input_err(field, format!("has {} entries, dims require {d}", a.len())));
    }
    for (i, x) in a.iter().enumerate() {
        parse_nested(x, rest, &format!("{field}[{i}]"), out)?;
    }
    Ok(())
}

fn check_dims(dims: &[usize]) -> Result<(), CliError> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(input_err("dims", format!("{dims:?} must list at least two positive sizes")));
    }
    Ok(())
}

impl MultiplierFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed multiplier file: {e}")))
    }

    /// Validates the payload against `dims` and builds the multiplier.
    pub fn to_data(&self) -> Result<MultiplierData, CliError> {
        match self {
            MultiplierFile::Schur { dims, values } => {
                check_dims(dims)?;
                let mut data = Vec::new();
                parse_nested(values, dims, "values", &mut data)?;
                let t = CTensor::new(dims.clone(), data).map_err(|e| input_err("values", e))?;
                Ok(MultiplierData::Schur(t))
            }
            MultiplierFile::TensorSum { dims, terms } => {
                check_dims(dims)?;
                let mut parsed = Vec::with_capacity(terms.len());
                for (r, t) in terms.iter().enumerate() {
                    if t.factors.len() != dims.len() {
                        return Err(input_err(
                            &format!("terms[{r}].factors"),
                            format!("has {} factors, dims require {}", t.factors.len(), dims.len()),
                        ));
                    }
                    let mut fs = Vec::with_capacity(dims.len());
                    for (i, (f, &d)) in t.factors.iter().zip(dims).enumerate() {
                        let field = format!("terms[{r}].factors[{i}]");
                        let m = parse_matrix(f, &field)?;
                        if m.shape() != (d, d) {
                            return Err(input_err(&field, format!("is {}x{}, dims require {d}x{d}", m.rows(), m.cols())));
                        }
                        fs.push(m);
                    }
                    parsed.push(fs);
                }
                let sum = ElementaryTensorSum::new(dims.clone(), parsed).map_err(|e| input_err("terms", e))?;
                Ok(MultiplierData::Tensor(sum))
            }
        }
    }

    /// Canonical file for a multiplier.
    pub fn from_data(data: &MultiplierData) -> Self {
        match data {
            MultiplierData::Schur(t) => {
                let dims = t.dims().to_vec();
                let values = nested_value(t.as_slice(), &dims);
                MultiplierFile::Schur { dims, values }
            }
            MultiplierData::Tensor(s) => MultiplierFile::TensorSum {
                dims: s.dims().to_vec(),
                terms: s
                    .terms()
                    .iter()
                    .map(|t| TermFile { factors: t.iter().map(matrix_value).collect() })
                    .collect(),
            },
        }
    }

    /// Pretty-printed canonical JSON with a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain JSON values serialize");
        s.push('\n');
        s
    }
}

/// Parses a file and re-serializes it in canonical form.
pub fn canonicalize(text: &str) -> Result<String, CliError> {
    let data = MultiplierFile::parse(text)?.to_data()?;
    Ok(MultiplierFile::from_data(&data).to_canonical_string())
}

fn complex_value(z: C64) -> Value {
    serde_json::json!([z.re, z.im])
}

pub fn matrix_value(m: &CMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(|&z| complex_value(z)).collect())).collect())
}

fn nested_value(data: &[C64], dims: &[usize]) -> Value {
    match dims.split_first() {
        None => complex_value(data[0]),
        Some((&d, rest)) => {
            let stride: usize = rest.iter().product();
            Value::Array((0..d).map(|i| nested_value(&data[i * stride..(i + 1) * stride], rest)).collect())
        }
    }
}

impl KernelFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed kernel file: {e}")))
    }

    /// Builds the tuple, naming the first leg whose dimensions do not chain.
    pub fn to_tuple(&self) -> Result<KernelTuple, CliError> {
        let ks = self
            .kernels
            .iter()
            .enumerate()
            .map(|(i, v)| parse_matrix(v, &format!("kernels[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        for i in 1..ks.len() {
            if ks[i - 1].cols() != ks[i].rows() {
                return Err(CliError::Input(format!(
                    "leg {}: kernel {} has {} columns but kernel {} has {} rows",
                    i + 1,
                    i,
                    ks[i - 1].cols(),
                    i + 1,
                    ks[i].rows()
                )));
            }
        }
        KernelTuple::new(ks).map_err(|e| CliError::Input(format!("kernels: {e}")))
    }
}

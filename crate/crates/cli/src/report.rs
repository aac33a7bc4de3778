//! CSV tables with a JSON summary, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::CliError;

/// Significant digits of every emitted number.
pub const DIGITS: usize = 12;

/// `x` in scientific notation with [`DIGITS`] significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{:.*e}", DIGITS - 1, x)
    } else {
        x.to_string()
    }
}

/// `x` rounded to [`DIGITS`] significant digits as a JSON number; `null`
/// when not finite.
pub fn json_num(x: f64) -> Value {
    fmt_num(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
}

/// A CSV table and its JSON summary.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
}

impl Report {
    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields")
    }

    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.summary).expect("plain JSON values serialize");
        s.push('\n');
        s
    }

    /// Writes the CSV to `path` and the summary next to it with extension
    /// `json`, each through a temporary file and a rename. Without a path
    /// both go to standard output.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            None => {
                let mut out = std::io::stdout().lock();
                match out.write_all(self.csv().as_bytes()).and_then(|_| out.write_all(self.json().as_bytes())) {
                    // a closed reader such as `head` is not an error
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                        Err(CliError::Input(format!("writing standard output: {e}")))
                    }
                    _ => Ok(()),
                }
            }
            Some(p) => {
                write_atomic(p, &self.csv())?;
                write_atomic(&summary_path(p), &self.json())
            }
        }
    }
}

/// `path` with its extension replaced by `json`.
pub fn summary_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Input(format!("writing {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_num(-2.0), "-2.00000000000e0");
        assert_eq!(json_num(1.0 / 3.0), serde_json::json!(0.333333333333));
        assert_eq!(json_num(f64::NAN), Value::Null);
    }

    #[test]
    fn emit_writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        let r = Report { header: vec!["a", "b"], rows: vec![vec!["1".into(), "x,y".into()]], summary: serde_json::json!({"k": 1}) };
        r.emit(Some(&p)).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,\"x,y\"\n");
        assert_eq!(std::fs::read_to_string(dir.path().join("out.json")).unwrap(), "{\n  \"k\": 1\n}\n");
    }
}

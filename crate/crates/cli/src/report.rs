//! Report serialization. Reports are JSON with every float written with 17
//! significant digits, so identical runs produce byte-identical files and
//! any reader recovers the exact double. Files are written atomically.

use crate::AppError;
use colsel::dist::DistResult;
use colsel::{Method, SelectionResult};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Echo of the full run configuration; flags map one-to-one onto fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub matrix: PathBuf,
    pub candidates: Option<PathBuf>,
    pub method: Method,
    pub k: Option<usize>,
    pub r: Option<usize>,
    pub delta: Option<f64>,
    pub machines: Option<usize>,
    pub k_prime: Option<usize>,
    pub k_dprime: Option<usize>,
    pub epochs: Option<usize>,
    pub sketch_rows: Option<usize>,
    pub pcps_cols: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Selection(SelectionResult),
    Dist(DistResult),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub load_s: f64,
    pub sketch_s: f64,
    pub select_s: f64,
    pub evaluate_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: RunConfig,
    pub frobenius_sq_a: f64,
    pub coverage_ratio: f64,
    pub outcome: Outcome,
    pub timing: Timing,
}

pub fn tool_version() -> String {
    format!("colsel {}", env!("CARGO_PKG_VERSION"))
}

struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{:.16e}", value)
    }
}

/// Serializes to JSON with 17-significant-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, AppError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits17);
    value
        .serialize(&mut ser)
        .map_err(|e| AppError::User(format!("cannot serialize report: {e}")))?;
    String::from_utf8(buf).map_err(|e| AppError::User(format!("report is not utf-8: {e}")))
}

/// Writes via a temp file in the target directory plus rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), AppError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| AppError::User(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| AppError::User(format!("cannot write report: {e}")))?;
    tmp.persist(path)
        .map_err(|e| AppError::User(format!("cannot move report into place: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        #[derive(Serialize)]
        struct S {
            x: f64,
        }
        let json = to_json(&S { x: 1.0 / 3.0 }).unwrap();
        assert_eq!(json, "{\"x\":3.3333333333333331e-1}");
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["x"].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
    }
}

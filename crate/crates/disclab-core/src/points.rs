//! Point sequences in `[0,1)`: generators and file ingestion.
//!
//! Concrete sequences (van der Corput, Kronecker, external files) serve as
//! inputs to the discrepancy machinery. Insertion order is significant and
//! preserved: all per-prefix quantities depend on it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered sequence of points in `[0,1)`.
///
/// The generation order is preserved; a sorted view with stable tie order is
/// available through [`PointSet::sorted`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    values: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from raw values, rejecting anything outside `[0,1)`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..1.0).contains(&v) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "point {} = {v} lies outside [0,1)",
                    i + 1
                )));
            }
        }
        Ok(PointSet { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values in generation order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sorted copy of the values (ascending, ties keep insertion order).
    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Writes the point file format: one decimal literal per line,
    /// 17 significant digits.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_point_file())?;
        Ok(())
    }

    /// Renders the point file format as a string.
    pub fn to_point_file(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        for v in &self.values {
            let _ = writeln!(out, "{v:.16e}");
        }
        out
    }

    /// Reads a point file: one decimal literal per line, `#` comments and
    /// blank lines permitted. Values outside `[0,1)` are rejected, not
    /// clamped.
    pub fn read_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Ingestion {
            path: path.display().to_string(),
            line: 0,
            reason: e.to_string(),
        })?;
        Self::parse_point_file(&text, &path.display().to_string())
    }

    /// Parses the point file format from a string.
    pub fn parse_point_file(text: &str, origin: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line.parse().map_err(|_| Error::Ingestion {
                path: origin.to_string(),
                line: idx + 1,
                reason: format!("malformed decimal literal {line:?}"),
            })?;
            if !(0.0..1.0).contains(&v) || !v.is_finite() {
                return Err(Error::Ingestion {
                    path: origin.to_string(),
                    line: idx + 1,
                    reason: format!("value {v} lies outside [0,1)"),
                });
            }
            values.push(v);
        }
        Ok(PointSet { values })
    }

    /// JSON export with generator metadata.
    pub fn to_json(&self, spec: &GeneratorSpec) -> String {
        let export = PointSetExport {
            kind: spec.kind_name(),
            params: spec.params_json(),
            count: self.values.len(),
            values: &self.values,
        };
        serde_json::to_string_pretty(&export).expect("point set export serializes")
    }
}

#[derive(Serialize)]
struct PointSetExport<'a> {
    kind: &'static str,
    params: serde_json::Value,
    count: usize,
    values: &'a [f64],
}

/// How to produce a point sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Radical-inverse sequence in an integer base ≥ 2.
    VanDerCorput { base: u32 },
    /// Fractional parts of `n·alpha` for `alpha` in `(0,1)`.
    Kronecker { alpha: f64 },
    /// External point file.
    File { path: PathBuf },
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::VanDerCorput { base } if *base < 2 => {
                Err(Error::invalid(format!("base {base} must be ≥ 2")))
            }
            GeneratorSpec::Kronecker { alpha } if !(*alpha > 0.0 && *alpha < 1.0) => {
                Err(Error::invalid(format!("alpha {alpha} must lie in (0,1)")))
            }
            _ => Ok(()),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            GeneratorSpec::VanDerCorput { .. } => "van-der-corput",
            GeneratorSpec::Kronecker { .. } => "kronecker",
            GeneratorSpec::File { .. } => "file",
        }
    }

    fn params_json(&self) -> serde_json::Value {
        match self {
            GeneratorSpec::VanDerCorput { base } => serde_json::json!({ "base": base }),
            GeneratorSpec::Kronecker { alpha } => serde_json::json!({ "alpha": alpha }),
            GeneratorSpec::File { path } => serde_json::json!({ "path": path }),
        }
    }
}

/// Digit-reversed fraction of `n` in the given base (van der Corput).
///
/// Base-2 values are dyadic rationals and therefore exact in binary floating
/// point.
pub fn radical_inverse(n: u64, base: u32) -> Result<f64> {
    if base < 2 {
        return Err(Error::invalid(format!("base {base} must be ≥ 2")));
    }
    if n == 0 {
        return Err(Error::invalid("index n must be ≥ 1"));
    }
    let b = u64::from(base);
    let mut rest = n;
    let mut value = 0.0_f64;
    let mut scale = 1.0 / b as f64;
    while rest > 0 {
        let digit = rest % b;
        value += digit as f64 * scale;
        scale /= b as f64;
        rest /= b;
    }
    Ok(value)
}

/// Fractional part of `n·alpha`, reduced in one step to avoid additive drift.
pub fn kronecker_point(n: u64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} must lie in (0,1)")));
    }
    if n == 0 {
        return Err(Error::invalid("index n must be ≥ 1"));
    }
    let v = (n as f64 * alpha).fract();
    // fract of a finite positive product is in [0,1); guard the v == 1.0-ulp
    // rounding corner anyway.
    Ok(if v >= 1.0 { 0.0 } else { v })
}

/// Materializes `count` points from a generator spec (indices 1..=count).
pub fn generate(spec: &GeneratorSpec, count: usize) -> Result<PointSet> {
    if count == 0 {
        return Err(Error::invalid("count must be ≥ 1"));
    }
    spec.validate()?;
    match spec {
        GeneratorSpec::VanDerCorput { base } => {
            let values = (1..=count as u64)
                .map(|n| radical_inverse(n, *base))
                .collect::<Result<Vec<_>>>()?;
            Ok(PointSet { values })
        }
        GeneratorSpec::Kronecker { alpha } => {
            let values = (1..=count as u64)
                .map(|n| kronecker_point(n, *alpha))
                .collect::<Result<Vec<_>>>()?;
            Ok(PointSet { values })
        }
        GeneratorSpec::File { path } => {
            let all = PointSet::read_file(path)?;
            if all.len() < count {
                return Err(Error::Ingestion {
                    path: path.display().to_string(),
                    line: 0,
                    reason: format!("file holds {} points, {count} requested", all.len()),
                });
            }
            Ok(PointSet {
                values: all.values[..count].to_vec(),
            })
        }
    }
}

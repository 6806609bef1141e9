//! CSV tables, checksummed run manifests and file helpers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use spinladder_core::analysis::{ObservableSeries, SweepRow};

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct IoError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError { path: path.to_path_buf(), source }
}

/// Shortest decimal text that parses back to the same `f64`. Plain notation
/// in the usual range, exponent form for very small or large magnitudes.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub const CSV_COLUMNS: [&str; 7] = ["t", "sx", "sy", "sz", "sf", "stotal", "norm"];

/// Trajectory table: `t,sx,sy,sz,sf,stotal,norm`, then `p_<m>` columns when
/// `populations` is set.
pub fn format_csv(series: &ObservableSeries, populations: bool) -> String {
    let mut header: Vec<String> = CSV_COLUMNS.iter().map(|c| c.to_string()).collect();
    if populations {
        header.extend(series.levels.iter().map(|m| format!("p_{}", m.column_label())));
    }
    let mut out = header.join(",");
    out.push('\n');
    for k in 0..series.len() {
        let mut fields = vec![
            series.times[k],
            series.sx[k],
            series.sy[k],
            series.sz[k],
            series.s_fidelity[k],
            series.s_total[k],
            series.norm[k],
        ];
        if populations {
            fields.extend(series.populations.iter().map(|p| p[k]));
        }
        let line: Vec<String> = fields.into_iter().map(format_f64).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(series: &ObservableSeries, path: &Path, populations: bool) -> Result<(), IoError> {
    fs::write(path, format_csv(series, populations)).map_err(io_err(path))
}

pub const SWEEP_COLUMNS: [&str; 9] = [
    "value",
    "period",
    "first_minimum_time",
    "min_sz",
    "min_sz_reduced",
    "max_norm_drift",
    "casimir_deviation",
    "convergence",
    "error",
];

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One line per sweep row; empty fields where a quantity is unavailable and
/// the failure message in `error`.
pub fn format_sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        let fields: Vec<String> = match &row.outcome {
            Ok(sum) => {
                let (period, t_min, min_sz, err) = match &sum.period {
                    Ok(p) => (Some(p.period), Some(p.first_minimum_time), Some(p.min_value), String::new()),
                    Err(e) => (None, None, None, e.to_string()),
                };
                vec![
                    format_f64(row.value),
                    opt(period),
                    opt(t_min),
                    opt(min_sz),
                    format_f64(sum.min_reduced_sz),
                    format_f64(sum.max_norm_drift),
                    format_f64(sum.casimir_deviation),
                    opt(sum.convergence),
                    csv_text(&err),
                ]
            }
            Err(e) => {
                let mut f = vec![format_f64(row.value)];
                f.extend(std::iter::repeat_n(String::new(), 7));
                f.push(csv_text(&e.to_string()));
                f
            }
        };
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Inventory entry for a finished file, relative to the run directory.
pub fn file_entry(dir: &Path, name: &str) -> Result<serde_json::Value, IoError> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    Ok(serde_json::json!({ "path": name, "bytes": bytes.len(), "sha256": sha256_hex(&bytes) }))
}

/// Writes `manifest.json`; callers invoke this after every data file exists.
pub fn write_manifest(dir: &Path, manifest: &serde_json::Value) -> Result<PathBuf, IoError> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest).expect("json values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// JSON number, or null for non-finite values.
pub fn json_f64(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map(serde_json::Value::Number).unwrap_or(serde_json::Value::Null)
}

//! Gnuplot script emission for trajectory CSVs. Scripts are text only; this
//! crate never runs them.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    None,
    /// Divide by S: spin components in [-1, 1].
    BySpin,
    /// Divide by S^2: fidelity and total spin.
    BySpinSquared,
}

impl std::str::FromStr for Normalization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Normalization::None),
            "s" => Ok(Normalization::BySpin),
            "s2" => Ok(Normalization::BySpinSquared),
            other => Err(format!("unknown normalization '{other}' (expected none, s or s2)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlotError {
    #[error("no columns requested")]
    NoColumns,
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("csv has no header")]
    NoHeader,
}

fn canonical(name: &str) -> &str {
    match name {
        "s_fidelity" => "sf",
        "s_total" => "stotal",
        other => other,
    }
}

/// Gnuplot single-quoted strings double an embedded quote.
fn escape(s: &str) -> String {
    s.replace('\'', "''")
}

/// Script plotting `columns` of `csv_path` against `t`. `header` is the CSV
/// header line; `s` is the spin used for normalization.
pub fn emit_plot_script(
    csv_path: &str,
    header: &str,
    columns: &[String],
    norm: Normalization,
    s: f64,
) -> Result<String, PlotError> {
    if columns.is_empty() {
        return Err(PlotError::NoColumns);
    }
    let names: Vec<&str> = header.trim_end().split(',').collect();
    if names.first() != Some(&"t") {
        return Err(PlotError::NoHeader);
    }
    let mut curves = Vec::new();
    for c in columns {
        let key = canonical(c.trim());
        let idx = names.iter().position(|n| *n == key).ok_or_else(|| PlotError::UnknownColumn(c.clone()))?;
        if idx == 0 {
            return Err(PlotError::UnknownColumn(c.clone()));
        }
        curves.push((key.to_string(), idx + 1));
    }

    let (divisor, suffix, yrange) = match norm {
        Normalization::None => ("1".to_string(), "", "[*:*]"),
        Normalization::BySpin => ("S".to_string(), "/S", "[-1:1]"),
        Normalization::BySpinSquared => ("(S*S)".to_string(), "/S^2", "[0:*]"),
    };
    let mut out = String::new();
    let _ = writeln!(out, "# generated by spinladder plot-script");
    let _ = writeln!(out, "S = {s}");
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set xlabel 't'");
    let _ = writeln!(out, "set ylabel 'reduced component'");
    let _ = writeln!(out, "set yrange {yrange}");
    let _ = writeln!(out, "set key outside top right");
    let plots: Vec<String> = curves
        .iter()
        .map(|(name, col)| {
            // Sz is the headline curve: bold; everything else thin
            let lw = if name == "sz" { 3 } else { 1 };
            format!(
                "'{}' skip 1 using 1:(${col}/{divisor}) with lines lw {lw} title '{name}{suffix}'",
                escape(csv_path)
            )
        })
        .collect();
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    Ok(out)
}

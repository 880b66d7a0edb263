use std::path::Path;

use serde_json::json;

use super::{write_bytes, FormatError};
use crate::eval::{Norms, ReconstructionReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    /// JSON with every matrix and the alignment.
    Structured,
    /// Plain-text table: one row per norm, one column per variant.
    HumanTable,
}

/// Columns for a set of named reports. A report with flipped nodes adds an
/// "Adjusted from ..." column after its raw column.
fn columns<'a>(variants: &[(&'a str, &'a ReconstructionReport)]) -> Vec<(String, Norms, f64)> {
    let mut out = Vec::new();
    for (name, r) in variants {
        out.push((name.to_string(), r.raw_norms, r.raw_preservation));
        if !r.flipped.is_empty() {
            out.push((format!("Adjusted from {name}"), r.adjusted_norms, r.adjusted_preservation));
        }
    }
    out
}

pub fn render_table(variants: &[(&str, &ReconstructionReport)]) -> String {
    let cols = columns(variants);
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("Metric".to_string()).chain(cols.iter().map(|c| c.0.clone())).collect()];
    let metric = |name: &str, f: &dyn Fn(&(String, Norms, f64)) -> f64| -> Vec<String> {
        std::iter::once(name.to_string()).chain(cols.iter().map(|c| format!("{:.4}", f(c)))).collect()
    };
    rows.push(metric("l1-norm", &|c| c.1.l1));
    rows.push(metric("l2-norm", &|c| c.1.l2));
    rows.push(metric("linf-norm", &|c| c.1.linf));
    if let Some((_, r)) = variants.first() {
        rows.push(metric(&format!("strong kept (|w|>={})", r.strong_threshold), &|c| c.2));
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(k, (c, w))| if k == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    for (name, r) in variants {
        let flipped: Vec<&str> = r.flipped.iter().map(|&i| r.target_labels[i].as_str()).collect();
        if !flipped.is_empty() {
            out.push_str(&format!("\nflipped nodes in {name}: {}\n", flipped.join(", ")));
        }
    }
    out
}

pub fn export_report(
    variants: &[(&str, &ReconstructionReport)],
    path: &Path,
    style: ReportStyle,
) -> Result<(), FormatError> {
    let text = match style {
        ReportStyle::Structured => {
            let list: Vec<_> = variants.iter().map(|(name, r)| json!({"name": name, "report": r})).collect();
            let mut s = serde_json::to_string_pretty(&json!({"schema_version": 1, "variants": list}))
                .expect("serializable report");
            s.push('\n');
            s
        }
        ReportStyle::HumanTable => render_table(variants),
    };
    write_bytes(path, text.as_bytes())
}

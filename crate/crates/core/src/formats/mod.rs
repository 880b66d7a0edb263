//! On-disk formats: the JSON FCM document, bare CSV matrices, heatmap images
//! and evaluation reports.

mod heatmap;
mod report;

pub use heatmap::{cell_color, heatmap_png, heatmap_svg, render_heatmap, HeatmapOptions};
pub use report::{export_report, render_table, ReportStyle};

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::fcm::{Fcm, FcmError, SelfLoopPolicy};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    /// `at` is a field path such as `edges.sparse[2]`.
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
    #[error("image encoding failed: {0}")]
    Image(String),
}

impl FormatError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn invalid(at: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Invalid {
            at: at.into(),
            message: message.into(),
        }
    }
}

/// Rounds to six significant digits, the precision of the text formats.
pub fn round_sig6(w: f64) -> f64 {
    if w == 0.0 || !w.is_finite() {
        return if w == 0.0 { 0.0 } else { w };
    }
    format!("{w:.5e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeBlock {
    Dense(Vec<Vec<f64>>),
    Sparse(Vec<SparseEdge>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeForm {
    #[default]
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmDocument {
    pub schema_version: u32,
    pub nodes: Vec<NodeEntry>,
    pub edges: EdgeBlock,
    #[serde(default)]
    pub self_loops: SelfLoopPolicy,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Value>,
}

impl FcmDocument {
    pub fn from_fcm(fcm: &Fcm, form: EdgeForm) -> Self {
        let n = fcm.len();
        let edges = match form {
            EdgeForm::Dense => EdgeBlock::Dense(
                (0..n).map(|i| (0..n).map(|j| round_sig6(fcm.weight(i, j))).collect()).collect(),
            ),
            EdgeForm::Sparse => EdgeBlock::Sparse(
                fcm.edges()
                    .indexed_iter()
                    .filter(|(_, w)| **w != 0.0)
                    .map(|((source, target), w)| SparseEdge {
                        source,
                        target,
                        weight: round_sig6(*w),
                    })
                    .collect(),
            ),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            nodes: fcm
                .nodes()
                .iter()
                .map(|n| NodeEntry {
                    id: n.id,
                    label: n.label.clone(),
                })
                .collect(),
            edges,
            self_loops: fcm.self_loops(),
            metadata: BTreeMap::new(),
        }
    }

    /// Validates the document and builds the map. Errors name the field.
    pub fn to_fcm(&self) -> Result<Fcm, FormatError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FormatError::invalid(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(FormatError::invalid(
                    format!("nodes[{i}].id"),
                    format!("expected {i}, got {}", node.id),
                ));
            }
        }
        let range_msg = |w: f64| format!("weight {w} is outside [-1, 1]");
        let mut matrix = Array2::zeros((n, n));
        match &self.edges {
            EdgeBlock::Dense(rows) => {
                if rows.len() != n {
                    return Err(FormatError::invalid("edges.dense", format!("{} rows for {n} nodes", rows.len())));
                }
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != n {
                        return Err(FormatError::invalid(
                            format!("edges.dense[{i}]"),
                            format!("{} columns for {n} nodes", row.len()),
                        ));
                    }
                    for (j, &w) in row.iter().enumerate() {
                        if !(-1.0..=1.0).contains(&w) {
                            return Err(FormatError::invalid(
                                format!("edges.dense[{i}][{j}] ({} -> {})", self.nodes[i].label, self.nodes[j].label),
                                range_msg(w),
                            ));
                        }
                        matrix[[i, j]] = w;
                    }
                }
            }
            EdgeBlock::Sparse(triples) => {
                let mut seen = std::collections::HashSet::new();
                for (k, e) in triples.iter().enumerate() {
                    let at = format!("edges.sparse[{k}] (source {}, target {}, weight {})", e.source, e.target, e.weight);
                    if e.source >= n || e.target >= n {
                        return Err(FormatError::invalid(at, format!("node id out of range for {n} nodes")));
                    }
                    if !(-1.0..=1.0).contains(&e.weight) {
                        return Err(FormatError::invalid(at, range_msg(e.weight)));
                    }
                    if !seen.insert((e.source, e.target)) {
                        return Err(FormatError::invalid(at, "duplicate edge"));
                    }
                    matrix[[e.source, e.target]] = e.weight;
                }
            }
        }
        let labels: Vec<&str> = self.nodes.iter().map(|n| n.label.as_str()).collect();
        Fcm::with_policy(&labels, matrix, self.self_loops).map_err(|e| match e {
            FcmError::SelfLoop { index, value } => FormatError::invalid(
                format!("edges ({} -> {})", self.nodes[index].label, self.nodes[index].label),
                format!("self-loop weight {value} but self_loops is forbidden"),
            ),
            FcmError::EmptyLabel { index } => FormatError::invalid(format!("nodes[{index}].label"), "empty label"),
            FcmError::DuplicateLabel { label, second, .. } => {
                FormatError::invalid(format!("nodes[{second}].label"), format!("duplicate label {label:?}"))
            }
            other => FormatError::invalid("document", other.to_string()),
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn fcm_to_json(fcm: &Fcm, form: EdgeForm) -> String {
    let mut s = serde_json::to_string_pretty(&FcmDocument::from_fcm(fcm, form)).expect("plain document");
    s.push('\n');
    s
}

pub fn fcm_from_json(text: &str, origin: &str) -> Result<Fcm, FormatError> {
    let doc: FcmDocument = serde_json::from_str(text).map_err(|e| FormatError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    doc.to_fcm().map_err(|e| match e {
        FormatError::Invalid { at, message } => FormatError::Invalid {
            at: format!("{origin}: {at}"),
            message,
        },
        other => other,
    })
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|e| FormatError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| FormatError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| FormatError::io(path, e))
}

pub fn load_fcm(path: &Path) -> Result<Fcm, FormatError> {
    fcm_from_json(&read_text(path)?, &path.display().to_string())
}

pub fn save_fcm(fcm: &Fcm, path: &Path, form: EdgeForm) -> Result<(), FormatError> {
    write_bytes(path, fcm_to_json(fcm, form).as_bytes())
}

/// Reads a headerless square CSV matrix.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>, FormatError> {
    let text = read_text(path)?;
    parse_matrix_csv(&text, &path.display().to_string())
}

pub fn parse_matrix_csv(text: &str, origin: &str) -> Result<Array2<f64>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FormatError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    FormatError::invalid(format!("{origin}: row {} column {}", i + 1, j + 1), format!("not a number: {cell:?}"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(FormatError::invalid(origin, "empty matrix"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(FormatError::invalid(
            format!("{origin}: row {}", i + 1),
            format!("{} columns but the matrix has {n} rows", r.len()),
        ));
    }
    Ok(Array2::from_shape_vec((n, n), rows.into_iter().flatten().collect()).expect("square"))
}

pub fn matrix_to_csv(matrix: &Array2<f64>) -> String {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in matrix.rows() {
        writer
            .write_record(row.iter().map(|w| round_sig6(*w).to_string()))
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("ascii")
}

pub fn write_matrix_csv(matrix: &Array2<f64>, path: &Path) -> Result<(), FormatError> {
    write_bytes(path, matrix_to_csv(matrix).as_bytes())
}

/// An FCM from a bare CSV matrix plus a label file with one label per line.
pub fn load_fcm_csv(matrix_path: &Path, labels_path: &Path) -> Result<Fcm, FormatError> {
    let matrix = read_matrix_csv(matrix_path)?;
    let labels: Vec<String> = read_text(labels_path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    let doc = FcmDocument {
        schema_version: SCHEMA_VERSION,
        nodes: labels.into_iter().enumerate().map(|(id, label)| NodeEntry { id, label }).collect(),
        edges: EdgeBlock::Dense(matrix.rows().into_iter().map(|r| r.to_vec()).collect()),
        self_loops: SelfLoopPolicy::Forbidden,
        metadata: BTreeMap::new(),
    };
    doc.to_fcm()
}

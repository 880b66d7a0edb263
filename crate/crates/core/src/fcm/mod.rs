//! Fuzzy cognitive maps: concept nodes joined by a square matrix of causal
//! weights in `[-1, 1]`, plus the discrete-time dynamics and convex mixing
//! defined over them.

mod dynamics;
mod mixing;
mod squash;

pub use dynamics::{
    basin_map, basin_map_with_bound, find_equilibrium, step, trajectory, trajectory_with_tol,
    BasinMap, Equilibrium, DEFAULT_BASIN_BOUND,
};
pub use mixing::{mix, pad_edges, MixWeights};
pub use squash::SquashSpec;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::normalize_label;

/// Default tolerance for state equality under continuous squashing.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FcmError {
    #[error("an FCM needs at least one node")]
    Empty,
    #[error("node {index} has an empty label")]
    EmptyLabel { index: usize },
    #[error("duplicate node label {label:?} (nodes {first} and {second})")]
    DuplicateLabel {
        label: String,
        first: usize,
        second: usize,
    },
    #[error("edge matrix is {rows}x{cols} but there are {nodes} nodes")]
    Shape {
        rows: usize,
        cols: usize,
        nodes: usize,
    },
    #[error("weight w[{row}][{col}] = {value} is outside [-1, 1]")]
    WeightRange { row: usize, col: usize, value: f64 },
    #[error("self-loop w[{index}][{index}] = {value} but self-loops are forbidden")]
    SelfLoop { index: usize, value: f64 },
    #[error("state component {index} = {value} is outside [0, 1]")]
    StateRange { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("invalid squashing function: {0}")]
    Squash(String),
    #[error("invalid mixing weights: {0}")]
    MixWeights(String),
    #[error("node {label:?} is not in the union node list")]
    UnknownNode { label: String },
    #[error("{0} must be at least 1")]
    ZeroSteps(&'static str),
    #[error("tolerance must be finite and non-negative, got {0}")]
    Tolerance(f64),
    #[error("basin enumeration over {nodes} nodes exceeds the bound of {bound}")]
    BasinBound { nodes: usize, bound: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfLoopPolicy {
    #[default]
    Forbidden,
    Allowed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub id: usize,
    pub label: String,
}

impl ConceptNode {
    pub fn key(&self) -> String {
        normalize_label(&self.label)
    }
}

/// A validated fuzzy cognitive map. `edges[[i, j]]` is the causal weight of
/// node `i` on node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Fcm {
    nodes: Vec<ConceptNode>,
    edges: Array2<f64>,
    self_loops: SelfLoopPolicy,
}

impl Fcm {
    pub fn new<S: AsRef<str>>(labels: &[S], edges: Array2<f64>) -> Result<Self, FcmError> {
        Self::with_policy(labels, edges, SelfLoopPolicy::Forbidden)
    }

    pub fn with_policy<S: AsRef<str>>(
        labels: &[S],
        edges: Array2<f64>,
        self_loops: SelfLoopPolicy,
    ) -> Result<Self, FcmError> {
        let nodes = labels
            .iter()
            .enumerate()
            .map(|(id, l)| ConceptNode {
                id,
                label: l.as_ref().trim().to_string(),
            })
            .collect();
        Self::from_parts(nodes, edges, self_loops)
    }

    /// Empty-edge map over the given labels.
    pub fn unconnected<S: AsRef<str>>(labels: &[S]) -> Result<Self, FcmError> {
        Self::new(labels, Array2::zeros((labels.len(), labels.len())))
    }

    fn from_parts(
        nodes: Vec<ConceptNode>,
        edges: Array2<f64>,
        self_loops: SelfLoopPolicy,
    ) -> Result<Self, FcmError> {
        let n = nodes.len();
        if n == 0 {
            return Err(FcmError::Empty);
        }
        let mut seen = std::collections::HashMap::with_capacity(n);
        for (index, node) in nodes.iter().enumerate() {
            if node.label.is_empty() {
                return Err(FcmError::EmptyLabel { index });
            }
            if let Some(first) = seen.insert(node.key(), index) {
                return Err(FcmError::DuplicateLabel {
                    label: node.label.clone(),
                    first,
                    second: index,
                });
            }
        }
        let (rows, cols) = edges.dim();
        if rows != n || cols != n {
            return Err(FcmError::Shape {
                rows,
                cols,
                nodes: n,
            });
        }
        for ((row, col), &value) in edges.indexed_iter() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(FcmError::WeightRange { row, col, value });
            }
            if row == col && value != 0.0 && self_loops == SelfLoopPolicy::Forbidden {
                return Err(FcmError::SelfLoop { index: row, value });
            }
        }
        let nodes = nodes
            .into_iter()
            .enumerate()
            .map(|(id, n)| ConceptNode { id, label: n.label })
            .collect();
        Ok(Self {
            nodes,
            edges,
            self_loops,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[ConceptNode] {
        &self.nodes
    }

    pub fn labels(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.label.as_str()).collect()
    }

    pub fn edges(&self) -> &Array2<f64> {
        &self.edges
    }

    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.edges[[from, to]]
    }

    pub fn self_loops(&self) -> SelfLoopPolicy {
        self.self_loops
    }

    /// Index of the node whose label matches `label` after normalization.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        let key = normalize_label(label);
        self.nodes.iter().position(|n| n.key() == key)
    }

    /// Number of entries with `|w| > zero_tol`.
    pub fn edge_count(&self, zero_tol: f64) -> usize {
        self.edges.iter().filter(|w| w.abs() > zero_tol).count()
    }

    /// Degree-based importance: outgoing plus incoming edges with
    /// `|w| > zero_tol`.
    pub fn node_degree_importance(&self, zero_tol: f64) -> Vec<usize> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let out = (0..n).filter(|&j| self.edges[[i, j]].abs() > zero_tol).count();
                let inc = (0..n).filter(|&j| self.edges[[j, i]].abs() > zero_tol).count();
                out + inc
            })
            .collect()
    }
}

/// Activation vector with every component in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self, FcmError> {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(FcmError::StateRange { index, value });
            }
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// Binary corner of `{0,1}^n` whose bit `i` is component `i`.
    pub fn corner(bits: u64, n: usize) -> Self {
        Self((0..n).map(|i| ((bits >> i) & 1) as f64).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.len() == other.len() && self.max_abs_diff(other) <= tol
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = FcmError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<StateVector> for Vec<f64> {
    fn from(s: StateVector) -> Self {
        s.0
    }
}

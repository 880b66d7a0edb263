//! Scoring a reconstructed map against its target: node alignment, negated
//! ("flipped") node detection, sign adjustment and error norms.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcm::Fcm;
use crate::text::{label_similarity, normalize_label, NegationLexicon};

pub const DEFAULT_MIN_SIMILARITY: f64 = 0.55;
pub const DEFAULT_STRONG_THRESHOLD: f64 = 0.5;
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Heads of a flipped pair must score at least this after markers are removed.
const FLIP_HEAD_SIMILARITY: f64 = 0.55;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("matrix shapes differ: {left:?} vs {right:?}")]
    Shape { left: (usize, usize), right: (usize, usize) },
    #[error("flipped index {index} is out of range for {n} nodes")]
    FlipIndex { index: usize, n: usize },
    #[error("{name} must lie in [0, 1], got {value}")]
    Threshold { name: &'static str, value: f64 },
}

fn check_unit(name: &'static str, value: f64) -> Result<(), EvalError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(EvalError::Threshold { name, value })
    }
}

/// True when exactly one label carries a negation marker and the remaining
/// heads name the same thing.
pub fn detect_flip(a: &str, b: &str, lexicon: &NegationLexicon) -> bool {
    let (na, ha) = lexicon.strip(a);
    let (nb, hb) = lexicon.strip(b);
    na != nb && label_similarity(&ha, &hb) >= FLIP_HEAD_SIMILARITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub target: usize,
    pub recon: usize,
    pub similarity: f64,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeAlignment {
    /// Sorted by target index.
    pub pairs: Vec<AlignedPair>,
    pub unmatched_target: Vec<usize>,
    pub unmatched_recon: Vec<usize>,
}

impl NodeAlignment {
    /// Target indices of flipped pairs.
    pub fn flipped_targets(&self) -> Vec<usize> {
        self.pairs.iter().filter(|p| p.flipped).map(|p| p.target).collect()
    }
}

/// Greedy best-first matching on label similarity with negation markers
/// stripped. Ties go to the lower target index, then the alphabetically first
/// reconstructed label, so the result does not depend on node order.
pub fn align_nodes(
    target: &Fcm,
    recon: &Fcm,
    lexicon: &NegationLexicon,
    min_similarity: f64,
) -> Result<NodeAlignment, EvalError> {
    check_unit("min_similarity", min_similarity)?;
    let heads = |f: &Fcm| -> Vec<String> { f.labels().iter().map(|l| lexicon.strip(l).1).collect() };
    let (th, rh) = (heads(target), heads(recon));
    let rkeys: Vec<String> = recon.labels().iter().map(|l| normalize_label(l)).collect();

    let mut scored = Vec::with_capacity(th.len() * rh.len());
    for (t, a) in th.iter().enumerate() {
        for (r, b) in rh.iter().enumerate() {
            scored.push((label_similarity(a, b), t, r));
        }
    }
    scored.sort_by(|x, y| {
        y.0.total_cmp(&x.0)
            .then(x.1.cmp(&y.1))
            .then_with(|| rkeys[x.2].cmp(&rkeys[y.2]))
    });

    let mut t_used = vec![false; target.len()];
    let mut r_used = vec![false; recon.len()];
    let mut pairs = Vec::new();
    for (score, t, r) in scored {
        if score < min_similarity {
            break;
        }
        if t_used[t] || r_used[r] {
            continue;
        }
        t_used[t] = true;
        r_used[r] = true;
        pairs.push(AlignedPair {
            target: t,
            recon: r,
            similarity: score,
            flipped: detect_flip(&target.nodes()[t].label, &recon.nodes()[r].label, lexicon),
        });
    }
    pairs.sort_by_key(|p| p.target);
    let unused = |used: &[bool]| used.iter().enumerate().filter(|(_, u)| !**u).map(|(i, _)| i).collect();
    Ok(NodeAlignment {
        pairs,
        unmatched_target: unused(&t_used),
        unmatched_recon: unused(&r_used),
    })
}

/// Reconstructed weights moved into target index space; unmatched target
/// rows and columns stay zero.
pub fn project_to_target(recon: &Fcm, alignment: &NodeAlignment, target_len: usize) -> Array2<f64> {
    let mut out = Array2::zeros((target_len, target_len));
    for a in &alignment.pairs {
        for b in &alignment.pairs {
            out[[a.target, b.target]] = recon.weight(a.recon, b.recon);
        }
    }
    out
}

/// Negates each entry once per flipped endpoint.
pub fn adjust_flips(matrix: &Array2<f64>, flipped: &[usize]) -> Result<Array2<f64>, EvalError> {
    let n = matrix.nrows();
    let mut sign = vec![1.0; n];
    for &i in flipped {
        if i >= n || i >= matrix.ncols() {
            return Err(EvalError::FlipIndex { index: i, n });
        }
        sign[i] = -1.0;
    }
    let mut out = matrix.clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        if sign[i] * sign.get(j).copied().unwrap_or(1.0) < 0.0 {
            *v = -*v;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

fn same_shape(a: &Array2<f64>, b: &Array2<f64>) -> Result<(), EvalError> {
    if a.dim() != b.dim() {
        return Err(EvalError::Shape { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// Entrywise l1, Frobenius l2 and max-entry l∞ norms of `e - e_hat`.
pub fn reconstruction_error(e: &Array2<f64>, e_hat: &Array2<f64>) -> Result<Norms, EvalError> {
    same_shape(e, e_hat)?;
    let (mut l1, mut sq, mut linf) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in e.iter().zip(e_hat) {
        let d = (a - b).abs();
        l1 += d;
        sq += d * d;
        linf = linf.max(d);
    }
    Ok(Norms { l1, l2: sq.sqrt(), linf })
}

/// Share of strong target edges (`|w| >= strong_threshold`) that survive in
/// `e_hat` with the same sign. With no strong edges there is nothing to lose
/// and the ratio is 1.
pub fn edge_preservation(
    e: &Array2<f64>,
    e_hat: &Array2<f64>,
    strong_threshold: f64,
    zero_tol: f64,
) -> Result<f64, EvalError> {
    same_shape(e, e_hat)?;
    check_unit("strong_threshold", strong_threshold)?;
    check_unit("zero_tol", zero_tol)?;
    let (mut strong, mut kept) = (0usize, 0usize);
    for (a, b) in e.iter().zip(e_hat) {
        if a.abs() >= strong_threshold && *a != 0.0 {
            strong += 1;
            if b.abs() > zero_tol && a.signum() == b.signum() {
                kept += 1;
            }
        }
    }
    Ok(if strong == 0 { 1.0 } else { kept as f64 / strong as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub lexicon: NegationLexicon,
    pub min_similarity: f64,
    pub strong_threshold: f64,
    pub zero_tol: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            lexicon: NegationLexicon::default(),
            min_similarity: DEFAULT_MIN_SIMILARITY,
            strong_threshold: DEFAULT_STRONG_THRESHOLD,
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

mod matrix_serde {
    use ndarray::Array2;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Array2<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Array2<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Array2::from_shape_vec((n, m), rows.into_iter().flatten().collect()).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub target_labels: Vec<String>,
    pub recon_labels: Vec<String>,
    pub alignment: NodeAlignment,
    /// Target indices whose reconstructed counterpart is negated.
    pub flipped: Vec<usize>,
    #[serde(with = "matrix_serde")]
    pub target: Array2<f64>,
    /// Reconstruction projected into target index space.
    #[serde(with = "matrix_serde")]
    pub reconstructed: Array2<f64>,
    #[serde(with = "matrix_serde")]
    pub adjusted: Array2<f64>,
    pub raw_norms: Norms,
    pub adjusted_norms: Norms,
    pub strong_threshold: f64,
    pub raw_preservation: f64,
    pub adjusted_preservation: f64,
}

pub fn evaluate(target: &Fcm, recon: &Fcm, options: &EvalOptions) -> Result<ReconstructionReport, EvalError> {
    let alignment = align_nodes(target, recon, &options.lexicon, options.min_similarity)?;
    let flipped = alignment.flipped_targets();
    let e = target.edges().clone();
    let reconstructed = project_to_target(recon, &alignment, target.len());
    let adjusted = adjust_flips(&reconstructed, &flipped)?;
    let preservation = |m: &Array2<f64>| edge_preservation(&e, m, options.strong_threshold, options.zero_tol);
    Ok(ReconstructionReport {
        target_labels: target.labels().iter().map(|s| s.to_string()).collect(),
        recon_labels: recon.labels().iter().map(|s| s.to_string()).collect(),
        raw_norms: reconstruction_error(&e, &reconstructed)?,
        adjusted_norms: reconstruction_error(&e, &adjusted)?,
        raw_preservation: preservation(&reconstructed)?,
        adjusted_preservation: preservation(&adjusted)?,
        strong_threshold: options.strong_threshold,
        alignment,
        flipped,
        target: e,
        reconstructed,
        adjusted,
    })
}

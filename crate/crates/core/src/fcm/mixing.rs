use ndarray::Array2;

use super::{ConceptNode, Fcm, FcmError, SelfLoopPolicy};
use crate::text::normalize_label;

const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Convex combination weights: non-negative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixWeights(Vec<f64>);

impl MixWeights {
    pub fn new(values: Vec<f64>) -> Result<Self, FcmError> {
        if values.is_empty() {
            return Err(FcmError::MixWeights("no weights".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(FcmError::MixWeights(format!(
                "weight {i} = {v} is negative or not finite"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(FcmError::MixWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(values))
    }

    pub fn uniform(m: usize) -> Result<Self, FcmError> {
        Self::new(vec![1.0 / m as f64; m])
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
}

/// Embeds `fcm`'s edge matrix in the index space of `union_nodes`, leaving
/// rows and columns of nodes absent from `fcm` at zero.
pub fn pad_edges(fcm: &Fcm, union_nodes: &[ConceptNode]) -> Result<Array2<f64>, FcmError> {
    let keys: Vec<String> = union_nodes.iter().map(ConceptNode::key).collect();
    let positions = fcm
        .nodes()
        .iter()
        .map(|node| {
            let key = node.key();
            keys.iter()
                .position(|k| *k == key)
                .ok_or_else(|| FcmError::UnknownNode {
                    label: node.label.clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = union_nodes.len();
    let mut padded = Array2::zeros((n, n));
    for (i, &pi) in positions.iter().enumerate() {
        for (j, &pj) in positions.iter().enumerate() {
            padded[[pi, pj]] = fcm.weight(i, j);
        }
    }
    Ok(padded)
}

/// Ordered union of node sets, keeping each label's first appearance.
fn union_nodes(fcms: &[Fcm]) -> Vec<ConceptNode> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for node in fcms.iter().flat_map(|f| f.nodes()) {
        if seen.insert(normalize_label(&node.label)) {
            out.push(ConceptNode {
                id: out.len(),
                label: node.label.clone(),
            });
        }
    }
    out
}

/// `E = sum_k v_k * pad(E_k)` over the union of all node sets.
pub fn mix(fcms: &[Fcm], weights: &MixWeights) -> Result<Fcm, FcmError> {
    if fcms.is_empty() {
        return Err(FcmError::MixWeights("no maps to mix".into()));
    }
    if fcms.len() != weights.len() {
        return Err(FcmError::MixWeights(format!(
            "{} weights for {} maps",
            weights.len(),
            fcms.len()
        )));
    }
    let nodes = union_nodes(fcms);
    let n = nodes.len();
    let mut edges = Array2::<f64>::zeros((n, n));
    for (fcm, &v) in fcms.iter().zip(weights.values()) {
        edges.scaled_add(v, &pad_edges(fcm, &nodes)?);
    }
    // convexity keeps entries in [-1, 1] up to rounding
    edges.mapv_inplace(|w| w.clamp(-1.0, 1.0));
    let policy = if fcms.iter().any(|f| f.self_loops() == SelfLoopPolicy::Allowed) {
        SelfLoopPolicy::Allowed
    } else {
        SelfLoopPolicy::Forbidden
    };
    let labels: Vec<&str> = nodes.iter().map(|n| n.label.as_str()).collect();
    Fcm::with_policy(&labels, edges, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn nodes(labels: &[&str]) -> Vec<ConceptNode> {
        labels
            .iter()
            .enumerate()
            .map(|(id, l)| ConceptNode {
                id,
                label: l.to_string(),
            })
            .collect()
    }

    #[test]
    fn weights_validation() {
        assert!(MixWeights::new(vec![0.5, 0.5]).is_ok());
        assert!(MixWeights::new(vec![1.0 + 5e-10]).is_ok());
        assert!(MixWeights::new(vec![]).is_err());
        assert!(MixWeights::new(vec![0.5, 0.6]).is_err());
        assert!(MixWeights::new(vec![1.5, -0.5]).is_err());
        assert!(MixWeights::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn pad_examples() {
        let ab = Fcm::new(&["A", "B"], array![[0.0, 0.5], [-0.3, 0.0]]).unwrap();
        assert_eq!(pad_edges(&ab, &nodes(&["A", "B"])).unwrap(), ab.edges().clone());

        let a = Fcm::unconnected(&["A"]).unwrap();
        assert_eq!(
            pad_edges(&a, &nodes(&["A", "B"])).unwrap(),
            Array2::<f64>::zeros((2, 2))
        );

        let ab = Fcm::new(&["A", "B"], array![[0.0, 0.5], [0.0, 0.0]]).unwrap();
        let padded = pad_edges(&ab, &nodes(&["A", "B", "C"])).unwrap();
        assert_eq!(
            padded,
            array![[0.0, 0.5, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
        );

        // reordered union
        let padded = pad_edges(&ab, &nodes(&["C", "b", "a"])).unwrap();
        assert_eq!(padded[[2, 1]], 0.5);

        assert_eq!(
            pad_edges(&ab, &nodes(&["A", "C"])),
            Err(FcmError::UnknownNode { label: "B".into() })
        );
    }

    #[test]
    fn mix_examples() {
        let ab = Fcm::new(&["A", "B"], array![[0.0, 0.8], [0.0, 0.0]]).unwrap();
        assert_eq!(mix(&[ab.clone()], &MixWeights::new(vec![1.0]).unwrap()).unwrap(), ab);

        let other = Fcm::new(&["A", "B"], array![[0.0, -0.1], [0.9, 0.0]]).unwrap();
        let first = mix(
            &[ab.clone(), other],
            &MixWeights::new(vec![1.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(first, ab);

        let bc = Fcm::new(&["B", "C"], array![[0.0, -0.4], [0.0, 0.0]]).unwrap();
        let mixed = mix(&[ab, bc], &MixWeights::uniform(2).unwrap()).unwrap();
        assert_eq!(mixed.labels(), vec!["A", "B", "C"]);
        let expected = array![[0.0, 0.4, 0.0], [0.0, 0.0, -0.2], [0.0, 0.0, 0.0]];
        for (a, b) in mixed.edges().iter().zip(expected.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn mix_rejects_mismatched_weights() {
        let a = Fcm::unconnected(&["A"]).unwrap();
        assert!(mix(&[a.clone(), a], &MixWeights::new(vec![1.0]).unwrap()).is_err());
        assert!(mix(&[], &MixWeights::new(vec![1.0]).unwrap()).is_err());
    }

    fn arb_fcm() -> impl Strategy<Value = Fcm> {
        (1usize..6).prop_flat_map(|n| {
            (
                proptest::sample::subsequence(vec!["A", "B", "C", "D", "E", "F", "G"], n),
                proptest::collection::vec(-1.0f64..=1.0, n * n),
            )
                .prop_map(move |(labels, w)| {
                    let edges = Array2::from_shape_fn((n, n), |(i, j)| {
                        if i == j {
                            0.0
                        } else {
                            w[i * n + j]
                        }
                    });
                    Fcm::new(&labels, edges).unwrap()
                })
        })
    }

    fn arb_mix() -> impl Strategy<Value = (Vec<Fcm>, MixWeights)> {
        proptest::collection::vec((arb_fcm(), 0.0f64..1.0), 1..5).prop_map(|pairs| {
            let total: f64 = pairs.iter().map(|p| p.1).sum::<f64>() + 1e-3;
            let raw: Vec<f64> = pairs.iter().map(|p| (p.1 + 1e-3 / pairs.len() as f64) / total).collect();
            let fcms = pairs.into_iter().map(|p| p.0).collect();
            (fcms, MixWeights::new(raw).unwrap())
        })
    }

    proptest! {
        #[test]
        fn mixing_is_closed((fcms, weights) in arb_mix()) {
            let mixed = mix(&fcms, &weights).unwrap();
            prop_assert!(mixed.edges().iter().all(|w| (-1.0..=1.0).contains(w)));
            for i in 0..mixed.len() {
                prop_assert_eq!(mixed.weight(i, i), 0.0);
            }
        }

        #[test]
        fn mixing_ignores_list_order((fcms, weights) in arb_mix()) {
            let mixed = mix(&fcms, &weights).unwrap();
            let mut rev_fcms = fcms.clone();
            rev_fcms.reverse();
            let mut rev_w = weights.values().to_vec();
            rev_w.reverse();
            let reversed = mix(&rev_fcms, &MixWeights::new(rev_w).unwrap()).unwrap();
            prop_assert_eq!(mixed.len(), reversed.len());
            for (i, a) in mixed.labels().into_iter().enumerate() {
                let ri = reversed.index_of(a).unwrap();
                for (j, b) in mixed.labels().into_iter().enumerate() {
                    let rj = reversed.index_of(b).unwrap();
                    prop_assert!((mixed.weight(i, j) - reversed.weight(ri, rj)).abs() <= 1e-12);
                }
            }
        }
    }
}

//! Similarity and distance measures: Sørensen–Dice over node sets, NMI over
//! partitions, Jaccard distance over edge sets, the composite rewiring
//! penalty, and the SR/NMI harmonic aggregate.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::detection::Partition;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Weights of the composite penalty: `alpha` trades the community term
/// against the graph term, `lambda` scales the whole penalty inside rewards
/// and episode losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub alpha: f64,
    pub lambda: f64,
}

impl PenaltyWeights {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::Protocol(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::Protocol(format!("lambda must be positive, got {lambda}")));
        }
        Ok(PenaltyWeights { alpha, lambda })
    }
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        PenaltyWeights { alpha: 0.5, lambda: 0.1 }
    }
}

/// Sørensen–Dice coefficient `2|a∩b| / (|a|+|b|)`.
///
/// Conventions for empty inputs: two empty sets are identical (1); an empty
/// set against a non-empty one is maximally dissimilar (0). The first case
/// arises when a target node ends up alone in its community and the set
/// with the target removed has nothing left.
pub fn dice_similarity(a: &BTreeSet<NodeId>, b: &BTreeSet<NodeId>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    2.0 * inter as f64 / (a.len() + b.len()) as f64
}

/// Shannon entropy (nats) of a count vector, with `0·ln 0 := 0`.
fn entropy(counts: impl IntoIterator<Item = usize>, total: usize) -> f64 {
    let total = total as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information between two partitions of the same nodes:
/// `(H(X) + H(Y) − H(X,Y)) / ((H(X) + H(Y)) / 2)`, in [0, 1].
///
/// When both partitions are the trivial single community the ratio is 0/0;
/// the partitions are identical, so the value is defined as 1.
pub fn nmi(p: &Partition, q: &Partition) -> f64 {
    assert_eq!(
        p.node_count(),
        q.node_count(),
        "nmi requires partitions over the same node set"
    );
    let n = p.node_count();
    if p.community_count() == 1 && q.community_count() == 1 {
        return 1.0;
    }

    let mut p_counts = vec![0usize; p.community_count()];
    let mut q_counts = vec![0usize; q.community_count()];
    let mut joint = vec![0usize; p.community_count() * q.community_count()];
    for node in 0..n {
        let a = p.community_index(node);
        let b = q.community_index(node);
        p_counts[a] += 1;
        q_counts[b] += 1;
        joint[a * q.community_count() + b] += 1;
    }

    let h_p = entropy(p_counts, n);
    let h_q = entropy(q_counts, n);
    let h_joint = entropy(joint, n);
    let value = (h_p + h_q - h_joint) / ((h_p + h_q) / 2.0);
    value.clamp(0.0, 1.0)
}

/// Jaccard distance between two graphs on the same nodes:
/// `|E0 Δ E1| / |E0 ∪ E1|`. Undefined (error) when both edge sets are empty.
pub fn jaccard_graph_distance(g0: &Graph, g1: &Graph) -> Result<f64> {
    if g0.node_count() != g1.node_count() {
        return Err(Error::DimensionMismatch { left: g0.node_count(), right: g1.node_count() });
    }
    let e0: BTreeSet<(NodeId, NodeId)> = g0.edges().collect();
    let e1: BTreeSet<(NodeId, NodeId)> = g1.edges().collect();
    let union = e0.union(&e1).count();
    if union == 0 {
        return Err(Error::UndefinedMetric(
            "jaccard distance between two edgeless graphs".into(),
        ));
    }
    let symdiff = e0.symmetric_difference(&e1).count();
    Ok(symdiff as f64 / union as f64)
}

/// Composite rewiring penalty
/// `ℓ_dist = alpha·(1 − nmi) + (1 − alpha)·jaccard`.
pub fn penalty(
    g0: &Graph,
    gt: &Graph,
    p0: &Partition,
    pt: &Partition,
    w: &PenaltyWeights,
) -> Result<f64> {
    let community_term = 1.0 - nmi(p0, pt);
    let graph_term = jaccard_graph_distance(g0, gt)?;
    Ok(w.alpha * community_term + (1.0 - w.alpha) * graph_term)
}

/// Harmonic mean of a success rate and an NMI retention score; 0 when
/// either input is 0 (including the 0/0 case).
pub fn harmonic_f1(sr: f64, nmi: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&sr) && (0.0..=1.0).contains(&nmi));
    if sr == 0.0 || nmi == 0.0 {
        return 0.0;
    }
    2.0 * sr * nmi / (sr + nmi)
}

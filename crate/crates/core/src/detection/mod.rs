//! Black-box community detection: `f(G) -> {C_1, ..., C_k}`.
//!
//! Three interchangeable detectors are provided. All of them are
//! deterministic for a fixed `(kind, graph, seed)`: every tie-break and
//! node-visit order is derived from the seed, never from hash iteration
//! order or thread timing.

mod greedy;
mod labelprop;
mod louvain;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Hard assignment of every node to exactly one community.
///
/// Community indices are canonical: communities are numbered by their
/// smallest member in ascending order, so two equal partitions compare equal
/// regardless of how the detector labeled them internally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Build from raw per-node labels; labels are compacted and canonicalized.
    pub fn from_labels(labels: &[usize]) -> Self {
        // Map each raw label to the smallest node carrying it.
        let mut first_member: Vec<(usize, usize)> = Vec::new(); // (smallest node, raw label)
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        for (node, &label) in labels.iter().enumerate() {
            if seen.insert(label) {
                first_member.push((node, label));
            }
        }
        first_member.sort_unstable();
        let k = first_member.len();
        let max_label = labels.iter().copied().max().unwrap_or(0);
        let mut relabel = vec![usize::MAX; max_label + 1];
        for (canonical, &(_, raw)) in first_member.iter().enumerate() {
            relabel[raw] = canonical;
        }
        let assignment = labels.iter().map(|&l| relabel[l]).collect();
        Partition { assignment, k }
    }

    /// Number of communities.
    pub fn community_count(&self) -> usize {
        self.k
    }

    /// Number of nodes covered by the partition.
    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    /// Community index of a node.
    pub fn community_index(&self, u: NodeId) -> usize {
        self.assignment[u]
    }

    /// Per-node community indices.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Full member set of `u`'s community, including `u` itself.
    pub fn community_of(&self, u: NodeId) -> BTreeSet<NodeId> {
        let target = self.assignment[u];
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c == target)
            .map(|(node, _)| node)
            .collect()
    }

    /// Members of community `c` in ascending order.
    pub fn members(&self, c: usize) -> Vec<NodeId> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &label)| label == c)
            .map(|(node, _)| node)
            .collect()
    }

    /// Community sizes indexed by community.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Check the partition invariants against a node count.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.assignment.len() != n {
            return Err(Error::DimensionMismatch { left: self.assignment.len(), right: n });
        }
        let mut non_empty = vec![false; self.k];
        for &c in &self.assignment {
            if c >= self.k {
                return Err(Error::Protocol(format!("community index {c} out of range")));
            }
            non_empty[c] = true;
        }
        if non_empty.iter().any(|&b| !b) {
            return Err(Error::Protocol("empty community index".into()));
        }
        Ok(())
    }
}

/// The available detection algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DetectorKind {
    /// Clauset–Newman–Moore agglomerative modularity maximization.
    GreedyModularity,
    /// Louvain two-phase modularity optimization.
    Louvain,
    /// Asynchronous label propagation.
    LabelPropagation,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] =
        [DetectorKind::GreedyModularity, DetectorKind::Louvain, DetectorKind::LabelPropagation];

    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::GreedyModularity => "greedy",
            DetectorKind::Louvain => "louvain",
            DetectorKind::LabelPropagation => "labelprop",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "greedy" => Ok(DetectorKind::GreedyModularity),
            "louvain" => Ok(DetectorKind::Louvain),
            "labelprop" => Ok(DetectorKind::LabelPropagation),
            other => Err(Error::Protocol(format!(
                "unknown detector {other:?} (expected greedy, louvain, or labelprop)"
            ))),
        }
    }
}

impl std::fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Run a detector on a graph. Deterministic for fixed `(kind, g, seed)`.
pub fn detect(kind: DetectorKind, g: &Graph, seed: u64) -> Partition {
    assert!(g.node_count() >= 1, "detect requires at least one node");
    let partition = match kind {
        DetectorKind::GreedyModularity => greedy::run(g),
        DetectorKind::Louvain => louvain::run(g, seed),
        DetectorKind::LabelPropagation => labelprop::run(g, seed),
    };
    debug_assert!(partition.validate(g.node_count()).is_ok());
    partition
}

/// Newman modularity `Q = sum_c [ l_c/m - (d_c/2m)^2 ]` for undirected graphs.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::UndefinedMetric("modularity of a graph with no edges".into()));
    }
    p.validate(g.node_count())?;
    let mut intra = vec![0usize; p.community_count()];
    let mut degree_sum = vec![0usize; p.community_count()];
    for u in 0..g.node_count() {
        degree_sum[p.community_index(u)] += g.degree(u);
    }
    for (u, v) in g.edges() {
        if p.community_index(u) == p.community_index(v) {
            intra[p.community_index(u)] += 1;
        }
    }
    let m = m as f64;
    let q = intra
        .iter()
        .zip(&degree_sum)
        .map(|(&l_c, &d_c)| l_c as f64 / m - (d_c as f64 / (2.0 * m)).powi(2))
        .sum();
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap()
    }

    #[test]
    fn partition_canonicalization() {
        let p = Partition::from_labels(&[7, 7, 2]);
        let q = Partition::from_labels(&[0, 0, 1]);
        assert_eq!(p, q);
        assert_eq!(p.community_count(), 2);
        assert_eq!(p.community_index(0), 0);
        assert_eq!(p.community_index(2), 1);
    }

    #[test]
    fn community_of_examples() {
        let p = Partition::from_labels(&[0, 0, 1]);
        assert_eq!(p.community_of(1), BTreeSet::from([0, 1]));
        let singletons = Partition::from_labels(&[0, 1, 2]);
        assert_eq!(singletons.community_of(2), BTreeSet::from([2]));
    }

    #[test]
    fn modularity_two_triangles_split() {
        let g = two_triangles();
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        let q = modularity(&g, &p).unwrap();
        assert!((q - 0.5).abs() < 1e-12);
    }

    #[test]
    fn modularity_single_community_is_zero() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let p = Partition::from_labels(&[0, 0, 0, 0]);
        let q = modularity(&g, &p).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn modularity_empty_graph_is_undefined() {
        let g = Graph::new(3);
        let p = Partition::from_labels(&[0, 0, 0]);
        assert!(modularity(&g, &p).is_err());
    }

    #[test]
    fn all_detectors_separate_disjoint_triangles() {
        let g = two_triangles();
        for kind in DetectorKind::ALL {
            for seed in 0..5 {
                let p = detect(kind, &g, seed);
                assert_eq!(p.community_count(), 2, "{kind} seed {seed}");
                assert_eq!(p.community_of(0), BTreeSet::from([0, 1, 2]), "{kind} seed {seed}");
                assert_eq!(p.community_of(3), BTreeSet::from([3, 4, 5]), "{kind} seed {seed}");
            }
        }
    }

    #[test]
    fn detect_is_deterministic() {
        let g = two_triangles();
        for kind in DetectorKind::ALL {
            let a = detect(kind, &g, 99);
            let b = detect(kind, &g, 99);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn validate_rejects_gaps() {
        let p = Partition { assignment: vec![0, 2, 2], k: 3 };
        assert!(p.validate(3).is_err());
    }
}

//! Louvain two-phase modularity optimization.
//!
//! Local moves visit nodes in a seed-derived permutation that is re-drawn
//! each sweep; a node moves only on a strictly positive modularity gain.
//! After a level converges the graph is aggregated (communities become
//! weighted super-nodes with self-loops) and the process recurses until the
//! level-to-level modularity gain is at most `LEVEL_TOL`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

use super::Partition;

const LEVEL_TOL: f64 = 1e-7;

/// Weighted undirected graph used for aggregation levels. Self-loop weight
/// `loops[u]` stores the total intra-weight collapsed into `u` (each
/// original undirected edge counted once).
struct WeightedGraph {
    adj: Vec<BTreeMap<usize, f64>>,
    loops: Vec<f64>,
    /// Total edge weight: off-diagonal edges once plus loops once.
    total_weight: f64,
}

impl WeightedGraph {
    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn weighted_degree(&self, u: usize) -> f64 {
        self.adj[u].values().sum::<f64>() + 2.0 * self.loops[u]
    }

    fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        let mut adj = vec![BTreeMap::new(); n];
        for (u, v) in g.edges() {
            adj[u].insert(v, 1.0);
            adj[v].insert(u, 1.0);
        }
        WeightedGraph { adj, loops: vec![0.0; n], total_weight: g.edge_count() as f64 }
    }

    fn modularity(&self, labels: &[usize]) -> f64 {
        let m = self.total_weight;
        if m == 0.0 {
            return 0.0;
        }
        let k = labels.iter().copied().max().unwrap_or(0) + 1;
        let mut intra = vec![0.0; k];
        let mut tot = vec![0.0; k];
        for u in 0..self.node_count() {
            tot[labels[u]] += self.weighted_degree(u);
            intra[labels[u]] += self.loops[u];
            for (&v, &w) in &self.adj[u] {
                if u < v && labels[u] == labels[v] {
                    intra[labels[u]] += w;
                }
            }
        }
        intra
            .iter()
            .zip(&tot)
            .map(|(&in_c, &tot_c)| in_c / m - (tot_c / (2.0 * m)).powi(2))
            .sum()
    }
}

/// One level of local moves. Returns per-node community labels.
fn local_moves(g: &WeightedGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = g.node_count();
    let m = g.total_weight;
    let mut labels: Vec<usize> = (0..n).collect();
    let mut tot: Vec<f64> = (0..n).map(|u| g.weighted_degree(u)).collect();
    if m == 0.0 {
        return labels;
    }

    let mut order: Vec<usize> = (0..n).collect();
    loop {
        order.shuffle(rng);
        let mut moved = false;
        for &u in &order {
            let k_u = g.weighted_degree(u);
            let current = labels[u];

            // Weight from u to each adjacent community.
            let mut links: BTreeMap<usize, f64> = BTreeMap::new();
            for (&v, &w) in &g.adj[u] {
                *links.entry(labels[v]).or_insert(0.0) += w;
            }

            // Remove u from its community before comparing destinations.
            tot[current] -= k_u;
            let w_current = links.get(&current).copied().unwrap_or(0.0);
            let stay_gain = w_current / m - k_u * tot[current] / (2.0 * m * m);

            let mut best_community = current;
            let mut best_gain = stay_gain;
            for (&c, &w_uc) in &links {
                if c == current {
                    continue;
                }
                let gain = w_uc / m - k_u * tot[c] / (2.0 * m * m);
                if gain > best_gain {
                    best_gain = gain;
                    best_community = c;
                }
            }

            tot[best_community] += k_u;
            if best_community != current {
                labels[u] = best_community;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    labels
}

/// Collapse communities into super-nodes.
fn aggregate(g: &WeightedGraph, labels: &[usize]) -> (WeightedGraph, Vec<usize>) {
    let mut compact: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        let next = compact.len();
        compact.entry(l).or_insert(next);
    }
    let k = compact.len();
    let mut adj = vec![BTreeMap::new(); k];
    let mut loops = vec![0.0; k];
    for u in 0..g.node_count() {
        let cu = compact[&labels[u]];
        loops[cu] += g.loops[u];
        for (&v, &w) in &g.adj[u] {
            if u > v {
                continue;
            }
            let cv = compact[&labels[v]];
            if cu == cv {
                loops[cu] += w;
            } else {
                *adj[cu].entry(cv).or_insert(0.0) += w;
                *adj[cv].entry(cu).or_insert(0.0) += w;
            }
        }
    }
    let mapping = labels.iter().map(|l| compact[l]).collect();
    (WeightedGraph { adj, loops, total_weight: g.total_weight }, mapping)
}

pub(super) fn run(g: &Graph, seed: u64) -> Partition {
    let n = g.node_count();
    if g.edge_count() == 0 {
        return Partition::from_labels(&(0..n).collect::<Vec<_>>());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut level = WeightedGraph::from_graph(g);
    // node -> community of the current level, composed across levels.
    let mut node_to_level: Vec<usize> = (0..n).collect();
    // Singleton baseline of the original graph.
    let mut best_q = level.modularity(&node_to_level);

    loop {
        let labels = local_moves(&level, &mut rng);
        let q = level.modularity(&labels);
        if q - best_q <= LEVEL_TOL {
            break;
        }
        best_q = q;
        let (aggregated, mapping) = aggregate(&level, &labels);
        for slot in node_to_level.iter_mut() {
            *slot = mapping[*slot];
        }
        if aggregated.node_count() == level.node_count() {
            break;
        }
        level = aggregated;
    }

    Partition::from_labels(&node_to_level)
}

//! Asynchronous label propagation.
//!
//! Every node starts with a unique label. Sweeps visit nodes in a
//! seed-derived permutation (re-drawn each sweep); each node adopts the
//! plurality label among its neighbors, keeping its current label whenever
//! that label is among the tied winners and otherwise breaking ties toward
//! the smallest label. The process stops once a sweep changes nothing or
//! after `MAX_SWEEPS` sweeps.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

use super::Partition;

const MAX_SWEEPS: usize = 100;

pub(super) fn run(g: &Graph, seed: u64) -> Partition {
    let n = g.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..MAX_SWEEPS {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &u in &order {
            if g.degree(u) == 0 {
                continue;
            }
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for v in g.neighbors(u) {
                *counts.entry(labels[v]).or_insert(0) += 1;
            }
            let best = counts.values().copied().max().unwrap();
            // Keep the current label if it ties for the plurality;
            // otherwise take the smallest winning label (BTreeMap order).
            if counts.get(&labels[u]) == Some(&best) {
                continue;
            }
            let winner = counts
                .iter()
                .find(|(_, &c)| c == best)
                .map(|(&l, _)| l)
                .unwrap();
            labels[u] = winner;
            changed = true;
        }
        if !changed {
            break;
        }
    }

    Partition::from_labels(&labels)
}

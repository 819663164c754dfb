//! Node embeddings from uniform random walks and skip-gram training with
//! negative sampling. Walks are unbiased (the special case of biased
//! second-order walks with both bias parameters at 1), which keeps the
//! sampler simple and the output fully determined by one seed.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Hyperparameters of the embedding stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EmbeddingConfig {
    /// Embedding dimension.
    pub dim: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    /// Skip-gram context radius.
    pub window: usize,
    /// Passes over the walk corpus.
    pub epochs: usize,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            dim: 64,
            walks_per_node: 10,
            walk_length: 20,
            window: 5,
            epochs: 3,
            seed: 0,
        }
    }
}

impl EmbeddingConfig {
    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("dim", self.dim),
            ("walks_per_node", self.walks_per_node),
            ("walk_length", self.walk_length),
            ("window", self.window),
            ("epochs", self.epochs),
        ] {
            if value == 0 {
                return Err(Error::Protocol(format!("embedding {name} must be positive")));
            }
        }
        Ok(())
    }
}

const NEGATIVES_PER_PAIR: usize = 5;
const BASE_LEARNING_RATE: f64 = 0.025;
const MIN_LEARNING_RATE: f64 = 1e-4;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Train node embeddings on `g`. Deterministic given the config seed.
///
/// Isolated nodes generate no skip-gram pairs; their rows stay at the
/// (finite) random initialization, shaped only by negative-sampling pulls
/// on the output table.
pub fn compute_embeddings(g: &Graph, cfg: &EmbeddingConfig) -> Result<Array2<f64>> {
    cfg.validate()?;
    let n = g.node_count();
    if n < 2 {
        return Err(Error::Protocol(format!("embeddings need at least 2 nodes, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let d = cfg.dim;

    // Input and output tables; the input table becomes the embedding.
    let init = |rng: &mut ChaCha8Rng| {
        Array2::from_shape_fn((n, d), |_| (rng.random::<f64>() - 0.5) / d as f64)
    };
    let mut w_in = init(&mut rng);
    let mut w_out = init(&mut rng);

    // Uniform random walks.
    let mut walks: Vec<Vec<NodeId>> = Vec::with_capacity(n * cfg.walks_per_node);
    for _ in 0..cfg.walks_per_node {
        for start in 0..n {
            let mut walk = Vec::with_capacity(cfg.walk_length);
            walk.push(start);
            let mut here = start;
            for _ in 1..cfg.walk_length {
                let deg = g.degree(here);
                if deg == 0 {
                    break;
                }
                let next = g.neighbors(here).nth(rng.random_range(0..deg)).expect("degree checked");
                walk.push(next);
                here = next;
            }
            walks.push(walk);
        }
    }

    // (center, context) pairs within the window.
    let mut pairs: Vec<(NodeId, NodeId)> = Vec::new();
    for walk in &walks {
        for (i, &center) in walk.iter().enumerate() {
            let lo = i.saturating_sub(cfg.window);
            let hi = (i + cfg.window).min(walk.len() - 1);
            for (j, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i {
                    pairs.push((center, context));
                }
            }
        }
    }
    if pairs.is_empty() {
        // Graph with edges always yields pairs; edgeless graphs do not.
        return Ok(w_in);
    }

    let total_updates = (cfg.epochs * pairs.len()) as f64;
    let mut update_idx = 0usize;
    let mut grad_center = vec![0.0f64; d];
    for _ in 0..cfg.epochs {
        pairs.shuffle(&mut rng);
        for &(center, context) in &pairs {
            let lr = (BASE_LEARNING_RATE * (1.0 - update_idx as f64 / total_updates))
                .max(MIN_LEARNING_RATE);
            update_idx += 1;

            grad_center.iter_mut().for_each(|x| *x = 0.0);
            // One positive example plus uniform negatives.
            for k in 0..=NEGATIVES_PER_PAIR {
                let (other, label) = if k == 0 {
                    (context, 1.0)
                } else {
                    (rng.random_range(0..n), 0.0)
                };
                let dot: f64 = (0..d).map(|c| w_in[[center, c]] * w_out[[other, c]]).sum();
                let g_scale = sigmoid(dot) - label;
                for c in 0..d {
                    grad_center[c] += g_scale * w_out[[other, c]];
                    w_out[[other, c]] -= lr * g_scale * w_in[[center, c]];
                }
            }
            for c in 0..d {
                w_in[[center, c]] -= lr * grad_center[c];
            }
        }
    }
    Ok(w_in)
}

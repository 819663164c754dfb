//! Actor and critic networks over graphs, with hand-written backward
//! passes.
//!
//! Both networks share one backbone shape: a graph-convolution layer with
//! symmetric-normalized adjacency, a three-layer per-node MLP, and a skip
//! connection adding the convolution output back to the MLP output. The
//! actor puts a scalar head on every node and softmaxes the scores of
//! feasible counterpart nodes; the critic sum-pools node representations
//! and maps the pooled vector to one value.
//!
//! Dropout (inverted, per-element) regularizes the actor during updates;
//! the critic is always deterministic so value targets stay stable.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{EdgeToggle, Graph, NodeId};

/// Parameters of one network (actor or critic).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NetParams {
    /// Graph-convolution weight, `feature_dim × hidden_dim`.
    pub w_gcn: Array2<f64>,
    pub m1: Array2<f64>,
    pub b1: Array1<f64>,
    pub m2: Array2<f64>,
    pub b2: Array1<f64>,
    pub m3: Array2<f64>,
    pub b3: Array1<f64>,
    /// Head: per-node score (actor) or pooled-vector value (critic).
    pub head_w: Array1<f64>,
    pub head_b: f64,
}

fn glorot(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound))
}

impl NetParams {
    /// Glorot backbone, zero head. The zero head pins the initial outputs —
    /// a uniform policy and V ≡ 0 — so early advantages are unbiased; with
    /// a random head the critic of a large graph starts tens of units off
    /// (sum-pooling amplifies n), and under clipped gradients it spends
    /// hundreds of episodes crawling back while feeding the actor
    /// wrong-signed advantages.
    pub fn init(feature_dim: usize, hidden_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        NetParams {
            w_gcn: glorot(rng, feature_dim, hidden_dim),
            m1: glorot(rng, hidden_dim, hidden_dim),
            b1: Array1::zeros(hidden_dim),
            m2: glorot(rng, hidden_dim, hidden_dim),
            b2: Array1::zeros(hidden_dim),
            m3: glorot(rng, hidden_dim, hidden_dim),
            b3: Array1::zeros(hidden_dim),
            head_w: Array1::zeros(hidden_dim),
            head_b: 0.0,
        }
    }

    pub fn zeros_like(&self) -> Self {
        NetParams {
            w_gcn: Array2::zeros(self.w_gcn.raw_dim()),
            m1: Array2::zeros(self.m1.raw_dim()),
            b1: Array1::zeros(self.b1.raw_dim()),
            m2: Array2::zeros(self.m2.raw_dim()),
            b2: Array1::zeros(self.b2.raw_dim()),
            m3: Array2::zeros(self.m3.raw_dim()),
            b3: Array1::zeros(self.b3.raw_dim()),
            head_w: Array1::zeros(self.head_w.raw_dim()),
            head_b: 0.0,
        }
    }

    /// All parameters in a fixed flat order.
    pub fn values(&self) -> Vec<f64> {
        self.w_gcn
            .iter()
            .chain(self.m1.iter())
            .chain(self.b1.iter())
            .chain(self.m2.iter())
            .chain(self.b2.iter())
            .chain(self.m3.iter())
            .chain(self.b3.iter())
            .chain(self.head_w.iter())
            .chain(std::iter::once(&self.head_b))
            .copied()
            .collect()
    }

    /// Mutable references to all parameters, in [`Self::values`] order.
    pub fn values_mut(&mut self) -> Vec<&mut f64> {
        self.w_gcn
            .iter_mut()
            .chain(self.m1.iter_mut())
            .chain(self.b1.iter_mut())
            .chain(self.m2.iter_mut())
            .chain(self.b2.iter_mut())
            .chain(self.m3.iter_mut())
            .chain(self.b3.iter_mut())
            .chain(self.head_w.iter_mut())
            .chain(std::iter::once(&mut self.head_b))
            .collect()
    }

    /// `self += scale · other`, elementwise over all tensors.
    pub fn axpy(&mut self, other: &NetParams, scale: f64) {
        for (slot, value) in self.values_mut().into_iter().zip(other.values()) {
            *slot += scale * value;
        }
    }

    pub fn squared_norm(&self) -> f64 {
        self.values().iter().map(|v| v * v).sum()
    }

    /// Scale so the global gradient norm is at most `max_norm`.
    pub fn clip_global_norm(&mut self, max_norm: f64) {
        let norm = self.squared_norm().sqrt();
        if norm > max_norm {
            let scale = max_norm / norm;
            for slot in self.values_mut() {
                *slot *= scale;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    fn hidden_dim(&self) -> usize {
        self.w_gcn.ncols()
    }
}

/// The actor/critic parameter pair plus the dimensions they were built for.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ActorCriticParams {
    pub feature_dim: usize,
    pub hidden_dim: usize,
    pub actor: NetParams,
    pub critic: NetParams,
}

impl ActorCriticParams {
    pub fn init(feature_dim: usize, hidden_dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ActorCriticParams {
            feature_dim,
            hidden_dim,
            actor: NetParams::init(feature_dim, hidden_dim, &mut rng),
            critic: NetParams::init(feature_dim, hidden_dim, &mut rng),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.actor.is_finite() && self.critic.is_finite()
    }
}

/// Symmetric-normalized adjacency with self-loops:
/// entry (i, j) is `1/√((dᵢ+1)(dⱼ+1))` for edges and the diagonal.
pub fn normalized_adjacency(g: &Graph) -> Array2<f64> {
    let n = g.node_count();
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt()).collect();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        a[[i, i]] = inv_sqrt[i] * inv_sqrt[i];
        for j in g.neighbors(i) {
            a[[i, j]] = inv_sqrt[i] * inv_sqrt[j];
        }
    }
    a
}

/// Inverted-dropout masks for the four hidden activations; entries are
/// `0` or `1/(1−rate)`.
#[derive(Debug, Clone)]
pub struct DropoutMasks {
    pub h1: Array2<f64>,
    pub a1: Array2<f64>,
    pub a2: Array2<f64>,
    pub a3: Array2<f64>,
}

impl DropoutMasks {
    pub fn sample(n: usize, hidden: usize, rate: f64, rng: &mut ChaCha8Rng) -> Self {
        assert!((0.0..1.0).contains(&rate), "dropout rate must lie in [0, 1)");
        let keep = 1.0 - rate;
        let mut draw = || {
            Array2::from_shape_fn((n, hidden), |_| {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    1.0 / keep
                }
            })
        };
        DropoutMasks { h1: draw(), a1: draw(), a2: draw(), a3: draw() }
    }
}

/// Intermediate activations kept for the backward pass.
pub struct ForwardCache {
    /// `Â·X`, reused by the weight gradient.
    ax: Array2<f64>,
    /// Pre-activation of the convolution.
    q: Array2<f64>,
    /// Post-activation (and post-dropout) convolution output.
    pub h1: Array2<f64>,
    p1: Array2<f64>,
    a1: Array2<f64>,
    p2: Array2<f64>,
    a2: Array2<f64>,
    p3: Array2<f64>,
    /// Skip-connected node representations (MLP output plus `h1`).
    pub z: Array2<f64>,
}

fn relu(a: &Array2<f64>) -> Array2<f64> {
    a.mapv(|v| v.max(0.0))
}

fn relu_gate(pre: &Array2<f64>, grad: &Array2<f64>) -> Array2<f64> {
    let mut out = grad.clone();
    out.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
    out
}

fn check_shapes(p: &NetParams, x: &Array2<f64>, a_hat: &Array2<f64>) -> Result<()> {
    if x.ncols() != p.w_gcn.nrows() {
        return Err(Error::DimensionMismatch { left: x.ncols(), right: p.w_gcn.nrows() });
    }
    if a_hat.nrows() != x.nrows() || a_hat.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch { left: a_hat.nrows(), right: x.nrows() });
    }
    Ok(())
}

pub fn backbone_forward(
    p: &NetParams,
    x: &Array2<f64>,
    a_hat: &Array2<f64>,
    masks: Option<&DropoutMasks>,
) -> Result<ForwardCache> {
    check_shapes(p, x, a_hat)?;
    let ax = a_hat.dot(x);
    let q = ax.dot(&p.w_gcn);
    let mut h1 = relu(&q);
    if let Some(m) = masks {
        h1 *= &m.h1;
    }

    let layer = |input: &Array2<f64>, m: &Array2<f64>, b: &Array1<f64>, mask: Option<&Array2<f64>>| {
        let pre = input.dot(m) + b;
        let mut post = relu(&pre);
        if let Some(mask) = mask {
            post *= mask;
        }
        (pre, post)
    };
    let (p1, a1) = layer(&h1, &p.m1, &p.b1, masks.map(|m| &m.a1));
    let (p2, a2) = layer(&a1, &p.m2, &p.b2, masks.map(|m| &m.a2));
    let (p3, a3) = layer(&a2, &p.m3, &p.b3, masks.map(|m| &m.a3));
    let z = &a3 + &h1;
    Ok(ForwardCache { ax, q, h1, p1, a1, p2, a2, p3, z })
}

/// Smallest `|pre-activation|` across every ReLU in the network for the
/// given inputs.
///
/// A central finite difference with step `ε` is only a valid reference
/// for the analytic gradient when no pre-activation changes sign inside
/// the probe window: crossing a kink averages two different one-sided
/// slopes. Numerical gradient checks should skip (and redraw) any
/// configuration whose margin is not comfortably larger than `ε`.
pub fn relu_kink_margin(
    p: &NetParams,
    x: &Array2<f64>,
    g: &Graph,
    masks: Option<&DropoutMasks>,
) -> Result<f64> {
    let cache = backbone_forward(p, x, &normalized_adjacency(g), masks)?;
    let mut margin = f64::INFINITY;
    for pre in [&cache.q, &cache.p1, &cache.p2, &cache.p3] {
        for &v in pre {
            margin = margin.min(v.abs());
        }
    }
    Ok(margin)
}

/// Per-node actor scores.
pub fn actor_scores(cache: &ForwardCache, p: &NetParams) -> Array1<f64> {
    cache.z.dot(&p.head_w) + p.head_b
}

/// Pooled critic value.
pub fn critic_value(cache: &ForwardCache, p: &NetParams) -> f64 {
    cache.z.sum_axis(Axis(0)).dot(&p.head_w) + p.head_b
}

/// Gradient of a scalar loss w.r.t. every parameter, given the loss
/// gradient w.r.t. the skip output `z` and (already computed) head grads.
fn backbone_backward(
    p: &NetParams,
    cache: &ForwardCache,
    masks: Option<&DropoutMasks>,
    d_z: &Array2<f64>,
    grads: &mut NetParams,
) {
    // Layer 3.
    let mut d_a3 = d_z.clone();
    if let Some(m) = masks {
        d_a3 *= &m.a3;
    }
    let d_p3 = relu_gate(&cache.p3, &d_a3);
    grads.m3 += &cache.a2.t().dot(&d_p3);
    grads.b3 += &d_p3.sum_axis(Axis(0));
    // Layer 2.
    let mut d_a2 = d_p3.dot(&p.m3.t());
    if let Some(m) = masks {
        d_a2 *= &m.a2;
    }
    let d_p2 = relu_gate(&cache.p2, &d_a2);
    grads.m2 += &cache.a1.t().dot(&d_p2);
    grads.b2 += &d_p2.sum_axis(Axis(0));
    // Layer 1.
    let mut d_a1 = d_p2.dot(&p.m2.t());
    if let Some(m) = masks {
        d_a1 *= &m.a1;
    }
    let d_p1 = relu_gate(&cache.p1, &d_a1);
    grads.m1 += &cache.h1.t().dot(&d_p1);
    grads.b1 += &d_p1.sum_axis(Axis(0));

    // Convolution: the skip path and the MLP path both feed from h1.
    let mut d_h1 = d_p1.dot(&p.m1.t()) + d_z;
    if let Some(m) = masks {
        d_h1 *= &m.h1;
    }
    let d_q = relu_gate(&cache.q, &d_h1);
    grads.w_gcn += &cache.ax.t().dot(&d_q);
}

/// Softmax over the scores of feasible counterpart nodes, paired with
/// their actions in ascending counterpart order. Infeasible actions are
/// never represented, so their probability is exactly zero.
pub fn masked_distribution(
    scores: &Array1<f64>,
    target: NodeId,
    feasible: &BTreeSet<EdgeToggle>,
) -> Result<Vec<(EdgeToggle, f64)>> {
    if feasible.is_empty() {
        return Err(Error::NoAction);
    }
    let items: Vec<(EdgeToggle, f64)> = feasible
        .iter()
        .map(|a| {
            let v = if a.u == target { a.v } else { a.u };
            (*a, scores[v])
        })
        .collect();
    let max = items.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = items.iter().map(|(_, s)| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(items
        .into_iter()
        .zip(exps)
        .map(|((a, _), e)| (a, e / total))
        .collect())
}

/// Evaluation-mode policy: distribution over the feasible actions.
pub fn policy_forward(
    params: &ActorCriticParams,
    feats: &Array2<f64>,
    g: &Graph,
    target: NodeId,
    feasible: &BTreeSet<EdgeToggle>,
) -> Result<Vec<(EdgeToggle, f64)>> {
    let a_hat = normalized_adjacency(g);
    let cache = backbone_forward(&params.actor, feats, &a_hat, None)?;
    let scores = actor_scores(&cache, &params.actor);
    masked_distribution(&scores, target, feasible)
}

/// Evaluation-mode state value.
pub fn critic_forward(params: &ActorCriticParams, feats: &Array2<f64>, g: &Graph) -> Result<f64> {
    let a_hat = normalized_adjacency(g);
    let cache = backbone_forward(&params.critic, feats, &a_hat, None)?;
    Ok(critic_value(&cache, &params.critic))
}

/// Actor loss for one step — `−ln π(a) · advantage − entropy_coeff · H(π)`
/// — and its gradients. The advantage is treated as a constant.
#[allow(clippy::too_many_arguments)] // the full step context is the argument
pub fn actor_loss_and_grads(
    params: &ActorCriticParams,
    feats: &Array2<f64>,
    g: &Graph,
    target: NodeId,
    feasible: &BTreeSet<EdgeToggle>,
    action: &EdgeToggle,
    advantage: f64,
    entropy_coeff: f64,
    masks: Option<&DropoutMasks>,
) -> Result<(f64, NetParams)> {
    let a_hat = normalized_adjacency(g);
    let cache = backbone_forward(&params.actor, feats, &a_hat, masks)?;
    let scores = actor_scores(&cache, &params.actor);
    let dist = masked_distribution(&scores, target, feasible)?;

    let p_action = dist
        .iter()
        .find(|(a, _)| a == action)
        .map(|(_, p)| *p)
        .ok_or_else(|| Error::InvalidAction(format!("action {action:?} not in feasible set")))?;
    let entropy: f64 = dist
        .iter()
        .map(|(_, p)| if *p > 0.0 { -p * p.ln() } else { 0.0 })
        .sum();
    let loss = -p_action.max(f64::MIN_POSITIVE).ln() * advantage - entropy_coeff * entropy;

    // Gradient w.r.t. the score of feasible counterpart j:
    //   advantage·(p_j − 1[j = action]) + entropy_coeff·p_j·(ln p_j + H).
    let n = scores.len();
    let mut d_scores = Array1::zeros(n);
    for (a, p) in &dist {
        let v = if a.u == target { a.v } else { a.u };
        let indicator = if a == action { 1.0 } else { 0.0 };
        let ln_p = p.max(f64::MIN_POSITIVE).ln();
        d_scores[v] = advantage * (p - indicator) + entropy_coeff * p * (ln_p + entropy);
    }

    let mut grads = params.actor.zeros_like();
    grads.head_w += &cache.z.t().dot(&d_scores);
    grads.head_b = d_scores.sum();
    let d_z = d_scores
        .view()
        .insert_axis(Axis(1))
        .dot(&params.actor.head_w.view().insert_axis(Axis(0)));
    backbone_backward(&params.actor, &cache, masks, &d_z, &mut grads);
    Ok((loss, grads))
}

/// Critic loss for one step — `(V(s) − td_target)²` with the target held
/// constant — and its gradients. Always evaluation mode (no dropout).
pub fn critic_loss_and_grads(
    params: &ActorCriticParams,
    feats: &Array2<f64>,
    g: &Graph,
    td_target: f64,
) -> Result<(f64, NetParams)> {
    let a_hat = normalized_adjacency(g);
    let cache = backbone_forward(&params.critic, feats, &a_hat, None)?;
    let value = critic_value(&cache, &params.critic);
    let loss = (value - td_target).powi(2);
    let d_value = 2.0 * (value - td_target);

    let mut grads = params.critic.zeros_like();
    grads.head_w += &(cache.z.sum_axis(Axis(0)) * d_value);
    grads.head_b = d_value;
    let n = g.node_count();
    let mut d_z = Array2::zeros((n, params.critic.hidden_dim()));
    for mut row in d_z.rows_mut() {
        row.assign(&(&params.critic.head_w * d_value));
    }
    backbone_backward(&params.critic, &cache, None, &d_z, &mut grads);
    Ok((loss, grads))
}

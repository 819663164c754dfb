//! Advantage actor-critic training over the hiding environment.
//!
//! Each episode rolls the sampling policy through one task, then applies a
//! single gradient step per network: the actor ascends
//! `Σ_t ln π(a_t|s_t)·A_t` (with an entropy bonus), the critic regresses
//! `V(s_t)` toward `r_{t+1} + γ·V(s_{t+1})` with the target held constant.
//! Terminal states have value zero by definition.

use std::collections::BTreeSet;

use ndarray::{s, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::detection::DetectorKind;
use crate::env::{self, EnvState, HidingTask};
use crate::error::{Error, Result};
use crate::graph::{EdgeToggle, Graph, NodeId};
use crate::metrics::PenaltyWeights;
use crate::seeding::{derive_seed, streams};

use super::model::{
    actor_loss_and_grads, critic_forward, critic_loss_and_grads, policy_forward, ActorCriticParams,
    DropoutMasks,
};

/// Learning hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    /// Discount factor.
    pub gamma: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub episodes: usize,
    /// Dropout rate on the actor's hidden activations during updates.
    pub dropout: f64,
    pub hidden_dim: usize,
    pub entropy_coeff: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// Defaults sized for graphs in the low hundreds of nodes. The critic
    /// rate runs hot relative to the actor's on purpose: advantages are
    /// only as good as the value estimates, and the clipped steps cap how
    /// fast the critic can move per episode.
    fn default() -> Self {
        TrainConfig {
            gamma: 0.95,
            lr_actor: 0.01,
            lr_critic: 0.05,
            episodes: 8000,
            dropout: 0.2,
            hidden_dim: 128,
            entropy_coeff: 0.01,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Protocol(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        for lr in [self.lr_actor, self.lr_critic] {
            if !lr.is_finite() || lr <= 0.0 {
                return Err(Error::Protocol("learning rates must be positive and finite".into()));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Protocol(format!("dropout must lie in [0, 1), got {}", self.dropout)));
        }
        if self.hidden_dim == 0 {
            return Err(Error::Protocol("hidden_dim must be positive".into()));
        }
        if self.entropy_coeff < 0.0 {
            return Err(Error::Protocol("entropy_coeff must be non-negative".into()));
        }
        Ok(())
    }
}

/// One transition of a finished rollout, carrying everything the update
/// needs to re-run its forward passes.
#[derive(Debug, Clone)]
pub struct TrajectoryStep {
    pub graph: Graph,
    pub feasible: BTreeSet<EdgeToggle>,
    pub action: EdgeToggle,
    pub reward: f64,
    pub next_graph: Graph,
    pub done: bool,
}

const GRAD_CLIP: f64 = 1.0;

/// Extra feature columns appended by [`augment_features`].
pub const TASK_CHANNELS: usize = 2;

/// Append task-conditioning channels to the embedding features: an
/// indicator for the target node and one for membership in the target's
/// original community. Without them per-node scores could not depend on
/// which node is being hidden, and one global node ranking would have to
/// serve every task — sharpening the policy would then hurt it.
pub fn augment_features(base: &Array2<f64>, task: &HidingTask) -> Array2<f64> {
    let n = base.nrows();
    let d = base.ncols();
    let mut out = Array2::zeros((n, d + TASK_CHANNELS));
    out.slice_mut(s![.., ..d]).assign(base);
    for v in 0..n {
        if v == task.target {
            out[[v, d]] = 1.0;
        }
        if task.community0.contains(&v) {
            out[[v, d + 1]] = 1.0;
        }
    }
    out
}

/// One A2C update from one episode. Empty trajectories are a no-op.
pub fn a2c_update(
    mut params: ActorCriticParams,
    feats: &Array2<f64>,
    target: NodeId,
    trajectory: &[TrajectoryStep],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ActorCriticParams> {
    if trajectory.is_empty() {
        return Ok(params);
    }
    let mut actor_grads = params.actor.zeros_like();
    let mut critic_grads = params.critic.zeros_like();

    for step in trajectory {
        let v_s = critic_forward(&params, feats, &step.graph)?;
        let v_next = if step.done { 0.0 } else { critic_forward(&params, feats, &step.next_graph)? };
        let td_target = step.reward + cfg.gamma * v_next;
        let advantage = td_target - v_s;

        let (critic_loss, c_grads) = critic_loss_and_grads(&params, feats, &step.graph, td_target)?;
        let masks = if cfg.dropout > 0.0 {
            Some(DropoutMasks::sample(
                step.graph.node_count(),
                cfg.hidden_dim,
                cfg.dropout,
                rng,
            ))
        } else {
            None
        };
        let (actor_loss, a_grads) = actor_loss_and_grads(
            &params,
            feats,
            &step.graph,
            target,
            &step.feasible,
            &step.action,
            advantage,
            cfg.entropy_coeff,
            masks.as_ref(),
        )?;
        if !actor_loss.is_finite() || !critic_loss.is_finite() {
            return Err(Error::Diverged(format!(
                "non-finite loss (actor {actor_loss}, critic {critic_loss})"
            )));
        }
        actor_grads.axpy(&a_grads, 1.0);
        critic_grads.axpy(&c_grads, 1.0);
    }

    actor_grads.clip_global_norm(GRAD_CLIP);
    critic_grads.clip_global_norm(GRAD_CLIP);
    params.actor.axpy(&actor_grads, -cfg.lr_actor);
    params.critic.axpy(&critic_grads, -cfg.lr_critic);
    if !params.is_finite() {
        return Err(Error::Diverged("non-finite parameters after update".into()));
    }
    Ok(params)
}

/// Sample an action index from a distribution already in iteration order.
fn sample_action(dist: &[(EdgeToggle, f64)], rng: &mut ChaCha8Rng) -> EdgeToggle {
    let draw: f64 = rng.random();
    let mut acc = 0.0;
    for (action, p) in dist {
        acc += p;
        if draw < acc {
            return *action;
        }
    }
    dist.last().expect("distribution non-empty").0
}

/// Greedy action: maximum probability, ties toward the smallest
/// counterpart id (the distribution is in ascending counterpart order).
pub fn act(
    params: &ActorCriticParams,
    feats: &Array2<f64>,
    task: &HidingTask,
    state: &EnvState,
) -> Result<EdgeToggle> {
    let feasible = env::candidate_actions(task, state)?;
    let dist = policy_forward(params, feats, &state.graph_t, task.target, &feasible)?;
    let mut best = dist[0];
    for &(action, p) in &dist[1..] {
        if p > best.1 {
            best = (action, p);
        }
    }
    Ok(best.0)
}

/// Roll the policy through one episode. `explore` samples from the
/// distribution; otherwise actions are greedy.
pub fn rollout(
    params: &ActorCriticParams,
    feats: &Array2<f64>,
    task: &HidingTask,
    explore: bool,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<TrajectoryStep>, EnvState)> {
    let mut state = env::initial_state(task);
    let mut steps = Vec::new();
    while !state.done {
        let feasible = env::candidate_actions(task, &state)?;
        if feasible.is_empty() {
            break;
        }
        let action = if explore {
            let dist = policy_forward(params, feats, &state.graph_t, task.target, &feasible)?;
            sample_action(&dist, rng)
        } else {
            act(params, feats, task, &state)?
        };
        let (next, reward) = env::step(task, &state, &action)?;
        steps.push(TrajectoryStep {
            graph: state.graph_t.clone(),
            feasible,
            action,
            reward,
            next_graph: next.graph_t.clone(),
            done: next.done,
        });
        state = next;
    }
    Ok((steps, state))
}

/// Draws training tasks over one fixed graph: a random eligible target per
/// episode, everything else shared.
#[derive(Debug, Clone)]
pub struct TaskSampler {
    graph0: Graph,
    detector: DetectorKind,
    detector_seed: u64,
    partition0: crate::detection::Partition,
    eligible: Vec<NodeId>,
    tau: f64,
    budget: usize,
    weights: PenaltyWeights,
}

impl TaskSampler {
    /// Eligible targets are nodes with a non-empty initial candidate set.
    pub fn new(
        graph0: Graph,
        detector: DetectorKind,
        detector_seed: u64,
        tau: f64,
        budget: usize,
        weights: PenaltyWeights,
    ) -> Result<Self> {
        if graph0.edge_count() == 0 {
            return Err(Error::Protocol("training graph needs at least one edge".into()));
        }
        let partition0 = crate::detection::detect(detector, &graph0, detector_seed);
        let n = graph0.node_count();
        let eligible: Vec<NodeId> = (0..n)
            .filter(|&u| {
                crate::env::has_feasible_action(&graph0, &partition0.community_of(u), u)
            })
            .collect();
        if eligible.is_empty() {
            return Err(Error::Protocol("no node has a feasible first action".into()));
        }
        Ok(TaskSampler { graph0, detector, detector_seed, partition0, eligible, tau, budget, weights })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph0
    }

    /// The detected partition of the original graph.
    pub fn partition(&self) -> &crate::detection::Partition {
        &self.partition0
    }

    /// Build the task for one target without re-running the detector.
    pub fn task_for(&self, target: NodeId) -> HidingTask {
        HidingTask {
            graph0: self.graph0.clone(),
            detector: self.detector,
            detector_seed: self.detector_seed,
            target,
            partition0: self.partition0.clone(),
            community0: self.partition0.community_of(target),
            tau: self.tau,
            budget: self.budget,
            weights: self.weights,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> HidingTask {
        let target = self.eligible[rng.random_range(0..self.eligible.len())];
        self.task_for(target)
    }
}

/// Per-episode training diagnostics.
#[derive(Debug, Clone, Default)]
pub struct TrainStats {
    pub returns: Vec<f64>,
    pub successes: Vec<bool>,
}

impl TrainStats {
    /// Mean return over the first and last `fraction` of episodes.
    pub fn edge_means(&self, fraction: f64) -> (f64, f64) {
        let n = self.returns.len();
        let k = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
        let head: f64 = self.returns[..k].iter().sum::<f64>() / k as f64;
        let tail: f64 = self.returns[n - k..].iter().sum::<f64>() / k as f64;
        (head, tail)
    }
}

/// Full training run: initialize parameters, then one sampled episode and
/// one A2C update at a time. Reproducible from `cfg.seed`.
pub fn train(
    sampler: &TaskSampler,
    cfg: &TrainConfig,
    feats: &Array2<f64>,
) -> Result<(ActorCriticParams, TrainStats)> {
    cfg.validate()?;
    if feats.nrows() != sampler.graph0.node_count() {
        return Err(Error::DimensionMismatch {
            left: feats.nrows(),
            right: sampler.graph0.node_count(),
        });
    }
    let mut params = ActorCriticParams::init(
        feats.ncols() + TASK_CHANNELS,
        cfg.hidden_dim,
        derive_seed(cfg.seed, streams::POLICY_INIT, 0),
    );
    let mut stats = TrainStats::default();

    for episode in 0..cfg.episodes {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, streams::EPISODE, episode as u64));
        let task = sampler.sample(&mut rng);
        let task_feats = augment_features(feats, &task);
        let (trajectory, terminal) = rollout(&params, &task_feats, &task, true, &mut rng)?;
        params = a2c_update(params, &task_feats, task.target, &trajectory, cfg, &mut rng)?;
        stats.returns.push(trajectory.iter().map(|s| s.reward).sum());
        stats.successes.push(terminal.success);
    }
    Ok((params, stats))
}

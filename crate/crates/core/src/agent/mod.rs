//! The learned hider: embedding features, actor-critic networks, training,
//! checkpointing, and greedy inference over the environment.

mod checkpoint;
mod embedding;
mod model;
mod training;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use embedding::{compute_embeddings, EmbeddingConfig};
pub use model::{
    actor_loss_and_grads, critic_forward, critic_loss_and_grads, masked_distribution,
    normalized_adjacency, policy_forward, relu_kink_margin, ActorCriticParams, DropoutMasks,
    NetParams,
};
pub use training::{
    a2c_update, act, augment_features, rollout, train, TaskSampler, TrainConfig, TrainStats,
    TrajectoryStep, TASK_CHANNELS,
};

use ndarray::Array2;

use crate::baselines::HidingOutcome;
use crate::env::{self, HidingTask};
use crate::error::{Error, Result};

/// Node feature matrix, one row per node.
pub type NodeFeatures = Array2<f64>;

/// Run the greedy policy on one task, mirroring the baseline runner so the
/// harness can treat learned and hand-crafted hiders uniformly. `feats` are
/// the bare embeddings; the task-conditioning channels are appended here.
pub fn run_policy(
    params: &ActorCriticParams,
    feats: &NodeFeatures,
    task: &HidingTask,
) -> Result<HidingOutcome> {
    let expected = feats.ncols() + TASK_CHANNELS;
    if params.feature_dim != expected {
        return Err(Error::DimensionMismatch { left: params.feature_dim, right: expected });
    }
    let feats = augment_features(feats, task);
    let mut state = env::initial_state(task);
    let mut truncated = false;
    while !state.done {
        let feasible = env::candidate_actions(task, &state)?;
        if feasible.is_empty() {
            truncated = true;
            break;
        }
        let action = act(params, &feats, task, &state)?;
        state = env::step(task, &state, &action)?.0;
    }
    Ok(HidingOutcome {
        success: state.success,
        steps_used: state.step_t,
        actions: state.actions_taken.clone(),
        final_graph: state.graph_t.clone(),
        final_partition: state.partition_t.clone(),
        final_state: state,
        truncated,
    })
}

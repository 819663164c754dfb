//! The hiding environment: a deterministic MDP whose states are graphs,
//! whose actions are edge toggles incident to one target node, and whose
//! goal is to make the detector stop grouping the target with its original
//! community.
//!
//! Candidate actions are defined once against the ORIGINAL community of the
//! target (removals of intra-community edges, additions toward outside
//! nodes), so the action space stays stable across an episode; the goal
//! test always compares against the CURRENT community.

use std::collections::BTreeSet;

use crate::detection::{detect, DetectorKind, Partition};
use crate::error::{Error, Result};
use crate::graph::{EdgeToggle, Graph, NodeId, ToggleKind};
use crate::metrics::{dice_similarity, penalty, PenaltyWeights};

/// Immutable description of one hiding problem: the original graph, the
/// detector (with its fixed seed), the target node with its detected
/// community, the similarity threshold `tau`, and the toggle budget.
#[derive(Debug, Clone)]
pub struct HidingTask {
    pub graph0: Graph,
    pub detector: DetectorKind,
    pub detector_seed: u64,
    pub target: NodeId,
    pub partition0: Partition,
    pub community0: BTreeSet<NodeId>,
    pub tau: f64,
    pub budget: usize,
    pub weights: PenaltyWeights,
}

impl HidingTask {
    /// Validated constructor: runs the detector on `graph0` and records the
    /// target's original community.
    pub fn new(
        graph0: Graph,
        detector: DetectorKind,
        detector_seed: u64,
        target: NodeId,
        tau: f64,
        budget: usize,
        weights: PenaltyWeights,
    ) -> Result<Self> {
        if target >= graph0.node_count() {
            return Err(Error::Protocol(format!(
                "target {target} out of range for graph with {} nodes",
                graph0.node_count()
            )));
        }
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::Protocol(format!("tau must lie in [0, 1), got {tau}")));
        }
        if budget == 0 {
            return Err(Error::Protocol("budget must be at least 1".into()));
        }
        if graph0.edge_count() == 0 {
            return Err(Error::Protocol("hiding task needs a graph with at least one edge".into()));
        }
        let partition0 = detect(detector, &graph0, detector_seed);
        let community0 = partition0.community_of(target);
        Ok(HidingTask {
            graph0,
            detector,
            detector_seed,
            target,
            partition0,
            community0,
            tau,
            budget,
            weights,
        })
    }
}

/// One point along an episode: current graph, its detected partition, the
/// target's current community, and bookkeeping for budget and penalty.
#[derive(Debug, Clone)]
pub struct EnvState {
    pub graph_t: Graph,
    pub partition_t: Partition,
    pub community_t: BTreeSet<NodeId>,
    pub step_t: usize,
    pub dist_t: f64,
    pub done: bool,
    pub success: bool,
    pub actions_taken: Vec<EdgeToggle>,
}

/// The state at t = 0: the original graph, zero distance, nothing done yet.
pub fn initial_state(task: &HidingTask) -> EnvState {
    EnvState {
        graph_t: task.graph0.clone(),
        partition_t: task.partition0.clone(),
        community_t: task.community0.clone(),
        step_t: 0,
        dist_t: 0.0,
        done: false,
        success: false,
        actions_taken: Vec::new(),
    }
}

/// Actions feasible in `state`: remove an existing edge from the target to
/// an original-community member, or add a missing edge from the target to
/// an outside node. Every toggle is incident to the target.
pub fn candidate_actions(task: &HidingTask, state: &EnvState) -> Result<BTreeSet<EdgeToggle>> {
    if state.done {
        return Err(Error::TerminalState);
    }
    let u = task.target;
    let mut actions = BTreeSet::new();
    for v in 0..state.graph_t.node_count() {
        if v == u {
            continue;
        }
        let inside = task.community0.contains(&v);
        let connected = state.graph_t.has_edge(u, v);
        if inside && connected {
            actions.insert(EdgeToggle::remove(u, v));
        } else if !inside && !connected {
            actions.insert(EdgeToggle::add(u, v));
        }
    }
    Ok(actions)
}

/// Whether `target` has any feasible toggle at all in `graph`, given the
/// community the candidate sets are defined against: an existing edge into
/// the community to remove, or a missing edge to an outsider to add.
///
/// This is the emptiness test for [`candidate_actions`] without building
/// the full set (or a task), used when screening potential targets.
pub fn has_feasible_action(graph: &Graph, community: &BTreeSet<NodeId>, target: NodeId) -> bool {
    (0..graph.node_count()).any(|v| {
        if v == target {
            return false;
        }
        let inside = community.contains(&v);
        let connected = graph.has_edge(target, v);
        (inside && connected) || (!inside && !connected)
    })
}

/// Whether the detector has stopped grouping the target with its original
/// community: Dice similarity of the two communities (target excluded) at
/// or below `tau`.
pub fn goal_met(task: &HidingTask, state: &EnvState) -> bool {
    let mut original = task.community0.clone();
    original.remove(&task.target);
    let mut current = state.community_t.clone();
    current.remove(&task.target);
    dice_similarity(&original, &current) <= task.tau
}

/// Structural applicability: the toggle joins the target to a distinct
/// in-range counterpart and matches the current adjacency (removals need
/// the edge, additions need its absence). Returns the counterpart.
fn applies_to(state: &EnvState, target: NodeId, action: &EdgeToggle) -> Option<NodeId> {
    let v = if action.u == target {
        action.v
    } else if action.v == target {
        action.u
    } else {
        return None;
    };
    if v == target || v >= state.graph_t.node_count() {
        return None;
    }
    let connected = state.graph_t.has_edge(target, v);
    let matches = match action.kind {
        ToggleKind::Remove => connected,
        ToggleKind::Add => !connected,
    };
    matches.then_some(v)
}

fn is_feasible(task: &HidingTask, state: &EnvState, action: &EdgeToggle) -> bool {
    match applies_to(state, task.target, action) {
        Some(v) => {
            let inside = task.community0.contains(&v);
            match action.kind {
                ToggleKind::Remove => inside,
                ToggleKind::Add => !inside,
            }
        }
        None => false,
    }
}

/// Apply one feasible toggle: mutate the graph, re-run the detector, and
/// score the move. The reward is the goal indicator minus `lambda` times
/// the change in the composite penalty.
pub fn step(task: &HidingTask, state: &EnvState, action: &EdgeToggle) -> Result<(EnvState, f64)> {
    if state.done {
        return Err(Error::TerminalState);
    }
    if !is_feasible(task, state, action) {
        return Err(Error::InvalidAction(format!(
            "action {action:?} is not feasible for target {} at step {}",
            task.target, state.step_t
        )));
    }
    apply_toggle(task, state, action)
}

/// Transition on any structurally valid toggle incident to the target,
/// without requiring membership in the candidate sets.
///
/// This is the engine behind [`step`]; it exists separately because some
/// rewiring heuristics deliberately play outside the candidate sets (they
/// may cut an outside link or add an inside one) yet must share the exact
/// transition, goal, and budget accounting of the environment.
pub(crate) fn apply_toggle(
    task: &HidingTask,
    state: &EnvState,
    action: &EdgeToggle,
) -> Result<(EnvState, f64)> {
    if state.done {
        return Err(Error::TerminalState);
    }
    if applies_to(state, task.target, action).is_none() {
        return Err(Error::InvalidAction(format!(
            "action {action:?} does not apply to the current graph for target {}",
            task.target
        )));
    }

    let graph_next = state.graph_t.toggle_edge(action)?;
    let partition_next = detect(task.detector, &graph_next, task.detector_seed);
    let community_next = partition_next.community_of(task.target);
    let dist_next = penalty(
        &task.graph0,
        &graph_next,
        &task.partition0,
        &partition_next,
        &task.weights,
    )?;
    let step_next = state.step_t + 1;

    let mut actions_taken = state.actions_taken.clone();
    actions_taken.push(*action);
    let mut next = EnvState {
        graph_t: graph_next,
        partition_t: partition_next,
        community_t: community_next,
        step_t: step_next,
        dist_t: dist_next,
        done: false,
        success: false,
        actions_taken,
    };
    let goal = goal_met(task, &next);
    next.success = goal;
    next.done = goal || step_next == task.budget;

    let reward = (goal as u8) as f64 - task.weights.lambda * (dist_next - state.dist_t);
    Ok((next, reward))
}

/// Loss of a finished episode: the goal-failure indicator plus the scaled
/// final penalty. Lower is better; 0 is a perfect hide with no distortion.
pub fn episode_loss(task: &HidingTask, terminal: &EnvState) -> Result<f64> {
    if !terminal.done {
        return Err(Error::Protocol("episode loss is defined only for finished episodes".into()));
    }
    let decept = if terminal.success { 0.0 } else { 1.0 };
    Ok(decept + task.weights.lambda * terminal.dist_t)
}

//! Non-learning hiding strategies.
//!
//! Two families share the environment's transition, goal, and budget
//! accounting but differ in action space:
//!
//! - **Node pickers** (`Random`, `Degree`, `Betweenness`) select any other
//!   node in the graph and toggle the tie toward it — severing the edge when
//!   present, forging it otherwise — regardless of community membership.
//!   Each counterpart is used at most once per episode, since a second
//!   toggle would only undo the first.
//! - **Candidate-set methods** (`Roam`, `Greedy`) draw from the same
//!   feasible sets as the learned policy: removals of edges into the
//!   original community, additions toward unconnected outside nodes.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::env::{self, EnvState, HidingTask};
use crate::error::{Error, Result};
use crate::graph::{EdgeToggle, Graph, NodeId, ToggleKind};

/// Selection rule for the next toggle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum HiderMethod {
    /// Toggle the tie toward a uniformly random other node.
    Random,
    /// Toggle the tie toward the highest-degree other node.
    Degree,
    /// Toggle the tie toward the node with the highest betweenness
    /// centrality, recomputed on the current graph every step.
    Betweenness,
    /// Alternating rounds on the candidate sets: drop the edge to the
    /// highest-degree neighbor inside the original community, then add an
    /// edge to the highest-degree outside node.
    Roam,
    /// Relaxed one-step lookahead on the candidate sets: evaluate the single
    /// best removal and the single best addition by hypothetical episode
    /// loss, keep the better.
    Greedy,
}

impl HiderMethod {
    pub const ALL: [HiderMethod; 5] = [
        HiderMethod::Random,
        HiderMethod::Degree,
        HiderMethod::Betweenness,
        HiderMethod::Roam,
        HiderMethod::Greedy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HiderMethod::Random => "random",
            HiderMethod::Degree => "degree",
            HiderMethod::Betweenness => "betweenness",
            HiderMethod::Roam => "roam",
            HiderMethod::Greedy => "greedy",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Protocol(format!("unknown hiding method '{s}'")))
    }
}

impl std::fmt::Display for HiderMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of running one hiding attempt to completion.
#[derive(Debug, Clone)]
pub struct HidingOutcome {
    pub success: bool,
    pub steps_used: usize,
    pub actions: Vec<EdgeToggle>,
    pub final_graph: Graph,
    pub final_partition: crate::detection::Partition,
    pub final_state: EnvState,
    /// True when the method's action pool ran dry before the goal or the
    /// budget.
    pub truncated: bool,
}

fn outcome_from(state: EnvState, truncated: bool) -> HidingOutcome {
    HidingOutcome {
        success: state.success,
        steps_used: state.step_t,
        actions: state.actions_taken.clone(),
        final_graph: state.graph_t.clone(),
        final_partition: state.partition_t.clone(),
        final_state: state,
        truncated,
    }
}

/// Counterpart of an action: the endpoint that is not the target.
fn counterpart(target: NodeId, action: &EdgeToggle) -> NodeId {
    if action.u == target {
        action.v
    } else {
        action.u
    }
}

/// Nodes a picker may still toggle toward: everyone except the target and
/// the counterparts already used this episode. Ascending by construction.
fn node_pool(state: &EnvState, target: NodeId, used: &BTreeSet<NodeId>) -> Vec<NodeId> {
    (0..state.graph_t.node_count()).filter(|v| *v != target && !used.contains(v)).collect()
}

/// The toggle a node pick implies: sever an existing tie, forge a missing one.
fn toggle_toward(state: &EnvState, target: NodeId, v: NodeId) -> EdgeToggle {
    if state.graph_t.has_edge(target, v) {
        EdgeToggle::remove(target, v)
    } else {
        EdgeToggle::add(target, v)
    }
}

/// The pool entry maximizing `score`; ties break toward the smallest id
/// (the pool is ascending and strict `>` keeps the first maximum).
fn argmax_node<F: Fn(NodeId) -> f64>(pool: &[NodeId], score: F) -> NodeId {
    let mut best = pool[0];
    let mut best_score = score(best);
    for &v in &pool[1..] {
        let s = score(v);
        if s > best_score {
            best = v;
            best_score = s;
        }
    }
    best
}

/// The candidate action whose counterpart maximizes `score`; ties break
/// toward the smallest counterpart id (set iteration is ascending, strict
/// `>` keeps the first maximum).
fn argmax_by<F: Fn(NodeId) -> f64>(
    target: NodeId,
    actions: &BTreeSet<EdgeToggle>,
    score: F,
) -> Option<EdgeToggle> {
    let mut best: Option<(f64, EdgeToggle)> = None;
    for action in actions {
        let v = counterpart(target, action);
        let s = score(v);
        match &best {
            Some((b, _)) if s <= *b => {}
            _ => best = Some((s, *action)),
        }
    }
    best.map(|(_, a)| a)
}

/// Intra-community degree of `w`: neighbors of `w` inside `community`.
fn intra_degree(g: &Graph, community: &BTreeSet<NodeId>, w: NodeId) -> usize {
    g.neighbors(w).filter(|x| community.contains(x)).count()
}

enum Choice {
    Action(EdgeToggle),
    /// An already-evaluated successor state (saves a detector run).
    Evaluated(EnvState),
}

/// Selection for the candidate-set methods (`Roam`, `Greedy`).
fn choose_restricted(
    method: HiderMethod,
    task: &HidingTask,
    state: &EnvState,
    actions: &BTreeSet<EdgeToggle>,
    roam_phase: &mut usize,
) -> Result<Choice> {
    let u = task.target;
    let picked = match method {
        HiderMethod::Roam => {
            let removals: BTreeSet<EdgeToggle> =
                actions.iter().filter(|a| a.kind == ToggleKind::Remove).copied().collect();
            let additions: BTreeSet<EdgeToggle> =
                actions.iter().filter(|a| a.kind == ToggleKind::Add).copied().collect();
            let by_degree = |set: &BTreeSet<EdgeToggle>| {
                argmax_by(u, set, |v| state.graph_t.degree(v) as f64)
            };
            // Phase 0 removes, phase 1 adds; fall through when one side is
            // exhausted so the budget is still spent.
            let pick = if roam_phase.is_multiple_of(2) {
                by_degree(&removals).or_else(|| by_degree(&additions))
            } else {
                by_degree(&additions).or_else(|| by_degree(&removals))
            };
            *roam_phase += 1;
            Choice::Action(pick.expect("non-empty"))
        }
        HiderMethod::Greedy => {
            let removals: BTreeSet<EdgeToggle> =
                actions.iter().filter(|a| a.kind == ToggleKind::Remove).copied().collect();
            let additions: BTreeSet<EdgeToggle> =
                actions.iter().filter(|a| a.kind == ToggleKind::Add).copied().collect();
            // One removal candidate (max intra-community degree) and one
            // addition candidate (max total degree outside).
            let remove = argmax_by(u, &removals, |w| {
                intra_degree(&state.graph_t, &task.community0, w) as f64
            });
            let add = argmax_by(u, &additions, |v| state.graph_t.degree(v) as f64);

            // Hypothetical loss if the episode ended right after the action.
            let evaluate = |action: EdgeToggle| -> Result<(EnvState, f64)> {
                let (next, _) = env::step(task, state, &action)?;
                let decept = if next.success { 0.0 } else { 1.0 };
                let loss = decept + task.weights.lambda * next.dist_t;
                Ok((next, loss))
            };
            let remove_eval = remove.map(evaluate).transpose()?;
            let add_eval = add.map(evaluate).transpose()?;
            let best = match (remove_eval, add_eval) {
                // Ties prefer the removal.
                (Some(r), Some(a)) => {
                    if a.1 < r.1 {
                        a
                    } else {
                        r
                    }
                }
                (Some(r), None) => r,
                (None, Some(a)) => a,
                (None, None) => unreachable!("actions non-empty"),
            };
            Choice::Evaluated(best.0)
        }
        other => {
            return Err(Error::Protocol(format!("{other} is not a candidate-set method")));
        }
    };
    Ok(picked)
}

/// Run `method` on `task` until the goal is met, the budget is spent, or
/// the method's action pool runs dry. Deterministic given `rng_seed` (only
/// Random consumes randomness).
pub fn run_baseline(method: HiderMethod, task: &HidingTask, rng_seed: u64) -> Result<HidingOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut state = env::initial_state(task);
    let mut roam_phase = 0usize;
    let mut used: BTreeSet<NodeId> = BTreeSet::new();

    while !state.done {
        let next = match method {
            HiderMethod::Random | HiderMethod::Degree | HiderMethod::Betweenness => {
                let pool = node_pool(&state, task.target, &used);
                if pool.is_empty() {
                    return Ok(outcome_from(state, true));
                }
                let v = match method {
                    HiderMethod::Random => pool[rng.random_range(0..pool.len())],
                    HiderMethod::Degree => {
                        argmax_node(&pool, |v| state.graph_t.degree(v) as f64)
                    }
                    HiderMethod::Betweenness => {
                        let bc = betweenness_centrality(&state.graph_t);
                        argmax_node(&pool, |v| bc[v])
                    }
                    _ => unreachable!("handled by the outer match"),
                };
                used.insert(v);
                let action = toggle_toward(&state, task.target, v);
                env::apply_toggle(task, &state, &action)?.0
            }
            HiderMethod::Roam | HiderMethod::Greedy => {
                let actions = env::candidate_actions(task, &state)?;
                if actions.is_empty() {
                    return Ok(outcome_from(state, true));
                }
                match choose_restricted(method, task, &state, &actions, &mut roam_phase)? {
                    Choice::Action(action) => env::step(task, &state, &action)?.0,
                    Choice::Evaluated(next) => next,
                }
            }
        };
        state = next;
    }
    Ok(outcome_from(state, false))
}

/// Exact unweighted betweenness centrality via single-source shortest-path
/// accumulation. Endpoint pairs are unordered, so accumulated dependencies
/// are halved; disconnected pairs contribute nothing.
pub fn betweenness_centrality(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut bc = vec![0.0; n];

    let mut stack: Vec<NodeId> = Vec::with_capacity(n);
    let mut preds: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = std::collections::VecDeque::new();

    for s in 0..n {
        stack.clear();
        queue.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }

    for b in &mut bc {
        *b /= 2.0;
    }
    bc
}

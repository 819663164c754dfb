//! Community membership hiding: detectors, metrics, a rewiring environment,
//! hand-crafted baselines, a learned policy, and an experiment harness.
//!
//! The library revolves around one question: given a graph, a community
//! detector, and a target node, which few edge toggles around the target
//! make the detector stop grouping it with its original community — without
//! distorting the rest of the graph?

pub mod agent;
pub mod baselines;
pub mod detection;
pub mod env;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod seeding;

pub use baselines::{betweenness_centrality, run_baseline, HiderMethod, HidingOutcome};
pub use detection::{detect, modularity, DetectorKind, Partition};
pub use env::{candidate_actions, episode_loss, goal_met, initial_state, step, EnvState, HidingTask};
pub use error::{Error, Result};
pub use graph::{load_edge_list, EdgeToggle, Graph, LoadedGraph, NodeId, ToggleKind};
pub use harness::{
    budget, emit_results, load_dataset, parse_results, run_experiment, sample_targets,
    ExperimentConfig, Method, OutputFormat, ResultsDocument, SummaryRow, TrialRecord,
};
pub use metrics::{
    dice_similarity, harmonic_f1, jaccard_graph_distance, nmi, penalty, PenaltyWeights,
};
pub use seeding::derive_seed;

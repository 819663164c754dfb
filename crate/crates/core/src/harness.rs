//! Experiment runner: seeded trial sampling, per-trial hiding episodes run
//! in parallel, aggregation into success-rate summaries, and deterministic
//! CSV/JSON emission.
//!
//! Every random decision derives from the experiment seed, so repeating a
//! configuration reproduces its output byte for byte (wall-clock
//! measurement is off by default for the same reason).

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{compute_embeddings, run_policy, ActorCriticParams, Checkpoint, NodeFeatures};
use crate::baselines::{run_baseline, HiderMethod};
use crate::detection::{detect, DetectorKind, Partition};
use crate::env::{self, HidingTask};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph, LoadedGraph, NodeId};
use crate::metrics::{harmonic_f1, jaccard_graph_distance, nmi, PenaltyWeights};
use crate::seeding::{derive_seed, streams};

/// Which hider an experiment evaluates.
#[derive(Debug, Clone)]
pub enum Method {
    /// One of the hand-crafted heuristics.
    Baseline(HiderMethod),
    /// The learned policy restored from a checkpoint file.
    Agent { checkpoint: PathBuf },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Baseline(m) => m.name(),
            Method::Agent { .. } => "agent",
        }
    }
}

/// One full experiment: dataset, detector pairing, hider, and protocol
/// knobs. `detector_train` is what the method was fitted against and is
/// echoed in outputs; `detector_eval` is what the experiment actually runs
/// (the two differ in transferability studies).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub detector_train: DetectorKind,
    pub detector_eval: DetectorKind,
    pub method: Method,
    pub tau: f64,
    /// Budget multiplier on the average degree ratio μ = m/n (typically ½,
    /// 1, or 2).
    pub beta_multiplier: f64,
    pub trials: usize,
    pub weights: PenaltyWeights,
    pub seed: u64,
    /// Record wall-clock per trial. Off by default so identical
    /// configurations produce byte-identical output files.
    pub measure_runtime: bool,
}

impl ExperimentConfig {
    /// A symmetric experiment (train and eval detector equal) with the
    /// protocol defaults: τ = 0.5, β = 1μ, 100 trials, seed 0.
    pub fn new(dataset_path: impl Into<PathBuf>, detector: DetectorKind, method: Method) -> Self {
        ExperimentConfig {
            dataset_path: dataset_path.into(),
            detector_train: detector,
            detector_eval: detector,
            method,
            tau: 0.5,
            beta_multiplier: 1.0,
            trials: 100,
            weights: PenaltyWeights::default(),
            seed: 0,
            measure_runtime: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Protocol("an experiment needs at least one trial".into()));
        }
        if !(0.0..1.0).contains(&self.tau) {
            return Err(Error::Protocol(format!("tau must lie in [0, 1), got {}", self.tau)));
        }
        if !self.beta_multiplier.is_finite() || self.beta_multiplier <= 0.0 {
            return Err(Error::Protocol(format!(
                "budget multiplier must be positive, got {}",
                self.beta_multiplier
            )));
        }
        Ok(())
    }
}

/// Edge budget for a graph: `max(1, round(multiplier · m/n))`.
pub fn budget(beta_multiplier: f64, g: &Graph) -> usize {
    let mu = g.edge_count() as f64 / g.node_count() as f64;
    (beta_multiplier * mu).round().max(1.0) as usize
}

/// Load an edge-list dataset from disk.
pub fn load_dataset(path: &Path) -> Result<LoadedGraph> {
    let file = File::open(path)?;
    load_edge_list(BufReader::new(file))
}

/// Outcome of one trial. Serialized field names match the CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    #[serde(rename = "trial")]
    pub trial_index: usize,
    pub target: NodeId,
    pub success: bool,
    #[serde(rename = "steps")]
    pub steps_used: usize,
    /// Partition similarity between the detector's view of the original
    /// and of the final graph.
    #[serde(rename = "nmi")]
    pub nmi_after: f64,
    /// Jaccard distance between the original and final adjacency.
    #[serde(rename = "jaccard")]
    pub jaccard_after: f64,
    pub runtime_ms: u64,
    /// The target had no feasible first action, so the trial was recorded
    /// as an immediate failure (zero steps).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub infeasible: bool,
}

/// Aggregated experiment outcome plus the configuration echo that
/// identifies the table cell it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub detector_train: String,
    pub detector_eval: String,
    pub tau: f64,
    /// Resolved edge budget (count, not multiplier).
    pub beta: usize,
    pub trials: usize,
    /// Fraction of trials in which the target was hidden.
    pub sr: f64,
    /// Half-width of the 95% normal-approximation interval on `sr`.
    pub sr_ci: f64,
    pub nmi_mean: f64,
    /// Harmonic mean of `sr` and `nmi_mean`.
    pub f1: f64,
}

/// Seeded target sequence for an experiment: each draw is uniform over the
/// eligible nodes outside the previous target's community, so consecutive
/// targets never share a community. Nodes with no feasible first action
/// (no removable intra-community edge and no addable outside edge) are
/// never eligible.
pub fn sample_targets(g: &Graph, p: &Partition, trials: usize, seed: u64) -> Result<Vec<NodeId>> {
    p.validate(g.node_count())?;
    if p.community_count() < 2 {
        return Err(Error::Protocol(
            "target sampling needs a partition with at least two communities".into(),
        ));
    }
    let eligible: Vec<NodeId> = (0..g.node_count())
        .filter(|&u| env::has_feasible_action(g, &p.community_of(u), u))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = Vec::with_capacity(trials);
    let mut prev_community: Option<usize> = None;
    for _ in 0..trials {
        let pool: Vec<NodeId> = eligible
            .iter()
            .copied()
            .filter(|&u| Some(p.community_index(u)) != prev_community)
            .collect();
        if pool.is_empty() {
            return Err(Error::Protocol(
                "no eligible target outside the previous target's community".into(),
            ));
        }
        let t = pool[rng.random_range(0..pool.len())];
        prev_community = Some(p.community_index(t));
        targets.push(t);
    }
    Ok(targets)
}

/// Run every trial of an experiment and aggregate the summary.
///
/// Trials execute on parallel workers; each one is seeded by
/// `(experiment seed, trial index)`, so the schedule never affects
/// results. A target with no feasible first action (possible only with a
/// partition that diverges from the sampling partition, kept as a guard)
/// is recorded as an immediate failure and flagged.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<TrialRecord>, SummaryRow)> {
    cfg.validate()?;
    let graph = load_dataset(&cfg.dataset_path)?.graph;
    let beta = budget(cfg.beta_multiplier, &graph);
    let detector_seed = derive_seed(cfg.seed, streams::DETECTOR, 0);
    let partition0 = detect(cfg.detector_eval, &graph, detector_seed);
    let targets = sample_targets(
        &graph,
        &partition0,
        cfg.trials,
        derive_seed(cfg.seed, streams::TARGETS, 0),
    )?;

    // Agent assets are loaded once and shared read-only across workers.
    let agent: Option<(ActorCriticParams, NodeFeatures)> = match &cfg.method {
        Method::Agent { checkpoint } => {
            let ckpt = Checkpoint::load(checkpoint)?;
            let feats = compute_embeddings(&graph, &ckpt.embedding)?;
            Some((ckpt.params, feats))
        }
        Method::Baseline(_) => None,
    };

    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialRecord> {
            let target = targets[trial];
            let start = cfg.measure_runtime.then(Instant::now);
            let task = HidingTask {
                graph0: graph.clone(),
                detector: cfg.detector_eval,
                detector_seed,
                target,
                partition0: partition0.clone(),
                community0: partition0.community_of(target),
                tau: cfg.tau,
                budget: beta,
                weights: cfg.weights,
            };
            let infeasible = !env::has_feasible_action(&graph, &task.community0, target);
            let (success, steps_used, final_graph, final_partition) = if infeasible {
                (false, 0, graph.clone(), partition0.clone())
            } else {
                let outcome = match (&cfg.method, &agent) {
                    (Method::Baseline(m), _) => {
                        run_baseline(*m, &task, derive_seed(cfg.seed, streams::TRIAL, trial as u64))?
                    }
                    (Method::Agent { .. }, Some((params, feats))) => {
                        run_policy(params, feats, &task)?
                    }
                    (Method::Agent { .. }, None) => unreachable!("agent assets loaded above"),
                };
                (outcome.success, outcome.steps_used, outcome.final_graph, outcome.final_partition)
            };
            let nmi_after = nmi(&partition0, &final_partition);
            let jaccard_after = jaccard_graph_distance(&graph, &final_graph)?;
            let runtime_ms = start.map_or(0, |s| s.elapsed().as_millis() as u64);
            Ok(TrialRecord {
                trial_index: trial,
                target,
                success,
                steps_used,
                nmi_after,
                jaccard_after,
                runtime_ms,
                infeasible,
            })
        })
        .collect::<Result<_>>()?;

    let summary = summarize(cfg, beta, &records);
    Ok((records, summary))
}

/// Aggregate trial records into one summary row.
pub fn summarize(cfg: &ExperimentConfig, beta: usize, records: &[TrialRecord]) -> SummaryRow {
    let n = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let sr = successes as f64 / n as f64;
    let sr_ci = 1.96 * (sr * (1.0 - sr) / n as f64).sqrt();
    let nmi_mean = records.iter().map(|r| r.nmi_after).sum::<f64>() / n as f64;
    SummaryRow {
        method: cfg.method.name().to_string(),
        detector_train: cfg.detector_train.name().to_string(),
        detector_eval: cfg.detector_eval.name().to_string(),
        tau: cfg.tau,
        beta,
        trials: n,
        sr,
        sr_ci,
        nmi_mean,
        f1: harmonic_f1(sr, nmi_mean),
    }
}

/// Output encodings supported by [`emit_results`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Protocol(format!(
                "unknown output format {other:?} (expected csv or json)"
            ))),
        }
    }
}

/// The JSON document emitted by [`emit_results`]: the summary, the flagged
/// trial count, and every record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub summary: SummaryRow,
    /// How many trials were recorded as failures because the target had no
    /// feasible first action.
    pub infeasible_trials: usize,
    pub records: Vec<TrialRecord>,
}

pub const RECORD_HEADER: &str = "trial,target,success,steps,nmi,jaccard,runtime_ms";
pub const SUMMARY_HEADER: &str =
    "method,detector_train,detector_eval,tau,beta,trials,sr,sr_ci,nmi_mean,f1";

/// Write results to a sink.
///
/// CSV layout: the per-trial table, a blank line, then the one-row summary
/// table. Floats use the shortest decimal form that parses back exactly,
/// so output for a given input is byte-stable.
pub fn emit_results<W: Write>(
    records: &[TrialRecord],
    summary: &SummaryRow,
    format: OutputFormat,
    sink: &mut W,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Protocol("emit_results needs at least one trial record".into()));
    }
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(RECORD_HEADER);
            out.push('\n');
            for r in records {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.trial_index, r.target, r.success, r.steps_used, r.nmi_after, r.jaccard_after,
                    r.runtime_ms
                );
            }
            out.push('\n');
            out.push_str(SUMMARY_HEADER);
            out.push('\n');
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                summary.method,
                summary.detector_train,
                summary.detector_eval,
                summary.tau,
                summary.beta,
                summary.trials,
                summary.sr,
                summary.sr_ci,
                summary.nmi_mean,
                summary.f1
            );
            sink.write_all(out.as_bytes())?;
        }
        OutputFormat::Json => {
            let doc = ResultsDocument {
                summary: summary.clone(),
                infeasible_trials: records.iter().filter(|r| r.infeasible).count(),
                records: records.to_vec(),
            };
            let text = serde_json::to_string_pretty(&doc)
                .map_err(|e| Error::Protocol(format!("result serialization failed: {e}")))?;
            sink.write_all(text.as_bytes())?;
            sink.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn parse_field<T: FromStr>(token: Option<&str>, line: usize, what: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what} column"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what}: {token:?}"),
    })
}

/// Parse text produced by [`emit_results`] with [`OutputFormat::Csv`] back
/// into records and a summary.
pub fn parse_results(text: &str) -> Result<(Vec<TrialRecord>, SummaryRow)> {
    let mut lines = text.lines().enumerate();
    let expect_header = |got: Option<(usize, &str)>, want: &str| -> Result<usize> {
        match got {
            Some((idx, line)) if line == want => Ok(idx + 1),
            Some((idx, line)) => Err(Error::Parse {
                line: idx + 1,
                message: format!("expected header {want:?}, found {line:?}"),
            }),
            None => Err(Error::Parse { line: 0, message: format!("missing header {want:?}") }),
        }
    };
    expect_header(lines.next(), RECORD_HEADER)?;

    let mut records = Vec::new();
    let summary_header_line;
    loop {
        match lines.next() {
            Some((_, "")) => {
                summary_header_line = lines.next();
                break;
            }
            Some((idx, line)) => {
                let lineno = idx + 1;
                let mut cols = line.split(',');
                records.push(TrialRecord {
                    trial_index: parse_field(cols.next(), lineno, "trial")?,
                    target: parse_field(cols.next(), lineno, "target")?,
                    success: parse_field(cols.next(), lineno, "success")?,
                    steps_used: parse_field(cols.next(), lineno, "steps")?,
                    nmi_after: parse_field(cols.next(), lineno, "nmi")?,
                    jaccard_after: parse_field(cols.next(), lineno, "jaccard")?,
                    runtime_ms: parse_field(cols.next(), lineno, "runtime_ms")?,
                    infeasible: false,
                });
            }
            None => {
                return Err(Error::Parse { line: 0, message: "missing summary section".into() })
            }
        }
    }
    expect_header(summary_header_line, SUMMARY_HEADER)?;

    let (idx, line) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 0, message: "missing summary row".into() })?;
    let lineno = idx + 1;
    let mut cols = line.split(',');
    let summary = SummaryRow {
        method: parse_field(cols.next(), lineno, "method")?,
        detector_train: parse_field(cols.next(), lineno, "detector_train")?,
        detector_eval: parse_field(cols.next(), lineno, "detector_eval")?,
        tau: parse_field(cols.next(), lineno, "tau")?,
        beta: parse_field(cols.next(), lineno, "beta")?,
        trials: parse_field(cols.next(), lineno, "trials")?,
        sr: parse_field(cols.next(), lineno, "sr")?,
        sr_ci: parse_field(cols.next(), lineno, "sr_ci")?,
        nmi_mean: parse_field(cols.next(), lineno, "nmi_mean")?,
        f1: parse_field(cols.next(), lineno, "f1")?,
    };
    Ok((records, summary))
}

//! `hidenet`: command-line driver for community membership hiding.
//!
//! Subcommands: `detect` (run a community detector), `hide` (rewire one
//! target node and print the edits), `train` (fit the learned hider and
//! save a checkpoint), `benchmark` (run a seeded multi-trial experiment
//! and emit CSV/JSON tables).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use hidenet_core::agent::{
    compute_embeddings, train, Checkpoint, EmbeddingConfig, TaskSampler, TrainConfig,
};
use hidenet_core::graph::ToggleKind;
use hidenet_core::harness::{
    budget, emit_results, load_dataset, run_experiment, ExperimentConfig, Method, OutputFormat,
};
use hidenet_core::seeding::{derive_seed, streams};
use hidenet_core::{
    detect, run_baseline, DetectorKind, HiderMethod, HidingTask, PenaltyWeights,
};

#[derive(Parser)]
#[command(
    name = "hidenet",
    version,
    about = "Hide a node from black-box community detection by rewiring its neighborhood"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a community detector and emit one node,community row per node.
    Detect(DetectArgs),
    /// Hide one target node and print the ordered edge edits.
    Hide(HideArgs),
    /// Train the learned hider on a dataset and write a checkpoint.
    Train(TrainArgs),
    /// Run a seeded multi-trial experiment and emit records plus a summary.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Edge-list file: one `u v` pair per line; `#` comments allowed.
    #[arg(long)]
    dataset: PathBuf,
    /// Detector: greedy, louvain, or labelprop.
    #[arg(long, default_value = "greedy")]
    detector: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct HideArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Detector the hider plays against: greedy, louvain, or labelprop.
    #[arg(long, default_value = "greedy")]
    detector: String,
    /// Hider: random, degree, betweenness, roam, greedy, or agent.
    #[arg(long)]
    method: String,
    /// Checkpoint file (required when --method agent).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Target node, using the dataset's own node labels.
    #[arg(long)]
    target: i64,
    /// Goal threshold on the Dice similarity between the target's old and
    /// new community.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    /// Edge budget as a multiple of m/n.
    #[arg(long, default_value_t = 1.0)]
    beta_mult: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight of the distortion penalty in the reward.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Mix between partition distance and adjacency distance in the
    /// penalty.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Detector to train against.
    #[arg(long, default_value = "greedy")]
    detector: String,
    /// Where to write the trained checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_mult: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Training episodes.
    #[arg(long, default_value_t = TrainConfig::default().episodes)]
    episodes: usize,
    /// Hidden width of the policy and value networks.
    #[arg(long, default_value_t = TrainConfig::default().hidden_dim)]
    hidden_dim: usize,
    /// Node embedding dimension.
    #[arg(long, default_value_t = EmbeddingConfig::default().dim)]
    embedding_dim: usize,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Detector the experiment evaluates against.
    #[arg(long, default_value = "greedy")]
    detector: String,
    /// Detector the method was trained against (echoed in the summary;
    /// defaults to --detector).
    #[arg(long)]
    detector_train: Option<String>,
    /// Hider: random, degree, betweenness, roam, greedy, or agent.
    #[arg(long)]
    method: String,
    /// Checkpoint file (required when --method agent).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    beta_mult: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Record wall-clock per trial (off by default so repeated runs are
    /// byte-identical).
    #[arg(long, default_value_t = false)]
    measure_runtime: bool,
}

fn open_sink(out: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("cannot create output file {}", path.display()))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_method(name: &str, checkpoint: &Option<PathBuf>) -> anyhow::Result<Method> {
    if name.eq_ignore_ascii_case("agent") {
        let checkpoint = checkpoint
            .clone()
            .context("--method agent requires --checkpoint <file>")?;
        Ok(Method::Agent { checkpoint })
    } else {
        Ok(Method::Baseline(HiderMethod::parse(name)?))
    }
}

fn cmd_detect(args: &DetectArgs) -> anyhow::Result<()> {
    let loaded = load_dataset(&args.dataset)?;
    let kind = DetectorKind::parse(&args.detector)?;
    let partition = detect(kind, &loaded.graph, args.seed);
    let mut sink = open_sink(&args.out)?;
    match OutputFormat::parse(&args.format)? {
        OutputFormat::Csv => {
            let mut text = String::from("node_id,community_id\n");
            for (node, label) in loaded.labels.iter().enumerate() {
                text.push_str(&format!("{label},{}\n", partition.community_index(node)));
            }
            sink.write_all(text.as_bytes())?;
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = loaded
                .labels
                .iter()
                .enumerate()
                .map(|(node, label)| {
                    serde_json::json!({
                        "node_id": label,
                        "community_id": partition.community_index(node),
                    })
                })
                .collect();
            serde_json::to_writer_pretty(&mut sink, &rows)?;
            sink.write_all(b"\n")?;
        }
    }
    sink.flush()?;
    eprintln!(
        "{} nodes, {} edges, {} communities ({})",
        loaded.graph.node_count(),
        loaded.graph.edge_count(),
        partition.community_count(),
        kind.name()
    );
    Ok(())
}

fn cmd_hide(args: &HideArgs) -> anyhow::Result<()> {
    let loaded = load_dataset(&args.dataset)?;
    let kind = DetectorKind::parse(&args.detector)?;
    let method = parse_method(&args.method, &args.checkpoint)?;
    let weights = PenaltyWeights::new(args.alpha, args.lambda)?;
    let beta = budget(args.beta_mult, &loaded.graph);
    let target = loaded
        .node_for_label(args.target)
        .with_context(|| format!("target {} does not appear in the dataset", args.target))?;
    let task = HidingTask::new(
        loaded.graph.clone(),
        kind,
        derive_seed(args.seed, streams::DETECTOR, 0),
        target,
        args.tau,
        beta,
        weights,
    )?;
    let outcome = match &method {
        Method::Baseline(m) => {
            run_baseline(*m, &task, derive_seed(args.seed, streams::TRIAL, 0))?
        }
        Method::Agent { checkpoint } => {
            let ckpt = Checkpoint::load(checkpoint)?;
            let feats = compute_embeddings(&loaded.graph, &ckpt.embedding)?;
            hidenet_core::agent::run_policy(&ckpt.params, &feats, &task)?
        }
    };

    let mut sink = open_sink(&args.out)?;
    let mut text = String::new();
    for (i, toggle) in outcome.actions.iter().enumerate() {
        let counterpart = if toggle.u == target { toggle.v } else { toggle.u };
        let verb = match toggle.kind {
            ToggleKind::Remove => "unfollow",
            ToggleKind::Add => "follow",
        };
        text.push_str(&format!("step {}: {verb} {}\n", i + 1, loaded.labels[counterpart]));
    }
    text.push_str(&format!(
        "hidden: {} ({} of {} edits used)\n",
        if outcome.success { "yes" } else { "no" },
        outcome.steps_used,
        beta
    ));
    sink.write_all(text.as_bytes())?;
    sink.flush()?;
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> anyhow::Result<()> {
    let loaded = load_dataset(&args.dataset)?;
    let kind = DetectorKind::parse(&args.detector)?;
    let weights = PenaltyWeights::new(args.alpha, args.lambda)?;
    let beta = budget(args.beta_mult, &loaded.graph);
    let sampler = TaskSampler::new(
        loaded.graph.clone(),
        kind,
        derive_seed(args.seed, streams::DETECTOR, 0),
        args.tau,
        beta,
        weights,
    )?;
    let embedding = EmbeddingConfig {
        dim: args.embedding_dim,
        seed: derive_seed(args.seed, streams::EMBEDDING, 0),
        ..EmbeddingConfig::default()
    };
    let feats = compute_embeddings(&loaded.graph, &embedding)?;
    let train_cfg = TrainConfig {
        episodes: args.episodes,
        hidden_dim: args.hidden_dim,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let (params, stats) = train(&sampler, &train_cfg, &feats)?;
    Checkpoint::new(embedding, train_cfg, params).save(&args.checkpoint)?;
    let (first, last) = stats.edge_means(0.1);
    let successes = stats.successes.iter().filter(|&&s| s).count();
    eprintln!(
        "trained {} episodes on {} (β = {beta}): mean return {first:.3} → {last:.3}, {successes} successful episodes; checkpoint written to {}",
        args.episodes,
        args.dataset.display(),
        args.checkpoint.display()
    );
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> anyhow::Result<()> {
    let detector_eval = DetectorKind::parse(&args.detector)?;
    let detector_train = match &args.detector_train {
        Some(name) => DetectorKind::parse(name)?,
        None => detector_eval,
    };
    let cfg = ExperimentConfig {
        dataset_path: args.dataset.clone(),
        detector_train,
        detector_eval,
        method: parse_method(&args.method, &args.checkpoint)?,
        tau: args.tau,
        beta_multiplier: args.beta_mult,
        trials: args.trials,
        weights: PenaltyWeights::new(args.alpha, args.lambda)?,
        seed: args.seed,
        measure_runtime: args.measure_runtime,
    };
    let format = OutputFormat::parse(&args.format)?;
    let (records, summary) = run_experiment(&cfg)?;
    let mut sink = open_sink(&args.out)?;
    emit_results(&records, &summary, format, &mut sink)?;
    sink.flush()?;
    eprintln!(
        "{} on {} vs {}: SR {:.1}% ± {:.1}% over {} trials (τ = {}, β = {})",
        summary.method,
        args.dataset.display(),
        summary.detector_eval,
        100.0 * summary.sr,
        100.0 * summary.sr_ci,
        summary.trials,
        summary.tau,
        summary.beta
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Hide(args) => cmd_hide(args),
        Command::Train(args) => cmd_train(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    };
    match result {
        // A closed downstream pipe (`hidenet detect | head`) is not an error;
        // exit quietly like other line-oriented Unix tools.
        Err(e) if is_broken_pipe(&e) => Ok(()),
        other => other,
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

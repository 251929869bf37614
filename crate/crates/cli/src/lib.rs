//! Subcommand front end: simulate → extract → graph → features → train →
//! detect. Every stage reads and writes only the files named in its flags.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use truthy_core::classify::train;
use truthy_core::diffusion::to_dot;
use truthy_core::features::FeatureConfig;
use truthy_core::formats::{
    campaigns_from_json, join_labels, model_from_json, model_to_json, read_features_csv, read_labels_csv,
    verdicts_to_json, write_extract_csv, write_features_csv, write_labels_csv,
};
use truthy_core::ingest::{load_stream, write_stream, StreamReport};
use truthy_core::meme::{build_index, MemeId, MemeKind};
use truthy_core::pipeline::{analyze_stream, detect, network_for, PipelineError};
use truthy_core::simulate::gen_dataset;
use truthy_core::{TrainConfig, TweetRecord};

/// Process exit status. Codes are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    Usage,
    InputFailure,
    Internal,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Usage => 1,
            ExitStatus::InputFailure => 2,
            ExitStatus::Internal => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "truthy", version, about = "Meme diffusion analysis and astroturf detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled synthetic stream of organic memes and campaigns
    Simulate(SimulateArgs),
    /// Summarize the memes found in a stream as CSV
    Extract(ExtractArgs),
    /// Export one meme's diffusion network as Graphviz DOT
    Graph(GraphArgs),
    /// Compute delivery features for every analyzable meme
    Features(FeaturesArgs),
    /// Fit a logistic model on labeled feature rows
    Train(TrainArgs),
    /// Score memes with a model, or with the rule scorer when none is given
    Detect(DetectArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Number of organic memes
    #[arg(long)]
    organic: usize,
    /// JSON list of campaign specs; omitted fields take defaults
    #[arg(long)]
    campaigns: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output stream (JSONL)
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth labels (CSV: meme_kind,meme_key,label)
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output CSV; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_parser = parse_kind)]
    kind: MemeKind,
    #[arg(long)]
    key: String,
    #[arg(long)]
    dot: PathBuf,
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output CSV; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Account age, in days, below which an author counts as new
    #[arg(long, default_value_t = 30)]
    new_account_days: i64,
    /// Texts compared pairwise for near-duplicates
    #[arg(long, default_value_t = 2000)]
    dup_cap: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    l2_lambda: f64,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output verdicts (JSON)
    #[arg(long)]
    out: PathBuf,
}

fn parse_kind(s: &str) -> Result<MemeKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<(), Failure>;

/// Runs one invocation. `args` excludes the program name.
pub fn run<I, S>(args: I) -> ExitStatus
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once("truthy".into()).chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitStatus::Success,
                _ => ExitStatus::Usage,
            };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Extract(a) => extract(a),
        Command::Graph(a) => graph(a),
        Command::Features(a) => features(a),
        Command::Train(a) => train_cmd(a),
        Command::Detect(a) => detect_cmd(a),
    };
    match result {
        Ok(()) => ExitStatus::Success,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitStatus::InputFailure
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitStatus::Internal
        }
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => write_bytes(p, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Vec<TweetRecord>> {
    let (records, report) = load_stream(path).with_context(|| format!("loading {}", path.display()))?;
    log_report(path, &report);
    Ok(records)
}

fn log_report(path: &Path, r: &StreamReport) {
    eprintln!(
        "{}: {} records, {} rejected ({} duplicate ids), {} out of order",
        path.display(),
        r.n_records,
        r.n_rejected,
        r.n_duplicate_ids,
        r.n_order_violations
    );
}

fn simulate(a: SimulateArgs) -> Outcome {
    let campaigns = match &a.campaigns {
        Some(p) => campaigns_from_json(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => Vec::new(),
    };
    let dataset = gen_dataset(a.organic, &campaigns, a.seed)?;
    let mut buf = Vec::new();
    write_stream(&mut buf, &dataset.records)?;
    write_bytes(&a.out, &buf)?;
    if let Some(p) = &a.labels {
        let mut buf = Vec::new();
        write_labels_csv(&mut buf, &dataset.truth)?;
        write_bytes(p, &buf)?;
    }
    eprintln!("simulated {} records across {} memes", dataset.records.len(), dataset.truth.len());
    Ok(())
}

fn extract(a: ExtractArgs) -> Outcome {
    let records = load(&a.input)?;
    let mut buf = Vec::new();
    write_extract_csv(&mut buf, &build_index(&records))?;
    emit(a.out.as_deref(), &buf)?;
    Ok(())
}

fn graph(a: GraphArgs) -> Outcome {
    let records = load(&a.input)?;
    let meme = MemeId::parse(a.kind, &a.key)?;
    let net = network_for(&records, &meme)?;
    let problems = net.check_invariants();
    if !problems.is_empty() {
        return Err(Failure::Internal(anyhow!("network invariants violated: {}", problems.join("; "))));
    }
    write_bytes(&a.dot, to_dot(&net).as_bytes())?;
    eprintln!("{meme}: {} nodes, {} edges", net.nodes.len(), net.edges.len());
    Ok(())
}

fn features(a: FeaturesArgs) -> Outcome {
    let records = load(&a.input)?;
    let mut cfg = FeatureConfig { new_account_days: a.new_account_days, ..Default::default() };
    cfg.duplicates.max_compared = a.dup_cap;
    let rows = analyze_stream(&records, &cfg).map_err(|e| match e {
        PipelineError::Diffusion(_) | PipelineError::Feature(_) => Failure::Internal(e.into()),
        other => Failure::Input(other.into()),
    })?;
    for row in &rows {
        let bad = row.vector.out_of_bounds();
        if !bad.is_empty() {
            return Err(Failure::Internal(anyhow!("{}: features out of bounds: {}", row.meme, bad.join(", "))));
        }
    }
    let mut buf = Vec::new();
    write_features_csv(&mut buf, &rows)?;
    emit(a.out.as_deref(), &buf)?;
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Outcome {
    let rows = read_features_csv(read_text(&a.features)?.as_bytes())
        .with_context(|| format!("parsing {}", a.features.display()))?;
    let labels =
        read_labels_csv(read_text(&a.labels)?.as_bytes()).with_context(|| format!("parsing {}", a.labels.display()))?;
    let data = join_labels(&rows, &labels);
    let cfg = TrainConfig { learning_rate: a.learning_rate, epochs: a.epochs, l2_lambda: a.l2_lambda, seed: a.seed };
    let model = train(&data, &cfg)?;
    write_bytes(&a.out, model_to_json(&model).as_bytes())?;
    eprintln!("trained on {} labeled memes", data.len());
    Ok(())
}

fn detect_cmd(a: DetectArgs) -> Outcome {
    let rows = read_features_csv(read_text(&a.features)?.as_bytes())
        .with_context(|| format!("parsing {}", a.features.display()))?;
    let model = match &a.model {
        Some(p) => Some(model_from_json(&read_text(p)?).with_context(|| format!("parsing {}", p.display()))?),
        None => None,
    };
    let verdicts = detect(&rows, model.as_ref())?;
    write_bytes(&a.out, verdicts_to_json(&verdicts).as_bytes())?;
    let flagged = verdicts.iter().filter(|v| v.label.is_truthy()).count();
    eprintln!("scored {} memes, {flagged} flagged truthy", verdicts.len());
    Ok(())
}

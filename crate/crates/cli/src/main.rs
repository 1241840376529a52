use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spatial_sketch::ascii::{render, AsciiFormat};
use spatial_sketch::dataset::{
    read_jsonl, split_indices, write_jsonl_line, DatasetRecord, DatasetStats, PredictionRecord, SPLIT_NAMES,
};
use spatial_sketch::generator::{realize_placement, GenConfig, GenError, Generator};
use spatial_sketch::spatial::{Edge, Entity, SpatialGraph};
use spatial_sketch::verifier::{
    evaluate_consistency, evaluate_desc_vs_ascii, render_summary, score_predictions, TaskMode, VerifyMode,
};

/// Environment variable that overrides the configured generation seed.
const SEED_ENV: &str = "SSF_SEED";

#[derive(Parser)]
#[command(name = "spatial-sketch", version, about = "Generate and score grid-based spatial reasoning data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset as JSONL plus a statistics sidecar.
    Gen(GenArgs),
    /// Score a predictions file against a gold dataset.
    Score(ScoreArgs),
    /// Check one grid against a description or a query and label.
    Verify(VerifyArgs),
    /// Lay out a set of relations and print it as ASCII.
    Render(RenderArgs),
    /// Recompute dataset statistics, optionally checking a sidecar.
    Stats(StatsArgs),
}

#[derive(Args)]
struct GenArgs {
    /// JSON config; missing keys take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Stats sidecar path [default: <out stem>.stats.json]
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Also write train/validation/test files of these sizes, e.g. 4000,500,1000.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<usize>>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// answer_only, ascii_only, answer_and_ascii or desc_only
    #[arg(long, default_value = "answer_and_ascii")]
    mode: TaskMode,
    /// JSON report path; a .txt summary is written next to it.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Grid file, or - for stdin.
    #[arg(long)]
    grid: String,
    #[arg(long, conflicts_with_all = ["query", "label"])]
    description: Option<String>,
    #[arg(long, default_value = "verify_ascii")]
    mode: VerifyMode,
    #[arg(long, requires = "label")]
    query: Option<String>,
    #[arg(long, requires = "query")]
    label: Option<String>,
}

#[derive(Args)]
struct RenderArgs {
    /// Relations such as "B lower-right A; D right B". A bare label adds a
    /// lone entity.
    #[arg(long, conflicts_with = "edges_file", required_unless_present = "edges_file")]
    edges: Option<String>,
    #[arg(long)]
    edges_file: Option<PathBuf>,
    #[arg(long, default_value = "grid")]
    format: AsciiFormat,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    data: PathBuf,
    /// Sidecar to compare against; exits 1 on any difference.
    #[arg(long)]
    check: Option<PathBuf>,
    /// Write the recomputed statistics here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure that maps to a specific exit code.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Score(a) => cmd_score(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Render(a) => cmd_render(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            if let Some(Exit(code, msg)) = err.downcast_ref::<Exit>() {
                eprintln!("{msg}");
                return ExitCode::from(*code);
            }
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn read_records<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_jsonl(BufReader::new(file)).with_context(|| format!("{}", path.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<GenConfig> {
    let mut config: GenConfig = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", p.display()))?
        }
        None => GenConfig::default(),
    };
    if let Ok(seed) = std::env::var(SEED_ENV) {
        config.seed = seed
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={seed:?} is not an unsigned integer"))?;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_gen(args: GenArgs) -> Result<u8> {
    let config = load_config(args.config.as_deref())?;
    let file = File::create(&args.out).with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut out = BufWriter::new(file);
    let mut records = Vec::with_capacity(config.target_count);
    for item in Generator::new(config.clone())? {
        let record = item.map_err(|e: GenError| anyhow::anyhow!(e))?.to_record();
        write_jsonl_line(&mut out, &record)?;
        records.push(record);
    }
    out.flush()?;

    let stats_path = args.stats.unwrap_or_else(|| sibling(&args.out, ".stats.json"));
    write_json(&stats_path, &DatasetStats::compute(&records))?;

    if let Some(sizes) = args.split {
        if sizes.len() != SPLIT_NAMES.len() {
            bail!("--split needs {} sizes, got {}", SPLIT_NAMES.len(), sizes.len());
        }
        let parts = split_indices(records.len(), &sizes, config.seed)?;
        for (name, idx) in SPLIT_NAMES.iter().zip(parts) {
            let path = sibling(&args.out, &format!(".{name}.jsonl"));
            let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
            for i in idx {
                write_jsonl_line(&mut w, &records[i])?;
            }
            w.flush()?;
        }
    }
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(0)
}

fn cmd_score(args: ScoreArgs) -> Result<u8> {
    let gold: Vec<DatasetRecord> = read_records(&args.gold)?;
    let preds: Vec<PredictionRecord> = read_records(&args.pred)?;
    let report = score_predictions(&gold, &preds, args.mode)?;
    write_json(&args.report, &report)?;
    let summary = render_summary(&report);
    let txt = args.report.with_extension("txt");
    fs::write(&txt, &summary).with_context(|| format!("cannot write {}", txt.display()))?;
    print!("{summary}");
    Ok(0)
}

fn read_grid(source: &str) -> Result<String> {
    if source == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        fs::read_to_string(source).with_context(|| format!("cannot read grid {source}"))
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let grid = read_grid(&args.grid)?;
    let pass = match (args.description, args.query, args.label) {
        (Some(desc), _, _) => {
            let r = evaluate_desc_vs_ascii(&grid, &desc, args.mode).map_err(|e| Exit(2, e.to_string()))?;
            println!("{}: {} ({}/{} claims)", if r.pass { "PASS" } else { "FAIL" }, args.mode, r.correct.len(), r.correct.len() + r.errors.len());
            println!("{}", serde_json::to_string_pretty(&r)?);
            r.pass
        }
        (None, Some(query), Some(label)) => {
            let r = evaluate_consistency(&grid, &query, &label).map_err(|e| Exit(2, e.to_string()))?;
            println!("{}: expected {:?}, grid says {:?}", if r.pass { "PASS" } else { "FAIL" }, r.expected, r.actual);
            r.pass
        }
        _ => bail!("give --description, or --query with --label"),
    };
    Ok(if pass { 0 } else { 1 })
}

/// Entities and edges from "S dir O" items separated by `;` or newlines.
fn parse_relations(text: &str) -> Result<(Vec<Entity>, Vec<Edge>)> {
    let mut entities = Vec::new();
    let mut edges = Vec::new();
    for item in text.split([';', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
        if item.split_whitespace().count() == 1 {
            entities.push(item.parse::<Entity>()?);
        } else {
            let edge: Edge = item.parse().with_context(|| format!("bad relation {item:?}"))?;
            entities.extend([edge.subject, edge.object]);
            edges.push(edge);
        }
    }
    Ok((entities, edges))
}

fn cmd_render(args: RenderArgs) -> Result<u8> {
    let text = match (args.edges, args.edges_file) {
        (Some(t), _) => t,
        (None, Some(p)) => fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?,
        (None, None) => bail!("give --edges or --edges-file"),
    };
    let (entities, edges) = parse_relations(&text)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let placement = match realize_placement(&entities, &edges, &mut rng) {
        Ok(p) => p,
        Err(GenError::Inconsistent) => return Err(Exit(2, GenError::Inconsistent.to_string()).into()),
        Err(e) => return Err(e.into()),
    };
    SpatialGraph::new(entities, edges)?;
    println!("{}", render(&placement, args.format));
    Ok(0)
}

fn cmd_stats(args: StatsArgs) -> Result<u8> {
    let records: Vec<DatasetRecord> = read_records(&args.data)?;
    let stats = DatasetStats::compute(&records);
    match &args.out {
        Some(p) => write_json(p, &stats)?,
        None => println!("{}", serde_json::to_string_pretty(&stats)?),
    }
    if let Some(path) = args.check {
        let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        let recorded: DatasetStats =
            serde_json::from_str(&text).with_context(|| format!("invalid stats file {}", path.display()))?;
        if recorded != stats {
            eprintln!("stats mismatch: {} does not match {}", path.display(), args.data.display());
            return Ok(1);
        }
        eprintln!("stats match");
    }
    Ok(0)
}

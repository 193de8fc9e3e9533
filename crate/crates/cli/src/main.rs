//! `embias`: evaluate and debias word embedding spaces from the shell.
//!
//! Machine-readable output goes to stdout, diagnostics to stderr. Exit codes:
//! 0 success, 1 runtime failure, 2 invalid arguments or specification.

use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use embias::catalog::DATA_DIR_ENV;
use embias::json::to_stable_json;
use embias::metrics::{EvaluateOptions, SimilarityDataset, DEFAULT_PERMUTATIONS, DEFAULT_SEED};
use embias::store::{load_binary, load_text, save_binary, save_text};
use embias::{
    builtin_spec, builtin_specs, compose, evaluate, parse_spec, BiasSpecification, DataDir, DebiasMethod,
    EmbeddingSpace, EvaluationReport, Metric,
};

#[derive(Parser)]
#[command(name = "embias", version, about = "Measure and remove bias in word embedding spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run bias and quality measures and print the report as JSON
    Evaluate(EvaluateArgs),
    /// Write a debiased copy of a space and print method metadata
    Debias(DebiasArgs),
    /// Print the vectors of some words
    Vectors(VectorsArgs),
    /// List the builtin bias specifications
    Specs,
    /// Run the REST service
    Serve(ServeArgs),
}

#[derive(clap::Args)]
struct SpaceArgs {
    /// Text embeddings, or the .vectors file of a binary pair (its .vocab sits alongside)
    #[arg(long)]
    space: PathBuf,
    /// Read at most this many words from a text file
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Builtin specification name or path to a JSON specification
    #[arg(long)]
    spec: String,
    /// Comma-separated metrics (weat, ect, bat, ibt, ibt_cluster, ibt_svm, sq, all);
    /// defaults to every metric the specification supports
    #[arg(long)]
    metrics: Option<String>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_PERMUTATIONS)]
    permutations: usize,
    /// Extra word-similarity dataset (TSV) for the sq metric; repeatable
    #[arg(long = "sq-dataset")]
    sq_datasets: Vec<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Binary,
}

#[derive(clap::Args)]
struct DebiasArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long)]
    spec: String,
    /// gbdd, bam, gbdd-bam or bam-gbdd (applied left to right)
    #[arg(long)]
    method: String,
    /// Output path; for binary output the .vocab and .vectors extensions are used
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(clap::Args)]
struct VectorsArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Comma-separated words
    #[arg(long)]
    words: String,
}

#[derive(clap::Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// 0 picks a free port
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Upload size limit in bytes
    #[arg(long)]
    upload_cap: Option<usize>,
    /// Lifetime of uploaded spaces in seconds
    #[arg(long)]
    ttl: Option<u64>,
    /// Memory budget for uploaded spaces in bytes
    #[arg(long)]
    memory_cap: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Directory with bundled spaces and similarity datasets
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,
    /// Load bundled spaces at startup
    #[arg(long)]
    preload: bool,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn runtime(message: impl ToString) -> Self {
        Self {
            code: 1,
            message: message.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_spec(source: &str) -> CliResult<BiasSpecification> {
    if let Some(spec) = builtin_spec(source) {
        return Ok(spec);
    }
    let path = Path::new(source);
    if !path.is_file() {
        return Err(Failure::usage(format!(
            "spec {source:?} is neither a builtin name nor a readable file"
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{source}: {e}")))?;
    parse_spec(&text).map_err(|e| Failure::usage(format!("{source}: {e}")))
}

fn load_space(args: &SpaceArgs) -> CliResult<EmbeddingSpace> {
    let path = &args.space;
    let loaded = if path.extension().is_some_and(|e| e == "vectors") {
        load_binary(path.with_extension("vocab"), path)
    } else {
        load_text(path, args.limit)
    };
    loaded.map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::runtime(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::runtime(format!("stdout: {e}"))),
    }
}

fn print_table(report: &EvaluationReport) {
    let mut rows: Vec<(String, String)> = Vec::new();
    if let Some(w) = &report.weat {
        rows.push(("weat statistic".into(), format!("{:.4}", w.statistic)));
        rows.push((
            "weat effect size".into(),
            w.effect_size.map_or("undefined".into(), |e| format!("{e:.4}")),
        ));
        rows.push(("weat p-value".into(), format!("{:.4}", w.p_value)));
    }
    if let Some(v) = report.ect {
        rows.push(("ect".into(), format!("{v:.4}")));
    }
    if let Some(v) = report.bat {
        rows.push(("bat".into(), format!("{v:.4}")));
    }
    if let Some(ibt) = &report.ibt {
        if let Some(v) = ibt.cluster_accuracy {
            rows.push(("ibt cluster accuracy".into(), format!("{v:.4}")));
        }
        if let Some(v) = ibt.svm_accuracy {
            rows.push(("ibt svm accuracy".into(), format!("{v:.4}")));
        }
    }
    for (name, r) in report.sq.iter().flatten() {
        rows.push((
            format!("sq {name}"),
            format!("{:.4} ({}/{} pairs)", r.correlation, r.pairs_used, r.pairs_total),
        ));
    }
    for (set, c) in &report.coverage {
        if c.retained < c.total {
            rows.push((format!("coverage {}", set.as_str()), format!("{}/{}", c.retained, c.total)));
        }
    }
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    eprintln!("{} on {}", report.spec, report.space);
    for (k, v) in rows {
        eprintln!("  {k:<width$}  {v}");
    }
}

fn run_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let spec = load_spec(&args.spec)?;
    let metrics = match &args.metrics {
        Some(list) => Metric::parse_list(list).map_err(Failure::usage)?,
        None => Metric::defaults_for(&spec),
    };
    if let Some(m) = metrics.iter().find(|m| m.requires_explicit() && !spec.is_explicit()) {
        return Err(Failure::usage(embias::Error::IncompatibleMetric { metric: m.to_string() }));
    }
    let mut sq_datasets = DataDir::from_env().similarity_datasets().map_err(Failure::runtime)?;
    for path in &args.sq_datasets {
        sq_datasets.push(SimilarityDataset::load(path).map_err(Failure::runtime)?);
    }

    let space = load_space(&args.space)?;
    let options = EvaluateOptions {
        seed: args.seed,
        n_permutations: args.permutations,
        sq_datasets,
        ..Default::default()
    };
    let report = evaluate(&space, &spec, &metrics, &options).map_err(Failure::runtime)?;
    print_table(&report);
    emit(&to_stable_json(&report).map_err(Failure::runtime)?, args.out.as_deref())
}

fn run_debias(args: DebiasArgs) -> CliResult<()> {
    let sequence = DebiasMethod::parse_sequence(&args.method).map_err(Failure::usage)?;
    let spec = load_spec(&args.spec)?;
    let space = load_space(&args.space)?;
    let result = compose(&space, &spec, &sequence).map_err(Failure::runtime)?;
    match args.format {
        Format::Text => save_text(&result.space, &args.out),
        Format::Binary => save_binary(
            &result.space,
            args.out.with_extension("vocab"),
            args.out.with_extension("vectors"),
        ),
    }
    .map_err(|e| Failure::runtime(format!("{}: {e}", args.out.display())))?;
    for warning in &result.metadata().warnings {
        eprintln!("warning: {warning}");
    }
    emit(&to_stable_json(&result.metadata()).map_err(Failure::runtime)?, None)
}

fn run_vectors(args: VectorsArgs) -> CliResult<()> {
    let words: Vec<&str> = args.words.split(',').map(str::trim).filter(|w| !w.is_empty()).collect();
    if words.is_empty() {
        return Err(Failure::usage("--words needs at least one word"));
    }
    let space = load_space(&args.space)?;
    let results: Vec<_> = words.iter().map(|w| space.lookup(w)).collect();
    emit(&to_stable_json(&results).map_err(Failure::runtime)?, None)
}

fn run_specs() -> CliResult<()> {
    let summaries: Vec<_> = builtin_specs().iter().map(BiasSpecification::summary).collect();
    emit(&to_stable_json(&summaries).map_err(Failure::runtime)?, None)
}

fn run_serve(args: ServeArgs) -> CliResult<()> {
    let mut config = embias_server::Config::from_env().map_err(Failure::usage)?;
    config.bind = args.bind;
    config.port = args.port;
    if let Some(v) = args.upload_cap {
        config.upload_cap = v;
    }
    if let Some(v) = args.ttl {
        config.ttl = Duration::from_secs(v);
    }
    if let Some(v) = args.memory_cap {
        config.memory_cap = v;
    }
    if let Some(v) = args.workers {
        config.workers = v.max(1);
    }
    if let Some(v) = args.data_dir {
        config.data_dir = v;
    }
    config.preload |= args.preload;

    let runtime = tokio::runtime::Runtime::new().map_err(Failure::runtime)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(config.addr())
            .await
            .map_err(|e| Failure::runtime(format!("bind {}: {e}", config.addr())))?;
        let addr = listener.local_addr().map_err(Failure::runtime)?;
        let state = Arc::new(embias_server::AppState::new(config).map_err(Failure::runtime)?);
        println!("listening on http://{addr}");
        std::io::stdout().flush().ok();
        tokio::select! {
            served = embias_server::serve(listener, state) => served.map_err(Failure::runtime),
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_env("EMBIAS_LOG"))
        .with_writer(std::io::stderr)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Evaluate(a) => run_evaluate(a),
        Command::Debias(a) => run_debias(a),
        Command::Vectors(a) => run_vectors(a),
        Command::Specs => run_specs(),
        Command::Serve(a) => run_serve(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

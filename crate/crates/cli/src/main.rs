use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;

/// Score genetic interactions with the M and J measures and analyse the
/// resulting networks.
#[derive(Debug, Parser)]
#[command(name = "epistasis", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Primary input file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Directory receiving all output files; created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 0.08)]
    pub m_threshold: f64,
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 0.0886)]
    pub j_threshold: f64,
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = 0.05)]
    pub p_max: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Keep every strain pair instead of collapsing to gene pairs.
    #[arg(long, global = true)]
    pub no_aggregate: bool,
    /// Summary format, printed to stdout and written next to the outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter an SGA file and write the canonical six-column TSV.
    Ingest,
    /// Score every pair with M and log J and classify it.
    Score,
    /// Find the J threshold matching the number of M calls.
    Calibrate,
    /// Exclusive, shared and symmetric hub candidates.
    Hubs(commands::HubArgs),
    /// Profile similarity and degree tables.
    Similarity(commands::SimilarityArgs),
    /// Per-category quadrant segregation of co-annotated pairs.
    Annotate(commands::AnnotateArgs),
    /// Hypergeometric enrichment of a gene set.
    Enrich(commands::EnrichArgs),
    /// Sample a population from a model and compare with theory.
    Simulate(commands::SimulateArgs),
    /// Check a model or survival table against the neutrality function.
    Neutrality(commands::NeutralityArgs),
}

/// Failure classes mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Config(anyhow::Error),
}

impl Failure {
    pub fn config(msg: impl std::fmt::Display) -> Self {
        Failure::Config(anyhow::anyhow!("{msg}"))
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = Cli::parse();
    let result = configure_workers(cli.global.workers).and_then(|()| run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_workers(workers: Option<usize>) -> Result<(), Failure> {
    let Some(n) = workers else { return Ok(()) };
    if n == 0 {
        return Err(Failure::config("--workers must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(format!("cannot start {n} workers: {e}")))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Ingest => commands::ingest(g),
        Command::Score => commands::score(g),
        Command::Calibrate => commands::calibrate(g),
        Command::Hubs(a) => commands::hubs(g, a),
        Command::Similarity(a) => commands::similarity(g, a),
        Command::Annotate(a) => commands::annotate(g, a),
        Command::Enrich(a) => commands::enrich(g, a),
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Neutrality(a) => commands::neutrality(g, a),
    }
}

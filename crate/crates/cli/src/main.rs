mod bench;
mod landscape;
mod solve;

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use searchsynth_core::corpus::{default_problems_dir, Corpus};
use searchsynth_core::lang::print_spec;
use searchsynth_core::{
    parse_spec, Problem, ProblemConfig, SearchSpec, SelectConfig, SessionConfig,
};

#[derive(Parser)]
#[command(
    name = "searchsynth",
    version,
    about = "Synthesize adaptive search strategies from problem specifications"
)]
struct Cli {
    /// Directory holding the problem corpus and its manifest.json.
    #[arg(long, global = true, env = "SEARCHSYNTH_PROBLEMS")]
    problems: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a problem against a hidden target, printing each round.
    Solve(solve::SolveArgs),
    /// Solve corpus entries repeatedly and tabulate rounds and sizes.
    Bench(bench::BenchArgs),
    /// Entropy of every query of a 2-dimensional query space, as CSV.
    Landscape(landscape::LandscapeArgs),
    /// Re-run a transcript's answers and check the same queries come out.
    Replay(solve::ReplayArgs),
    /// Print a parsed specification.
    Ast(AstArgs),
    /// Run the HTTP session service.
    Serve(ServeArgs),
}

/// Options shared by every command that runs the synthesizer.
#[derive(Args, Clone, Debug)]
pub struct EngineArgs {
    /// Seed for target draws and query sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Query spaces up to this size are scanned exhaustively.
    #[arg(long, default_value_t = searchsynth_core::problem::DEFAULT_SCAN_CAP)]
    pub scan_cap: u128,
    /// Query draws per round when the query space is sampled.
    #[arg(long, default_value_t = searchsynth_core::synth::DEFAULT_SAMPLE_BUDGET)]
    pub sample_budget: usize,
    /// Stop with an error after this many rounds (default 10 x |T|).
    #[arg(long)]
    pub max_rounds: Option<usize>,
}

impl EngineArgs {
    pub fn problem_config(&self) -> ProblemConfig {
        let mut c = ProblemConfig {
            scan_cap: self.scan_cap,
            ..Default::default()
        };
        c.symexec.seed = self.seed;
        c
    }

    pub fn session_config(&self) -> SessionConfig {
        SessionConfig {
            select: SelectConfig {
                sample_budget: self.sample_budget,
                seed: self.seed,
            },
            max_rounds: self.max_rounds,
        }
    }
}

#[derive(Args)]
struct AstArgs {
    /// Path to a .search file or the name of a corpus entry.
    spec: String,
    #[arg(long, value_enum, default_value_t = AstFormat::Json)]
    format: AstFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum AstFormat {
    Json,
    /// The specification printed back as source.
    Source,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Write a JSON snapshot of each session here after every change, and
    /// restore from it on start.
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    /// Idle sessions are dropped after this many hours.
    #[arg(long, default_value_t = 24.0)]
    ttl_hours: f64,
    /// Origin allowed by CORS; any origin when omitted.
    #[arg(long)]
    cors_origin: Option<String>,
    #[command(flatten)]
    engine: EngineArgs,
}

pub fn load_corpus(dir: Option<&Path>) -> Result<Corpus> {
    let dir = dir.map_or_else(default_problems_dir, Path::to_path_buf);
    Corpus::load(&dir).with_context(|| format!("loading corpus from {}", dir.display()))
}

/// `arg` is a path to a `.search` file when one exists there, otherwise
/// the name of a corpus entry.
pub fn resolve_spec(arg: &str, problems: Option<&Path>) -> Result<SearchSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let source =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let name = path
            .file_stem()
            .map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned());
        return parse_spec(&name, &source).with_context(|| format!("parsing {}", path.display()));
    }
    let corpus = load_corpus(problems)?;
    match corpus.spec_by_name(arg) {
        Ok(spec) => Ok(spec),
        Err(e) if arg.contains('/') || arg.ends_with(".search") => {
            bail!("{arg}: no such file ({e})")
        }
        Err(e) => Err(e.into()),
    }
}

pub fn compile(spec: SearchSpec, engine: &EngineArgs) -> Result<Arc<Problem>> {
    let name = spec.name.clone();
    Ok(Arc::new(
        Problem::compile(spec, &engine.problem_config())
            .with_context(|| format!("compiling {name}"))?,
    ))
}

/// `(10,18)`.
pub fn fmt_point(p: &[i64]) -> String {
    let parts: Vec<String> = p.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

/// Parses `5` or `1,2,3` (surrounding parentheses allowed).
pub fn parse_point(s: &str) -> Result<Vec<i64>> {
    s.trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .with_context(|| format!("`{s}` is not a comma-separated list of integers"))
        })
        .collect()
}

fn ast(args: AstArgs, problems: Option<&Path>) -> Result<()> {
    let spec = resolve_spec(&args.spec, problems)?;
    match args.format {
        AstFormat::Json => println!("{}", serde_json::to_string_pretty(&spec)?),
        AstFormat::Source => print!("{}", print_spec(&spec)),
    }
    Ok(())
}

fn serve(args: ServeArgs, problems: Option<&Path>) -> Result<()> {
    if args.ttl_hours.is_nan() || args.ttl_hours <= 0.0 {
        bail!("--ttl-hours must be positive");
    }
    let corpus = load_corpus(problems)?;
    let config = searchsynth_service::ServiceConfig {
        ttl: Duration::from_secs_f64(args.ttl_hours * 3600.0),
        snapshot_dir: args.snapshot_dir,
        cors_origin: args.cors_origin,
        problem: args.engine.problem_config(),
        session: args.engine.session_config(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(searchsynth_service::serve(args.addr, corpus, config))?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let problems = cli.problems.as_deref();
    match cli.command {
        Command::Solve(a) => solve::solve(a, problems),
        Command::Bench(a) => bench::bench(a, problems).map(|_| ExitCode::SUCCESS),
        Command::Landscape(a) => landscape::landscape(a, problems).map(|_| ExitCode::SUCCESS),
        Command::Replay(a) => solve::replay(a, problems),
        Command::Ast(a) => ast(a, problems).map(|_| ExitCode::SUCCESS),
        Command::Serve(a) => serve(a, problems).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

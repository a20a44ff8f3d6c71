use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use searchsynth_core::transcript::Transcript;
use searchsynth_core::{
    HiddenTarget, Oracle, Point, Problem, Replay, SessionConfig, SessionState, SessionStatus,
};

use crate::{compile, fmt_point, parse_point, resolve_spec, EngineArgs};

#[derive(Args)]
pub struct SolveArgs {
    /// Path to a .search file or the name of a corpus entry.
    spec: String,
    /// Hidden target, e.g. `5` or `3,1`. Drawn with --seed when omitted.
    #[arg(long, value_parser = parse_point, conflicts_with = "all_targets")]
    target: Option<Point>,
    /// Solve once for every valid target.
    #[arg(long)]
    all_targets: bool,
    #[command(flatten)]
    engine: EngineArgs,
    /// Print the per-outcome constraints before solving.
    #[arg(long)]
    dump_constraints: bool,
    /// Write the transcript JSON here (`-` for stdout). Single target only.
    #[arg(long, conflicts_with = "all_targets")]
    transcript: Option<PathBuf>,
    /// Write one transcript per target into this directory.
    #[arg(long)]
    transcript_dir: Option<PathBuf>,
    /// Leave wall-clock timings out of transcripts and stderr.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
pub struct ReplayArgs {
    /// Path to a .search file or the name of a corpus entry.
    spec: String,
    /// A transcript written by `solve`.
    transcript: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
}

fn header(out: &mut impl Write, p: &Problem) -> io::Result<()> {
    let queries = match p.queries() {
        Some(qs) => format!("{} queries (scan)", qs.len()),
        None => format!("{} points in the query box (sampled)", p.query_box_size()),
    };
    writeln!(
        out,
        "{}: {} targets, {queries}, {} outcomes",
        p.name(),
        p.targets().len(),
        p.spec().outcomes.len()
    )
}

fn table_head(out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "{:>5}  {:<20}  {:>8}  {:<12}  {:>10}",
        "round", "query", "bits", "outcome", "candidates"
    )
}

fn table_row(out: &mut impl Write, s: &SessionState) -> io::Result<()> {
    let r = s.transcript().last().expect("a round was recorded");
    writeln!(
        out,
        "{:>5}  {:<20}  {:>8.4}  {:<12}  {:>10}",
        r.round,
        fmt_point(&r.query),
        r.entropy_bits,
        s.problem().outcome_label(r.outcome),
        r.candidates_after
    )
}

fn final_line(s: &SessionState) -> String {
    let c = s.candidates();
    let shown: Vec<String> = c.iter().take(8).map(|t| fmt_point(t)).collect();
    let more = if c.len() > 8 {
        format!(" and {} more", c.len() - 8)
    } else {
        String::new()
    };
    let status = match s.status() {
        SessionStatus::Converged => "converged",
        SessionStatus::Inconsistent => "inconsistent",
        SessionStatus::Running => "running",
    };
    format!(
        "{status} after {} rounds: {}{more}",
        s.transcript().len(),
        shown.join(" ")
    )
}

/// Steps the session to completion, printing a row per round when `rows`.
fn drive(
    problem: Arc<Problem>,
    config: SessionConfig,
    oracle: &mut dyn Oracle,
    rows: bool,
) -> (Option<SessionState>, Result<()>) {
    let mut s = match SessionState::new(problem, config) {
        Ok(s) => s,
        Err(e) => return (None, Err(e.into())),
    };
    let mut out = io::stdout().lock();
    while s.status() == SessionStatus::Running {
        if let Err(e) = s.step(oracle) {
            return (Some(s), Err(e.into()));
        }
        if rows {
            if let Err(e) = table_row(&mut out, &s) {
                return (Some(s), Err(e.into()));
            }
        }
    }
    (Some(s), Ok(()))
}

fn transcript_name(p: &Problem, t: &[i64]) -> String {
    let parts: Vec<String> = t.iter().map(i64::to_string).collect();
    format!("{}-{}.json", p.name(), parts.join("_"))
}

fn write_transcript(path: &Path, t: &Transcript) -> Result<()> {
    if path == Path::new("-") {
        println!("{}", t.to_json());
        return Ok(());
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, t.to_json() + "\n").with_context(|| format!("writing {}", path.display()))
}

fn dump_constraints(p: &Problem) {
    let st = p.symexec_stats();
    println!(
        "{} paths, {} outcome constraints{}",
        st.paths,
        st.outcomes,
        if st.exact { "" } else { " (pruning sampled)" }
    );
    for (label, phi) in p.phi().labels.iter().zip(&p.phi().phis) {
        println!("{label}: {phi}");
    }
    println!();
}

pub fn solve(args: SolveArgs, problems: Option<&Path>) -> Result<ExitCode> {
    let spec = resolve_spec(&args.spec, problems)?;
    let problem = compile(spec, &args.engine)?;
    let config = args.engine.session_config();
    if args.dump_constraints {
        dump_constraints(&problem);
    }
    if !args.no_timing {
        eprintln!(
            "compiled in {:.3}s (symbolic execution {:.3}s)",
            problem.compile_time().as_secs_f64(),
            problem.symexec_stats().elapsed.as_secs_f64()
        );
    }
    let quiet_stdout = args.transcript.as_deref() == Some(Path::new("-"));

    if args.all_targets {
        let mut failed = 0;
        let started = Instant::now();
        for t in problem.targets() {
            let (state, result) = drive(
                problem.clone(),
                config.clone(),
                &mut HiddenTarget::new(t.clone()),
                false,
            );
            match (&state, result) {
                (Some(s), Ok(())) => {
                    let ok = s.status() == SessionStatus::Converged
                        && s.candidates() == std::slice::from_ref(t);
                    if !ok {
                        failed += 1;
                    }
                    println!("target {}: {}", fmt_point(t), final_line(s));
                }
                (None, Ok(())) => unreachable!("a session exists whenever driving succeeds"),
                (_, Err(e)) => {
                    failed += 1;
                    println!("target {}: error: {e:#}", fmt_point(t));
                }
            }
            if let (Some(s), Some(dir)) = (&state, &args.transcript_dir) {
                let doc = Transcript::from_session(s, Some(t), !args.no_timing);
                write_transcript(&dir.join(transcript_name(&problem, t)), &doc)?;
            }
        }
        println!(
            "{} of {} targets identified",
            problem.targets().len() - failed,
            problem.targets().len()
        );
        if !args.no_timing {
            eprintln!("solved in {:.3}s", started.elapsed().as_secs_f64());
        }
        return Ok(if failed == 0 {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        });
    }

    let target = match args.target {
        Some(t) => {
            if problem.targets().binary_search(&t).is_err() {
                bail!(
                    "{} is not a valid target of {}",
                    fmt_point(&t),
                    problem.name()
                );
            }
            t
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.engine.seed);
            problem
                .targets()
                .choose(&mut rng)
                .cloned()
                .expect("targets are never empty")
        }
    };
    if !quiet_stdout {
        let mut out = io::stdout().lock();
        header(&mut out, &problem)?;
        writeln!(out, "hidden target {}", fmt_point(&target))?;
        table_head(&mut out)?;
    }
    let started = Instant::now();
    let (state, result) = drive(
        problem.clone(),
        config,
        &mut HiddenTarget::new(target.clone()),
        !quiet_stdout,
    );
    if let Some(s) = &state {
        if !quiet_stdout {
            println!("{}", final_line(s));
        }
        let doc = Transcript::from_session(s, Some(&target), !args.no_timing);
        if let Some(path) = &args.transcript {
            write_transcript(path, &doc)?;
        }
        if let Some(dir) = &args.transcript_dir {
            write_transcript(&dir.join(transcript_name(&problem, &target)), &doc)?;
        }
    }
    if !args.no_timing {
        eprintln!("solved in {:.3}s", started.elapsed().as_secs_f64());
    }
    result?;
    Ok(match state.map(|s| s.status()) {
        Some(SessionStatus::Converged) => ExitCode::SUCCESS,
        _ => ExitCode::FAILURE,
    })
}

pub fn replay(args: ReplayArgs, problems: Option<&Path>) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.transcript)
        .with_context(|| format!("reading {}", args.transcript.display()))?;
    let recorded = Transcript::from_json(&text)
        .with_context(|| format!("parsing {}", args.transcript.display()))?;
    let spec = resolve_spec(&args.spec, problems)?;
    if spec.outcomes != recorded.outcomes {
        bail!(
            "transcript outcomes {:?} differ from the specification's {:?}",
            recorded.outcomes,
            spec.outcomes
        );
    }
    let mut engine = args.engine.clone();
    engine.seed = recorded.config.seed;
    engine.sample_budget = recorded.config.sample_budget;
    engine.max_rounds = Some(recorded.config.max_rounds);
    let problem = compile(spec, &engine)?;
    {
        let mut out = io::stdout().lock();
        header(&mut out, &problem)?;
        table_head(&mut out)?;
    }
    let mut oracle = Replay::new(recorded.rounds.iter().map(|r| r.outcome.clone()));
    let mut s = SessionState::new(problem, engine.session_config())?;
    let mut out = io::stdout().lock();
    for r in &recorded.rounds {
        if s.status() != SessionStatus::Running {
            bail!("session stopped before round {} of the transcript", r.round);
        }
        let pending = s.pending().map(|p| p.query.clone()).unwrap_or_default();
        if pending != r.query {
            bail!(
                "round {}: transcript asks {} but the synthesizer asks {}",
                r.round,
                fmt_point(&r.query),
                fmt_point(&pending)
            );
        }
        match s.step(&mut oracle) {
            Ok(()) => {}
            Err(searchsynth_core::SynthError::Inconsistent(_)) => {}
            Err(e) => return Err(e.into()),
        }
        table_row(&mut out, &s)?;
    }
    writeln!(out, "{}", final_line(&s))?;
    let status = match s.status() {
        SessionStatus::Converged => "converged",
        SessionStatus::Inconsistent => "inconsistent",
        SessionStatus::Running => "running",
    };
    if status != recorded.status {
        bail!("replay ended {status}, transcript says {}", recorded.status);
    }
    writeln!(out, "replay matches all {} rounds", recorded.rounds.len())?;
    Ok(ExitCode::SUCCESS)
}

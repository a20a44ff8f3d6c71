use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use searchsynth_core::corpus::{Corpus, CorpusEntry};
use searchsynth_core::{run_session, HiddenTarget, Problem};

use crate::{load_corpus, EngineArgs};

#[derive(Args)]
pub struct BenchArgs {
    /// Comma-separated entry names, family names, `ci` or `all`.
    #[arg(default_value = "ci")]
    selector: String,
    /// Random targets solved per entry.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Leave the wall-clock columns empty so output is byte-reproducible.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Serialize)]
struct Row {
    entry: String,
    family: String,
    t: usize,
    q: u64,
    psi: usize,
    phi: usize,
    reps: usize,
    avg_rounds: Option<f64>,
    max_rounds: Option<usize>,
    published_rounds: Option<f64>,
    avg_solve_s: Option<f64>,
    symexec_s: Option<f64>,
    status: String,
}

const COLUMNS: [&str; 13] = [
    "entry",
    "family",
    "t",
    "q",
    "psi",
    "phi",
    "reps",
    "avg_rounds",
    "max_rounds",
    "published_rounds",
    "avg_solve_s",
    "symexec_s",
    "status",
];

/// FNV-1a, so per-entry seeds do not depend on the standard hasher.
fn name_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn bench_entry(corpus: &Corpus, e: &CorpusEntry, args: &BenchArgs) -> Row {
    let mut row = Row {
        entry: e.name.clone(),
        family: e.family.clone(),
        t: e.expected.targets as usize,
        q: e.expected.queries,
        psi: 0,
        phi: 0,
        reps: args.reps,
        avg_rounds: None,
        max_rounds: None,
        published_rounds: e.published.as_ref().and_then(|p| p.rounds),
        avg_solve_s: None,
        symexec_s: None,
        status: "ok".to_string(),
    };
    let problem = match corpus
        .spec(e)
        .map_err(anyhow::Error::from)
        .and_then(|s| Ok(Problem::compile(s, &args.engine.problem_config())?))
    {
        Ok(p) => std::sync::Arc::new(p),
        Err(err) => {
            row.status = format!("error: {err}");
            return row;
        }
    };
    let st = problem.symexec_stats();
    row.t = problem.targets().len();
    row.psi = st.paths;
    row.phi = st.outcomes;
    if !args.no_timing {
        row.symexec_s = Some(st.elapsed.as_secs_f64());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.engine.seed ^ name_hash(&e.name));
    let config = args.engine.session_config();
    let mut rounds = Vec::with_capacity(args.reps);
    let mut solve_s = 0.0;
    for _ in 0..args.reps {
        let t = problem
            .targets()
            .choose(&mut rng)
            .expect("targets are never empty");
        let start = Instant::now();
        match run_session(problem.clone(), &mut HiddenTarget::new(t.clone()), &config) {
            Ok(s) if s.candidates().len() == 1 || !e.identifiable => {
                rounds.push(s.transcript().len());
            }
            Ok(s) => {
                row.status = format!("error: ended with {} candidates", s.candidates().len());
                return row;
            }
            Err(err) => {
                row.status = format!("error: {err}");
                return row;
            }
        }
        solve_s += start.elapsed().as_secs_f64();
    }
    row.avg_rounds = Some(rounds.iter().sum::<usize>() as f64 / rounds.len() as f64);
    row.max_rounds = rounds.iter().max().copied();
    if !args.no_timing {
        row.avg_solve_s = Some(solve_s / rounds.len() as f64);
    }
    row
}

fn cells(r: &Row) -> Vec<String> {
    let f = |v: Option<f64>, digits: usize| v.map_or(String::new(), |x| format!("{x:.digits$}"));
    vec![
        r.entry.clone(),
        r.family.clone(),
        r.t.to_string(),
        r.q.to_string(),
        r.psi.to_string(),
        r.phi.to_string(),
        r.reps.to_string(),
        f(r.avg_rounds, 2),
        r.max_rounds.map_or(String::new(), |m| m.to_string()),
        f(r.published_rounds, 1),
        f(r.avg_solve_s, 4),
        f(r.symexec_s, 4),
        r.status.clone(),
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_rows(out: &mut impl Write, rows: &[Row], format: Format) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, rows)?;
            writeln!(out)
        }
        Format::Csv => {
            writeln!(out, "{}", COLUMNS.join(","))?;
            for r in rows {
                let line: Vec<String> = cells(r).iter().map(|c| csv_field(c)).collect();
                writeln!(out, "{}", line.join(","))?;
            }
            Ok(())
        }
        Format::Table => {
            let body: Vec<Vec<String>> = rows.iter().map(cells).collect();
            let widths: Vec<usize> = (0..COLUMNS.len())
                .map(|i| {
                    body.iter()
                        .map(|r| r[i].len())
                        .chain([COLUMNS[i].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cols: &[String]| -> String {
                cols.iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (c, w))| {
                        if i < 2 || i == COLUMNS.len() - 1 {
                            format!("{c:<w$}")
                        } else {
                            format!("{c:>w$}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            let head: Vec<String> = COLUMNS.iter().map(|c| c.to_string()).collect();
            writeln!(out, "{}", line(&head))?;
            for r in &body {
                writeln!(out, "{}", line(r))?;
            }
            Ok(())
        }
    }
}

pub fn bench(args: BenchArgs, problems: Option<&Path>) -> Result<()> {
    let corpus = load_corpus(problems)?;
    let entries = corpus.select(&args.selector)?;
    let rows: Vec<Row> = if args.reps == 0 {
        Vec::new()
    } else {
        entries
            .par_iter()
            .map(|e| bench_entry(&corpus, e, &args))
            .collect()
    };
    let mut out = io::stdout().lock();
    write_rows(&mut out, &rows, args.format)?;
    Ok(())
}

use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use searchsynth_core::lang::is_valid_query;
use searchsynth_core::synth::entropy_bits;
use searchsynth_core::{Knowledge, ModelCounter, Point};

use crate::{compile, fmt_point, parse_point, resolve_spec, EngineArgs};

#[derive(Args)]
pub struct LandscapeArgs {
    /// Path to a .search file or the name of a corpus entry.
    spec: String,
    /// Restrict knowledge by an answer first, e.g. `10,18=Low`. Repeatable.
    #[arg(long = "observe", value_parser = parse_observation)]
    observations: Vec<(Point, String)>,
    /// Accept 1-dimensional query spaces (one `q0,entropy_bits` row each).
    #[arg(long)]
    allow_1d: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

fn parse_observation(s: &str) -> Result<(Point, String)> {
    let (q, label) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("`{s}` is not of the form QUERY=OUTCOME"))?;
    Ok((parse_point(q)?, label.trim().to_string()))
}

pub fn landscape(args: LandscapeArgs, problems: Option<&Path>) -> Result<()> {
    let spec = resolve_spec(&args.spec, problems)?;
    let dim = spec.query_dim();
    if !(dim == 2 || dim == 1 && args.allow_1d) {
        bail!(
            "DimensionError: {} has a {dim}-dimensional query space; the landscape needs 2{}",
            spec.name,
            if dim == 1 { " (or --allow-1d)" } else { "" }
        );
    }
    let problem = compile(spec, &args.engine)?;
    let queries = problem.queries().ok_or_else(|| {
        anyhow!(
            "{} has {} points in its query box, above the scan cap; raise --scan-cap",
            problem.name(),
            problem.query_box_size()
        )
    })?;
    let spec = problem.spec();
    let mut k: Knowledge = problem.initial_knowledge();
    for (q, label) in &args.observations {
        let o = spec
            .outcome_index(label)
            .ok_or_else(|| anyhow!("`{label}` is not a declared outcome of {}", spec.name))?;
        if !is_valid_query(spec, q)? {
            bail!("{} is not a valid query", fmt_point(q));
        }
        let obs = problem.phi().phi(o).substitute_query(q);
        k = k
            .conjoin_and_filter(&obs)
            .with_context(|| format!("observing {label} at {} leaves no target", fmt_point(q)))?;
    }
    let counter = problem.counter();
    let entropies = queries
        .par_iter()
        .map(|q| counter.distribution(&k, q).map(|d| entropy_bits(&d.counts)))
        .collect::<Result<Vec<f64>, _>>()?;

    let mut out = BufWriter::new(io::stdout().lock());
    let names: Vec<String> = (0..dim).map(|i| format!("q{i}")).collect();
    writeln!(out, "{},entropy_bits", names.join(","))?;
    for (q, h) in queries.iter().zip(entropies) {
        let coords: Vec<String> = q.iter().map(i64::to_string).collect();
        writeln!(out, "{},{h:.12}", coords.join(","))?;
    }
    out.flush()?;
    Ok(())
}

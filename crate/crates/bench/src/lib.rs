//! Fixtures for the benchmarks in `benches/`.

use std::sync::Arc;

use searchsynth_core::corpus::Corpus;
use searchsynth_core::{Problem, ProblemConfig, SearchSpec};

pub fn spec(name: &str) -> SearchSpec {
    Corpus::load_default()
        .and_then(|c| c.spec_by_name(name))
        .unwrap_or_else(|e| panic!("corpus entry {name}: {e}"))
}

pub fn problem(name: &str) -> Arc<Problem> {
    Arc::new(
        Problem::compile(spec(name), &ProblemConfig::default()).expect("corpus entry compiles"),
    )
}

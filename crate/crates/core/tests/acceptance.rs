//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fail.

mod support;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use searchsynth_core::constraint::{Knowledge, Point};
use searchsynth_core::synth::{
    entropy_bits, is_worthwhile, is_worthwhile_by_formula, worthwhile_queries, SelectConfig,
};
use searchsynth_core::{
    run_session, ConstraintCounter, Formula, HiddenTarget, InterpreterCounter, ModelCounter,
    OutcomeConstraintMap, Problem, ProblemConfig, SessionConfig, SessionState, SessionStatus,
};

use support::{
    all_queries, check_piecewise, ci_entries, compile, corpus, optimal_expected_rounds,
    random_table_instance, targets_to_try,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn golden_first_query() -> Outcome {
    let start = Instant::now();
    let p = compile(&corpus(), "lmh27");
    let mut s = SessionState::new(p, SessionConfig::default()).map_err(|e| e.to_string())?;
    let first = s.pending().ok_or("no first query")?.clone();
    ensure(
        first.query == vec![10, 18],
        format!("first query {:?}", first.query),
    )?;
    let err = (first.entropy_bits - 3f64.log2()).abs();
    ensure(
        err <= 1e-9,
        format!("entropy {} off by {err}", first.entropy_bits),
    )?;
    s.observe_label(&[10, 18], "Low")
        .map_err(|e| e.to_string())?;
    let second = s.pending().ok_or("no second query")?.query.clone();
    ensure(second == vec![4, 6], format!("second query {second:?}"))?;
    let took = within(start, Duration::from_secs(5))?;
    Ok(format!(
        "(10,18) at {:.12} bits, then (4,6); {took:.2?}",
        first.entropy_bits
    ))
}

fn piecewise_counts() -> Outcome {
    let p = compile(&corpus(), "lmh27");
    let r = check_piecewise(&p, 99);
    if let Some(f) = r.failures.first() {
        return Err(format!("{} mismatches, first: {f}", r.failures.len()));
    }
    let points: usize = r.chambers.iter().map(|(_, n)| n).sum();
    Ok(format!(
        "{} chambers, {points} points; closed form for L at q0=27 gives 27, enumeration {}",
        r.chambers.len(),
        r.closed_form_misses.first().map(|m| m.2).unwrap_or(27)
    ))
}

fn worthwhile_iff_entropy() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut queries, mut violations) = (0usize, 0usize);
    for _ in 0..500 {
        let inst = random_table_instance(&mut rng);
        let phi = OutcomeConstraintMap {
            labels: (0..inst.phis.len()).map(|o| format!("o{o}")).collect(),
            phis: inst.phis,
        };
        let counter = ConstraintCounter { phi: &phi };
        let k = Knowledge::new(Formula::True, inst.targets);
        for q in &inst.queries {
            let h = entropy_bits(
                &counter
                    .distribution(&k, q)
                    .map_err(|e| e.to_string())?
                    .counts,
            );
            let w = is_worthwhile_by_formula(&phi, &k, q).map_err(|e| e.to_string())?;
            let pair = is_worthwhile(&phi, &k, q).map_err(|e| e.to_string())?;
            if w != (h > 0.0) || pair != w {
                violations += 1;
            }
            queries += 1;
        }
    }
    ensure(
        violations == 0,
        format!("{violations} violations in {queries} queries"),
    )?;
    let took = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "500 instances, {queries} queries, 0 violations; {took:.2?}"
    ))
}

fn termination_and_correctness() -> Outcome {
    let start = Instant::now();
    let c = corpus();
    let mut sessions = 0;
    let entries = ci_entries(&c);
    for e in &entries {
        let p = compile(&c, &e.name);
        for t in targets_to_try(p.targets(), 17) {
            let s = run_session(
                p.clone(),
                &mut HiddenTarget::new(t.clone()),
                &SessionConfig::default(),
            )
            .map_err(|err| format!("{} target {t:?}: {err}", e.name))?;
            ensure(
                s.status() == SessionStatus::Converged,
                format!("{} did not converge", e.name),
            )?;
            let distinct: HashSet<&Point> = s.transcript().iter().map(|r| &r.query).collect();
            ensure(
                distinct.len() == s.transcript().len(),
                format!("{} repeated a query", e.name),
            )?;
            if e.identifiable {
                ensure(
                    s.candidates() == std::slice::from_ref(&t),
                    format!(
                        "{} target {t:?} ended with {} candidates",
                        e.name,
                        s.candidates().len()
                    ),
                )?;
            }
            let left =
                worthwhile_queries(&p, &p.counter(), s.knowledge(), &SelectConfig::default())
                    .map_err(|err| err.to_string())?;
            if let Some(q) = left.first() {
                return Err(format!("{} target {t:?}: {q:?} still worthwhile", e.name));
            }
            sessions += 1;
        }
    }
    let took = within(start, Duration::from_secs(600))?;
    Ok(format!(
        "{} entries, {sessions} sessions; {took:.2?}",
        entries.len()
    ))
}

fn backend_equivalence() -> Outcome {
    let c = corpus();
    let (mut entries, mut checks) = (0, 0u64);
    for e in c.entries() {
        if e.expected.targets * e.expected.queries > 1_000_000 {
            continue;
        }
        let p = compile(&c, &e.name);
        let k = p.initial_knowledge();
        let interp = InterpreterCounter { spec: p.spec() };
        for q in all_queries(p.spec()) {
            let a = p
                .counter()
                .distribution(&k, &q)
                .map_err(|err| err.to_string())?;
            let b = interp.distribution(&k, &q).map_err(|err| err.to_string())?;
            ensure(
                a == b,
                format!("{} at {q:?}: {:?} vs {:?}", e.name, a.counts, b.counts),
            )?;
            checks += a.counts.len() as u64;
        }
        entries += 1;
    }
    Ok(format!(
        "{entries} entries, {checks} (outcome, query) counts, 0 disagreements"
    ))
}

fn rounds(p: &Arc<Problem>) -> Result<Vec<usize>, String> {
    p.targets()
        .iter()
        .map(|t| {
            run_session(
                p.clone(),
                &mut HiddenTarget::new(t.clone()),
                &SessionConfig::default(),
            )
            .map(|s| s.transcript().len())
            .map_err(|e| e.to_string())
        })
        .collect()
}

fn mean(xs: &[usize]) -> f64 {
    xs.iter().sum::<usize>() as f64 / xs.len() as f64
}

fn round_counts() -> Outcome {
    let c = corpus();
    let lh = rounds(&compile(&c, "lowhigh100"))?;
    let lh_max = *lh.iter().max().unwrap();
    let smm = rounds(&compile(&c, "smm2"))?;
    let mr = rounds(&compile(&c, "movierank3"))?;
    let summary = format!(
        "lowhigh100 mean {:.2} max {lh_max}; smm2 mean {:.2}; movierank3 mean {:.2}",
        mean(&lh),
        mean(&smm),
        mean(&mr)
    );
    ensure(
        mean(&lh) <= 7.0 && lh_max <= 8 && mean(&smm) <= 5.5 && mean(&mr) <= 3.0,
        summary.clone(),
    )?;
    Ok(summary)
}

fn greedy_vs_optimal() -> Outcome {
    let c = corpus();
    let mut parts = Vec::new();
    for name in ["lowhigh5", "lmh9"] {
        let p = compile(&c, name);
        let optimal = optimal_expected_rounds(p.spec(), p.targets());
        let greedy = mean(&rounds(&p)?);
        let line = format!("{name} greedy {greedy:.2} optimal {optimal:.2}");
        ensure(greedy <= optimal + 1.0, line.clone())?;
        parts.push(line);
    }
    Ok(parts.join("; "))
}

fn outcome_constraint_counts() -> Outcome {
    let c = corpus();
    let expected = [
        ("lowhigh10", 3),
        ("lmh27", 3),
        ("smm1", 2),
        ("smm2", 3),
        ("smm3", 4),
        ("smm4", 5),
        ("battleship4", 2),
        ("battleship8", 2),
        ("movierank3", 2),
        ("movierank4", 2),
    ];
    let mut got = Vec::new();
    for (name, want) in expected {
        let spec = c.spec_by_name(name).map_err(|e| e.to_string())?;
        let p = Problem::compile(spec, &ProblemConfig::default()).map_err(|e| e.to_string())?;
        let n = p.symexec_stats().outcomes;
        ensure(n == want, format!("{name}: |Phi| = {n}, expected {want}"))?;
        got.push(format!("{name}={n} (paths {})", p.symexec_stats().paths));
    }
    Ok(got.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden first query", golden_first_query),
        ("piecewise count agreement", piecewise_counts),
        ("worthwhile iff positive entropy", worthwhile_iff_entropy),
        (
            "termination and correctness over the corpus",
            termination_and_correctness,
        ),
        ("counting backend equivalence", backend_equivalence),
        ("round counts", round_counts),
        ("greedy vs optimal decision tree", greedy_vs_optimal),
        ("outcome constraint counts", outcome_constraint_counts),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

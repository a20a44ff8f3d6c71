//! Oracles shared by the integration suites. Nothing here goes through the
//! symbolic pipeline: the answers come from concrete interpretation or from
//! plain tables.

#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use searchsynth_core::corpus::{Corpus, CorpusEntry};
use searchsynth_core::lang::{enumerate_queries, evaluate_concrete, SearchSpec};
use searchsynth_core::{Formula, Point, Problem, ProblemConfig, Term};

pub fn corpus() -> Corpus {
    Corpus::load_default().expect("bundled corpus loads")
}

pub fn compile(corpus: &Corpus, name: &str) -> Arc<Problem> {
    let spec = corpus.spec_by_name(name).unwrap();
    Arc::new(Problem::compile(spec, &ProblemConfig::default()).unwrap())
}

pub fn ci_entries(corpus: &Corpus) -> Vec<CorpusEntry> {
    corpus.select("ci").unwrap().into_iter().cloned().collect()
}

/// All targets when there are at most 200, otherwise 10 drawn with `seed`.
pub fn targets_to_try(all: &[Point], seed: u64) -> Vec<Point> {
    if all.len() <= 200 {
        return all.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    all.choose_multiple(&mut rng, 10).cloned().collect()
}

/// Outcome table `table[q][t]` by direct interpretation.
pub fn outcome_table(spec: &SearchSpec, targets: &[Point], queries: &[Point]) -> Vec<Vec<usize>> {
    queries
        .iter()
        .map(|q| {
            targets
                .iter()
                .map(|t| evaluate_concrete(spec, q, t).unwrap())
                .collect()
        })
        .collect()
}

pub fn all_queries(spec: &SearchSpec) -> Vec<Point> {
    enumerate_queries(spec, 1 << 24).unwrap()
}

/// Minimal total number of queries needed to identify every target of
/// `set` (a bitmask over at most 64 targets), using the best adaptive
/// decision tree. A target that no query separates from the rest costs 0.
pub fn optimal_total_depth(table: &[Vec<usize>], set: u64, memo: &mut HashMap<u64, u64>) -> u64 {
    if set.count_ones() <= 1 {
        return 0;
    }
    if let Some(&v) = memo.get(&set) {
        return v;
    }
    let mut best = u64::MAX;
    let mut splits_any = false;
    for row in table {
        let mut parts: HashMap<usize, u64> = HashMap::new();
        let mut bits = set;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            *parts.entry(row[t]).or_default() |= 1 << t;
        }
        if parts.len() < 2 {
            continue;
        }
        splits_any = true;
        let mut cost = set.count_ones() as u64;
        for &part in parts.values() {
            cost += optimal_total_depth(table, part, memo);
            if cost >= best {
                break;
            }
        }
        best = best.min(cost);
    }
    let v = if splits_any { best } else { 0 };
    memo.insert(set, v);
    v
}

/// Expected rounds of the optimal decision tree, targets equally likely.
pub fn optimal_expected_rounds(spec: &SearchSpec, targets: &[Point]) -> f64 {
    assert!(targets.len() <= 64);
    let table = outcome_table(spec, targets, &all_queries(spec));
    let full = if targets.len() == 64 {
        u64::MAX
    } else {
        (1u64 << targets.len()) - 1
    };
    optimal_total_depth(&table, full, &mut HashMap::new()) as f64 / targets.len() as f64
}

/// A random deterministic outcome table over `nt` scalar targets `1..=nt`
/// and `nq` scalar queries `1..=nq`, written as one formula per outcome:
/// phi_o is the disjunction of `t0 == t && q0 == q` over the cells holding o.
pub struct TableInstance {
    pub table: Vec<Vec<usize>>,
    pub phis: Vec<Formula>,
    pub targets: Vec<Point>,
    pub queries: Vec<Point>,
}

pub fn random_table_instance(rng: &mut impl Rng) -> TableInstance {
    let nt = rng.random_range(1..=50usize);
    let nq = rng.random_range(1..=50usize);
    let no = rng.random_range(1..=5usize);
    // Skewed rows make constant rows (useless queries) common.
    let table: Vec<Vec<usize>> = (0..nq)
        .map(|_| {
            let width = rng.random_range(1..=no);
            let base = rng.random_range(0..no);
            (0..nt)
                .map(|_| (base + rng.random_range(0..width)) % no)
                .collect()
        })
        .collect();
    let phis = (0..no)
        .map(|o| {
            let cells = (0..nq)
                .flat_map(|q| (0..nt).map(move |t| (q, t)))
                .filter(|&(q, t)| table[q][t] == o)
                .map(|(q, t)| {
                    Formula::and(vec![
                        Formula::equal(Term::target(0), Term::Const(t as i64 + 1)),
                        Formula::equal(Term::query(0), Term::Const(q as i64 + 1)),
                    ])
                })
                .collect();
            Formula::or(cells)
        })
        .collect();
    TableInstance {
        table,
        phis,
        targets: (1..=nt as i64).map(|t| vec![t]).collect(),
        queries: (1..=nq as i64).map(|q| vec![q]).collect(),
    }
}

/// Shannon entropy in bits, computed independently of the library.
pub fn entropy_of_counts(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Result of checking the closed-form counts of the interval game on 1..27.
pub struct PiecewiseReport {
    /// (chamber, points checked) for every chamber.
    pub chambers: Vec<(&'static str, usize)>,
    pub failures: Vec<String>,
    /// Points in a suspect chamber where the closed form is off; enumeration
    /// is what the library must match there.
    pub closed_form_misses: Vec<(&'static str, Vec<i64>, u64)>,
}

/// Checks `#phi_L` and `#phi_H` against the closed forms
///
/// ```text
/// #L = 27 if q0 >= 27,  q0 - 1 if 1 <= q0 < 27,  0 otherwise
/// #H = 27 if q1 < 0,    27 - q1 if 0 <= q1 < 27, 0 otherwise
/// ```
///
/// at 100 points per chamber. The H form ignores q0, so its points keep
/// q0 <= q1. The first L chamber is wrong at q0 = 27 and the closed form
/// for M has an unsatisfiable guard; both are compared with enumeration.
pub fn check_piecewise(p: &Problem, seed: u64) -> PiecewiseReport {
    use searchsynth_core::counting::count_models;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = p.initial_knowledge();
    let label = |name: &str| p.spec().outcome_index(name).unwrap();
    let (low, mid, high) = (label("Low"), label("Middle"), label("High"));
    let enumerate = |o: usize, q: &[i64]| -> u64 {
        p.targets()
            .iter()
            .filter(|t| evaluate_concrete(p.spec(), q, t).unwrap() == o)
            .count() as u64
    };
    let mut report = PiecewiseReport {
        chambers: Vec::new(),
        failures: Vec::new(),
        closed_form_misses: Vec::new(),
    };

    type Closed = Option<fn(&[i64]) -> u64>;
    type Draw = fn(&mut ChaCha8Rng) -> Vec<i64>;
    let chambers: [(&'static str, usize, Draw, Closed); 7] = [
        (
            "L: 1 <= q0 < 27",
            low,
            |r| vec![r.random_range(1..27), r.random_range(-40..70)],
            Some(|q| (q[0] - 1) as u64),
        ),
        (
            "L: q0 < 1",
            low,
            |r| vec![r.random_range(-60..1), r.random_range(-40..70)],
            Some(|_| 0),
        ),
        (
            "H: q1 < 0",
            high,
            |r| {
                let q1 = r.random_range(-60..0);
                vec![r.random_range(-90..=q1), q1]
            },
            Some(|_| 27),
        ),
        (
            "H: 0 <= q1 < 27",
            high,
            |r| {
                let q1 = r.random_range(0..27);
                vec![r.random_range(-30..=q1), q1]
            },
            Some(|q| (27 - q[1]) as u64),
        ),
        (
            "H: q1 >= 27",
            high,
            |r| {
                let q1 = r.random_range(27..90);
                vec![r.random_range(-30..=q1), q1]
            },
            Some(|_| 0),
        ),
        (
            "L: q0 >= 27 (suspect)",
            low,
            |r| vec![r.random_range(27..90), r.random_range(-40..70)],
            None,
        ),
        (
            "M: all chambers (suspect)",
            mid,
            |r| vec![r.random_range(-10..40), r.random_range(-10..40)],
            None,
        ),
    ];
    for (name, o, draw, closed) in chambers {
        let phi = p.phi().phi(o);
        let mut points: Vec<Vec<i64>> = (0..100).map(|_| draw(&mut rng)).collect();
        if name.starts_with("L: q0 >= 27") {
            // Always include the boundary where the closed form breaks.
            points[0] = vec![27, 27];
        }
        for q in &points {
            let got = count_models(phi, &k, q).unwrap();
            let want = match closed {
                Some(f) => f(q),
                None => enumerate(o, q),
            };
            if got != want {
                report
                    .failures
                    .push(format!("{name} at {q:?}: counted {got}, expected {want}"));
            }
        }
        if name.starts_with("L: q0 >= 27") {
            for q in &points {
                let got = count_models(phi, &k, q).unwrap();
                if got != 27 {
                    report.closed_form_misses.push((name, q.clone(), got));
                }
            }
        }
        report.chambers.push((name, points.len()));
    }
    report
}

mod support;

use std::sync::Arc;
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use searchsynth_core::constraint::{parse_formula, ConstraintError, Knowledge, Point};
use searchsynth_core::synth::{entropy_bits, is_worthwhile, is_worthwhile_by_formula};
use searchsynth_core::{
    ConstraintCounter, Formula, ModelCounter, OutcomeConstraintMap, Problem, Term,
};

use support::{compile, corpus, entropy_of_counts, random_table_instance};

fn lmh27() -> Arc<Problem> {
    static P: OnceLock<Arc<Problem>> = OnceLock::new();
    P.get_or_init(|| compile(&corpus(), "lmh27")).clone()
}

fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        (-6i64..=6).prop_map(Term::Const),
        (0usize..2).prop_map(Term::target),
        Just(Term::query(0)),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(Term::Add),
            prop::collection::vec(inner, 1..3).prop_map(Term::Mul),
        ]
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        (term(), term()).prop_map(|(a, b)| Formula::less(a, b)),
        (term(), term()).prop_map(|(a, b)| Formula::equal(a, b)),
    ];
    atom.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::Or),
            inner.prop_map(|f| Formula::Not(Box::new(f))),
        ]
    })
}

fn point() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (
        prop::collection::vec(-8i64..=8, 2),
        prop::collection::vec(-8i64..=8, 1),
    )
}

/// Every t in 1..27 kept or dropped by `mask`; at least one survives.
fn candidate_subset() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(any::<bool>(), 27).prop_map(|mask| {
        let mut c: Vec<Point> = (1..=27)
            .zip(mask)
            .filter(|(_, keep)| *keep)
            .map(|(t, _)| vec![t])
            .collect();
        if c.is_empty() {
            c.push(vec![14]);
        }
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn simplify_preserves_evaluation(f in formula(), pts in prop::collection::vec(point(), 1..8)) {
        let s = f.simplify();
        for (t, q) in pts {
            prop_assert_eq!(s.eval(&t, &q).unwrap(), f.eval(&t, &q).unwrap());
        }
    }

    #[test]
    fn query_substitution_commutes(f in formula(), (t, q) in point()) {
        let sub = f.substitute_query(&q);
        prop_assert!(!sub.mentions_query());
        prop_assert_eq!(sub.eval(&t, &[]).unwrap(), f.eval(&t, &q).unwrap());
    }

    #[test]
    fn sexpr_text_round_trips(f in formula()) {
        let text = f.to_string();
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        for t0 in -3..=3 {
            prop_assert_eq!(back.eval(&[t0, 1], &[2]).unwrap(), f.eval(&[t0, 1], &[2]).unwrap());
        }
    }

    #[test]
    fn conjoining_never_adds_candidates(cands in candidate_subset(), obs in formula()) {
        let obs = obs.substitute_query(&[0]);
        let k = Knowledge::new(Formula::True, cands.iter().map(|c| vec![c[0], 0]).collect());
        match k.conjoin_and_filter(&obs) {
            Ok(next) => {
                prop_assert!(next.candidates().iter().all(|c| k.candidates().contains(c)));
                prop_assert!(next.len() <= k.len());
                for c in k.candidates() {
                    prop_assert_eq!(next.candidates().contains(c), obs.eval(c, &[]).unwrap());
                }
            }
            Err(ConstraintError::EmptyKnowledge) => {
                prop_assert!(k.candidates().iter().all(|c| !obs.eval(c, &[]).unwrap()));
            }
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn entropy_is_bounded_and_vanishes_only_on_certainty(counts in prop::collection::vec(0u64..50, 1..8)) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let h = entropy_bits(&counts);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (counts.len() as f64).log2() + 1e-12);
        let support = counts.iter().filter(|&&c| c > 0).count();
        prop_assert_eq!(h == 0.0, support == 1);
        prop_assert!((h - entropy_of_counts(&counts)).abs() < 1e-12);
        let mut rev = counts.clone();
        rev.reverse();
        prop_assert_eq!(entropy_bits(&rev), h);
    }

    #[test]
    fn distributions_partition_and_shrink_monotonically(
        cands in candidate_subset(),
        q0 in 1i64..=27,
        q1 in 1i64..=27,
        drop in 0usize..27,
    ) {
        let p = lmh27();
        let counter = p.counter();
        let k = Knowledge::new(Formula::True, cands.clone());
        let d = counter.distribution(&k, &[q0, q1]).unwrap();
        prop_assert_eq!(d.total(), cands.len() as u64);
        let probs: f64 = d.probs().iter().sum();
        prop_assert!((probs - 1.0).abs() < 1e-12);

        let mut fewer = cands.clone();
        if fewer.len() > 1 {
            fewer.remove(drop % fewer.len());
        }
        let smaller = counter.distribution(&Knowledge::new(Formula::True, fewer), &[q0, q1]).unwrap();
        for (a, b) in smaller.counts.iter().zip(&d.counts) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn worthwhile_forms_agree_on_the_interval_game(
        cands in candidate_subset(),
        q0 in 1i64..=27,
        q1 in 1i64..=27,
    ) {
        let p = lmh27();
        let k = Knowledge::new(Formula::True, cands);
        let q = [q0, q1];
        let pair = is_worthwhile(p.phi(), &k, &q).unwrap();
        prop_assert_eq!(is_worthwhile_by_formula(p.phi(), &k, &q).unwrap(), pair);
        let h = entropy_bits(&p.counter().distribution(&k, &q).unwrap().counts);
        prop_assert_eq!(pair, h > 0.0);
    }
}

/// Worthwhile queries are exactly those with positive entropy, on random
/// outcome tables written as formulas.
#[test]
fn worthwhile_iff_positive_entropy_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for _ in 0..500 {
        let inst = random_table_instance(&mut rng);
        let phi = OutcomeConstraintMap {
            labels: (0..inst.phis.len()).map(|o| format!("o{o}")).collect(),
            phis: inst.phis.clone(),
        };
        let counter = ConstraintCounter { phi: &phi };
        // Full knowledge and a random half.
        let half: Vec<Point> = inst
            .targets
            .iter()
            .filter(|_| rand::Rng::random_bool(&mut rng, 0.5))
            .cloned()
            .collect();
        for cands in [inst.targets.clone(), half] {
            if cands.is_empty() {
                continue;
            }
            let k = Knowledge::new(Formula::True, cands.clone());
            for (qi, q) in inst.queries.iter().enumerate() {
                let d = counter.distribution(&k, q).unwrap();
                let mut expected = vec![0u64; inst.phis.len()];
                for t in &cands {
                    expected[inst.table[qi][(t[0] - 1) as usize]] += 1;
                }
                assert_eq!(d.counts, expected);
                let h = entropy_bits(&d.counts);
                let w = is_worthwhile_by_formula(&phi, &k, q).unwrap();
                assert_eq!(w, h > 0.0, "q={q:?} counts={:?}", d.counts);
                assert_eq!(is_worthwhile(&phi, &k, q).unwrap(), w);
                checked += 1;
            }
        }
    }
    assert!(checked > 10_000);
}

use dbp::distribution::JointDistribution;
use dbp::graph::{decode_word, encode_word, successors, Word};
use dbp::inference::{
    count_transitions, expected_transition_count, log_evidence, log_likelihood, mle, posterior,
    BetaPrior, TransitionCounts,
};
use dbp::io::{
    labeled_series_to_csv, parse_labeled_series, parse_sequence_text, sequence_to_text, LabeledSeries,
    SeriesConfig,
};
use dbp::oracle::{
    brute_force_distribution, brute_force_expected_count, eigen_stationary, exponent_form_counts,
    grid_log_evidence, EnumerationBudget,
};
use dbp::process::{rng_for, stationary_distribution, InitialWord, SimulationConfig, Simulator};
use dbp::{BinarySequence, TransitionTable, WordLength};
use proptest::prelude::*;

fn table_strategy(max_m: u32) -> impl Strategy<Value = TransitionTable> {
    (1..=max_m).prop_flat_map(|m| {
        let k = 1usize << m;
        proptest::collection::vec(0.02f64..0.98, k)
            .prop_map(move |p| TransitionTable::new(WordLength::new(m).unwrap(), p).unwrap())
    })
}

fn letters(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::collection::vec(0u8..2, 1..=max_len)
}

fn index_letters(i: usize, n: usize) -> Vec<u8> {
    (0..n).rev().map(|b| ((i >> b) & 1) as u8).collect()
}

#[test]
fn overlap_and_round_trip_exhaustive() {
    for m in 1..=10 {
        let wl = WordLength::new(m).unwrap();
        for i in 0..wl.num_words() {
            let w = Word::new(i, wl).unwrap();
            let letters = decode_word(w);
            assert_eq!(encode_word(&letters, wl).unwrap(), w);
            let (a, b) = successors(w);
            for s in [a, b] {
                assert_eq!(&decode_word(s)[..m as usize - 1], &letters[1..]);
            }
        }
    }
}

#[test]
fn first_word_follows_stationary_law() {
    let t = TransitionTable::new(WordLength::new(2).unwrap(), vec![0.9, 0.25, 0.75, 0.1]).unwrap();
    let pi = stationary_distribution(&t).unwrap().pi;
    let sim = Simulator::new(&t, InitialWord::StationaryDraw).unwrap();
    let reps = 100_000usize;
    let mut hits = [0usize; 4];
    for r in 0..reps {
        let x = sim.run(2, &mut rng_for(17, r as u64));
        hits[(x[0] as usize) << 1 | x[1] as usize] += 1;
    }
    for i in 0..4 {
        let f = hits[i] as f64 / reps as f64;
        let se = (pi[i] * (1.0 - pi[i]) / reps as f64).sqrt();
        assert!((f - pi[i]).abs() < 3.0 * se, "word {i}: {f} vs {}", pi[i]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rows_are_stochastic(t in table_strategy(10)) {
        for i in 0..t.num_words() {
            prop_assert_eq!(t.letter_probability(i, 0) + t.letter_probability(i, 1), 1.0);
        }
    }

    #[test]
    fn stationary_matches_dense_eigenvector(t in table_strategy(4)) {
        let st = stationary_distribution(&t).unwrap();
        prop_assert!(st.balance_residual(&t) < 1e-10);
        let eig = eigen_stationary(&t, &EnumerationBudget::default()).unwrap();
        for (a, b) in st.pi.iter().zip(eig) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simulation_is_deterministic(t in table_strategy(3), seed in any::<u64>(), n in 1usize..100) {
        let cfg = SimulationConfig::new(n, seed);
        prop_assert_eq!(dbp::process::simulate(&t, &cfg).unwrap(), dbp::process::simulate(&t, &cfg).unwrap());
    }

    #[test]
    fn normalization_and_paths(t in table_strategy(3), n in 1usize..=12) {
        let d = JointDistribution::new(&t).unwrap();
        let brute = brute_force_distribution(&t, n, &EnumerationBudget::default()).unwrap();
        let mut total = 0.0;
        for (i, &want) in brute.iter().enumerate() {
            let p = d.probability(&index_letters(i, n));
            total += p;
            prop_assert!((p - want).abs() < 1e-12);
            prop_assert!((d.probability_indexed(n as u32, i as u64).unwrap() - want).abs() < 1e-12);
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_consistency(t in table_strategy(3), n in 1usize..=11) {
        let d = JointDistribution::new(&t).unwrap();
        for i in 0..1usize << n {
            let x = index_letters(i, n);
            let mut x0 = x.clone();
            x0.push(0);
            let mut x1 = x.clone();
            x1.push(1);
            prop_assert!((d.probability(&x0) + d.probability(&x1) - d.probability(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn stationarity_identity(t in table_strategy(3), x in letters(40)) {
        let m = t.word_length();
        prop_assume!(x.len() >= m.get() as usize);
        let d = JointDistribution::new(&t).unwrap();
        let seq = BinarySequence::from_letters(x.clone()).unwrap();
        let ll = log_likelihood(&t, &count_transitions(&seq, m)).unwrap();
        let first = x[..m.get() as usize].iter().fold(0usize, |a, &b| (a << 1) | b as usize);
        let want = d.ln_probability(&x);
        let got = ll + d.stationary().pi[first].ln();
        prop_assert!(((got - want) / want).abs() < 1e-12 || (got - want).abs() < 1e-12);
    }

    #[test]
    fn count_identities(x in letters(50), m in 1u32..=3) {
        let wl = WordLength::new(m).unwrap();
        let c = count_transitions(&BinarySequence::from_letters(x.clone()).unwrap(), wl);
        prop_assert_eq!(c.total_transitions() as usize, x.len().saturating_sub(m as usize));
        let e = exponent_form_counts(&x, wl);
        for (k, v) in e.into_iter().enumerate() {
            prop_assert_eq!(c.edge_count(k), v);
        }
    }

    #[test]
    fn expected_counts_match_enumeration(t in table_strategy(3), n in 4usize..=12) {
        let b = EnumerationBudget::default();
        for k in 0..t.word_length().num_edges() {
            let dp = expected_transition_count(&t, n, k).unwrap();
            let brute = brute_force_expected_count(&t, n, k, &b).unwrap();
            prop_assert!((dp - brute).abs() < 1e-10);
        }
    }

    #[test]
    fn evidence_matches_quadrature(
        m in 1u32..=2,
        n0 in proptest::collection::vec(0u64..=20, 4),
        n1 in proptest::collection::vec(0u64..=20, 4),
        a in 0.3f64..4.0,
        b in 0.3f64..4.0,
    ) {
        let wl = WordLength::new(m).unwrap();
        let k = wl.num_words();
        let c = TransitionCounts::new(wl, n0[..k].to_vec(), n1[..k].to_vec()).unwrap();
        let prior = BetaPrior::symmetric(wl, a, b).unwrap();
        let closed = log_evidence(&c, &prior).unwrap();
        let grid = grid_log_evidence(&c, &prior, 400).unwrap();
        if closed != 0.0 {
            prop_assert!(((closed - grid) / closed).abs() < 1e-6);
        } else {
            prop_assert!(grid.abs() < 1e-12);
        }
        let post = posterior(&c, &prior).unwrap();
        prop_assert_eq!(post.alpha.len(), k);
    }

    #[test]
    fn mle_is_scale_invariant(
        n0 in proptest::collection::vec(0u64..=30, 4),
        n1 in proptest::collection::vec(0u64..=30, 4),
        factor in 1u64..=9,
    ) {
        let c = TransitionCounts::new(WordLength::new(2).unwrap(), n0, n1).unwrap();
        let a = mle(&c);
        let b = mle(&c.scaled(factor));
        for (x, y) in a.edges.iter().zip(&b.edges) {
            prop_assert_eq!(x.estimate, y.estimate);
        }
    }

    #[test]
    fn sequence_text_round_trip(slots in proptest::collection::vec(proptest::option::of(0u8..2), 1..80)) {
        prop_assume!(slots.iter().any(Option::is_some));
        let s = BinarySequence::from_slots(slots).unwrap();
        prop_assert_eq!(parse_sequence_text(&sequence_to_text(&s)).unwrap(), s);
    }

    #[test]
    fn labeled_round_trip(slots in proptest::collection::vec(proptest::option::of(0u8..2), 1..80), first in 1800i64..2000) {
        prop_assume!(slots[0].is_some());
        let cfg = SeriesConfig::new("Oxford", "Cambridge");
        let series = LabeledSeries { first_year: first, sequence: BinarySequence::from_slots(slots).unwrap() };
        let text = labeled_series_to_csv(&series, &cfg).unwrap();
        prop_assert_eq!(parse_labeled_series(&text, &cfg).unwrap(), series);
    }
}

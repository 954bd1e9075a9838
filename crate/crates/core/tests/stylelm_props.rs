mod common;

use commlang::stylelm::{count_ngrams, estimate, Smoothing, TrigramModel};
use proptest::prelude::*;

use common::{KnOracle, WbOracle};

fn corpus(max_symbols: usize) -> impl Strategy<Value = (usize, Vec<Vec<u32>>)> {
    (1..=max_symbols).prop_flat_map(|n| {
        let seq = prop::collection::vec(0..n as u32, 0..8);
        (Just(n), prop::collection::vec(seq, 1..6))
    })
}

fn symbols(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

fn contexts(n: usize) -> Vec<u32> {
    (0..=n as u32 + 1).filter(|&c| c != n as u32).collect()
}

fn check_against_oracle(model: &TrigramModel, n: usize, oracle: impl Fn(u32, u32, u32) -> f64) -> Result<(), TestCaseError> {
    for &u in &contexts(n) {
        for &v in &contexts(n) {
            let mut sum = 0.0;
            for w in 0..=n as u32 {
                let p = model.prob(u, v, w);
                prop_assert!(p > 0.0 && p.is_finite());
                let q = oracle(u, v, w);
                prop_assert!((p - q).abs() < 1e-9, "p({w}|{u},{v}) = {p}, oracle {q}");
                sum += p;
            }
            prop_assert!((sum - 1.0).abs() < 1e-9, "context ({u},{v}) sums to {sum}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kn_matches_direct_formula((n, seqs) in corpus(4)) {
        let counts = count_ngrams(&seqs, n).unwrap();
        let model = estimate(&counts, &symbols(n), Smoothing::ModifiedKn).unwrap();
        let oracle = KnOracle::new(&seqs, n);
        check_against_oracle(&model, n, |u, v, w| oracle.p3(u, v, w))?;
    }

    #[test]
    fn wb_matches_direct_formula((n, seqs) in corpus(4)) {
        let counts = count_ngrams(&seqs, n).unwrap();
        let model = estimate(&counts, &symbols(n), Smoothing::WittenBell).unwrap();
        let oracle = WbOracle::new(&seqs, n);
        check_against_oracle(&model, n, |u, v, w| oracle.p3(u, v, w))?;
    }

    #[test]
    fn arpa_round_trip_keeps_probabilities((n, seqs) in corpus(5), kn in any::<bool>()) {
        let smoothing = if kn { Smoothing::ModifiedKn } else { Smoothing::WittenBell };
        let counts = count_ngrams(&seqs, n).unwrap();
        let model = estimate(&counts, &symbols(n), smoothing).unwrap();
        let mut buf = Vec::new();
        model.write_arpa(&mut buf, &["model=test".to_string()]).unwrap();
        let (back, header) = TrigramModel::read_arpa(buf.as_slice()).unwrap();
        prop_assert_eq!(header, vec!["model=test".to_string()]);
        prop_assert_eq!(back.smoothing(), smoothing);
        for &u in &contexts(n) {
            for &v in &contexts(n) {
                for w in 0..=n as u32 {
                    let (a, b) = (model.logprob(u, v, w), back.logprob(u, v, w));
                    prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn sequence_score_is_sum_of_conditionals((n, seqs) in corpus(4), probe in prop::collection::vec(0u32..4, 0..10)) {
        let probe: Vec<u32> = probe.into_iter().filter(|&s| (s as usize) < n).collect();
        let counts = count_ngrams(&seqs, n).unwrap();
        let model = estimate(&counts, &symbols(n), Smoothing::ModifiedKn).unwrap();
        let score = model.score(&probe).unwrap();
        let mut padded = vec![model.bos(), model.bos()];
        padded.extend(&probe);
        padded.push(model.eos());
        let expected: f64 = padded.windows(3).map(|w| model.prob(w[0], w[1], w[2]).ln()).sum();
        prop_assert!((score.total_logprob - expected).abs() < 1e-9);
        prop_assert_eq!(score.token_count, probe.len() + 1);
    }
}

#[test]
fn out_of_space_symbols_are_rejected() {
    let counts = count_ngrams(&[vec![0u32, 1]], 2).unwrap();
    let model = estimate(&counts, &symbols(2), Smoothing::WittenBell).unwrap();
    assert!(model.score(&[0, 2]).is_err());
    let mut c = commlang::stylelm::NgramCounts::new(2);
    assert!(c.add_sequence(&[3]).is_err());
}

#[test]
fn training_text_beats_shuffled_text() {
    // a strongly ordered corpus: 0 1 2 3 repeated
    let seqs: Vec<Vec<u32>> = (0..50).map(|_| vec![0, 1, 2, 3, 0, 1, 2, 3]).collect();
    for smoothing in [Smoothing::ModifiedKn, Smoothing::WittenBell] {
        let model = estimate(&count_ngrams(&seqs, 4).unwrap(), &symbols(4), smoothing).unwrap();
        let held_in = model.score(&[0, 1, 2, 3, 0, 1, 2, 3]).unwrap().total_logprob;
        let shuffled = model.score(&[3, 1, 0, 2, 3, 2, 0, 1]).unwrap().total_logprob;
        assert!(held_in > shuffled + 10.0, "{smoothing}: {held_in} vs {shuffled}");
    }
}

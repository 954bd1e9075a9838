mod common;

use commlang::feedback::{average_ranks, k_index, kindex_histogram, permutation_p, spearman};
use proptest::prelude::*;

use common::{brute_k_index, reference_ranks, reference_spearman};

fn pairs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (3usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec((0i32..15).prop_map(f64::from), n),
            prop::collection::vec((-20i32..20).prop_map(f64::from), n),
        )
    })
}

proptest! {
    #[test]
    fn k_index_matches_definition(karma in prop::collection::vec(-5i64..300, 0..150)) {
        prop_assert_eq!(k_index(&karma), brute_k_index(&karma));
    }

    #[test]
    fn k_index_ignores_order(mut karma in prop::collection::vec(-5i64..60, 0..60)) {
        let k = k_index(&karma);
        karma.reverse();
        prop_assert_eq!(k_index(&karma), k);
        karma.sort();
        prop_assert_eq!(k_index(&karma), k);
    }

    #[test]
    fn k_index_never_exceeds_comment_count(karma in prop::collection::vec(-5i64..10_000, 0..80)) {
        prop_assert!(k_index(&karma) as usize <= karma.len());
    }

    #[test]
    fn ranks_match_counting_definition(x in prop::collection::vec((0i32..8).prop_map(f64::from), 0..40)) {
        prop_assert_eq!(average_ranks(&x), reference_ranks(&x));
    }

    #[test]
    fn spearman_matches_reference((x, y) in pairs()) {
        let got = spearman(&x, &y).unwrap();
        let want = reference_spearman(&x, &y);
        match (got.rho, want) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn spearman_is_symmetric_and_bounded((x, y) in pairs()) {
        let a = spearman(&x, &y).unwrap();
        let b = spearman(&y, &x).unwrap();
        prop_assert_eq!(a.rho, b.rho);
        if let Some(r) = a.rho {
            prop_assert!((-1.0..=1.0).contains(&r));
            let p = a.p_value.unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn spearman_invariant_under_monotone_maps((x, y) in pairs()) {
        let base = spearman(&x, &y).unwrap().rho;
        let mapped: Vec<f64> = x.iter().map(|v| (v * 0.3).exp() + 7.0).collect();
        prop_assert_eq!(spearman(&mapped, &y).unwrap().rho, base);
        let flipped: Vec<f64> = x.iter().map(|v| -v).collect();
        let neg = spearman(&flipped, &y).unwrap().rho;
        match (base, neg) {
            (Some(a), Some(b)) => prop_assert!((a + b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn permutation_p_is_a_probability((x, y) in pairs(), seed in 0u64..100) {
        if let Some(p) = permutation_p(&x, &y, 50, seed).unwrap() {
            prop_assert!(p > 0.0 && p <= 1.0);
            prop_assert_eq!(permutation_p(&x, &y, 50, seed).unwrap(), Some(p));
        }
    }

    #[test]
    fn histogram_conserves_counts(values in prop::collection::vec(0u64..200, 1..100), width in 1u64..10) {
        let bins = kindex_histogram(&values, width).unwrap();
        prop_assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), values.len());
        for b in &bins {
            let inside = values.iter().filter(|&&v| v >= b.bin && v < b.bin + width).count();
            prop_assert_eq!(b.count, inside);
        }
    }
}

#[test]
fn spearman_small_cases() {
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap().rho, Some(0.5));
    assert_eq!(spearman(&[1.0, 2.0], &[2.0, 1.0]).unwrap().rho, None);
    assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap().rho, None);
    assert!(spearman(&[1.0], &[1.0, 2.0]).is_err());
}

use proptest::prelude::*;
use schurlsd_core::oracle::{catalan, pair_matched_count};
use schurlsd_core::words::{canonicalize, enumerate_pair_matched, generating_positions, is_catalan};
use schurlsd_core::Word;

/// Literal algorithm: delete adjacent double letters until none remain.
fn reduces_to_empty(w: &Word) -> bool {
    let mut letters = w.letters().to_vec();
    loop {
        match letters.windows(2).position(|p| p[0] == p[1]) {
            Some(i) => {
                letters.drain(i..i + 2);
            }
            None => return letters.is_empty(),
        }
    }
}

#[test]
fn enumeration_counts() {
    for k in 1..=6 {
        let words = enumerate_pair_matched(2 * k).unwrap();
        assert_eq!(words.len() as u128, pair_matched_count(k));
        let mut dedup = words.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), words.len());
        assert!(words.iter().all(|w| w.is_pair_matched()));
        assert!(words.iter().all(|w| canonicalize(w.letters()).unwrap() == *w));
        let cat = words.iter().filter(|w| is_catalan(w).unwrap()).count();
        assert_eq!(cat as u128, catalan(k));
    }
}

#[test]
fn stack_test_matches_iterated_deletion() {
    for k in 1..=6 {
        for w in enumerate_pair_matched(2 * k).unwrap() {
            assert_eq!(is_catalan(&w).unwrap(), reduces_to_empty(&w), "{w}");
        }
    }
}

#[test]
fn generating_positions_track_letter_count() {
    for k in 1..=5 {
        for w in enumerate_pair_matched(2 * k).unwrap() {
            assert_eq!(generating_positions(&w).len(), w.num_letters() + 1);
        }
    }
}

proptest! {
    #[test]
    fn canonicalize_is_idempotent(raw in prop::collection::vec(0u8..6, 1..14)) {
        let w = canonicalize(&raw).unwrap();
        prop_assert_eq!(canonicalize(w.letters()).unwrap(), w.clone());
        prop_assert_eq!(generating_positions(&w).len(), w.num_letters() + 1);
    }

    #[test]
    fn canonicalize_ignores_letter_names(raw in prop::collection::vec(0u8..6, 1..14), shift in 1u8..50) {
        let relabeled: Vec<u8> = raw.iter().map(|&x| (x * 7 + shift) % 97).collect();
        prop_assert_eq!(canonicalize(&raw).unwrap(), canonicalize(&relabeled).unwrap());
    }
}

mod common;

use common::*;
use mh_phone_core::interpret::{expected_counts, expected_hold_length, summarize, InterpretConfig};
use proptest::prelude::*;

#[test]
fn hold_length_matches_simulated_runs() {
    for seed in 0..5 {
        let mut r = rng(seed);
        let params = random_params(&mut r, 4, 2);
        for i in 0..4 {
            let (mean, se) = simulated_hold(&params, i, 100_000, 100 + seed);
            let h = expected_hold_length(&params, i).unwrap();
            assert!((mean - h).abs() < 3.0 * se, "params {seed} state {i}: {mean} vs {h} (se {se})");
        }
    }
}

#[test]
fn expected_counts_match_simulated_chains() {
    for seed in 0..5 {
        let mut r = rng(50 + seed);
        let params = random_params(&mut r, 4, 2);
        let want = expected_counts(&params, 20);
        let (mean, se) = simulated_counts(&params, 20, 100_000, 200 + seed);
        for j in 0..4 {
            assert!((mean[j] - want[j]).abs() < 3.0 * se[j], "params {seed} state {j}");
        }
    }
}

#[test]
fn report_is_a_pure_function() {
    let mut r = rng(3);
    let params = random_params(&mut r, 5, 14);
    let cfg = InterpretConfig::default();
    let a = summarize(&params, &cfg).unwrap();
    assert_eq!(a, summarize(&params, &cfg).unwrap());
    for i in 0..5 {
        assert_eq!(a.end_prob[i], params.trans[[i, 0]]);
        let h = a.hold_lengths_frames[i].unwrap();
        assert!(h >= 1.0);
        assert_eq!(a.hold_lengths_ms[i].unwrap(), h * 98.0);
    }
}

proptest! {
    #[test]
    fn counts_sum_to_horizon(seed in 0u64..5000, n in 2usize..7, horizon in 0usize..40) {
        let mut r = rng(seed);
        let params = random_params(&mut r, n, 1);
        let c = expected_counts(&params, horizon);
        prop_assert!((c.sum() - horizon as f64).abs() < 1e-9);
        prop_assert!(c.iter().all(|&v| v >= 0.0 && v <= horizon as f64 + 1e-9));
    }
}

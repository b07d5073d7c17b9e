mod common;

use std::time::Instant;

use common::*;
use mh_phone_core::corpus::{synth_corpus, SynthOptions};
use mh_phone_core::model::{fit_em, init_params, log_joint, EStep};
use mh_phone_core::{Error, FitOptions, Hyperparams};

#[test]
fn recovers_generating_parameters() {
    let truth = recovery_truth();
    let (corpus, _) = synth_corpus(&truth, 300, 11, &SynthOptions::default()).unwrap();
    let start = Instant::now();
    let (fitted, _, report) = fit_em(&corpus, 5, &Hyperparams::default(), &FitOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let err = recovery_errors(&truth, &fitted);
    assert!(report.converged);
    assert!(err.pi < 0.05, "{err:?}");
    assert!(err.trans < 0.05, "{err:?}");
    assert!(err.mu < 0.1, "{err:?}");
    assert!(elapsed < 60.0);
}

#[test]
fn viterbi_trace_never_decreases() {
    for seed in 0..20 {
        let corpus = random_dbn_corpus(seed);
        let opts = FitOptions {
            e_step: EStep::Viterbi,
            max_iters: 50,
            tol: 0.0,
            seed,
        };
        let (_, _, report) = fit_em(&corpus, 4, &Hyperparams::default(), &opts).unwrap();
        for w in report.log_joint_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "corpus {seed}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn trace_ends_at_returned_parameters() {
    let corpus = random_dbn_corpus(3);
    let hyper = Hyperparams::default();
    let (params, assignment, report) = fit_em(&corpus, 3, &hyper, &FitOptions::default()).unwrap();
    let last = *report.log_joint_trace.last().unwrap();
    assert_eq!(last, log_joint(&params, &corpus, &assignment, &hyper));
    assert_eq!(report.iterations, report.log_joint_trace.len());
}

#[test]
fn infinite_tolerance_runs_one_iteration() {
    let corpus = random_dbn_corpus(4);
    let opts = FitOptions {
        tol: f64::INFINITY,
        ..FitOptions::default()
    };
    let (_, _, report) = fit_em(&corpus, 3, &Hyperparams::default(), &opts).unwrap();
    assert_eq!(report.iterations, 1);
    assert!(!report.converged);
}

#[test]
fn same_seed_same_fit() {
    let corpus = random_dbn_corpus(8);
    let opts = FitOptions { seed: 17, ..FitOptions::default() };
    let a = fit_em(&corpus, 4, &Hyperparams::default(), &opts).unwrap();
    let b = fit_em(&corpus, 4, &Hyperparams::default(), &opts).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.2, b.2);
}

#[test]
fn rejects_too_few_frames() {
    let mut r = rng(1);
    let corpus = random_corpus(&mut r, 1, 2, 2);
    assert!(matches!(
        init_params(5, &corpus, 0),
        Err(Error::NotEnoughData { needed: 4, available: 2 })
    ));
    assert!(matches!(init_params(1, &corpus, 0), Err(Error::InvalidInput(_))));
}

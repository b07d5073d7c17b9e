mod common;

use common::*;
use mh_phone_core::baselines::{fit_gmm, sample_gmm};
use mh_phone_core::corpus::{synth_corpus, Corpus, SynthOptions};
use mh_phone_core::discriminator::{evaluate_generator, EvalOptions};
use mh_phone_core::model::{fit_em, sample};
use mh_phone_core::{Error, FitOptions, Hyperparams};

#[test]
fn gradient_matches_finite_differences() {
    for seed in 0..3 {
        for (name, err) in gru_gradient_errors(seed, 1e-5) {
            assert!(err < 1e-4, "net {seed} block {name}: {err}");
        }
    }
}

fn real_corpus() -> (mh_phone_core::ModelParams, Corpus) {
    let truth = recovery_truth();
    let (corpus, _) = synth_corpus(&truth, 200, 31, &SynthOptions::default()).unwrap();
    (truth, corpus)
}

#[test]
fn same_distribution_scores_near_chance() {
    let (truth, real) = real_corpus();
    let report = evaluate_generator(&real, |n, s| sample(&truth, n, real.frames(), s), &EvalOptions::default()).unwrap();
    assert!((report.bce_mean - std::f64::consts::LN_2).abs() < 0.08, "{report:?}");
}

#[test]
fn constant_generator_is_caught() {
    let (_, real) = real_corpus();
    let report = evaluate_generator(
        &real,
        |n, _| {
            let mut signs = real.signs()[..n].to_vec();
            for s in &mut signs {
                s.features.fill(9.0);
                s.true_length = s.frames();
            }
            Corpus::new(signs)
        },
        &EvalOptions { seeds: 2, ..EvalOptions::default() },
    )
    .unwrap();
    assert!(report.bce_mean < 0.05, "{report:?}");
}

#[test]
fn dbn_beats_frame_mixture() {
    let (_, real) = real_corpus();
    let hyper = Hyperparams::default();
    let (dbn, _, _) = fit_em(&real, 5, &hyper, &FitOptions::default()).unwrap();
    let (gmm, _) = fit_gmm(&real, 5, &hyper, &FitOptions::default()).unwrap();
    let opts = EvalOptions::default();
    let a = evaluate_generator(&real, |n, s| sample(&dbn, n, real.frames(), s), &opts).unwrap();
    let b = evaluate_generator(&real, |n, s| sample_gmm(&gmm, n, real.frames(), s), &opts).unwrap();
    eprintln!("dbn {a:?}\ngmm {b:?}");
    assert!(a.bce_mean - b.bce_mean >= 0.1);
}

#[test]
fn evaluation_is_deterministic_and_validated() {
    let (truth, real) = real_corpus();
    let opts = EvalOptions { seeds: 2, epochs: 5, ..EvalOptions::default() };
    let gen = |n: usize, s: u64| sample(&truth, n, real.frames(), s);
    assert_eq!(
        evaluate_generator(&real, gen, &opts).unwrap(),
        evaluate_generator(&real, gen, &opts).unwrap()
    );
    let small = Corpus::new(real.signs()[..5].to_vec()).unwrap();
    assert!(matches!(evaluate_generator(&small, gen, &opts), Err(Error::InvalidInput(_))));
    let short = |n: usize, s: u64| sample(&truth, n, 10, s);
    assert!(matches!(evaluate_generator(&real, short, &opts), Err(Error::InvalidInput(_))));
}

mod common;

use std::f64::consts::PI;

use common::*;
use mh_phone_core::corpus::{Corpus, NoiseLevel, SignSequence};
use mh_phone_core::model::{log_joint, log_joint_terms};
use mh_phone_core::{Assignment, Hyperparams, ModelParams};
use ndarray::array;

fn tiny() -> (ModelParams, Corpus, Assignment) {
    let params = ModelParams {
        pi: array![0.25, 0.75],
        trans: array![[0.6, 0.4], [0.1, 0.9]],
        mu: array![[0.0], [1.5]],
        sigma: array![0.5],
    };
    let corpus = Corpus::new(vec![SignSequence {
        gloss: "g".into(),
        signer: "s".into(),
        noise: NoiseLevel::None,
        features: array![[1.0], [0.0]],
        true_length: 1,
    }])
    .unwrap();
    (params, corpus, Assignment { labels: vec![vec![1, 0]] })
}

#[test]
fn hand_expansion() {
    let (params, corpus, assignment) = tiny();
    let hyper = Hyperparams {
        alpha: 2.0,
        mu_mu: 0.5,
        sigma_mu: 2.0,
        mu_sigma: 0.0,
        sigma_sigma: 3.0,
    };
    let s: f64 = 0.5;
    // Dirichlet(2, 2) density of (p, 1 - p) is 6 p (1 - p).
    let dir2 = |p: f64| (6.0 * p * (1.0 - p)).ln();
    let expected = -s.ln() - 3.0f64.ln() - 0.5 * (2.0 * PI).ln() - s.ln().powi(2) / 18.0
        + dir2(0.25)
        + dir2(0.6)
        + dir2(0.1)
        + (-2.0f64.ln() - 0.5 * (2.0 * PI).ln() - 1.0 / 8.0)
        + 0.75f64.ln()
        + 0.1f64.ln()
        + (-(0.5f64).ln() - 0.5 * (2.0 * PI).ln() - 0.25 / 0.5)
        + (-(0.5f64).ln() - 0.5 * (2.0 * PI).ln());
    let got = log_joint(&params, &corpus, &assignment, &hyper);
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

#[test]
fn terms_add_up() {
    let (params, corpus, assignment) = tiny();
    let t = log_joint_terms(&params, &corpus, &assignment, &Hyperparams::default());
    let sum = t.sigma_prior + t.pi_prior + t.trans_prior + t.mu_prior + t.labels + t.emission;
    assert_eq!(t.total(), sum);
    // A flat Dirichlet over two categories has density 1.
    assert!(t.pi_prior.abs() < 1e-12);
    assert!(t.trans_prior.abs() < 1e-12);
}

#[test]
fn likelihood_part_matches_path_probability() {
    let mut r = rng(21);
    let params = random_params(&mut r, 3, 2);
    let corpus = random_corpus(&mut r, 4, 5, 2);
    let assignment = Assignment {
        labels: (0..4).map(|w| (0..5).map(|f| (w + f) % 3).collect()).collect(),
    };
    let t = log_joint_terms(&params, &corpus, &assignment, &Hyperparams::default());
    let oracle: f64 = corpus
        .signs()
        .iter()
        .zip(&assignment.labels)
        .map(|(s, l)| path_log_prob(&params, &s.features, l))
        .sum();
    assert!((t.labels + t.emission - oracle).abs() < 1e-10);
}

#[test]
fn sigma_prior_scale_enters_only_through_its_term() {
    let (params, corpus, assignment) = tiny();
    let base = Hyperparams::default();
    let wide = Hyperparams {
        sigma_sigma: 2.0 * base.sigma_sigma,
        ..base
    };
    let a = log_joint_terms(&params, &corpus, &assignment, &base);
    let b = log_joint_terms(&params, &corpus, &assignment, &wide);
    let expected = log_normal_density_ln(0.5, 1.0, 20.0) - log_normal_density_ln(0.5, 1.0, 10.0);
    assert!((b.total() - a.total() - expected).abs() < 1e-12);
    assert_eq!(a.mu_prior, b.mu_prior);
}

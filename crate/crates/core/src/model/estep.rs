//! Hard E-step: label every frame of every sign.
//!
//! The greedy pass picks `c_0 = argmax_i ln pi_i + k(x_0, i)` and then
//! `c_f = argmax_i ln T[c_{f-1}, i] + k(x_f, i)` frame by frame, where `k` is
//! the Gaussian kernel. It costs `O(M P N)` kernel evaluations. The Viterbi
//! pass maximizes the sum of those terms over whole label sequences in
//! `O(M P N^2)`. Both break ties toward the lower state index.

use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Assignment, ModelParams};
use crate::corpus::Corpus;
use crate::emission::{inverse_variance, kernel, kernels_into};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EStep {
    #[default]
    Greedy,
    Viterbi,
}

/// Index of the first maximum.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

struct LogParams {
    log_pi: Array1<f64>,
    log_trans: Array2<f64>,
    inv_var: Array1<f64>,
}

impl LogParams {
    fn new(params: &ModelParams) -> Self {
        LogParams {
            log_pi: params.pi.mapv(f64::ln),
            log_trans: params.trans.mapv(f64::ln),
            inv_var: inverse_variance(&params.sigma),
        }
    }
}

fn greedy_with(lp: &LogParams, mu: &Array2<f64>, x: ArrayView2<f64>) -> Vec<usize> {
    let n = mu.nrows();
    let mut scores = vec![0.0; n];
    let mut labels = Vec::with_capacity(x.nrows());
    for (f, row) in x.rows().into_iter().enumerate() {
        kernels_into(row, mu, &lp.inv_var, &mut scores);
        let prior = if f == 0 {
            lp.log_pi.view()
        } else {
            lp.log_trans.row(labels[f - 1])
        };
        for (s, p) in scores.iter_mut().zip(prior.iter()) {
            *s += p;
        }
        labels.push(argmax(&scores));
    }
    labels
}

fn viterbi_with(lp: &LogParams, mu: &Array2<f64>, x: ArrayView2<f64>) -> Vec<usize> {
    let n = mu.nrows();
    let p = x.nrows();
    if p == 0 {
        return Vec::new();
    }
    let mut emit = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut back = vec![0usize; p * n];

    kernels_into(x.row(0), mu, &lp.inv_var, &mut emit);
    for i in 0..n {
        delta[i] = lp.log_pi[i] + emit[i];
    }
    for f in 1..p {
        kernels_into(x.row(f), mu, &lp.inv_var, &mut emit);
        for i in 0..n {
            let mut best_j = 0;
            let mut best = delta[0] + lp.log_trans[[0, i]];
            for j in 1..n {
                let s = delta[j] + lp.log_trans[[j, i]];
                if s > best {
                    best = s;
                    best_j = j;
                }
            }
            back[f * n + i] = best_j;
            next[i] = best + emit[i];
        }
        std::mem::swap(&mut delta, &mut next);
    }
    let mut labels = vec![0; p];
    labels[p - 1] = argmax(&delta);
    for f in (1..p).rev() {
        labels[f - 1] = back[f * n + labels[f]];
    }
    labels
}

/// Greedy forward labeling of one sign (`P x D`).
pub fn greedy_path(params: &ModelParams, x: ArrayView2<f64>) -> Vec<usize> {
    greedy_with(&LogParams::new(params), &params.mu, x)
}

/// Most probable label sequence of one sign.
pub fn viterbi_path(params: &ModelParams, x: ArrayView2<f64>) -> Vec<usize> {
    viterbi_with(&LogParams::new(params), &params.mu, x)
}

/// The quantity both passes maximize: `ln pi[c_0] + sum_f ln T[c_{f-1}, c_f]`
/// plus the Gaussian kernels of every frame.
pub fn sequence_log_score(params: &ModelParams, x: ArrayView2<f64>, labels: &[usize]) -> f64 {
    let inv_var = inverse_variance(&params.sigma);
    let mut score = 0.0;
    for (f, (row, &c)) in x.rows().into_iter().zip(labels).enumerate() {
        let prior = if f == 0 {
            params.pi[c]
        } else {
            params.trans[[labels[f - 1], c]]
        };
        score += prior.ln() + kernel(row, params.mu.row(c), &inv_var);
    }
    score
}

fn run(params: &ModelParams, corpus: &Corpus, kind: EStep) -> Assignment {
    let lp = LogParams::new(params);
    let labels = corpus
        .signs()
        .par_iter()
        .map(|s| match kind {
            EStep::Greedy => greedy_with(&lp, &params.mu, s.features.view()),
            EStep::Viterbi => viterbi_with(&lp, &params.mu, s.features.view()),
        })
        .collect();
    Assignment { labels }
}

/// Greedy labeling of every sign; signs are processed in parallel.
pub fn e_step_greedy(params: &ModelParams, corpus: &Corpus) -> Assignment {
    run(params, corpus, EStep::Greedy)
}

/// Viterbi labeling of every sign; signs are processed in parallel.
pub fn e_step_viterbi(params: &ModelParams, corpus: &Corpus) -> Assignment {
    run(params, corpus, EStep::Viterbi)
}

pub fn e_step(params: &ModelParams, corpus: &Corpus, kind: EStep) -> Assignment {
    run(params, corpus, kind)
}

//! Single-topic-per-sign topic model over prototypes (a mixture of
//! unigrams): each sign draws one topic, and each of its frames draws a
//! prototype from that topic's distribution `psi[t]`.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gmm::{argmax_component, emission_log_joint, labeled};
use super::init_mixture;
use crate::corpus::{Corpus, NoiseLevel, SignSequence};
use crate::emission::{
    inverse_variance, kernels_into, residual_sums, seed_centers, update_means, update_sigma,
    EmissionStats,
};
use crate::error::{Error, Result};
use crate::model::{check_simplex, em_relative_change, joint_dirichlet_log_pdf, sample_categorical, sample_gaussian};
use crate::model::{dirichlet_map, FitOptions, FitReport, Hyperparams};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct GmmLdaParams {
    pub n_topics: usize,
    /// Relative frequency of each topic across signs.
    pub topic_weights: Array1<f64>,
    /// `psi`: one prototype distribution per topic (`n_topics x N`).
    pub topic_word: Array2<f64>,
    pub doc_topic_prior: f64,
    pub word_prior: f64,
    pub mu: Array2<f64>,
    pub sigma: Array1<f64>,
}

impl GmmLdaParams {
    pub fn n_components(&self) -> usize {
        self.mu.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mu.nrows();
        if self.n_topics == 0
            || self.topic_weights.len() != self.n_topics
            || self.topic_word.dim() != (self.n_topics, n)
            || self.sigma.len() != self.mu.ncols()
        {
            return Err(Error::InvalidParams("inconsistent topic model shapes".into()));
        }
        if !(self.doc_topic_prior > 0.0) || !(self.word_prior > 0.0) {
            return Err(Error::InvalidParams("topic priors must be positive".into()));
        }
        check_simplex(self.topic_weights.iter().copied(), "topic_weights")?;
        for (t, row) in self.topic_word.rows().into_iter().enumerate() {
            check_simplex(row.iter().copied(), &format!("topic_word row {t}"))?;
        }
        if self.sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParams("sigma must be strictly positive".into()));
        }
        Ok(())
    }
}

/// Concentrations of the topic model. Both default to the network's `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicPriors {
    pub doc_topic: f64,
    pub word: f64,
}

impl TopicPriors {
    pub fn from_hyper(hyper: &Hyperparams) -> Self {
        TopicPriors {
            doc_topic: hyper.alpha,
            word: hyper.alpha,
        }
    }
}

struct Labels {
    topics: Vec<usize>,
    frames: Vec<Vec<usize>>,
}

/// Best prototype of every frame under topic `t`, and the summed score.
fn best_frames(
    x: &SignSequence,
    log_psi: ArrayView1<f64>,
    mu: &Array2<f64>,
    inv_var: &Array1<f64>,
    scores: &mut [f64],
) -> (Vec<usize>, f64) {
    let log_w = log_psi.to_vec();
    let mut total = 0.0;
    let labels = x
        .features
        .rows()
        .into_iter()
        .map(|row| {
            kernels_into(row, mu, inv_var, scores);
            let k = argmax_component(&log_w, scores);
            total += scores[k];
            k
        })
        .collect();
    (labels, total)
}

/// Joint argmax over each sign's topic and its frames' prototypes.
fn assign(params: &GmmLdaParams, corpus: &Corpus) -> Labels {
    let log_theta = params.topic_weights.mapv(f64::ln);
    let log_psi = params.topic_word.mapv(f64::ln);
    let inv_var = inverse_variance(&params.sigma);
    let n = params.n_components();
    let per_sign: Vec<(usize, Vec<usize>)> = corpus
        .signs()
        .par_iter()
        .map(|s| {
            let mut scores = vec![0.0; n];
            let mut best: Option<(usize, Vec<usize>, f64)> = None;
            for t in 0..params.n_topics {
                let (labels, score) = best_frames(s, log_psi.row(t), &params.mu, &inv_var, &mut scores);
                let score = score + log_theta[t];
                if best.as_ref().is_none_or(|b| score > b.2) {
                    best = Some((t, labels, score));
                }
            }
            let (t, labels, _) = best.expect("at least one topic");
            (t, labels)
        })
        .collect();
    let (topics, frames) = per_sign.into_iter().unzip();
    Labels { topics, frames }
}

/// Prototype histogram of every sign.
fn histograms(frames: &[Vec<usize>], n: usize) -> Vec<Array1<f64>> {
    frames
        .iter()
        .map(|l| {
            let mut h = Array1::zeros(n);
            for &k in l {
                h[k] += 1.0 / l.len() as f64;
            }
            h
        })
        .collect()
}

/// First topic assignment: k-means++ centers over the signs' prototype
/// histograms, each sign going to its nearest center.
fn seed_topics(frames: &[Vec<usize>], n: usize, n_topics: usize, seed: u64) -> Vec<usize> {
    if n_topics == 1 {
        return vec![0; frames.len()];
    }
    let hist = histograms(frames, n);
    let views: Vec<_> = hist.iter().map(|h| h.view()).collect();
    let mut rng = rng::stream(seed, "gmm-lda/topics");
    let centers = seed_centers(&views, &[], n_topics, &mut rng);
    hist.iter()
        .map(|h| {
            let d: Vec<f64> = centers.iter().map(|c| (h - c).mapv(|v| v * v).sum()).collect();
            (0..d.len()).fold(0, |b, i| if d[i] < d[b] { i } else { b })
        })
        .collect()
}

fn m_step(corpus: &Corpus, labels: &Labels, hyper: &Hyperparams, prev: &GmmLdaParams) -> GmmLdaParams {
    let n = prev.n_components();
    let mut topic_counts = vec![0.0; prev.n_topics];
    let mut word_counts = Array2::<f64>::zeros((prev.n_topics, n));
    for (&t, l) in labels.topics.iter().zip(&labels.frames) {
        topic_counts[t] += 1.0;
        for &k in l {
            word_counts[[t, k]] += 1.0;
        }
    }
    let topic_weights = dirichlet_map(&topic_counts, prev.doc_topic_prior);
    let mut topic_word = Array2::zeros((prev.n_topics, n));
    for (t, mut row) in topic_word.rows_mut().into_iter().enumerate() {
        row.assign(&dirichlet_map(&word_counts.row(t).to_vec(), prev.word_prior));
    }
    let stats = EmissionStats::collect(labeled(corpus, &labels.frames), n, corpus.dim());
    let mu = update_means(&stats, &prev.sigma, hyper, &[]);
    let (rss, count) = residual_sums(labeled(corpus, &labels.frames), &mu);
    let sigma = update_sigma(&rss, count, hyper);
    GmmLdaParams {
        topic_weights,
        topic_word,
        mu,
        sigma,
        ..prev.clone()
    }
}

fn log_joint(params: &GmmLdaParams, corpus: &Corpus, labels: &Labels, hyper: &Hyperparams) -> f64 {
    let mut lj = joint_dirichlet_log_pdf(params.topic_weights.iter().copied(), params.doc_topic_prior);
    for row in params.topic_word.rows() {
        lj += joint_dirichlet_log_pdf(row.iter().copied(), params.word_prior);
    }
    for (&t, l) in labels.topics.iter().zip(&labels.frames) {
        lj += params.topic_weights[t].ln();
        lj += l.iter().map(|&k| params.topic_word[[t, k]].ln()).sum::<f64>();
    }
    lj + emission_log_joint(&params.mu, &params.sigma, corpus, &labels.frames, hyper)
}

/// Hard-EM fit with `n` prototypes and `n_topics` topics. The topic priors
/// are both `hyper.alpha`; `opts.e_step` is ignored. With one topic every
/// step coincides with [`super::fit_gmm`].
pub fn fit_gmm_lda(
    corpus: &Corpus,
    n: usize,
    n_topics: usize,
    hyper: &Hyperparams,
    opts: &FitOptions,
) -> Result<(GmmLdaParams, FitReport)> {
    hyper.validate()?;
    if n_topics == 0 {
        return Err(Error::InvalidInput("need at least one topic".into()));
    }
    let priors = TopicPriors::from_hyper(hyper);
    let (mu, sigma) = init_mixture(corpus, n, opts.seed)?;
    let mut params = GmmLdaParams {
        n_topics,
        topic_weights: Array1::from_elem(n_topics, 1.0 / n_topics as f64),
        topic_word: Array2::from_elem((n_topics, n), 1.0 / n as f64),
        doc_topic_prior: priors.doc_topic,
        word_prior: priors.word,
        mu,
        sigma,
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let max_iters = if opts.tol.is_finite() { opts.max_iters } else { 1 };
    for it in 0..max_iters {
        let mut labels = assign(&params, corpus);
        if it == 0 {
            // Uniform topics tie everywhere; break the symmetry from the data.
            labels.topics = seed_topics(&labels.frames, n, n_topics, opts.seed);
        }
        params = m_step(corpus, &labels, hyper, &params);
        trace.push(log_joint(&params, corpus, &labels, hyper));
        if let [.., prev, cur] = trace[..] {
            if em_relative_change(prev, cur) < opts.tol {
                converged = true;
                break;
            }
        }
    }
    Ok((
        params,
        FitReport {
            iterations: trace.len(),
            log_joint_trace: trace,
            converged,
        },
    ))
}

/// Topic-then-frames sampling; returns each sign's topic and frame labels.
pub fn sample_gmm_lda_with_labels(
    params: &GmmLdaParams,
    n_signs: usize,
    frames: usize,
    seed: u64,
) -> Result<(Corpus, Vec<usize>, Vec<Vec<usize>>)> {
    params.validate()?;
    let mut rng = Rng::seed_from_u64(seed);
    let mut signs = Vec::with_capacity(n_signs);
    let mut topics = Vec::with_capacity(n_signs);
    let mut labels = Vec::with_capacity(n_signs);
    for w in 0..n_signs {
        let t = sample_categorical(params.topic_weights.view(), &mut rng);
        let mut features = Array2::zeros((frames, params.mu.ncols()));
        let mut l = Vec::with_capacity(frames);
        for f in 0..frames {
            let k = sample_categorical(params.topic_word.row(t), &mut rng);
            sample_gaussian(params.mu.row(k), params.sigma.view(), &mut rng, features.row_mut(f));
            l.push(k);
        }
        signs.push(SignSequence {
            gloss: format!("gmm-lda-{w}"),
            signer: "synthetic".into(),
            noise: NoiseLevel::None,
            features,
            true_length: frames,
        });
        topics.push(t);
        labels.push(l);
    }
    Ok((Corpus::new(signs)?, topics, labels))
}

pub fn sample_gmm_lda(params: &GmmLdaParams, n_signs: usize, frames: usize, seed: u64) -> Result<Corpus> {
    sample_gmm_lda_with_labels(params, n_signs, frames, seed).map(|(c, _, _)| c)
}

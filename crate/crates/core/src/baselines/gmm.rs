//! Frame-independent Gaussian mixture.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rayon::prelude::*;

use super::init_mixture;
use crate::corpus::{Corpus, NoiseLevel, SignSequence};
use crate::emission::{
    inverse_variance, kernels_into, log_norm_const, log_normal_log_pdf, normal_log_pdf,
    residual_sums, update_means, update_sigma, EmissionStats,
};
use crate::error::{Error, Result};
use crate::model::{dirichlet_map, FitOptions, FitReport, Hyperparams};
use crate::model::{check_simplex, em_relative_change, joint_dirichlet_log_pdf, sample_categorical, sample_gaussian};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmParams {
    pub weights: Array1<f64>,
    pub mu: Array2<f64>,
    pub sigma: Array1<f64>,
}

impl GmmParams {
    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 || self.mu.nrows() != n || self.mu.ncols() != self.sigma.len() {
            return Err(Error::InvalidParams("inconsistent mixture shapes".into()));
        }
        check_simplex(self.weights.iter().copied(), "weights")?;
        if self.sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParams("sigma must be strictly positive".into()));
        }
        Ok(())
    }
}

pub(crate) fn argmax_component(log_w: &[f64], scores: &mut [f64]) -> usize {
    let mut best = 0;
    for i in 0..scores.len() {
        scores[i] += log_w[i];
        if scores[i] > scores[best] {
            best = i;
        }
    }
    best
}

fn assign(params: &GmmParams, corpus: &Corpus) -> Vec<Vec<usize>> {
    let log_w: Vec<f64> = params.weights.iter().map(|w| w.ln()).collect();
    let inv_var = inverse_variance(&params.sigma);
    corpus
        .signs()
        .par_iter()
        .map(|s| {
            let mut scores = vec![0.0; log_w.len()];
            s.features
                .rows()
                .into_iter()
                .map(|x| {
                    kernels_into(x, &params.mu, &inv_var, &mut scores);
                    argmax_component(&log_w, &mut scores)
                })
                .collect()
        })
        .collect()
}

pub(crate) fn labeled<'a>(
    corpus: &'a Corpus,
    labels: &'a [Vec<usize>],
) -> impl Iterator<Item = (ndarray::ArrayView1<'a, f64>, usize)> + 'a {
    corpus
        .signs()
        .iter()
        .zip(labels)
        .flat_map(|(s, l)| s.features.rows().into_iter().zip(l.iter().copied()))
}

/// Prior terms on `mu` (every row) and `sigma`, plus the emission terms of
/// all labeled frames.
pub(crate) fn emission_log_joint(
    mu: &Array2<f64>,
    sigma: &Array1<f64>,
    corpus: &Corpus,
    labels: &[Vec<usize>],
    hyper: &Hyperparams,
) -> f64 {
    let prior: f64 = sigma
        .iter()
        .map(|&s| log_normal_log_pdf(s, hyper.mu_sigma, hyper.sigma_sigma))
        .chain(mu.iter().map(|&m| normal_log_pdf(m, hyper.mu_mu, hyper.sigma_mu)))
        .sum();
    let inv_var = inverse_variance(sigma);
    let c = log_norm_const(sigma);
    let emission: f64 = labeled(corpus, labels)
        .map(|(x, k)| c + crate::emission::kernel(x, mu.row(k), &inv_var))
        .sum();
    prior + emission
}

fn log_joint(params: &GmmParams, corpus: &Corpus, labels: &[Vec<usize>], hyper: &Hyperparams) -> f64 {
    let weights = joint_dirichlet_log_pdf(params.weights.iter().copied(), hyper.alpha)
        + labels
            .iter()
            .flatten()
            .map(|&k| params.weights[k].ln())
            .sum::<f64>();
    weights + emission_log_joint(&params.mu, &params.sigma, corpus, labels, hyper)
}

fn m_step(corpus: &Corpus, labels: &[Vec<usize>], hyper: &Hyperparams, prev: &GmmParams) -> GmmParams {
    let n = prev.n_components();
    let stats = EmissionStats::collect(labeled(corpus, labels), n, corpus.dim());
    let weights = dirichlet_map(&stats.counts, hyper.alpha);
    let mu = update_means(&stats, &prev.sigma, hyper, &[]);
    let (rss, count) = residual_sums(labeled(corpus, labels), &mu);
    let sigma = update_sigma(&rss, count, hyper);
    GmmParams { weights, mu, sigma }
}

/// Hard-EM fit of an `n`-component mixture over every frame of the corpus.
/// `opts.e_step` is ignored.
pub fn fit_gmm(
    corpus: &Corpus,
    n: usize,
    hyper: &Hyperparams,
    opts: &FitOptions,
) -> Result<(GmmParams, FitReport)> {
    hyper.validate()?;
    let (mu, sigma) = init_mixture(corpus, n, opts.seed)?;
    let mut params = GmmParams {
        weights: Array1::from_elem(n, 1.0 / n as f64),
        mu,
        sigma,
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let max_iters = if opts.tol.is_finite() { opts.max_iters } else { 1 };
    for _ in 0..max_iters {
        let labels = assign(&params, corpus);
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

/// Signs of `frames` i.i.d. mixture draws, with their component labels.
pub fn sample_gmm_with_labels(
    params: &GmmParams,
    n_signs: usize,
    frames: usize,
    seed: u64,
) -> Result<(Corpus, Vec<Vec<usize>>)> {
    params.validate()?;
    let mut rng = Rng::seed_from_u64(seed);
    let mut signs = Vec::with_capacity(n_signs);
    let mut labels = Vec::with_capacity(n_signs);
    for w in 0..n_signs {
        let mut features = Array2::zeros((frames, params.mu.ncols()));
        let mut l = Vec::with_capacity(frames);
        for f in 0..frames {
            let k = sample_categorical(params.weights.view(), &mut rng);
            sample_gaussian(params.mu.row(k), params.sigma.view(), &mut rng, features.row_mut(f));
            l.push(k);
        }
        signs.push(SignSequence {
            gloss: format!("gmm-{w}"),
            signer: "synthetic".into(),
            noise: NoiseLevel::None,
            features,
            true_length: frames,
        });
        labels.push(l);
    }
    Ok((Corpus::new(signs)?, labels))
}

pub fn sample_gmm(params: &GmmParams, n_signs: usize, frames: usize, seed: u64) -> Result<Corpus> {
    sample_gmm_with_labels(params, n_signs, frames, seed).map(|(c, _)| c)
}

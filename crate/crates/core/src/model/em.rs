//! Hard-EM driver.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::estep::{e_step, EStep};
use super::{log_joint, m_step, Assignment, Hyperparams, ModelParams};
use crate::corpus::Corpus;
use crate::emission::{empirical_sigma, seed_centers};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iters: usize,
    /// Relative change of the log joint below which training stops. A
    /// non-finite value runs exactly one iteration.
    pub tol: f64,
    pub e_step: EStep,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iters: 200,
            tol: 1e-6,
            e_step: EStep::Greedy,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub log_joint_trace: Vec<f64>,
    pub converged: bool,
}

/// Uniform `pi` and `T`, `mu[0] = 0`, the other prototypes seeded from
/// non-padding frames by k-means++ (with the origin as a pre-chosen center)
/// and `sigma` set to the empirical spread of non-padding frames.
pub fn init_params(n_states: usize, corpus: &Corpus, seed: u64) -> Result<ModelParams> {
    if n_states < 2 {
        return Err(Error::InvalidInput(
            "need at least two states (the end state plus one prototype)".into(),
        ));
    }
    let d = corpus.dim();
    let frames: Vec<_> = corpus.non_padding_frames().collect();
    if frames.len() < n_states - 1 {
        return Err(Error::NotEnoughData {
            needed: n_states - 1,
            available: frames.len(),
        });
    }
    let mut rng = rng::stream(seed, "dbn/init");
    let centers = seed_centers(&frames, &[Array1::zeros(d)], n_states - 1, &mut rng);
    let mut mu = Array2::zeros((n_states, d));
    for (i, c) in centers.iter().enumerate() {
        mu.row_mut(i + 1).assign(c);
    }
    let uniform = 1.0 / n_states as f64;
    Ok(ModelParams {
        pi: Array1::from_elem(n_states, uniform),
        trans: Array2::from_elem((n_states, n_states), uniform),
        mu,
        sigma: empirical_sigma(&frames, d),
    })
}

pub(crate) fn relative_change(prev: f64, cur: f64) -> f64 {
    (cur - prev).abs() / prev.abs().max(f64::MIN_POSITIVE)
}

/// Alternates E- and M-steps from [`init_params`] until the relative change
/// of the log joint drops below `opts.tol` or `opts.max_iters` is reached.
/// With the Viterbi E-step every iteration is a coordinate-ascent step, so
/// the trace never decreases.
pub fn fit_em(
    corpus: &Corpus,
    n_states: usize,
    hyper: &Hyperparams,
    opts: &FitOptions,
) -> Result<(ModelParams, Assignment, FitReport)> {
    hyper.validate()?;
    let mut params = init_params(n_states, corpus, opts.seed)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut assignment = Assignment { labels: Vec::new() };
    let max_iters = if opts.tol.is_finite() { opts.max_iters } else { 1 };
    for it in 0..max_iters {
        assignment = e_step(&params, corpus, opts.e_step);
        params = m_step(corpus, &assignment, hyper, &params);
        let lj = log_joint(&params, corpus, &assignment, hyper);
        log::debug!("em iteration {}: log joint {lj}", it + 1);
        trace.push(lj);
        if let [.., prev, cur] = trace[..] {
            if relative_change(prev, cur) < opts.tol {
                converged = true;
                break;
            }
        }
    }
    Ok((
        params,
        assignment,
        FitReport {
            iterations: trace.len(),
            log_joint_trace: trace,
            converged,
        },
    ))
}

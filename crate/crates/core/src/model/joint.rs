//! Log joint density of parameters, labels and frames.

use statrs::function::gamma::ln_gamma;

use super::{Assignment, Hyperparams, ModelParams};
use crate::corpus::Corpus;
use crate::emission::{inverse_variance, kernel, log_norm_const, log_normal_log_pdf, normal_log_pdf};

/// The joint log density split by factor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogJointTerms {
    /// Log-normal prior on every `sigma_d`.
    pub sigma_prior: f64,
    /// Dirichlet prior on `pi`.
    pub pi_prior: f64,
    /// Dirichlet priors on the rows of `T`.
    pub trans_prior: f64,
    /// Gaussian priors on prototype rows `1..N`.
    pub mu_prior: f64,
    /// Initial-state and transition terms of all labels.
    pub labels: f64,
    /// Gaussian emission terms of all frames.
    pub emission: f64,
}

impl LogJointTerms {
    pub fn total(&self) -> f64 {
        self.sigma_prior + self.pi_prior + self.trans_prior + self.mu_prior + self.labels + self.emission
    }
}

/// Symmetric Dirichlet(`alpha`) log density. A zero entry contributes
/// nothing when `alpha = 1` and is floored at the smallest normal double
/// otherwise.
pub(crate) fn dirichlet_log_pdf(p: impl ExactSizeIterator<Item = f64>, alpha: f64) -> f64 {
    let k = p.len() as f64;
    let mut acc = ln_gamma(k * alpha) - k * ln_gamma(alpha);
    if alpha != 1.0 {
        for v in p {
            acc += (alpha - 1.0) * v.max(f64::MIN_POSITIVE).ln();
        }
    }
    acc
}

pub fn log_joint_terms(
    params: &ModelParams,
    corpus: &Corpus,
    assignment: &Assignment,
    hyper: &Hyperparams,
) -> LogJointTerms {
    let sigma_prior = params
        .sigma
        .iter()
        .map(|&s| log_normal_log_pdf(s, hyper.mu_sigma, hyper.sigma_sigma))
        .sum();
    let pi_prior = dirichlet_log_pdf(params.pi.iter().copied(), hyper.alpha);
    let trans_prior = params
        .trans
        .rows()
        .into_iter()
        .map(|r| dirichlet_log_pdf(r.iter().copied(), hyper.alpha))
        .sum();
    let mu_prior = params
        .mu
        .rows()
        .into_iter()
        .skip(1)
        .flat_map(|r| r.to_vec())
        .map(|m| normal_log_pdf(m, hyper.mu_mu, hyper.sigma_mu))
        .sum();

    let inv_var = inverse_variance(&params.sigma);
    let frame_const = log_norm_const(&params.sigma);
    let mut labels_term = 0.0;
    let mut emission = 0.0;
    for (sign, labels) in corpus.signs().iter().zip(&assignment.labels) {
        for (f, (x, &c)) in sign.features.rows().into_iter().zip(labels).enumerate() {
            let p = if f == 0 {
                params.pi[c]
            } else {
                params.trans[[labels[f - 1], c]]
            };
            labels_term += p.ln();
            emission += frame_const + kernel(x, params.mu.row(c), &inv_var);
        }
    }
    LogJointTerms {
        sigma_prior,
        pi_prior,
        trans_prior,
        mu_prior,
        labels: labels_term,
        emission,
    }
}

/// `ln p(sigma) + ln p(pi) + sum_j ln p(T_j) + sum_{i>0} ln p(mu_i)
///  + sum_w [ln pi[c_0] + sum_f ln T[c_{f-1}, c_f] + sum_f ln N(x_f; mu[c_f], sigma)]`.
pub fn log_joint(
    params: &ModelParams,
    corpus: &Corpus,
    assignment: &Assignment,
    hyper: &Hyperparams,
) -> f64 {
    log_joint_terms(params, corpus, assignment, hyper).total()
}

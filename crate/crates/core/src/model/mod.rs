//! The Movement-Hold dynamic Bayesian network.
//!
//! Each sign is a first-order Markov chain over body-configuration
//! prototypes. State 0 is the end state whose prototype is pinned to the zero
//! vector, so padding rows are explained by it. Frames are Gaussian around
//! their prototype with a diagonal standard deviation `sigma` shared by all
//! states:
//!
//! ```text
//! sigma_d        ~ LogNormal(mu_sigma, sigma_sigma)
//! pi, T_j        ~ Dirichlet(alpha * 1)
//! mu_0           = 0
//! mu_i (i > 0)   ~ Normal(mu_mu, sigma_mu^2 I)
//! c_0            ~ Categorical(pi)
//! c_f | c_{f-1}  ~ Categorical(T[c_{f-1}])
//! x_f | c_f      ~ Normal(mu[c_f], diag(sigma^2))
//! ```
//!
//! Training is hard EM: label assignment alternates with a MAP update of the
//! parameters.

mod em;
mod estep;
mod joint;
mod mstep;
mod sample;
mod truth;

pub use em::{fit_em, init_params, FitOptions, FitReport};
pub use estep::{
    e_step, e_step_greedy, e_step_viterbi, greedy_path, sequence_log_score, viterbi_path, EStep,
};
pub use joint::{log_joint, log_joint_terms, LogJointTerms};
pub use mstep::{dirichlet_map, m_step};
pub use sample::{sample, sample_with_labels};
pub use truth::{synthetic_truth, TRUTH_END, TRUTH_STAY};

pub(crate) use em::relative_change as em_relative_change;
pub(crate) use joint::dirichlet_log_pdf as joint_dirichlet_log_pdf;
pub(crate) use sample::{sample_categorical, sample_gaussian};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prior constants. The defaults are `alpha = 1`, `mu_mu = 0`,
/// `sigma_mu = 10`, `mu_sigma = 1`, `sigma_sigma = 10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// Symmetric Dirichlet concentration for `pi` and every row of `T`.
    pub alpha: f64,
    /// Prior mean of every prototype coordinate.
    pub mu_mu: f64,
    /// Prior standard deviation of every prototype coordinate.
    pub sigma_mu: f64,
    /// Location of the log-normal prior on each `sigma_d`.
    pub mu_sigma: f64,
    /// Scale of the log-normal prior on each `sigma_d`.
    pub sigma_sigma: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            alpha: 1.0,
            mu_mu: 0.0,
            sigma_mu: 10.0,
            mu_sigma: 1.0,
            sigma_sigma: 10.0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.alpha) || !ok(self.sigma_mu) || !ok(self.sigma_sigma) {
            return Err(Error::InvalidParams(
                "alpha, sigma_mu and sigma_sigma must be positive".into(),
            ));
        }
        if !self.mu_mu.is_finite() || !self.mu_sigma.is_finite() {
            return Err(Error::InvalidParams("mu_mu and mu_sigma must be finite".into()));
        }
        Ok(())
    }
}

/// Parameters of the network. Row `i` of `trans` is the distribution of the
/// next state given current state `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub pi: Array1<f64>,
    pub trans: Array2<f64>,
    pub mu: Array2<f64>,
    pub sigma: Array1<f64>,
}

const SIMPLEX_TOL: f64 = 1e-9;

pub(crate) fn check_simplex(p: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    let mut sum = 0.0;
    for v in p {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidParams(format!("{what} has entry {v}")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidParams(format!("{what} sums to {sum}")));
    }
    Ok(())
}

impl ModelParams {
    /// Number of states `N`, end state included.
    pub fn n_states(&self) -> usize {
        self.pi.len()
    }

    /// Feature dimension `D`.
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_states();
        if n < 2 {
            return Err(Error::InvalidParams("need at least two states".into()));
        }
        if self.trans.dim() != (n, n) || self.mu.dim() != (n, self.dim()) {
            return Err(Error::InvalidParams("inconsistent parameter shapes".into()));
        }
        check_simplex(self.pi.iter().copied(), "pi")?;
        for (i, row) in self.trans.rows().into_iter().enumerate() {
            check_simplex(row.iter().copied(), &format!("trans row {i}"))?;
        }
        if self.mu.row(0).iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidParams("mu[0] must be the zero vector".into()));
        }
        if self.mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("mu must be finite".into()));
        }
        if self.sigma.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidParams("sigma must be strictly positive".into()));
        }
        Ok(())
    }

    /// Relabels states `1..N` so that new state `k` is old state `perm[k]`.
    /// `perm[0]` must be `0`.
    pub fn permuted(&self, perm: &[usize]) -> ModelParams {
        assert_eq!(perm.len(), self.n_states());
        assert_eq!(perm[0], 0, "the end state cannot be relabeled");
        let n = perm.len();
        let pi = Array1::from_shape_fn(n, |k| self.pi[perm[k]]);
        let trans = Array2::from_shape_fn((n, n), |(a, b)| self.trans[[perm[a], perm[b]]]);
        let mu = Array2::from_shape_fn(self.mu.dim(), |(k, d)| self.mu[[perm[k], d]]);
        ModelParams {
            pi,
            trans,
            mu,
            sigma: self.sigma.clone(),
        }
    }
}

/// Per-sign, per-frame state labels (`M x P`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub labels: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn n_signs(&self) -> usize {
        self.labels.len()
    }

    pub(crate) fn check_against(&self, corpus: &crate::corpus::Corpus, n_states: usize) -> Result<()> {
        if self.labels.len() != corpus.len()
            || self.labels.iter().any(|l| l.len() != corpus.frames())
        {
            return Err(Error::InvalidInput(
                "assignment shape does not match the corpus".into(),
            ));
        }
        if self.labels.iter().flatten().any(|&c| c >= n_states) {
            return Err(Error::InvalidInput("label out of range".into()));
        }
        Ok(())
    }
}

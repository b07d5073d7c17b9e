//! Ground-truth parameters for synthetic corpora.

use ndarray::{Array1, Array2};
use rand::Rng as _;

use super::ModelParams;
use crate::error::{Error, Result};
use crate::rng;

/// Self-transition probability of every prototype in [`synthetic_truth`].
pub const TRUTH_STAY: f64 = 0.8;
/// Probability that a prototype hands over to the end state.
pub const TRUTH_END: f64 = 0.05;

/// A well-separated parameter set: the end state is absorbing and never
/// starts a sign, `pi` is uniform over prototypes, each prototype stays with
/// probability [`TRUTH_STAY`], ends with [`TRUTH_END`] and otherwise moves to
/// another prototype uniformly. Prototype coordinates are uniform in
/// `[-3, 3]`, redrawn until every pair (and the origin) is at least 3 apart.
pub fn synthetic_truth(n_states: usize, dim: usize, sigma: f64, seed: u64) -> Result<ModelParams> {
    if n_states < 2 || dim == 0 || !(sigma > 0.0) {
        return Err(Error::InvalidInput(
            "need n_states >= 2, dim >= 1 and sigma > 0".into(),
        ));
    }
    let mut rng = rng::stream(seed, "truth/mu");
    let mut mu = Array2::<f64>::zeros((n_states, dim));
    for i in 1..n_states {
        let mut tries = 0;
        loop {
            let cand: Array1<f64> = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            let far = (0..i).all(|j| {
                let diff = &cand - &mu.row(j);
                diff.dot(&diff) >= 9.0
            });
            tries += 1;
            if far || tries > 10_000 {
                mu.row_mut(i).assign(&cand);
                break;
            }
        }
    }

    let mut pi = Array1::from_elem(n_states, 1.0 / (n_states - 1) as f64);
    pi[0] = 0.0;
    let mut trans = Array2::zeros((n_states, n_states));
    trans[[0, 0]] = 1.0;
    for i in 1..n_states {
        trans[[i, 0]] = TRUTH_END;
        if n_states == 2 {
            trans[[i, i]] = 1.0 - TRUTH_END;
            continue;
        }
        trans[[i, i]] = TRUTH_STAY;
        let move_p = (1.0 - TRUTH_STAY - TRUTH_END) / (n_states - 2) as f64;
        for j in 1..n_states {
            if j != i {
                trans[[i, j]] = move_p;
            }
        }
    }
    Ok(ModelParams {
        pi,
        trans,
        mu,
        sigma: Array1::from_elem(dim, sigma),
    })
}

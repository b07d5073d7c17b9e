//! MAP M-step, updating `pi`, `T`, `mu` and then `sigma`.

use ndarray::{Array1, Array2};

use super::{Assignment, Hyperparams, ModelParams};
use crate::corpus::Corpus;
use crate::emission::{residual_sums, update_means, update_sigma, EmissionStats};

/// Mode of the Dirichlet(`alpha`) posterior after observing `counts`:
/// `p_i ∝ max(n_i + alpha - 1, 0)`. When every weight vanishes (an unvisited
/// row with `alpha <= 1`) the mode is taken to be uniform.
pub fn dirichlet_map(counts: &[f64], alpha: f64) -> Array1<f64> {
    let w: Array1<f64> = counts.iter().map(|&n| (n + alpha - 1.0).max(0.0)).collect();
    let total = w.sum();
    if total > 0.0 {
        w / total
    } else {
        Array1::from_elem(counts.len(), 1.0 / counts.len() as f64)
    }
}

/// First-frame counts and transition bigram counts of an assignment.
pub(crate) fn label_counts(assignment: &Assignment, n: usize) -> (Vec<f64>, Array2<f64>) {
    let mut first = vec![0.0; n];
    let mut bigrams = Array2::zeros((n, n));
    for labels in &assignment.labels {
        if let Some(&c0) = labels.first() {
            first[c0] += 1.0;
        }
        for w in labels.windows(2) {
            bigrams[[w[0], w[1]]] += 1.0;
        }
    }
    (first, bigrams)
}

pub(crate) fn labeled_frames<'a>(
    corpus: &'a Corpus,
    assignment: &'a Assignment,
) -> impl Iterator<Item = (ndarray::ArrayView1<'a, f64>, usize)> + 'a {
    corpus
        .signs()
        .iter()
        .zip(&assignment.labels)
        .flat_map(|(s, l)| s.features.rows().into_iter().zip(l.iter().copied()))
}

/// MAP parameters given hard labels. `mu` is updated with `prev.sigma`, then
/// `sigma` with the new `mu`. Padding rows count as frames of whatever state
/// they were assigned.
///
/// # Panics
///
/// If `assignment` does not match the corpus shape or `prev.n_states()`.
pub fn m_step(
    corpus: &Corpus,
    assignment: &Assignment,
    hyper: &Hyperparams,
    prev: &ModelParams,
) -> ModelParams {
    let n = prev.n_states();
    assignment
        .check_against(corpus, n)
        .expect("assignment consistent with corpus");

    let (first, bigrams) = label_counts(assignment, n);
    let pi = dirichlet_map(&first, hyper.alpha);
    let mut trans = Array2::zeros((n, n));
    for (i, mut row) in trans.rows_mut().into_iter().enumerate() {
        let counts: Vec<f64> = bigrams.row(i).to_vec();
        row.assign(&dirichlet_map(&counts, hyper.alpha));
    }

    let stats = EmissionStats::collect(labeled_frames(corpus, assignment), n, corpus.dim());
    let mu = update_means(&stats, &prev.sigma, hyper, &[0]);

    let (rss, count) = residual_sums(labeled_frames(corpus, assignment), &mu);
    let sigma = update_sigma(&rss, count, hyper);

    ModelParams { pi, trans, mu, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_one_is_maximum_likelihood() {
        let pi = dirichlet_map(&[3.0, 1.0], 1.0);
        assert_eq!(pi.to_vec(), vec![0.75, 0.25]);
    }

    #[test]
    fn empty_row_is_uniform() {
        let row = dirichlet_map(&[0.0, 0.0, 0.0, 0.0], 1.0);
        assert_eq!(row.to_vec(), vec![0.25; 4]);
    }

    #[test]
    fn small_alpha_clips_at_zero() {
        let row = dirichlet_map(&[0.0, 2.0, 1.0], 0.5);
        assert_eq!(row[0], 0.0);
        assert!((row[1] - 1.5 / 2.0).abs() < 1e-15);
    }
}

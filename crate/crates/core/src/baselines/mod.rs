//! Ablation baselines that drop the temporal structure of the network.
//!
//! [`gmm`] draws every frame independently from a Gaussian mixture.
//! [`gmm_lda`] first draws a topic per sign and then every frame's prototype
//! from that topic's distribution. Both share the network's emission model
//! and its MAP updates (see [`crate::emission`]), and both treat padding
//! rows as ordinary frames.

pub mod gmm;
pub mod gmm_lda;

pub use gmm::{fit_gmm, sample_gmm, sample_gmm_with_labels, GmmParams};
pub use gmm_lda::{fit_gmm_lda, sample_gmm_lda, sample_gmm_lda_with_labels, GmmLdaParams};

use ndarray::{Array1, Array2};

use crate::corpus::Corpus;
use crate::emission::{empirical_sigma, seed_centers};
use crate::error::{Error, Result};
use crate::rng;

/// Initial means (k-means++ over all frames) and dispersion shared by both
/// baselines, so a one-topic GMM-LDA starts exactly where the GMM does.
pub(crate) fn init_mixture(corpus: &Corpus, n: usize, seed: u64) -> Result<(Array2<f64>, Array1<f64>)> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one component".into()));
    }
    let frames: Vec<_> = corpus.all_frames().collect();
    if frames.len() < n {
        return Err(Error::NotEnoughData {
            needed: n,
            available: frames.len(),
        });
    }
    let mut rng = rng::stream(seed, "mixture/init");
    let centers = seed_centers(&frames, &[], n, &mut rng);
    let mut mu = Array2::zeros((n, corpus.dim()));
    for (i, c) in centers.iter().enumerate() {
        mu.row_mut(i).assign(c);
    }
    Ok((mu, empirical_sigma(&frames, corpus.dim())))
}

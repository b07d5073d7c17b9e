//! Ancestral sampling.

use ndarray::{Array2, ArrayView1};
use rand::{Rng as _, SeedableRng};
use rand_distr::StandardNormal;

use super::{Assignment, ModelParams};
use crate::corpus::{Corpus, EndToken, NoiseLevel, SignSequence};
use crate::error::Result;
use crate::rng::Rng;

/// Draws an index from a probability vector by inversion.
pub(crate) fn sample_categorical(p: ArrayView1<f64>, rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in p.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Draws `x ~ Normal(mean, diag(sigma^2))` into `out`.
pub(crate) fn sample_gaussian(
    mean: ArrayView1<f64>,
    sigma: ArrayView1<f64>,
    rng: &mut Rng,
    out: ndarray::ArrayViewMut1<f64>,
) {
    for ((o, &m), &s) in out.into_iter().zip(mean.iter()).zip(sigma.iter()) {
        let z: f64 = rng.sample(StandardNormal);
        *o = m + s * z;
    }
}

/// Samples `n_signs` signs of `frames` rows. Labels always follow the chain;
/// with [`EndToken::Exact`] every row from the first visit to state 0 onward
/// is the zero end token and `true_length` is that row's index.
pub fn sample_with_labels(
    params: &ModelParams,
    n_signs: usize,
    frames: usize,
    seed: u64,
    end_token: EndToken,
) -> Result<(Corpus, Assignment)> {
    params.validate()?;
    let mut rng = Rng::seed_from_u64(seed);
    let d = params.dim();
    let mut signs = Vec::with_capacity(n_signs);
    let mut all_labels = Vec::with_capacity(n_signs);
    for w in 0..n_signs {
        let mut labels = Vec::with_capacity(frames);
        let mut features = Array2::zeros((frames, d));
        let mut true_length = frames;
        for f in 0..frames {
            let c = if f == 0 {
                sample_categorical(params.pi.view(), &mut rng)
            } else {
                sample_categorical(params.trans.row(labels[f - 1]), &mut rng)
            };
            labels.push(c);
            if end_token == EndToken::Exact && (c == 0 || true_length < frames) {
                true_length = true_length.min(f);
                continue;
            }
            sample_gaussian(params.mu.row(c), params.sigma.view(), &mut rng, features.row_mut(f));
        }
        signs.push(SignSequence {
            gloss: format!("synth-{w}"),
            signer: "synthetic".into(),
            noise: NoiseLevel::None,
            features,
            true_length,
        });
        all_labels.push(labels);
    }
    Ok((Corpus::new(signs)?, Assignment { labels: all_labels }))
}

/// Samples a corpus with exact end tokens.
pub fn sample(params: &ModelParams, n_signs: usize, frames: usize, seed: u64) -> Result<Corpus> {
    sample_with_labels(params, n_signs, frames, seed, EndToken::Exact).map(|(c, _)| c)
}

//! Discriminator training and generator scoring.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gru::{gru_grad, gru_logit, bce, GruNet};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Independent repetitions (fresh samples, split and initialization).
    pub seeds: usize,
    /// Fraction of each class used for training.
    pub split: f64,
    pub epochs: usize,
    pub lr: f64,
    pub hidden: usize,
    /// Fraction of each class's training part held out to choose the epoch
    /// whose parameters are kept. Zero keeps the lowest training loss.
    pub validation: f64,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            seeds: 5,
            split: 0.8,
            epochs: 50,
            lr: 1e-2,
            hidden: 16,
            validation: 0.25,
            seed: 0,
        }
    }
}

/// Test-set binary cross-entropy of the discriminator, per seed and
/// aggregated. `bce_std` is the sample standard deviation (zero for a single
/// seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bce_mean: f64,
    pub bce_std: f64,
    pub n_seeds: usize,
    pub per_seed: Vec<f64>,
    pub options: EvalOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub net: GruNet,
    /// Epoch whose parameters were kept; 0 means the initialization.
    pub best_epoch: usize,
    pub initial_train_bce: f64,
    pub final_train_bce: f64,
    /// Validation BCE of the kept parameters, when a validation set was given.
    pub validation_bce: Option<f64>,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Full-batch Adam on the mean training BCE.
///
/// Among the visited parameters (the initial ones included) whose training
/// loss does not exceed the initial one, keeps those with the lowest
/// validation BCE, or the lowest training BCE when `validation` is `None`.
pub fn train_discriminator(
    batch: &[ArrayView2<f64>],
    labels: &[f64],
    validation: Option<(&[ArrayView2<f64>], &[f64])>,
    hidden: usize,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<TrainOutcome> {
    let first = batch.first().ok_or(Error::EmptyBatch)?;
    if matches!(validation, Some((v, _)) if v.is_empty()) {
        return Err(Error::EmptyBatch);
    }
    let mut init_rng = rng::stream(seed, "discriminator/init");
    let mut net = GruNet::random(first.ncols(), hidden, &mut init_rng);
    let mut theta = net.to_flat();
    let mut m = vec![0.0; theta.len()];
    let mut v = vec![0.0; theta.len()];

    let select = |net: &GruNet, train_loss: f64| match validation {
        Some((xs, ys)) => mean_bce(net, xs, ys),
        None => train_loss,
    };
    let (initial, mut grad) = gru_grad(&net, batch, labels)?;
    let mut best = (select(&net, initial), 0, initial, theta.clone());
    for t in 1..=epochs {
        let g = grad.to_flat();
        let bc1 = 1.0 - ADAM_BETA1.powi(t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(t as i32);
        for i in 0..theta.len() {
            m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
            v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
            theta[i] -= lr * (m[i] / bc1) / ((v[i] / bc2).sqrt() + ADAM_EPS);
        }
        net.set_flat(&theta);
        let (loss, next) = gru_grad(&net, batch, labels)?;
        if loss <= initial {
            let score = select(&net, loss);
            if score < best.0 {
                best = (score, t, loss, theta.clone());
            }
        }
        grad = next;
    }
    net.set_flat(&best.3);
    Ok(TrainOutcome {
        net,
        best_epoch: best.1,
        initial_train_bce: initial,
        final_train_bce: best.2,
        validation_bce: validation.map(|_| best.0),
    })
}

fn mean_bce(net: &GruNet, batch: &[ArrayView2<f64>], labels: &[f64]) -> f64 {
    let total: f64 = batch
        .iter()
        .zip(labels)
        .map(|(x, &y)| bce(gru_logit(net, *x), y))
        .sum();
    total / batch.len() as f64
}

/// Splits after the first `round(keep * len)` entries, clamped so both parts
/// are non-empty when `len >= 2`.
fn split_at_fraction(mut idx: Vec<usize>, keep: f64) -> (Vec<usize>, Vec<usize>) {
    let n = idx.len();
    let k = ((keep * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let rest = idx.split_off(k);
    (idx, rest)
}

/// A seeded shuffle of `0..n` split by [`split_at_fraction`].
fn split_indices(n: usize, split: f64, rng: &mut rng::Rng) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    split_at_fraction(idx, split)
}

/// Scores `generator` against `real`.
///
/// For every seed the generator is asked for `real.len()` signs (it receives
/// the count and a derived seed), real signs are labeled 1 and generated
/// ones 0, each class is split `split : 1 - split` into train and test, a
/// fresh discriminator is trained with full-batch Adam and its test BCE is
/// recorded. When `validation > 0` that fraction of each class's training
/// part is not fitted but used to pick the epoch whose parameters are kept. Generation runs sequentially; training runs in parallel across
/// seeds and is deterministic.
pub fn evaluate_generator<G>(real: &Corpus, mut generator: G, opts: &EvalOptions) -> Result<EvalReport>
where
    G: FnMut(usize, u64) -> Result<Corpus>,
{
    if real.len() < 10 {
        return Err(Error::InvalidInput(format!(
            "need at least 10 real signs, got {}",
            real.len()
        )));
    }
    if opts.seeds == 0
        || opts.hidden == 0
        || !(opts.split > 0.0 && opts.split < 1.0)
        || !(0.0..1.0).contains(&opts.validation)
    {
        return Err(Error::InvalidInput(
            "seeds and hidden must be positive, split must lie in (0, 1) and validation in [0, 1)"
                .into(),
        ));
    }
    let fakes = (0..opts.seeds)
        .map(|k| {
            let s = rng::derive_seed(opts.seed, &format!("eval/{k}"));
            let fake = generator(real.len(), rng::derive_seed(s, "generator"))?;
            if fake.dim() != real.dim() || fake.frames() != real.frames() {
                return Err(Error::InvalidInput(
                    "generated signs differ in shape from the real corpus".into(),
                ));
            }
            Ok((s, fake))
        })
        .collect::<Result<Vec<_>>>()?;

    let per_seed = fakes
        .par_iter()
        .map(|(s, fake)| {
            let mut split_rng = rng::stream(*s, "split");
            let (real_train, real_test) = split_indices(real.len(), opts.split, &mut split_rng);
            let (fake_train, fake_test) = split_indices(fake.len(), opts.split, &mut split_rng);
            let gather = |r: &[usize], f: &[usize]| {
                let xs: Vec<ArrayView2<f64>> = r
                    .iter()
                    .map(|&i| real.signs()[i].features.view())
                    .chain(f.iter().map(|&i| fake.signs()[i].features.view()))
                    .collect();
                let ys: Vec<f64> = std::iter::repeat_n(1.0, r.len())
                    .chain(std::iter::repeat_n(0.0, f.len()))
                    .collect();
                (xs, ys)
            };
            let (test_x, test_y) = gather(&real_test, &fake_test);
            let outcome = if opts.validation > 0.0 {
                let (real_fit, real_val) = split_at_fraction(real_train, 1.0 - opts.validation);
                let (fake_fit, fake_val) = split_at_fraction(fake_train, 1.0 - opts.validation);
                let (fit_x, fit_y) = gather(&real_fit, &fake_fit);
                let (val_x, val_y) = gather(&real_val, &fake_val);
                let val = Some((&val_x[..], &val_y[..]));
                train_discriminator(&fit_x, &fit_y, val, opts.hidden, opts.epochs, opts.lr, *s)?
            } else {
                let (train_x, train_y) = gather(&real_train, &fake_train);
                train_discriminator(&train_x, &train_y, None, opts.hidden, opts.epochs, opts.lr, *s)?
            };
            Ok(mean_bce(&outcome.net, &test_x, &test_y))
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = per_seed.len() as f64;
    let bce_mean = per_seed.iter().sum::<f64>() / n;
    let bce_std = if per_seed.len() > 1 {
        (per_seed.iter().map(|b| (b - bce_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(EvalReport {
        bce_mean,
        bce_std,
        n_seeds: per_seed.len(),
        per_seed,
        options: *opts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn training_does_not_increase_loss() {
        let xs: Vec<Array2<f64>> = (0..8)
            .map(|i| Array2::from_elem((4, 2), if i % 2 == 0 { 1.0 } else { -1.0 }))
            .collect();
        let views: Vec<_> = xs.iter().map(|x| x.view()).collect();
        let ys: Vec<f64> = (0..8).map(|i| (i % 2) as f64).collect();
        let out = train_discriminator(&views, &ys, None, 3, 30, 1e-2, 5).unwrap();
        assert!(out.final_train_bce <= out.initial_train_bce);
        assert!(out.final_train_bce < 0.5);
        let again = train_discriminator(&views, &ys, None, 3, 30, 1e-2, 5).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn split_is_stratified_and_complete() {
        let mut r = rng::stream(0, "t");
        let (a, b) = split_indices(10, 0.8, &mut r);
        assert_eq!((a.len(), b.len()), (8, 2));
        let mut all: Vec<_> = a.into_iter().chain(b).collect();
        all.sort();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }
}

//! Fixtures and oracles shared by the integration tests.
#![allow(dead_code)]

use mh_phone_core::corpus::{Corpus, NoiseLevel, SignSequence};
use mh_phone_core::model::{synthetic_truth, ModelParams};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    let w: Array1<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s = w.sum();
    w / s
}

/// Small random parameters with `mu[0] = 0` and strictly positive
/// probabilities.
pub fn random_params(rng: &mut ChaCha8Rng, n: usize, d: usize) -> ModelParams {
    let mut mu = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
    mu.row_mut(0).fill(0.0);
    let mut trans = Array2::zeros((n, n));
    for i in 0..n {
        trans.row_mut(i).assign(&random_simplex(rng, n));
    }
    ModelParams {
        pi: random_simplex(rng, n),
        trans,
        mu,
        sigma: (0..d).map(|_| rng.random_range(0.3..1.5)).collect(),
    }
}

/// Signs of dense random frames (no padding).
pub fn random_corpus(rng: &mut ChaCha8Rng, m: usize, p: usize, d: usize) -> Corpus {
    let signs = (0..m)
        .map(|w| SignSequence {
            gloss: format!("r{w}"),
            signer: "test".into(),
            noise: NoiseLevel::None,
            features: Array2::from_shape_fn((p, d), |_| rng.random_range(-2.5..2.5)),
            true_length: p,
        })
        .collect();
    Corpus::new(signs).unwrap()
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Relabeling of `fitted` states `1..N` that best matches `truth` prototypes
/// (minimum total squared distance over all assignments).
pub fn align(truth: &ModelParams, fitted: &ModelParams) -> Vec<usize> {
    let n = truth.n_states();
    let rest: Vec<usize> = (1..n).collect();
    let cost = |perm: &[usize]| -> f64 {
        perm.iter()
            .enumerate()
            .map(|(k, &f)| {
                let d = &truth.mu.row(k + 1) - &fitted.mu.row(f);
                d.dot(&d)
            })
            .sum()
    };
    let best = permutations(&rest)
        .into_iter()
        .min_by(|a, b| cost(a).total_cmp(&cost(b)))
        .unwrap();
    std::iter::once(0).chain(best).collect()
}

pub fn max_abs_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Five-state truth used for parameter recovery: separated prototypes in 14
/// dimensions, `sigma = 0.1` and a start distribution dominated by one
/// prototype.
pub fn recovery_truth() -> ModelParams {
    let mut p = synthetic_truth(5, 14, 0.1, 2024).unwrap();
    p.pi = ndarray::array![0.0, 0.85, 0.05, 0.05, 0.05];
    p
}

/// `ln N(x; mu, diag(sigma^2))` written out per coordinate.
pub fn gaussian_log_pdf(x: &[f64], mu: &[f64], sigma: &[f64]) -> f64 {
    x.iter()
        .zip(mu)
        .zip(sigma)
        .map(|((&x, &m), &s)| {
            -0.5 * (2.0 * std::f64::consts::PI).ln() - s.ln() - (x - m).powi(2) / (2.0 * s * s)
        })
        .sum()
}

/// Log probability of a label path and its frames under `params`.
pub fn path_log_prob(params: &ModelParams, x: &Array2<f64>, path: &[usize]) -> f64 {
    let sigma = params.sigma.to_vec();
    path.iter()
        .enumerate()
        .map(|(f, &c)| {
            let prior = if f == 0 { params.pi[c] } else { params.trans[[path[f - 1], c]] };
            prior.ln() + gaussian_log_pdf(&x.row(f).to_vec(), &params.mu.row(c).to_vec(), &sigma)
        })
        .sum()
}

/// Best path over all `N^P` label sequences.
pub fn exhaustive_best_path(params: &ModelParams, x: &Array2<f64>) -> (Vec<usize>, f64) {
    let n = params.n_states();
    let p = x.nrows();
    let mut path = vec![0; p];
    let mut best = (path.clone(), f64::NEG_INFINITY);
    loop {
        let score = path_log_prob(params, x, &path);
        if score > best.1 {
            best = (path.clone(), score);
        }
        let mut k = p;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            path[k] += 1;
            if path[k] < n {
                break;
            }
            path[k] = 0;
        }
    }
}

/// Frame-by-frame argmax over every state, conditioning on the previous pick.
pub fn stepwise_argmax_path(params: &ModelParams, x: &Array2<f64>) -> Vec<usize> {
    let n = params.n_states();
    let sigma = params.sigma.to_vec();
    let mut path: Vec<usize> = Vec::new();
    for f in 0..x.nrows() {
        let score = |c: usize| {
            let prior = if f == 0 { params.pi[c] } else { params.trans[[path[f - 1], c]] };
            prior.ln() + gaussian_log_pdf(&x.row(f).to_vec(), &params.mu.row(c).to_vec(), &sigma)
        };
        let best = (0..n).max_by(|&a, &b| score(a).total_cmp(&score(b)).then(b.cmp(&a))).unwrap();
        path.push(best);
    }
    path
}

/// Maximizer of a unimodal function by ternary search.
pub fn ternary_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..300 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    0.5 * (lo + hi)
}

/// Maximizes `sum_i a_i ln p_i` over the simplex (all `a_i > 0`) by gradient
/// ascent on softmax logits.
pub fn simplex_max(a: &[f64]) -> Vec<f64> {
    let total: f64 = a.iter().sum();
    let mut z = vec![0.0; a.len()];
    let mut p = vec![1.0 / a.len() as f64; a.len()];
    for _ in 0..200_000 {
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        p = e.iter().map(|v| v / s).collect();
        let mut step = 0.0f64;
        for i in 0..a.len() {
            let g = (a[i] - total * p[i]) / total;
            z[i] += g;
            step = step.max(g.abs());
        }
        if step < 1e-14 {
            break;
        }
    }
    p
}

/// Grid search in `ln sigma` over `[lo, hi]`, refined twice around the best
/// point.
pub fn grid_max_log(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mut best = lo;
    let (mut a, mut b, steps) = (lo, hi, 16_000);
    for _ in 0..3 {
        let h = (b - a) / steps as f64;
        let mut best_v = f64::NEG_INFINITY;
        for k in 0..=steps {
            let s = a + h * k as f64;
            let v = f(s);
            if v > best_v {
                best_v = v;
                best = s;
            }
        }
        a = best - 2.0 * h;
        b = best + 2.0 * h;
    }
    best
}

pub fn log_normal_density_ln(x: f64, loc: f64, scale: f64) -> f64 {
    -x.ln() - scale.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - (x.ln() - loc).powi(2) / (2.0 * scale * scale)
}

pub struct MStepFixture {
    pub corpus: Corpus,
    pub assignment: mh_phone_core::Assignment,
    pub hyper: mh_phone_core::Hyperparams,
    pub prev: ModelParams,
}

/// Random corpus, labels, priors and previous parameters. `alpha > 1` keeps
/// every MAP probability strictly inside the simplex.
pub fn mstep_fixture(seed: u64) -> MStepFixture {
    let mut r = rng(seed);
    let n = r.random_range(2..=4);
    let d = r.random_range(1..=3);
    let m = r.random_range(2..=6);
    let p = r.random_range(2..=6);
    let corpus = random_corpus(&mut r, m, p, d);
    let labels = (0..m)
        .map(|_| (0..p).map(|_| r.random_range(0..n)).collect())
        .collect();
    let hyper = mh_phone_core::Hyperparams {
        alpha: r.random_range(1.2..3.0),
        mu_mu: r.random_range(-1.0..1.0),
        sigma_mu: r.random_range(0.5..10.0),
        mu_sigma: r.random_range(-1.0..1.0),
        sigma_sigma: r.random_range(0.5..10.0),
    };
    MStepFixture {
        prev: random_params(&mut r, n, d),
        corpus,
        assignment: mh_phone_core::Assignment { labels },
        hyper,
    }
}

/// Parameters found by numerically maximizing the log joint one block at a
/// time, in the same order as the closed-form update: `pi`, `T`, `mu` (with
/// the previous `sigma`) and `ln sigma` (with the new `mu`).
pub struct MStepOracle {
    pub pi: Vec<f64>,
    pub trans: Vec<Vec<f64>>,
    pub mu: Array2<f64>,
    pub log_sigma: Vec<f64>,
}

pub fn mstep_oracle(fx: &MStepFixture) -> MStepOracle {
    let n = fx.prev.n_states();
    let d = fx.corpus.dim();
    let h = &fx.hyper;
    let mut first = vec![h.alpha - 1.0; n];
    let mut bigram = vec![vec![h.alpha - 1.0; n]; n];
    let mut frames: Vec<Vec<Vec<f64>>> = vec![Vec::new(); n];
    for (sign, labels) in fx.corpus.signs().iter().zip(&fx.assignment.labels) {
        first[labels[0]] += 1.0;
        for f in 1..labels.len() {
            bigram[labels[f - 1]][labels[f]] += 1.0;
        }
        for (f, &c) in labels.iter().enumerate() {
            frames[c].push(sign.features.row(f).to_vec());
        }
    }
    let pi = simplex_max(&first);
    let trans = bigram.iter().map(|row| simplex_max(row)).collect();

    let mut mu = Array2::zeros((n, d));
    for i in 1..n {
        for k in 0..d {
            let sd = fx.prev.sigma[k];
            let objective = |m: f64| {
                frames[i]
                    .iter()
                    .map(|x| gaussian_log_pdf(&[x[k]], &[m], &[sd]))
                    .sum::<f64>()
                    + gaussian_log_pdf(&[m], &[h.mu_mu], &[h.sigma_mu])
            };
            mu[[i, k]] = ternary_max(objective, -50.0, 50.0);
        }
    }

    let log_sigma = (0..d)
        .map(|k| {
            let objective = |s: f64| {
                let sd = s.exp();
                let mut acc = log_normal_density_ln(sd, h.mu_sigma, h.sigma_sigma);
                for (i, fs) in frames.iter().enumerate() {
                    for x in fs {
                        acc += gaussian_log_pdf(&[x[k]], &[mu[[i, k]]], &[sd]);
                    }
                }
                acc
            };
            grid_max_log(objective, -8.0, 8.0)
        })
        .collect();
    MStepOracle { pi, trans, mu, log_sigma }
}

/// Worst absolute errors of a fit against the truth after aligning states.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryErrors {
    pub pi: f64,
    pub trans: f64,
    pub mu: f64,
}

pub fn recovery_errors(truth: &ModelParams, fitted: &ModelParams) -> RecoveryErrors {
    let aligned = fitted.permuted(&align(truth, fitted));
    RecoveryErrors {
        pi: max_abs_diff(truth.pi.iter(), aligned.pi.iter()),
        trans: max_abs_diff(truth.trans.iter(), aligned.trans.iter()),
        mu: max_abs_diff(truth.mu.iter(), aligned.mu.iter()),
    }
}

/// Small corpus sampled from random well-separated parameters.
pub fn random_dbn_corpus(seed: u64) -> Corpus {
    let mut r = rng(seed);
    let n = r.random_range(3..=5);
    let d = r.random_range(2..=4);
    let sigma = r.random_range(0.3..1.5);
    let truth = synthetic_truth(n, d, sigma, seed).unwrap();
    mh_phone_core::model::sample(&truth, 40, 12, seed).unwrap()
}

fn draw(p: ndarray::ArrayView1<f64>, r: &mut ChaCha8Rng) -> usize {
    let u: f64 = r.random();
    let mut acc = 0.0;
    for (i, &v) in p.iter().enumerate() {
        acc += v;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// Empirical mean run length of state `i` over `transitions` simulated
/// transitions out of it, with the standard error implied by the geometric
/// law.
pub fn simulated_hold(params: &ModelParams, i: usize, transitions: usize, seed: u64) -> (f64, f64) {
    let mut r = rng(seed);
    let stay = params.trans[[i, i]];
    let (mut runs, mut frames, mut run) = (0usize, 0usize, 1usize);
    for _ in 0..transitions {
        if draw(params.trans.row(i), &mut r) == i {
            run += 1;
        } else {
            runs += 1;
            frames += run;
            run = 1;
        }
    }
    let se = stay.sqrt() / (1.0 - stay) / (runs as f64).sqrt();
    (frames as f64 / runs as f64, se)
}

/// Mean and standard error of per-chain state visit counts over the first
/// `horizon` frames of `chains` simulated chains.
pub fn simulated_counts(params: &ModelParams, horizon: usize, chains: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let n = params.n_states();
    let mut r = rng(seed);
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    let mut visits = vec![0.0; n];
    for _ in 0..chains {
        visits.iter_mut().for_each(|v| *v = 0.0);
        let mut c = draw(params.pi.view(), &mut r);
        for f in 0..horizon {
            if f > 0 {
                c = draw(params.trans.row(c), &mut r);
            }
            visits[c] += 1.0;
        }
        for j in 0..n {
            sum[j] += visits[j];
            sq[j] += visits[j] * visits[j];
        }
    }
    let m = chains as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / m).collect();
    let se = (0..n)
        .map(|j| ((sq[j] / m - mean[j] * mean[j]) * m / (m - 1.0)).max(0.0).sqrt() / m.sqrt())
        .collect();
    (mean, se)
}

/// Worst relative error, per parameter block, between the analytic gradient
/// of the mean BCE and central finite differences with step `eps`.
pub fn gru_gradient_errors(seed: u64, eps: f64) -> Vec<(&'static str, f64)> {
    use mh_phone_core::discriminator::{bce, gru_grad, gru_logit, GruNet};
    let mut r = rng(seed);
    let (d, h) = (3, 4);
    let mut net = GruNet::random(d, h, &mut r);
    net.b_out = 0.3;
    let xs: Vec<Array2<f64>> = (0..4)
        .map(|_| Array2::from_shape_fn((5, d), |_| r.random_range(-1.5..1.5)))
        .collect();
    let views: Vec<_> = xs.iter().map(|x| x.view()).collect();
    let labels = [1.0, 0.0, 1.0, 0.0];
    let loss = |net: &GruNet| -> f64 {
        views.iter().zip(&labels).map(|(x, &y)| bce(gru_logit(net, *x), y)).sum::<f64>() / views.len() as f64
    };
    let (_, grad) = gru_grad(&net, &views, &labels).unwrap();
    let analytic = grad.blocks().map(|b| b.to_vec());
    let mut out = Vec::new();
    for (k, name) in GruNet::BLOCK_NAMES.iter().enumerate() {
        let mut worst = 0.0f64;
        for idx in 0..analytic[k].len() {
            let orig = net.blocks()[k][idx];
            net.blocks_mut()[k][idx] = orig + eps;
            let up = loss(&net);
            net.blocks_mut()[k][idx] = orig - eps;
            let down = loss(&net);
            net.blocks_mut()[k][idx] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic[k][idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
        out.push((*name, worst));
    }
    out
}

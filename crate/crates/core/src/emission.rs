//! Gaussian emission machinery shared by the network and the baselines:
//! per-state scores, the MAP update of prototype means and the numeric MAP
//! update of the shared dispersion.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng as _;

use crate::model::Hyperparams;
use crate::optim::golden_section_max;
use crate::rng::Rng;

/// Search interval for `ln sigma_d`.
pub const LOG_SIGMA_RANGE: (f64, f64) = (-8.0, 8.0);
/// Bracket width at which the `ln sigma_d` search stops.
pub const LOG_SIGMA_TOL: f64 = 1e-8;
/// Lower bound for the initial dispersion.
pub const SIGMA_FLOOR: f64 = 1e-3;

/// `1 / sigma_d^2` per dimension.
pub fn inverse_variance(sigma: &Array1<f64>) -> Array1<f64> {
    sigma.mapv(|s| 1.0 / (s * s))
}

/// `-1/2 (x - mu)^T diag(sigma^2)^{-1} (x - mu)`.
#[inline]
pub fn kernel(x: ArrayView1<f64>, mu: ArrayView1<f64>, inv_var: &Array1<f64>) -> f64 {
    let mut acc = 0.0;
    for ((&xv, &m), &w) in x.iter().zip(mu.iter()).zip(inv_var.iter()) {
        let r = xv - m;
        acc += r * r * w;
    }
    -0.5 * acc
}

/// Kernel of `x` against every row of `mu`, written into `out`.
pub fn kernels_into(x: ArrayView1<f64>, mu: &Array2<f64>, inv_var: &Array1<f64>, out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(mu.rows()) {
        *o = kernel(x, row, inv_var);
    }
}

/// Normalizing constant of one frame's density: `-sum ln sigma_d - D/2 ln 2 pi`.
pub fn log_norm_const(sigma: &Array1<f64>) -> f64 {
    -sigma.iter().map(|s| s.ln()).sum::<f64>() - 0.5 * sigma.len() as f64 * (2.0 * PI).ln()
}

/// Log-density of `Normal(mean, sd^2)` at `x`.
pub fn normal_log_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * PI).ln()
}

/// Log-density of `LogNormal(loc, scale)` at `x > 0`.
pub fn log_normal_log_pdf(x: f64, loc: f64, scale: f64) -> f64 {
    let lx = x.ln();
    normal_log_pdf(lx, loc, scale) - lx
}

/// Per-state frame counts and coordinate sums.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionStats {
    pub counts: Vec<f64>,
    pub sums: Array2<f64>,
}

impl EmissionStats {
    /// Accumulates labeled frames in iteration order.
    pub fn collect<'a>(
        frames: impl IntoIterator<Item = (ArrayView1<'a, f64>, usize)>,
        n_states: usize,
        dim: usize,
    ) -> Self {
        let mut counts = vec![0.0; n_states];
        let mut sums = Array2::zeros((n_states, dim));
        for (x, c) in frames {
            counts[c] += 1.0;
            let mut row = sums.row_mut(c);
            row += &x;
        }
        EmissionStats { counts, sums }
    }
}

/// Conjugate MAP update of the prototype means: per dimension, the
/// precision-weighted combination of the assigned frames (precision
/// `n / sigma_d^2`) and the prior `Normal(mu_mu, sigma_mu^2)`. A state with no
/// frames lands on the prior mode. Rows listed in `pinned` stay zero.
pub fn update_means(
    stats: &EmissionStats,
    sigma: &Array1<f64>,
    hyper: &Hyperparams,
    pinned: &[usize],
) -> Array2<f64> {
    let prior_prec = 1.0 / (hyper.sigma_mu * hyper.sigma_mu);
    let inv_var = inverse_variance(sigma);
    let mut mu = Array2::zeros(stats.sums.dim());
    for (i, mut row) in mu.rows_mut().into_iter().enumerate() {
        if pinned.contains(&i) {
            continue;
        }
        let n = stats.counts[i];
        for (d, m) in row.iter_mut().enumerate() {
            let data_prec = n * inv_var[d];
            *m = (stats.sums[[i, d]] * inv_var[d] + hyper.mu_mu * prior_prec)
                / (data_prec + prior_prec);
        }
    }
    mu
}

/// Per-dimension sum of squared residuals of labeled frames around `mu`,
/// plus the frame count.
pub fn residual_sums<'a>(
    frames: impl IntoIterator<Item = (ArrayView1<'a, f64>, usize)>,
    mu: &Array2<f64>,
) -> (Array1<f64>, usize) {
    let mut acc = Array1::zeros(mu.ncols());
    let mut n = 0;
    for (x, c) in frames {
        for ((a, &xv), &m) in acc.iter_mut().zip(x.iter()).zip(mu.row(c).iter()) {
            let r = xv - m;
            *a += r * r;
        }
        n += 1;
    }
    (acc, n)
}

/// Log-posterior of `sigma_d = exp(log_sigma)` up to a constant: the
/// Gaussian likelihood of `n` residuals with squared sum `rss` times the
/// log-normal prior density of `sigma_d`.
pub fn sigma_log_posterior(log_sigma: f64, rss: f64, n: usize, hyper: &Hyperparams) -> f64 {
    let s = log_sigma;
    let lik = -(n as f64) * s - 0.5 * rss * (-2.0 * s).exp();
    let z = (s - hyper.mu_sigma) / hyper.sigma_sigma;
    let prior = -s - hyper.sigma_sigma.ln() - 0.5 * (2.0 * PI).ln() - 0.5 * z * z;
    lik + prior
}

/// MAP dispersion per dimension by golden-section search over `ln sigma_d`.
pub fn update_sigma(rss: &Array1<f64>, n: usize, hyper: &Hyperparams) -> Array1<f64> {
    rss.mapv(|r| {
        let (lo, hi) = LOG_SIGMA_RANGE;
        golden_section_max(|s| sigma_log_posterior(s, r, n, hyper), lo, hi, LOG_SIGMA_TOL).exp()
    })
}

/// Per-dimension standard deviation of `frames`, floored at [`SIGMA_FLOOR`].
pub fn empirical_sigma<'a>(frames: &[ArrayView1<'a, f64>], dim: usize) -> Array1<f64> {
    let n = frames.len().max(1) as f64;
    let mut mean = Array1::<f64>::zeros(dim);
    for x in frames {
        mean += x;
    }
    mean /= n;
    let mut var = Array1::<f64>::zeros(dim);
    for x in frames {
        for ((v, &xv), &m) in var.iter_mut().zip(x.iter()).zip(mean.iter()) {
            *v += (xv - m) * (xv - m);
        }
    }
    var.mapv(|v| (v / n).sqrt().max(SIGMA_FLOOR))
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: picks `k` frames, each with probability proportional
/// to its squared distance from the nearest center chosen so far. `fixed`
/// centers (e.g. the end-state origin) count as already chosen. When every
/// remaining frame coincides with a center the pick is uniform.
pub fn seed_centers(
    frames: &[ArrayView1<f64>],
    fixed: &[Array1<f64>],
    k: usize,
    rng: &mut Rng,
) -> Vec<Array1<f64>> {
    let mut nearest: Vec<f64> = frames
        .iter()
        .map(|x| {
            fixed
                .iter()
                .map(|c| sq_dist(*x, c.view()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = nearest.iter().filter(|d| d.is_finite()).sum();
        let idx = if (fixed.is_empty() && chosen.is_empty()) || !(total > 0.0) {
            rng.random_range(0..frames.len())
        } else {
            let mut u = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 {
                    pick = Some(i);
                    if u < d {
                        break;
                    }
                    u -= d;
                }
            }
            pick.expect("positive total implies a positive weight")
        };
        let center = frames[idx].to_owned();
        for (n, x) in nearest.iter_mut().zip(frames) {
            *n = n.min(sq_dist(*x, center.view()));
        }
        chosen.push(center);
    }
    chosen
}

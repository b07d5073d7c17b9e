//! GRU classifier with hand-written backpropagation through time.
//!
//! With `v_t = [x_t; h_{t-1}]`:
//!
//! ```text
//! z_t = sigmoid(v_t W_z + b_z)
//! r_t = sigmoid(v_t W_r + b_r)
//! n_t = tanh([x_t; r_t * h_{t-1}] W_n + b_n)
//! h_t = (1 - z_t) * h_{t-1} + z_t * n_t
//! p   = sigmoid(w_out . h_P + b_out)
//! ```
//!
//! Gate weights are `(D + H) x H` row-major blocks; `h_0 = 0`.

use ndarray::ArrayView2;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct GruNet {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub w_update: Vec<f64>,
    pub b_update: Vec<f64>,
    pub w_reset: Vec<f64>,
    pub b_reset: Vec<f64>,
    pub w_cand: Vec<f64>,
    pub b_cand: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^a)` without overflow.
fn softplus(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

/// Binary cross-entropy of a logit against a 0/1 label.
pub fn bce(logit: f64, label: f64) -> f64 {
    softplus(logit) - label * logit
}

impl GruNet {
    /// All parameters zero.
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        let w = (input_dim + hidden_dim) * hidden_dim;
        GruNet {
            input_dim,
            hidden_dim,
            w_update: vec![0.0; w],
            b_update: vec![0.0; hidden_dim],
            w_reset: vec![0.0; w],
            b_reset: vec![0.0; hidden_dim],
            w_cand: vec![0.0; w],
            b_cand: vec![0.0; hidden_dim],
            w_out: vec![0.0; hidden_dim],
            b_out: 0.0,
        }
    }

    /// Uniform `(-1/sqrt(H), 1/sqrt(H))` weights and biases, zero readout bias.
    pub fn random(input_dim: usize, hidden_dim: usize, rng: &mut Rng) -> Self {
        let mut net = GruNet::zeros(input_dim, hidden_dim);
        let k = 1.0 / (hidden_dim as f64).sqrt();
        for block in net.blocks_mut() {
            for v in block.iter_mut() {
                *v = rng.random_range(-k..k);
            }
        }
        net.b_out = 0.0;
        net
    }

    /// Parameter blocks in a fixed order; the readout bias is the last block.
    pub fn blocks(&self) -> [&[f64]; 8] {
        [
            &self.w_update,
            &self.b_update,
            &self.w_reset,
            &self.b_reset,
            &self.w_cand,
            &self.b_cand,
            &self.w_out,
            std::slice::from_ref(&self.b_out),
        ]
    }

    pub fn blocks_mut(&mut self) -> [&mut [f64]; 8] {
        [
            &mut self.w_update,
            &mut self.b_update,
            &mut self.w_reset,
            &mut self.b_reset,
            &mut self.w_cand,
            &mut self.b_cand,
            &mut self.w_out,
            std::slice::from_mut(&mut self.b_out),
        ]
    }

    pub const BLOCK_NAMES: [&'static str; 8] = [
        "w_update", "b_update", "w_reset", "b_reset", "w_cand", "b_cand", "w_out", "b_out",
    ];

    pub fn n_params(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks().concat()
    }

    pub fn set_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut off = 0;
        for block in self.blocks_mut() {
            block.copy_from_slice(&flat[off..off + block.len()]);
            off += block.len();
        }
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

/// `out = b + v W` for a row-major `(len(v) x H)` weight block.
fn affine(v: &[f64], w: &[f64], b: &[f64], out: &mut [f64]) {
    let h = b.len();
    out.copy_from_slice(b);
    for (k, &vk) in v.iter().enumerate() {
        if vk == 0.0 {
            continue;
        }
        let row = &w[k * h..(k + 1) * h];
        for (o, &wk) in out.iter_mut().zip(row) {
            *o += vk * wk;
        }
    }
}

/// Per-step activations kept for the backward pass.
struct Step {
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    n: Vec<f64>,
}

fn run(net: &GruNet, x: ArrayView2<f64>, keep: bool) -> (Vec<f64>, Vec<Step>) {
    assert_eq!(x.ncols(), net.input_dim, "sequence width must match the input dimension");
    let (d, hd) = (net.input_dim, net.hidden_dim);
    let mut h = vec![0.0; hd];
    let mut v = vec![0.0; d + hd];
    let mut z = vec![0.0; hd];
    let mut r = vec![0.0; hd];
    let mut n = vec![0.0; hd];
    let mut steps = Vec::new();
    for row in x.rows() {
        for (vi, &xi) in v.iter_mut().zip(row.iter()) {
            *vi = xi;
        }
        v[d..].copy_from_slice(&h);
        affine(&v, &net.w_update, &net.b_update, &mut z);
        affine(&v, &net.w_reset, &net.b_reset, &mut r);
        z.iter_mut().for_each(|a| *a = sigmoid(*a));
        r.iter_mut().for_each(|a| *a = sigmoid(*a));
        for j in 0..hd {
            v[d + j] = r[j] * h[j];
        }
        affine(&v, &net.w_cand, &net.b_cand, &mut n);
        n.iter_mut().for_each(|a| *a = a.tanh());
        if keep {
            steps.push(Step {
                h_prev: h.clone(),
                z: z.clone(),
                r: r.clone(),
                n: n.clone(),
            });
        }
        for j in 0..hd {
            h[j] = (1.0 - z[j]) * h[j] + z[j] * n[j];
        }
    }
    (h, steps)
}

fn readout(net: &GruNet, h: &[f64]) -> f64 {
    net.b_out + net.w_out.iter().zip(h).map(|(w, h)| w * h).sum::<f64>()
}

/// Logit of the "real" class for one `P x D` sequence.
pub fn gru_logit(net: &GruNet, x: ArrayView2<f64>) -> f64 {
    let (h, _) = run(net, x, false);
    readout(net, &h)
}

/// Probability that `x` is real.
pub fn gru_forward(net: &GruNet, x: ArrayView2<f64>) -> f64 {
    sigmoid(gru_logit(net, x))
}

/// Mean binary cross-entropy over a batch and its exact gradient with
/// respect to every parameter, returned in a [`GruNet`] of the same shape.
pub fn gru_grad(net: &GruNet, batch: &[ArrayView2<f64>], labels: &[f64]) -> Result<(f64, GruNet)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if batch.len() != labels.len() {
        return Err(Error::InvalidInput("batch and labels differ in length".into()));
    }
    let (d, hd) = (net.input_dim, net.hidden_dim);
    let scale = 1.0 / batch.len() as f64;
    let mut g = GruNet::zeros(d, hd);
    let mut loss = 0.0;

    let mut v = vec![0.0; d + hd];
    let mut vr = vec![0.0; d + hd];
    let mut da_z = vec![0.0; hd];
    let mut da_r = vec![0.0; hd];
    let mut da_n = vec![0.0; hd];
    let mut dh_prev = vec![0.0; hd];

    for (x, &y) in batch.iter().zip(labels) {
        let (h, steps) = run(net, *x, true);
        let logit = readout(net, &h);
        loss += bce(logit, y);
        let dlogit = (sigmoid(logit) - y) * scale;
        g.b_out += dlogit;
        for j in 0..hd {
            g.w_out[j] += dlogit * h[j];
        }
        let mut dh: Vec<f64> = net.w_out.iter().map(|w| w * dlogit).collect();

        for (t, s) in steps.iter().enumerate().rev() {
            let xt = x.row(t);
            for (k, &xk) in xt.iter().enumerate() {
                v[k] = xk;
                vr[k] = xk;
            }
            for j in 0..hd {
                v[d + j] = s.h_prev[j];
                vr[d + j] = s.r[j] * s.h_prev[j];
            }
            for j in 0..hd {
                let dn = dh[j] * s.z[j];
                let dz = dh[j] * (s.n[j] - s.h_prev[j]);
                dh_prev[j] = dh[j] * (1.0 - s.z[j]);
                da_n[j] = dn * (1.0 - s.n[j] * s.n[j]);
                da_z[j] = dz * s.z[j] * (1.0 - s.z[j]);
            }
            // Candidate gate: its input carries r * h_prev.
            for (k, &vk) in vr.iter().enumerate() {
                let row = &mut g.w_cand[k * hd..(k + 1) * hd];
                for (gw, &a) in row.iter_mut().zip(&da_n) {
                    *gw += vk * a;
                }
            }
            for j in 0..hd {
                g.b_cand[j] += da_n[j];
            }
            for i in 0..hd {
                let row = &net.w_cand[(d + i) * hd..(d + i + 1) * hd];
                let d_rh: f64 = row.iter().zip(&da_n).map(|(w, a)| w * a).sum();
                dh_prev[i] += d_rh * s.r[i];
                let dr = d_rh * s.h_prev[i];
                da_r[i] = dr * s.r[i] * (1.0 - s.r[i]);
            }
            for (w, gw, bw, da) in [
                (&net.w_update, &mut g.w_update, &mut g.b_update, &da_z),
                (&net.w_reset, &mut g.w_reset, &mut g.b_reset, &da_r),
            ] {
                for (k, &vk) in v.iter().enumerate() {
                    let row = &mut gw[k * hd..(k + 1) * hd];
                    for (gwv, &a) in row.iter_mut().zip(da.iter()) {
                        *gwv += vk * a;
                    }
                }
                for j in 0..hd {
                    bw[j] += da[j];
                }
                for i in 0..hd {
                    let row = &w[(d + i) * hd..(d + i + 1) * hd];
                    dh_prev[i] += row.iter().zip(da.iter()).map(|(w, a)| w * a).sum::<f64>();
                }
            }
            dh.copy_from_slice(&dh_prev);
        }
    }
    Ok((loss * scale, g))
}

//! Phonetic summaries of a trained network.

use std::fmt::Write as _;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::corpus::{DEFAULT_FRAMES, JOINTS};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Expected run length, in frames, of state `i`: the mean of a geometric
/// number of trials with success probability `1 - T[i, i]`.
pub fn expected_hold_length(params: &ModelParams, i: usize) -> Result<f64> {
    let stay = params.trans[[i, i]];
    if stay >= 1.0 {
        return Err(Error::AbsorbingState(i));
    }
    Ok(1.0 / (1.0 - stay))
}

/// Expected number of frames spent in each state among the first `horizon`
/// frames: `sum_{k < horizon} (pi T^k)[j]`.
pub fn expected_counts(params: &ModelParams, horizon: usize) -> Array1<f64> {
    let mut dist = params.pi.clone();
    let mut total = Array1::zeros(dist.len());
    for k in 0..horizon {
        total += &dist;
        if k + 1 < horizon {
            dist = dist.dot(&params.trans);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpretConfig {
    /// Milliseconds per frame.
    pub frame_ms: f64,
    /// Number of frames `K` summed by [`expected_counts`].
    pub horizon: usize,
    /// Padded sign length, only used to flag a horizon that differs from it.
    pub frames: usize,
    /// Whether the end state takes part in the start ranking.
    pub include_end_state: bool,
}

impl Default for InterpretConfig {
    fn default() -> Self {
        InterpretConfig {
            frame_ms: 98.0,
            horizon: 20,
            frames: DEFAULT_FRAMES,
            include_end_state: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDispersion {
    pub joint: String,
    pub sigma: f64,
}

/// `null` hold lengths mark absorbing states (infinite holds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretReport {
    pub hold_lengths_frames: Vec<Option<f64>>,
    pub hold_lengths_ms: Vec<Option<f64>>,
    pub expected_counts: Vec<f64>,
    /// States by descending `pi`, ties by ascending index.
    pub start_ranking: Vec<usize>,
    /// `T[i, 0]`: probability that state `i` ends the sign.
    pub end_prob: Vec<f64>,
    /// Ending states by descending `end_prob`, end state excluded.
    pub end_ranking: Vec<usize>,
    /// Mean of each joint's x and y dispersion, in joint order.
    pub dispersion_by_joint: Vec<JointDispersion>,
    /// Joints by descending dispersion.
    pub dispersion_ranking: Vec<String>,
    pub config: InterpretConfig,
    pub notes: Vec<String>,
}

fn rank_desc(values: &[f64], candidates: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = candidates.collect();
    // Stable sort keeps ascending index among ties.
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

pub fn summarize(params: &ModelParams, config: &InterpretConfig) -> Result<InterpretReport> {
    params.validate()?;
    let n = params.n_states();
    let hold_lengths_frames: Vec<Option<f64>> = (0..n)
        .map(|i| match expected_hold_length(params, i) {
            Ok(v) => Ok(Some(v)),
            Err(Error::AbsorbingState(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let hold_lengths_ms = hold_lengths_frames
        .iter()
        .map(|h| h.map(|f| f * config.frame_ms))
        .collect();

    let pi = params.pi.to_vec();
    let first = if config.include_end_state { 0 } else { 1 };
    let start_ranking = rank_desc(&pi, first..n);
    let end_prob: Vec<f64> = params.trans.column(0).to_vec();
    let end_ranking = rank_desc(&end_prob, 1..n);

    let d = params.dim();
    let dispersion_by_joint: Vec<JointDispersion> = (0..d / 2)
        .map(|j| JointDispersion {
            joint: JOINTS.get(j).map_or_else(|| format!("joint{j}"), |s| s.to_string()),
            sigma: 0.5 * (params.sigma[2 * j] + params.sigma[2 * j + 1]),
        })
        .collect();
    let disp: Vec<f64> = dispersion_by_joint.iter().map(|j| j.sigma).collect();
    let dispersion_ranking = rank_desc(&disp, 0..disp.len())
        .into_iter()
        .map(|j| dispersion_by_joint[j].joint.clone())
        .collect();

    let mut notes = Vec::new();
    if config.horizon != config.frames {
        notes.push(format!(
            "expected counts sum over the first {} frames; signs are padded to {} frames",
            config.horizon, config.frames
        ));
    }

    Ok(InterpretReport {
        hold_lengths_frames,
        hold_lengths_ms,
        expected_counts: expected_counts(params, config.horizon).to_vec(),
        start_ranking,
        end_prob,
        end_ranking,
        dispersion_by_joint,
        dispersion_ranking,
        config: *config,
        notes,
    })
}

impl InterpretReport {
    /// Plain-text table of the per-state statistics.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let fmt = |v: Option<f64>, prec: usize| v.map_or_else(|| "∞".to_string(), |x| format!("{x:.prec$}"));
        let _ = writeln!(
            out,
            "{:>5}  {:>10}  {:>10}  {:>10}  {:>8}",
            "state", "hold (fr)", "hold (ms)", "E[count]", "P(end)"
        );
        for i in 0..self.end_prob.len() {
            let _ = writeln!(
                out,
                "{:>5}  {:>10}  {:>10}  {:>10.3}  {:>8.4}",
                i,
                fmt(self.hold_lengths_frames[i], 3),
                fmt(self.hold_lengths_ms[i], 1),
                self.expected_counts[i],
                self.end_prob[i]
            );
        }
        let _ = writeln!(out, "\nstart ranking: {:?}", self.start_ranking);
        let _ = writeln!(out, "end ranking:   {:?}", self.end_ranking);
        let _ = writeln!(out, "\n{:>16}  {:>8}", "joint", "sigma");
        for j in &self.dispersion_by_joint {
            let _ = writeln!(out, "{:>16}  {:>8.4}", j.joint, j.sigma);
        }
        for note in &self.notes {
            let _ = writeln!(out, "\nnote: {note}");
        }
        out
    }
}

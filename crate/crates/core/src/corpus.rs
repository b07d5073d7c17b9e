//! Keypoint sign corpora: pose normalization, end-token padding, the
//! JSON-lines corpus format and synthetic corpus generation.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sample_with_labels, Assignment, ModelParams};

/// Number of normalized features per frame.
pub const FEATURE_DIM: usize = 14;
/// Default padded sign length.
pub const DEFAULT_FRAMES: usize = 25;

/// Feature order of a normalized frame.
pub const FEATURE_ORDER: [&str; FEATURE_DIM] = [
    "head.x",
    "head.y",
    "right_shoulder.x",
    "right_shoulder.y",
    "left_shoulder.x",
    "left_shoulder.y",
    "right_elbow.x",
    "right_elbow.y",
    "left_elbow.x",
    "left_elbow.y",
    "right_wrist.x",
    "right_wrist.y",
    "left_wrist.x",
    "left_wrist.y",
];

/// Joint names in feature order; joint `j` owns features `2j` and `2j + 1`.
pub const JOINTS: [&str; 7] = [
    "head",
    "right_shoulder",
    "left_shoulder",
    "right_elbow",
    "left_elbow",
    "right_wrist",
    "left_wrist",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseLevel {
    None,
    Low,
    Medium,
    High,
    Broken,
}

impl NoiseLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseLevel::None => "none",
            NoiseLevel::Low => "low",
            NoiseLevel::Medium => "medium",
            NoiseLevel::High => "high",
            NoiseLevel::Broken => "broken",
        }
    }
}

impl fmt::Display for NoiseLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseLevel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(NoiseLevel::None),
            "low" => Ok(NoiseLevel::Low),
            "medium" => Ok(NoiseLevel::Medium),
            "high" => Ok(NoiseLevel::High),
            "broken" => Ok(NoiseLevel::Broken),
            other => Err(format!("unknown noise level {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One frame of 2D keypoints in image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub head: Point,
    pub right_shoulder: Point,
    pub left_shoulder: Point,
    pub right_elbow: Point,
    pub left_elbow: Point,
    pub right_wrist: Point,
    pub left_wrist: Point,
}

impl Pose {
    /// Keypoints in [`JOINTS`] order.
    pub fn points(&self) -> [Point; 7] {
        [
            self.head,
            self.right_shoulder,
            self.left_shoulder,
            self.right_elbow,
            self.left_elbow,
            self.right_wrist,
            self.left_wrist,
        ]
    }
}

/// A sign as extracted from video, before normalization and padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSign {
    pub gloss: String,
    pub signer_id: String,
    pub noise_level: NoiseLevel,
    pub frames: Vec<Pose>,
}

/// Moves the head to the origin and rescales so the mean head-shoulder
/// distance is one. Output follows [`FEATURE_ORDER`].
pub fn normalize_pose(pose: &Pose) -> Result<[f64; FEATURE_DIM]> {
    let scale = 0.5
        * (pose.head.dist(pose.right_shoulder) + pose.head.dist(pose.left_shoulder));
    if !(scale > 0.0) {
        return Err(Error::DegenerateScale);
    }
    let mut out = [0.0; FEATURE_DIM];
    for (j, p) in pose.points().iter().enumerate() {
        out[2 * j] = (p.x - pose.head.x) / scale;
        out[2 * j + 1] = (p.y - pose.head.y) / scale;
    }
    Ok(out)
}

/// A fixed-length sign: `P x D` features whose rows from `true_length` on
/// are the all-zero end token.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSequence {
    pub gloss: String,
    pub signer: String,
    pub noise: NoiseLevel,
    pub features: Array2<f64>,
    pub true_length: usize,
}

impl SignSequence {
    pub fn frames(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn frame(&self, f: usize) -> ArrayView1<'_, f64> {
        self.features.row(f)
    }
}

/// Pads `frames` with zero rows up to length `p`.
pub fn pad_sign<R: AsRef<[f64]>>(frames: &[R], p: usize) -> Result<SignSequence> {
    if frames.len() > p {
        return Err(Error::TooLong {
            len: frames.len(),
            max: p,
        });
    }
    if frames.is_empty() {
        return Err(Error::InvalidInput("a sign needs at least one frame".into()));
    }
    let d = frames[0].as_ref().len();
    let mut features = Array2::zeros((p, d));
    for (f, row) in frames.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != d {
            return Err(Error::InvalidInput(format!(
                "frame {f} has {} features, expected {d}",
                row.len()
            )));
        }
        features.row_mut(f).assign(&ArrayView1::from(row));
    }
    Ok(SignSequence {
        gloss: String::new(),
        signer: String::new(),
        noise: NoiseLevel::None,
        features,
        true_length: frames.len(),
    })
}

/// An immutable collection of equally shaped signs.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    signs: Vec<SignSequence>,
    frames: usize,
    dim: usize,
}

impl Corpus {
    /// Builds a corpus, checking that it is non-empty, that every sign has
    /// the same shape and that zero rows form a suffix.
    pub fn new(signs: Vec<SignSequence>) -> Result<Self> {
        let first = signs
            .first()
            .ok_or_else(|| Error::InvalidInput("corpus must contain at least one sign".into()))?;
        let (frames, dim) = (first.frames(), first.dim());
        for (i, s) in signs.iter().enumerate() {
            if s.frames() != frames || s.dim() != dim {
                return Err(Error::InvalidInput(format!(
                    "sign {i} has shape {}x{}, expected {frames}x{dim}",
                    s.frames(),
                    s.dim()
                )));
            }
            if let Some(f) = end_token_violation(s) {
                return Err(Error::InvalidInput(format!(
                    "sign {i}: non-zero frame {f} follows an end token"
                )));
            }
        }
        Ok(Corpus {
            signs,
            frames,
            dim,
        })
    }

    /// Normalizes and pads raw signs. Signs tagged `broken` are dropped
    /// unless `include_broken` is set.
    pub fn from_raw(raw: &[RawSign], p: usize, include_broken: bool) -> Result<Self> {
        let mut signs = Vec::with_capacity(raw.len());
        for r in raw {
            if r.noise_level == NoiseLevel::Broken && !include_broken {
                continue;
            }
            let frames = r
                .frames
                .iter()
                .map(normalize_pose)
                .collect::<Result<Vec<_>>>()?;
            let mut sign = pad_sign(&frames, p)?;
            sign.gloss = r.gloss.clone();
            sign.signer = r.signer_id.clone();
            sign.noise = r.noise_level;
            signs.push(sign);
        }
        Corpus::new(signs)
    }

    pub fn signs(&self) -> &[SignSequence] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Padded sign length `P`.
    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Features per frame `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Copy without `broken` signs; `None` if nothing would remain.
    pub fn without_broken(&self) -> Option<Corpus> {
        let signs: Vec<_> = self
            .signs
            .iter()
            .filter(|s| s.noise != NoiseLevel::Broken)
            .cloned()
            .collect();
        Corpus::new(signs).ok()
    }

    /// Rows `< true_length` of every sign.
    pub fn non_padding_frames(&self) -> impl Iterator<Item = ArrayView1<'_, f64>> {
        self.signs
            .iter()
            .flat_map(|s| (0..s.true_length).map(move |f| s.frame(f)))
    }

    /// Every row of every sign, padding included.
    pub fn all_frames(&self) -> impl Iterator<Item = ArrayView1<'_, f64>> {
        self.signs.iter().flat_map(|s| s.features.rows())
    }
}

/// First non-zero row that follows a zero row, if any.
fn end_token_violation(s: &SignSequence) -> Option<usize> {
    let mut seen_zero = false;
    for (f, row) in s.features.rows().into_iter().enumerate() {
        let zero = row.iter().all(|&v| v == 0.0);
        if seen_zero && !zero {
            return Some(f);
        }
        seen_zero |= zero;
        if f >= s.true_length && !zero {
            return Some(f);
        }
    }
    None
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    #[serde(rename = "D")]
    d: usize,
    #[serde(rename = "P")]
    p: usize,
    feature_order: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    gloss: String,
    signer: String,
    noise: String,
    frames: Vec<Vec<f64>>,
}

const CORPUS_FORMAT: &str = "mh-corpus";
const CORPUS_VERSION: u32 = 1;

fn violation(line: usize, check: &'static str, message: impl Into<String>) -> Error {
    Error::InvariantViolation {
        line,
        check,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<Header> {
    let header: Header = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.format != CORPUS_FORMAT {
        return Err(violation(1, "format", format!("expected {CORPUS_FORMAT:?}")));
    }
    if header.version != CORPUS_VERSION {
        return Err(violation(1, "version", format!("unsupported version {}", header.version)));
    }
    if header.d == FEATURE_DIM && header.feature_order != FEATURE_ORDER {
        return Err(violation(1, "feature_order", "feature order differs from the canonical order"));
    }
    if header.feature_order.len() != header.d {
        return Err(violation(1, "D", "feature_order length differs from D"));
    }
    if header.p == 0 {
        return Err(violation(1, "P", "P must be positive"));
    }
    Ok(header)
}

fn parse_record(line_no: usize, line: &str, header: &Header) -> Result<SignSequence> {
    let rec: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    let noise = rec
        .noise
        .parse::<NoiseLevel>()
        .map_err(|m| violation(line_no, "noise", m))?;
    if rec.frames.len() > header.p {
        return Err(violation(
            line_no,
            "P",
            format!("{} frames exceed P = {}", rec.frames.len(), header.p),
        ));
    }
    let mut features = Array2::zeros((header.p, header.d));
    let mut seen_zero = false;
    for (f, row) in rec.frames.iter().enumerate() {
        if row.len() != header.d {
            return Err(violation(
                line_no,
                "D",
                format!("frame {f} has {} features, expected {}", row.len(), header.d),
            ));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(violation(line_no, "finite", format!("frame {f} is not finite")));
        }
        let zero = row.iter().all(|&v| v == 0.0);
        if seen_zero && !zero {
            return Err(violation(
                line_no,
                "end token",
                format!("non-zero frame {f} after a zero frame"),
            ));
        }
        seen_zero |= zero;
        features.row_mut(f).assign(&ArrayView1::from(row.as_slice()));
    }
    Ok(SignSequence {
        gloss: rec.gloss,
        signer: rec.signer,
        noise,
        true_length: rec.frames.len(),
        features,
    })
}

/// Reads a JSON-lines corpus: a header line followed by one sign per line.
/// Blank lines are ignored.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut header = None;
    let mut signs = Vec::new();
    let mut last_line = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match &header {
            None => header = Some(parse_header(&line)?),
            Some(h) => signs.push(parse_record(line_no, &line, h)?),
        }
    }
    if header.is_none() {
        return Err(Error::Parse {
            line: 1,
            message: "missing corpus header".into(),
        });
    }
    if signs.is_empty() {
        return Err(violation(last_line, "M", "corpus contains no signs"));
    }
    Corpus::new(signs)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file))
}

/// Writes the JSON-lines corpus format. Only the first `true_length` rows
/// of each sign are stored.
pub fn write_corpus<W: Write>(corpus: &Corpus, out: W) -> Result<()> {
    write_corpus_with_run(corpus, None, out)
}

/// [`write_corpus`] with a configuration echo stored in the header's `run`
/// field. Readers ignore it.
pub fn write_corpus_with_run<W: Write>(
    corpus: &Corpus,
    run: Option<&serde_json::Value>,
    mut out: W,
) -> Result<()> {
    let header = Header {
        format: CORPUS_FORMAT.into(),
        version: CORPUS_VERSION,
        d: corpus.dim(),
        p: corpus.frames(),
        feature_order: feature_names(corpus.dim()),
        run: run.cloned(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n").map_err(|e| Error::io("<corpus>", e))?;
    for s in corpus.signs() {
        let rec = Record {
            gloss: s.gloss.clone(),
            signer: s.signer.clone(),
            noise: s.noise.to_string(),
            frames: (0..s.true_length).map(|f| s.frame(f).to_vec()).collect(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(|e| Error::io("<corpus>", e))?;
    }
    Ok(())
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    save_corpus_with_run(corpus, None, path)
}

pub fn save_corpus_with_run(
    corpus: &Corpus,
    run: Option<&serde_json::Value>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_corpus_with_run(corpus, run, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Canonical feature names for `d = 14`, `f0..f{d-1}` otherwise.
pub fn feature_names(d: usize) -> Vec<String> {
    if d == FEATURE_DIM {
        FEATURE_ORDER.iter().map(|s| s.to_string()).collect()
    } else {
        (0..d).map(|i| format!("f{i}")).collect()
    }
}

/// How frames are emitted once a sampled chain first reaches the end state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndToken {
    /// Exact zero rows, matching loaded corpora.
    #[default]
    Exact,
    /// Draws from the end state's Gaussian like any other state.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthOptions {
    pub frames: usize,
    pub end_token: EndToken,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            frames: DEFAULT_FRAMES,
            end_token: EndToken::Exact,
        }
    }
}

/// Samples `m` signs from `truth` by ancestral sampling and returns the
/// hidden labels alongside the corpus.
pub fn synth_corpus(
    truth: &ModelParams,
    m: usize,
    seed: u64,
    opts: &SynthOptions,
) -> Result<(Corpus, Assignment)> {
    truth.validate()?;
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    sample_with_labels(truth, m, opts.frames, seed, opts.end_token)
}

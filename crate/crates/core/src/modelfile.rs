//! JSON model files.
//!
//! ```text
//! {"format":"mh-model","version":1,"kind":"dbn","N":5,"D":14,
//!  "pi":[..],"trans":[[..]],"mu":[[..]],"sigma":[..],"hyper":{..},"run":{..}}
//! ```
//!
//! `kind` is `dbn`, `gmm` (with `weights`) or `gmm-lda` (with `n_topics`,
//! `topic_weights`, `topic_word`, `doc_topic_prior`, `word_prior`). `run` is
//! an optional echo of the configuration that produced the file. Numbers are
//! written with round-trip precision.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::baselines::{sample_gmm, sample_gmm_lda, GmmLdaParams, GmmParams};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{sample, Hyperparams, ModelParams};

const MODEL_FORMAT: &str = "mh-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Dbn(ModelParams),
    Gmm(GmmParams),
    GmmLda(GmmLdaParams),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Dbn(_) => "dbn",
            Model::Gmm(_) => "gmm",
            Model::GmmLda(_) => "gmm-lda",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Dbn(p) => p.dim(),
            Model::Gmm(p) => p.sigma.len(),
            Model::GmmLda(p) => p.sigma.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Dbn(p) => p.validate(),
            Model::Gmm(p) => p.validate(),
            Model::GmmLda(p) => p.validate(),
        }
    }

    /// Draws `n_signs` signs of `frames` rows from the model.
    pub fn sample(&self, n_signs: usize, frames: usize, seed: u64) -> Result<Corpus> {
        match self {
            Model::Dbn(p) => sample(p, n_signs, frames, seed),
            Model::Gmm(p) => sample_gmm(p, n_signs, frames, seed),
            Model::GmmLda(p) => sample_gmm_lda(p, n_signs, frames, seed),
        }
    }
}

/// A model together with its priors and the configuration echo.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub hyper: Hyperparams,
    pub run: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: Body,
    hyper: Hyperparams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    run: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum Body {
    Dbn {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "D")]
        d: usize,
        pi: Vec<f64>,
        trans: Vec<Vec<f64>>,
        mu: Vec<Vec<f64>>,
        sigma: Vec<f64>,
    },
    Gmm {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "D")]
        d: usize,
        weights: Vec<f64>,
        mu: Vec<Vec<f64>>,
        sigma: Vec<f64>,
    },
    GmmLda {
        #[serde(rename = "N")]
        n: usize,
        #[serde(rename = "D")]
        d: usize,
        n_topics: usize,
        topic_weights: Vec<f64>,
        topic_word: Vec<Vec<f64>>,
        doc_topic_prior: f64,
        word_prior: f64,
        mu: Vec<Vec<f64>>,
        sigma: Vec<f64>,
    },
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(rows: Vec<Vec<f64>>, shape: (usize, usize), what: &str) -> Result<Array2<f64>> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::InvalidParams(format!(
            "{what} must be {}x{}",
            shape.0, shape.1
        )));
    }
    Ok(Array2::from_shape_vec(shape, rows.into_iter().flatten().collect())
        .expect("shape checked above"))
}

fn vector(v: Vec<f64>, len: usize, what: &str) -> Result<Array1<f64>> {
    if v.len() != len {
        return Err(Error::InvalidParams(format!("{what} must have length {len}")));
    }
    Ok(Array1::from(v))
}

impl From<&Model> for Body {
    fn from(m: &Model) -> Self {
        match m {
            Model::Dbn(p) => Body::Dbn {
                n: p.n_states(),
                d: p.dim(),
                pi: p.pi.to_vec(),
                trans: rows(&p.trans),
                mu: rows(&p.mu),
                sigma: p.sigma.to_vec(),
            },
            Model::Gmm(p) => Body::Gmm {
                n: p.n_components(),
                d: p.sigma.len(),
                weights: p.weights.to_vec(),
                mu: rows(&p.mu),
                sigma: p.sigma.to_vec(),
            },
            Model::GmmLda(p) => Body::GmmLda {
                n: p.n_components(),
                d: p.sigma.len(),
                n_topics: p.n_topics,
                topic_weights: p.topic_weights.to_vec(),
                topic_word: rows(&p.topic_word),
                doc_topic_prior: p.doc_topic_prior,
                word_prior: p.word_prior,
                mu: rows(&p.mu),
                sigma: p.sigma.to_vec(),
            },
        }
    }
}

impl TryFrom<Body> for Model {
    type Error = Error;

    fn try_from(b: Body) -> Result<Self> {
        let model = match b {
            Body::Dbn { n, d, pi, trans, mu, sigma } => Model::Dbn(ModelParams {
                pi: vector(pi, n, "pi")?,
                trans: matrix(trans, (n, n), "trans")?,
                mu: matrix(mu, (n, d), "mu")?,
                sigma: vector(sigma, d, "sigma")?,
            }),
            Body::Gmm { n, d, weights, mu, sigma } => Model::Gmm(GmmParams {
                weights: vector(weights, n, "weights")?,
                mu: matrix(mu, (n, d), "mu")?,
                sigma: vector(sigma, d, "sigma")?,
            }),
            Body::GmmLda {
                n,
                d,
                n_topics,
                topic_weights,
                topic_word,
                doc_topic_prior,
                word_prior,
                mu,
                sigma,
            } => Model::GmmLda(GmmLdaParams {
                n_topics,
                topic_weights: vector(topic_weights, n_topics, "topic_weights")?,
                topic_word: matrix(topic_word, (n_topics, n), "topic_word")?,
                doc_topic_prior,
                word_prior,
                mu: matrix(mu, (n, d), "mu")?,
                sigma: vector(sigma, d, "sigma")?,
            }),
        };
        model.validate()?;
        Ok(model)
    }
}

impl ModelFile {
    pub fn to_json(&self) -> Result<String> {
        let env = Envelope {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            body: Body::from(&self.model),
            hyper: self.hyper,
            run: self.run.clone(),
        };
        Ok(serde_json::to_string_pretty(&env)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(text)?;
        if env.format != MODEL_FORMAT || env.version != MODEL_VERSION {
            return Err(Error::InvalidParams(format!(
                "unsupported model file {:?} version {}",
                env.format, env.version
            )));
        }
        env.hyper.validate()?;
        Ok(ModelFile {
            model: Model::try_from(env.body)?,
            hyper: env.hyper,
            run: env.run,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = self.to_json()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ModelFile::from_json(&text)
    }
}

use std::fs;
use std::path::{Path, PathBuf};

use mh_phone_core::baselines::{fit_gmm, fit_gmm_lda};
use mh_phone_core::corpus::{
    feature_names, load_corpus, save_corpus_with_run, synth_corpus, EndToken, SynthOptions,
};
use mh_phone_core::discriminator::{evaluate_generator, EvalOptions};
use mh_phone_core::interpret::{summarize, InterpretConfig};
use mh_phone_core::model::{fit_em, synthetic_truth};
use mh_phone_core::modelfile::{Model, ModelFile};
use mh_phone_core::rng::derive_seed;
use mh_phone_core::{Corpus, EStep, FitOptions, Hyperparams};
use serde_json::{json, Value};

use crate::args::{
    Command, EStepArg, EvaluateArgs, ExportArgs, GenerateArgs, InterpretArgs, ModelKind,
    SynthArgs, TrainArgs,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] mh_phone_core::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Invalid(_) => 1,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: &Command, seed: u64) -> Result<()> {
    match command {
        Command::Synth(a) => synth(a, seed),
        Command::Train(a) => train(a, seed),
        Command::Generate(a) => generate(a, seed),
        Command::Evaluate(a) => evaluate(a, seed),
        Command::Interpret(a) => interpret(a, seed),
        Command::ExportSamples(a) => export_samples(a, seed),
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(mh_phone_core::Error::from)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

/// JSON has no infinity; non-finite numbers are echoed as strings.
fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn load_training_corpus(path: &Path, include_broken: bool) -> Result<Corpus> {
    let corpus = load_corpus(path)?;
    if include_broken {
        return Ok(corpus);
    }
    let kept = corpus.without_broken().ok_or_else(|| {
        CliError::Invalid(format!(
            "{}: every sign is tagged broken; pass --include-broken to use them",
            path.display()
        ))
    })?;
    if kept.len() < corpus.len() {
        log::info!("dropped {} broken signs", corpus.len() - kept.len());
    }
    Ok(kept)
}

fn synth(a: &SynthArgs, seed: u64) -> Result<()> {
    let truth = synthetic_truth(a.n_states, a.dim, a.sigma, derive_seed(seed, "synth/truth"))?;
    let opts = SynthOptions {
        frames: a.frames,
        end_token: if a.exact_end_token { EndToken::Exact } else { EndToken::Gaussian },
    };
    let (corpus, _) = synth_corpus(&truth, a.m_signs, derive_seed(seed, "synth/sample"), &opts)?;
    let run = json!({
        "command": "synth",
        "seed": seed,
        "n_states": a.n_states,
        "m_signs": a.m_signs,
        "dim": a.dim,
        "sigma": a.sigma,
        "frames": a.frames,
        "exact_end_token": a.exact_end_token,
    });
    save_corpus_with_run(&corpus, Some(&run), &a.out)?;
    if let Some(path) = &a.truth_out {
        ModelFile {
            model: Model::Dbn(truth),
            hyper: Hyperparams::default(),
            run: Some(run),
        }
        .save(path)?;
    }
    log::info!("wrote {} signs to {}", corpus.len(), a.out.display());
    Ok(())
}

fn train(a: &TrainArgs, seed: u64) -> Result<()> {
    let corpus = load_training_corpus(&a.corpus, a.include_broken)?;
    let hyper = Hyperparams {
        alpha: a.priors.alpha,
        mu_mu: a.priors.mu_mu,
        sigma_mu: a.priors.sigma_mu,
        mu_sigma: a.priors.mu_sigma,
        sigma_sigma: a.priors.sigma_sigma,
    };
    let opts = FitOptions {
        max_iters: a.max_iters,
        tol: a.tol,
        e_step: match a.e_step {
            EStepArg::Greedy => EStep::Greedy,
            EStepArg::Viterbi => EStep::Viterbi,
        },
        seed: derive_seed(seed, &format!("train/{}", a.model.as_str())),
    };
    let (model, report) = match a.model {
        ModelKind::Dbn => {
            let (p, _, r) = fit_em(&corpus, a.n_states, &hyper, &opts)?;
            (Model::Dbn(p), r)
        }
        ModelKind::Gmm => {
            let (p, r) = fit_gmm(&corpus, a.n_states, &hyper, &opts)?;
            (Model::Gmm(p), r)
        }
        ModelKind::GmmLda => {
            let (p, r) = fit_gmm_lda(&corpus, a.n_states, a.n_topics, &hyper, &opts)?;
            (Model::GmmLda(p), r)
        }
    };
    log::info!(
        "{} fit: {} iterations, converged = {}",
        a.model.as_str(),
        report.iterations,
        report.converged
    );
    let mut run = json!({
        "command": "train",
        "seed": seed,
        "corpus": a.corpus.display().to_string(),
        "signs": corpus.len(),
        "model": a.model.as_str(),
        "n_states": a.n_states,
        "max_iters": a.max_iters,
        "tol": number(a.tol),
        "include_broken": a.include_broken,
        "fit": report,
    });
    match a.model {
        ModelKind::Dbn => run["e_step"] = json!(opts.e_step),
        ModelKind::GmmLda => run["n_topics"] = json!(a.n_topics),
        ModelKind::Gmm => {}
    }
    ModelFile {
        model,
        hyper,
        run: Some(run),
    }
    .save(&a.out)?;
    Ok(())
}

fn generate(a: &GenerateArgs, seed: u64) -> Result<()> {
    let file = ModelFile::load(&a.model)?;
    let corpus = file.model.sample(a.n, a.frames, derive_seed(seed, "generate"))?;
    let run = json!({
        "command": "generate",
        "seed": seed,
        "model": a.model.display().to_string(),
        "kind": file.model.kind(),
        "n": a.n,
        "frames": a.frames,
    });
    save_corpus_with_run(&corpus, Some(&run), &a.out)?;
    Ok(())
}

fn evaluate(a: &EvaluateArgs, seed: u64) -> Result<()> {
    let real = load_training_corpus(&a.real, a.include_broken)?;
    let file = ModelFile::load(&a.model)?;
    if file.model.dim() != real.dim() {
        return Err(CliError::Invalid(format!(
            "model has D = {} but the corpus has D = {}",
            file.model.dim(),
            real.dim()
        )));
    }
    let opts = EvalOptions {
        seeds: a.seeds,
        split: a.split,
        epochs: a.epochs,
        lr: a.lr,
        hidden: a.hidden,
        validation: a.validation,
        seed: derive_seed(seed, "evaluate"),
    };
    let frames = real.frames();
    let report = evaluate_generator(&real, |n, s| file.model.sample(n, frames, s), &opts)?;
    println!(
        "{}: test BCE {:.4} ± {:.4} over {} seeds",
        file.model.kind(),
        report.bce_mean,
        report.bce_std,
        report.n_seeds
    );
    if let Some(path) = &a.report {
        let mut value = serde_json::to_value(&report).map_err(mh_phone_core::Error::from)?;
        value["model_kind"] = json!(file.model.kind());
        value["run"] = json!({
            "command": "evaluate",
            "seed": seed,
            "real": a.real.display().to_string(),
            "model": a.model.display().to_string(),
            "signs": real.len(),
            "seeds": a.seeds,
            "epochs": a.epochs,
            "lr": a.lr,
            "hidden": a.hidden,
            "split": a.split,
            "validation": a.validation,
            "include_broken": a.include_broken,
        });
        write_json(path, &value)?;
    }
    Ok(())
}

fn interpret(a: &InterpretArgs, seed: u64) -> Result<()> {
    let file = ModelFile::load(&a.model)?;
    let Model::Dbn(params) = &file.model else {
        return Err(CliError::Invalid(format!(
            "interpret needs a dbn model, {} is {}",
            a.model.display(),
            file.model.kind()
        )));
    };
    let config = InterpretConfig {
        frame_ms: a.frame_ms,
        horizon: a.horizon,
        frames: a.frames,
        include_end_state: a.include_end_state,
    };
    let report = summarize(params, &config)?;
    print!("{}", report.to_table());
    if let Some(path) = &a.out {
        let mut value = serde_json::to_value(&report).map_err(mh_phone_core::Error::from)?;
        value["run"] = json!({
            "command": "interpret",
            "seed": seed,
            "model": a.model.display().to_string(),
            "frame_ms": a.frame_ms,
            "horizon": a.horizon,
            "frames": a.frames,
            "include_end_state": a.include_end_state,
        });
        write_json(path, &value)?;
    }
    Ok(())
}

fn export_samples(a: &ExportArgs, seed: u64) -> Result<()> {
    let file = ModelFile::load(&a.model)?;
    let corpus = file.model.sample(a.n, a.frames, derive_seed(seed, "export-samples"))?;
    let csv_err = |source| CliError::Csv {
        path: a.out.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&a.out).map_err(csv_err)?;
    let names = feature_names(corpus.dim());
    let mut header = vec!["sign".to_string()];
    for f in 0..corpus.frames() {
        header.extend(names.iter().map(|n| format!("f{f}_{n}")));
    }
    w.write_record(&header).map_err(csv_err)?;
    for (i, sign) in corpus.signs().iter().enumerate() {
        let row = std::iter::once(i.to_string()).chain(sign.features.iter().map(|v| v.to_string()));
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: a.out.clone(),
        source,
    })?;
    Ok(())
}

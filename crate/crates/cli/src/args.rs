use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const FORMATS: &str = "\
File formats:
  corpus (.jsonl)   header line {\"format\":\"mh-corpus\",\"version\":1,\"D\":14,\"P\":25,
                    \"feature_order\":[...],\"run\":{...}} then one sign per line
                    {\"gloss\",\"signer\",\"noise\",\"frames\":[[D floats] x true_length]}.
                    Padding to P frames is applied on load and never stored.
  model (.json)     {\"format\":\"mh-model\",\"version\":1,\"kind\":\"dbn\"|\"gmm\"|\"gmm-lda\",
                    \"N\",\"D\", parameters, \"hyper\":{...}, \"run\":{...}}
  evaluate report   {\"bce_mean\",\"bce_std\",\"n_seeds\",\"per_seed\",\"options\",\"model_kind\",\"run\"}
  interpret report  hold lengths, expected counts, rankings and per-joint dispersion
  samples (.csv)    one row per sign: sign index, then P x D values named
                    f<frame>_<feature>

Every run echoes its resolved configuration (threads excepted) in the \"run\"
field of its JSON output. All randomness derives from --seed.

Exit status: 0 success, 1 usage or validation error, 2 runtime error.
Environment: MH_PHONE_LOG sets the log filter (e.g. info, debug).";

#[derive(Parser, Debug)]
#[command(
    name = "mh-phone",
    version,
    about = "Movement-Hold phonetic model of sign language: train, sample, evaluate, interpret",
    after_long_help = FORMATS
)]
pub struct Cli {
    /// Master seed; every component derives its own stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads for parallel steps (default: all cores). Results do not
    /// depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log filter; overrides MH_PHONE_LOG.
    #[arg(long, global = true)]
    pub log_level: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a corpus from a synthetic ground-truth network.
    Synth(SynthArgs),
    /// Fit a model to a corpus.
    Train(TrainArgs),
    /// Sample signs from a trained model.
    Generate(GenerateArgs),
    /// Score a model with a discriminator trained to tell its samples from real signs.
    Evaluate(EvaluateArgs),
    /// Phonetic statistics of a trained network.
    Interpret(InterpretArgs),
    /// Write model samples as flattened CSV rows.
    ExportSamples(ExportArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// States including the end state.
    #[arg(long, default_value_t = 5)]
    pub n_states: usize,
    #[arg(long, default_value_t = 300)]
    pub m_signs: usize,
    #[arg(long, default_value_t = 14)]
    pub dim: usize,
    /// Emission standard deviation of the ground truth.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Padded sign length P.
    #[arg(long, default_value_t = 25)]
    pub frames: usize,
    /// Emit exact zero rows once a sign reaches the end state (false draws
    /// them from the end state's Gaussian).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub exact_end_token: bool,
    /// Also write the ground-truth parameters as a model file.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Dbn,
    Gmm,
    GmmLda,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Dbn => "dbn",
            ModelKind::Gmm => "gmm",
            ModelKind::GmmLda => "gmm-lda",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EStepArg {
    Greedy,
    Viterbi,
}

#[derive(Args, Debug)]
pub struct PriorArgs {
    /// Dirichlet concentration of pi and the rows of T.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub mu_mu: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sigma_mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu_sigma: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sigma_sigma: f64,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "dbn")]
    pub model: ModelKind,
    /// States (dbn, end state included) or mixture components (gmm, gmm-lda).
    #[arg(long, default_value_t = 5)]
    pub n_states: usize,
    /// Topics of the gmm-lda baseline (an arbitrary default).
    #[arg(long, default_value_t = 10)]
    pub n_topics: usize,
    #[arg(long, value_enum, default_value = "greedy")]
    pub e_step: EStepArg,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Relative log-joint change that stops training; "inf" runs one iteration.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Keep signs whose noise level is "broken".
    #[arg(long)]
    pub include_broken: bool,
    #[command(flatten)]
    pub priors: PriorArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 25)]
    pub frames: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Corpus of real signs.
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub lr: f64,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    /// Fraction of each class used for training.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    /// Fraction of the training part held out to choose the kept epoch.
    #[arg(long, default_value_t = 0.25)]
    pub validation: f64,
    #[arg(long)]
    pub include_broken: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InterpretArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Milliseconds per frame.
    #[arg(long, default_value_t = 98.0)]
    pub frame_ms: f64,
    /// Frames summed for the expected counts.
    #[arg(long, default_value_t = 20)]
    pub horizon: usize,
    /// Padded sign length, used only to flag a differing horizon.
    #[arg(long, default_value_t = 25)]
    pub frames: usize,
    /// Rank the end state among starting states.
    #[arg(long)]
    pub include_end_state: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 25)]
    pub frames: usize,
    #[arg(long)]
    pub out: PathBuf,
}

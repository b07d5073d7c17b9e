//! Movement-Hold phonetic model of sign language.
//!
//! Signs are sequences of normalized upper-body keypoints. The model treats
//! each sign as a walk over a small set of body-configuration prototypes:
//! repeated states are holds, and state 0 is the end token used for padding.
//! The crate provides
//!
//! - [`corpus`]: keypoint normalization, padding and the corpus file format,
//! - [`model`]: the network itself with hard-EM training and sampling,
//! - [`baselines`]: frame-independent GMM and single-topic GMM-LDA ablations,
//! - [`discriminator`]: a GRU real-vs-generated classifier used to score
//!   generators by test binary cross-entropy,
//! - [`interpret`]: hold lengths, expected state counts and other summaries
//!   of a trained model,
//! - [`modelfile`]: JSON persistence for every model kind.

pub mod baselines;
pub mod corpus;
pub mod discriminator;
pub mod emission;
pub mod error;
pub mod interpret;
pub mod model;
pub mod modelfile;
pub mod optim;
pub mod rng;

pub use corpus::{Corpus, SignSequence};
pub use error::{Error, Result};
pub use model::{Assignment, EStep, FitOptions, FitReport, Hyperparams, ModelParams};

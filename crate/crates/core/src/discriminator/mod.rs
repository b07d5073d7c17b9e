//! Real-versus-generated discriminator.
//!
//! A single-layer GRU reads a whole sign and a logistic readout of its final
//! hidden state gives the probability that the sign is real. A generator is
//! scored by the discriminator's binary cross-entropy on held-out data: the
//! closer to `ln 2`, the harder its samples are to tell apart from real ones.

mod eval;
mod gru;

pub use eval::{evaluate_generator, train_discriminator, EvalOptions, EvalReport, TrainOutcome};
pub use gru::{bce, gru_forward, gru_grad, gru_logit, GruNet};

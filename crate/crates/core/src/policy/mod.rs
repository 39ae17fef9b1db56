//! Autoregressive recurrent policy: sampling, likelihoods, the squared
//! augmented-likelihood loss, pretraining and the adaptive σ.

mod adam;
pub mod checkpoint;
mod loss;
mod net;
mod pretrain;
mod sample;
mod sigma;

use thiserror::Error;

pub use adam::Adam;
pub use loss::{augmented_targets, gradient_step, loss, loss_and_gradient, step_towards};
pub use net::{log_softmax, NetDims, PolicyNet, RecurrentState, SequenceTrace};
pub use pretrain::{corpus_nll, encode_corpus, pretrain, PretrainOptions};
pub use sample::{log_likelihood, sample_batch, Trajectory};
pub use sigma::{sigma_update, SigmaParams, SigmaState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("training corpus is empty")]
    CorpusEmpty,
    #[error("corpus line {0} is not a valid molecule")]
    CorpusInvalidLine(usize),
    #[error("non-finite loss or gradient")]
    NonFiniteGradient,
    #[error("checkpoint not found: {0}")]
    CheckpointMissing(String),
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
}

/// Fraction of sampled bodies that parse.
pub fn validity_rate<F: crate::Scalar>(batch: &[Trajectory<F>]) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let ok = batch
        .iter()
        .filter(|t| !t.truncated && crate::chem::parse(t.body()).is_ok())
        .count();
    ok as f64 / batch.len() as f64
}

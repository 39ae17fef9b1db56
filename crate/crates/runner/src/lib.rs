//! Experiment orchestration: configuration, the generative loop, per-step
//! CSV logs, rerun comparison and SVG charts.

pub mod compare;
pub mod config;
pub mod run;
pub mod svg;

use std::path::Path;

use divrl_core::chem::generate::{generate_corpus, GeneratorParams};
use divrl_core::policy::{pretrain, NetDims, PolicyError, PolicyNet, PretrainOptions};

pub use compare::{moving_average, write_comparison};
pub use config::{ConfigError, RunConfig};
pub use run::{run, run_single, run_with_prior, Experiment, RunError, RunSummary, StepRecord, CSV_HEADER};

/// Pretraining epochs used by the CLI unless told otherwise.
pub const DEFAULT_EPOCHS: usize = 3;
/// Corpus size used by the CLI unless told otherwise.
pub const DEFAULT_CORPUS_SIZE: usize = 20_000;

/// Non-empty lines of a corpus file. A missing or empty file is an empty
/// corpus.
pub fn read_corpus(path: &Path) -> Result<Vec<String>, PolicyError> {
    let text = std::fs::read_to_string(path).unwrap_or_default();
    let lines: Vec<String> =
        text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    if lines.is_empty() {
        return Err(PolicyError::CorpusEmpty);
    }
    Ok(lines)
}

/// Generated corpus of `n` molecules.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<String> {
    generate_corpus(n, seed, &GeneratorParams::default())
}

/// Prior trained on a corpus with the default options.
pub fn train_prior<S: AsRef<str>>(
    corpus: &[S],
    dims: NetDims,
    epochs: usize,
    seed: u64,
) -> Result<PolicyNet<f64>, PolicyError> {
    pretrain(corpus, dims, epochs, seed, PretrainOptions::default())
}

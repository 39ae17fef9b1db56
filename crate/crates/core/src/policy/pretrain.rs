use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chem::{parse_str, Token, Vocabulary};
use crate::Scalar;

use super::adam::Adam;
use super::loss::accumulate;
use super::net::{NetDims, PolicyNet};
use super::PolicyError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainOptions {
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for PretrainOptions {
    fn default() -> Self {
        PretrainOptions { lr: 1e-2, batch_size: 16 }
    }
}

/// Validates and frames a corpus.
pub fn encode_corpus<S: AsRef<str>>(corpus: &[S]) -> Result<Vec<Vec<Token>>, PolicyError> {
    if corpus.is_empty() {
        return Err(PolicyError::CorpusEmpty);
    }
    corpus
        .iter()
        .enumerate()
        .map(|(n, line)| {
            let line = line.as_ref().trim();
            parse_str(line).map_err(|_| PolicyError::CorpusInvalidLine(n + 1))?;
            Vocabulary.encode_framed(line).map_err(|_| PolicyError::CorpusInvalidLine(n + 1))
        })
        .collect()
}

/// Mean per-token negative log-likelihood (STOP included) of `seqs`.
pub fn corpus_nll<F: Scalar>(net: &PolicyNet<F>, seqs: &[Vec<Token>]) -> F {
    let tokens: usize = seqs.iter().map(|s| s.len() - 1).sum();
    let (total, _) = accumulate(net, seqs, |_, trace| {
        (trace.log_probs.iter().copied().sum(), vec![F::zero(); trace.log_probs.len()])
    });
    -total / F::from_usize_lossy(tokens.max(1))
}

/// Maximum-likelihood training with teacher forcing. Each epoch visits the
/// corpus in a seeded random order in mini-batches; each mini-batch takes
/// one Adam step on the mean per-token cross-entropy.
pub fn pretrain<F: Scalar, S: AsRef<str>>(
    corpus: &[S],
    dims: NetDims,
    epochs: usize,
    seed: u64,
    options: PretrainOptions,
) -> Result<PolicyNet<F>, PolicyError> {
    let seqs = encode_corpus(corpus)?;
    let mut net = PolicyNet::random(dims, seed);
    let mut adam = Adam::new(net.params().len(), F::lit(options.lr));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11c_e5ee_d000_0001);
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(options.batch_size.max(1)) {
            let batch: Vec<&[Token]> = chunk.iter().map(|&i| seqs[i].as_slice()).collect();
            let count: usize = batch.iter().map(|s| s.len() - 1).sum();
            let scale = -F::one() / F::from_usize_lossy(count);
            let (_, grad) = accumulate(&net, &batch, |_, trace| {
                (F::zero(), vec![scale; trace.log_probs.len()])
            });
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(PolicyError::NonFiniteGradient);
            }
            adam.step(net.params_mut(), &grad);
        }
    }
    Ok(net)
}

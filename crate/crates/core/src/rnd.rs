//! Random network distillation: a predictor network is trained to match
//! the sequence log-likelihood of a fixed random network; the squared
//! mismatch is a novelty signal.

use crate::chem::Token;
use crate::policy::{log_likelihood, step_towards, Adam, PolicyError, PolicyNet, Trajectory};
use crate::Scalar;

#[derive(Debug, Clone)]
pub struct RndState<F> {
    fixed: PolicyNet<F>,
    fixed_hash: u64,
    pub predictor: PolicyNet<F>,
    pub optimizer: Adam<F>,
}

impl<F: Scalar> RndState<F> {
    /// Fixed network freshly initialised from `seed` with the prior's
    /// architecture; predictor copied from the prior.
    pub fn new(prior: &PolicyNet<F>, seed: u64, lr: F) -> Self {
        let fixed = PolicyNet::random(prior.dims(), seed);
        Self::from_parts(fixed, prior.clone(), lr)
    }

    pub fn from_parts(fixed: PolicyNet<F>, predictor: PolicyNet<F>, lr: F) -> Self {
        assert_eq!(fixed.dims(), predictor.dims(), "network shapes differ");
        let optimizer = Adam::new(predictor.params().len(), lr);
        let fixed_hash = fixed.param_hash();
        RndState { fixed, fixed_hash, predictor, optimizer }
    }

    pub fn fixed(&self) -> &PolicyNet<F> {
        &self.fixed
    }

    /// Hash of the fixed network at construction.
    pub fn fixed_hash(&self) -> u64 {
        self.fixed_hash
    }
}

/// Squared difference of the two networks' log-likelihoods of a framed
/// sequence.
pub fn rnd_delta<F: Scalar>(state: &RndState<F>, tokens: &[Token]) -> F {
    let d = log_likelihood(&state.predictor, tokens) - log_likelihood(&state.fixed, tokens);
    d * d
}

/// Min-max rescale to [0, 1]; all zeros when degenerate.
pub fn rnd_rescale<F: Scalar>(deltas: &[F]) -> Vec<F> {
    min_max_or_zero(deltas)
}

pub(crate) fn min_max_or_zero<F: Scalar>(values: &[F]) -> Vec<F> {
    if values.len() < 2 {
        return vec![F::zero(); values.len()];
    }
    let lo = values.iter().copied().fold(F::infinity(), F::min);
    let hi = values.iter().copied().fold(F::neg_infinity(), F::max);
    if !(hi > lo) {
        return vec![F::zero(); values.len()];
    }
    values.iter().map(|&v| (v - lo) / (hi - lo)).collect()
}

/// One optimiser step on the predictor minimising the mean Δ over the given
/// framed sequences. Returns the mean Δ before the step, or `None` when
/// there is nothing to train on.
pub fn rnd_train<F: Scalar>(
    state: &mut RndState<F>,
    actives: &[Vec<Token>],
) -> Result<Option<F>, PolicyError> {
    if actives.is_empty() {
        return Ok(None);
    }
    let batch: Vec<Trajectory<F>> = actives
        .iter()
        .map(|t| Trajectory {
            tokens: t.clone(),
            agent_loglik: F::zero(),
            prior_loglik: F::zero(),
            truncated: false,
        })
        .collect();
    let targets: Vec<F> = actives.iter().map(|t| log_likelihood(&state.fixed, t)).collect();
    let value = step_towards(&mut state.predictor, &mut state.optimizer, &batch, &targets)?;
    Ok(Some(value))
}

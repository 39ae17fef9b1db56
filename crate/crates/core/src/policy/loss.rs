use rayon::prelude::*;

use crate::chem::Token;
use crate::Scalar;

use super::adam::Adam;
use super::net::{PolicyNet, SequenceTrace};
use super::sample::{body_mask, log_likelihood, Trajectory};
use super::PolicyError;

/// Fixed chunk count so that the floating point summation order depends
/// only on the batch, never on the thread pool.
const GRAD_CHUNKS: usize = 16;

/// Sums per-sequence objectives and their gradients. `per_seq` receives the
/// sequence index and its forward trace and returns the objective value and
/// the weight of every log-probability term.
pub(crate) fn accumulate<F, S, W>(net: &PolicyNet<F>, seqs: &[S], per_seq: W) -> (F, Vec<F>)
where
    F: Scalar,
    S: AsRef<[Token]> + Sync,
    W: Fn(usize, &SequenceTrace<F>) -> (F, Vec<F>) + Sync,
{
    let p = net.params().len();
    if seqs.is_empty() {
        return (F::zero(), vec![F::zero(); p]);
    }
    let chunk = seqs.len().div_ceil(GRAD_CHUNKS);
    let parts: Vec<(F, Vec<F>)> = seqs
        .par_chunks(chunk)
        .enumerate()
        .map(|(c, group)| {
            let mut grad = vec![F::zero(); p];
            let mut value = F::zero();
            for (k, seq) in group.iter().enumerate() {
                let tokens = seq.as_ref();
                let trace = net.trace(tokens);
                let (v, weights) = per_seq(c * chunk + k, &trace);
                value += v;
                net.accumulate_gradient(tokens, &trace, &weights, &mut grad);
            }
            (value, grad)
        })
        .collect();
    let mut total = F::zero();
    let mut grad = vec![F::zero(); p];
    for (v, g) in parts {
        total += v;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    (total, grad)
}

/// (1/|B|) Σ (prior_loglik + σ·R̂ − agent_loglik)², with both likelihoods
/// recomputed from the networks.
pub fn loss<F: Scalar>(
    batch: &[Trajectory<F>],
    shaped: &[F],
    prior: &PolicyNet<F>,
    agent: &PolicyNet<F>,
    sigma: F,
) -> F {
    assert_eq!(batch.len(), shaped.len());
    let n = F::from_usize_lossy(batch.len().max(1));
    batch
        .iter()
        .zip(shaped)
        .map(|(traj, &r)| {
            let residual = log_likelihood(prior, &traj.tokens) + sigma * r
                - log_likelihood(agent, &traj.tokens);
            residual * residual
        })
        .sum::<F>()
        / n
}

/// Loss and its gradient w.r.t. the agent parameters. `targets[b]` is the
/// augmented log-likelihood prior_loglik + σ·R̂ of trajectory `b`.
pub fn loss_and_gradient<F: Scalar>(
    agent: &PolicyNet<F>,
    batch: &[Trajectory<F>],
    targets: &[F],
) -> (F, Vec<F>) {
    assert_eq!(batch.len(), targets.len());
    let n = F::from_usize_lossy(batch.len().max(1));
    let seqs: Vec<&[Token]> = batch.iter().map(|t| t.tokens.as_slice()).collect();
    accumulate(agent, &seqs, |b, trace| {
        let mask = body_mask::<F>(seqs[b]);
        let agent_ll: F = trace.log_probs.iter().zip(&mask).map(|(&lp, &m)| lp * m).sum();
        let residual = targets[b] - agent_ll;
        // ∂/∂agent_ll of residual²/n
        let coef = -(F::lit(2.0) * residual) / n;
        (residual * residual / n, mask.into_iter().map(|m| m * coef).collect())
    })
}

/// Augmented log-likelihood targets for a batch.
pub fn augmented_targets<F: Scalar>(
    batch: &[Trajectory<F>],
    prior: &PolicyNet<F>,
    shaped: &[F],
    sigma: F,
) -> Vec<F> {
    batch
        .iter()
        .zip(shaped)
        .map(|(t, &r)| log_likelihood(prior, &t.tokens) + sigma * r)
        .collect()
}

/// One optimiser step on the squared augmented-likelihood loss. Returns the
/// loss before the update.
pub fn gradient_step<F: Scalar>(
    agent: &mut PolicyNet<F>,
    optimizer: &mut Adam<F>,
    batch: &[Trajectory<F>],
    shaped: &[F],
    prior: &PolicyNet<F>,
    sigma: F,
) -> Result<F, PolicyError> {
    let targets = augmented_targets(batch, prior, shaped, sigma);
    step_towards(agent, optimizer, batch, &targets)
}

/// Same as [`gradient_step`] with precomputed augmented targets.
pub fn step_towards<F: Scalar>(
    agent: &mut PolicyNet<F>,
    optimizer: &mut Adam<F>,
    batch: &[Trajectory<F>],
    targets: &[F],
) -> Result<F, PolicyError> {
    let (value, grad) = loss_and_gradient(agent, batch, targets);
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(PolicyError::NonFiniteGradient);
    }
    optimizer.step(agent.params_mut(), &grad);
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{sample_batch, NetDims};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dims() -> NetDims {
        NetDims { vocab: 8, embedding: 4, hidden: 8, layers: 1 }
    }

    fn batch(net: &PolicyNet<f64>, n: usize, seed: u64) -> Vec<Trajectory<f64>> {
        sample_batch(net, n, 10, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn agent_equal_prior_and_zero_reward_is_zero_loss() {
        let net = PolicyNet::random(dims(), 1);
        let b = batch(&net, 6, 2);
        let shaped = vec![0.0; 6];
        assert_eq!(loss(&b, &shaped, &net, &net, 128.0), 0.0);
        let (v, g) = loss_and_gradient(&net, &b, &augmented_targets(&b, &net, &shaped, 128.0));
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_trajectory_reference_value() {
        let net = PolicyNet::random(dims(), 1);
        let b = batch(&net, 1, 4);
        assert!((loss(&b, &[0.5], &net, &net, 2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loss_is_non_negative_and_matches_gradient_path() {
        let prior = PolicyNet::random(dims(), 1);
        let agent = PolicyNet::random(dims(), 2);
        let b = batch(&agent, 9, 5);
        let shaped: Vec<f64> = (0..9).map(|i| i as f64 / 9.0 - 0.3).collect();
        let l = loss(&b, &shaped, &prior, &agent, 3.0);
        assert!(l >= 0.0);
        let (v, _) = loss_and_gradient(&agent, &b, &augmented_targets(&b, &prior, &shaped, 3.0));
        assert!((l - v).abs() < 1e-9 * l.max(1.0));
    }

    #[test]
    fn zero_gradient_step_is_a_no_op() {
        let prior = PolicyNet::random(dims(), 1);
        let mut agent = prior.clone();
        let mut adam = Adam::new(agent.params().len(), 1e-3);
        let b = batch(&agent, 4, 8);
        gradient_step(&mut agent, &mut adam, &b, &[0.0; 4], &prior, 128.0).unwrap();
        assert_eq!(agent, prior);
    }

    #[test]
    fn repeated_steps_reduce_loss_on_fixed_batch() {
        let prior = PolicyNet::random(dims(), 1);
        let mut agent = prior.clone();
        let mut adam = Adam::new(agent.params().len(), 1e-2);
        let b = batch(&agent, 8, 3);
        let shaped: Vec<f64> = (0..8).map(|i| (i % 3) as f64 * 0.4).collect();
        let targets = augmented_targets(&b, &prior, &shaped, 4.0);
        let first = step_towards(&mut agent, &mut adam, &b, &targets).unwrap();
        let mut last = first;
        for _ in 0..49 {
            last = step_towards(&mut agent, &mut adam, &b, &targets).unwrap();
        }
        assert!(last < 0.5 * first, "{first} -> {last}");
    }

    #[test]
    fn non_finite_targets_abort() {
        let mut agent = PolicyNet::random(dims(), 1);
        let mut adam = Adam::new(agent.params().len(), 1e-3);
        let b = batch(&agent, 2, 3);
        let r = step_towards(&mut agent, &mut adam, &b, &[f64::NAN, 0.0]);
        assert_eq!(r, Err(PolicyError::NonFiniteGradient));
    }
}

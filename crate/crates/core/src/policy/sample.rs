use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chem::{Token, Vocabulary};
use crate::Scalar;

use super::net::PolicyNet;

/// One rollout `START a_1 … a_{T-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<F> {
    pub tokens: Vec<Token>,
    /// Σ log π_θ(a_t | s_t) over the molecule tokens (STOP excluded).
    pub agent_loglik: F,
    pub prior_loglik: F,
    /// Hit the length limit before emitting STOP.
    pub truncated: bool,
}

impl<F: Scalar> Trajectory<F> {
    /// Tokens strictly between START and STOP (or to the end if truncated).
    pub fn body(&self) -> &[Token] {
        body(&self.tokens)
    }
}

pub(crate) fn body(tokens: &[Token]) -> &[Token] {
    let start = usize::from(tokens.first() == Some(&Vocabulary::START));
    let end = if tokens.len() > start && tokens.last() == Some(&Vocabulary::STOP) {
        tokens.len() - 1
    } else {
        tokens.len()
    };
    &tokens[start..end]
}

/// Per-position weights selecting the molecule tokens: every target except a
/// final STOP.
pub(crate) fn body_mask<F: Scalar>(tokens: &[Token]) -> Vec<F> {
    let n = tokens.len().saturating_sub(1);
    (0..n)
        .map(|t| {
            if t + 1 == n && tokens[t + 1] == Vocabulary::STOP {
                F::zero()
            } else {
                F::one()
            }
        })
        .collect()
}

/// Σ_{t=1}^{T-2} log π(a_t | s_t): the log-likelihood of the molecule
/// tokens of a framed sequence.
pub fn log_likelihood<F: Scalar>(net: &PolicyNet<F>, tokens: &[Token]) -> F {
    let trace = net.trace(tokens);
    trace
        .log_probs
        .iter()
        .zip(body_mask::<F>(tokens))
        .map(|(&lp, m)| lp * m)
        .sum()
}

fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn rollout<F: Scalar>(net: &PolicyNet<F>, t_max: usize, rng: &mut ChaCha8Rng) -> Trajectory<F> {
    let mut tokens = vec![Vocabulary::START];
    let mut state = net.initial_state();
    let mut loglik = F::zero();
    loop {
        let lp = net.step(*tokens.last().expect("non-empty"), &mut state);
        let u = F::lit(rng.gen::<f64>());
        let mut acc = F::zero();
        let mut choice = lp.len() - 1;
        for (v, &l) in lp.iter().enumerate() {
            acc += l.exp();
            if u < acc {
                choice = v;
                break;
            }
        }
        let tok = Token(choice as u8);
        tokens.push(tok);
        if tok == Vocabulary::STOP {
            return Trajectory { tokens, agent_loglik: loglik, prior_loglik: F::zero(), truncated: false };
        }
        loglik += lp[choice];
        if tokens.len() >= t_max {
            return Trajectory { tokens, agent_loglik: loglik, prior_loglik: F::zero(), truncated: true };
        }
    }
}

/// Samples `batch` independent rollouts of at most `t_max` tokens
/// (START included). Each rollout draws from its own stream derived from a
/// single seed taken from `rng`, so results do not depend on thread count.
pub fn sample_batch<F: Scalar, R: Rng + ?Sized>(
    net: &PolicyNet<F>,
    batch: usize,
    t_max: usize,
    rng: &mut R,
) -> Vec<Trajectory<F>> {
    assert!(batch >= 1, "batch must be positive");
    assert!(t_max >= 2, "t_max must allow at least START and one token");
    let seed: u64 = rng.gen();
    (0..batch as u64)
        .into_par_iter()
        .map(|b| rollout(net, t_max, &mut ChaCha8Rng::seed_from_u64(stream_seed(seed, b))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::NetDims;

    fn dims() -> NetDims {
        NetDims { vocab: Vocabulary.len(), embedding: 6, hidden: 10, layers: 2 }
    }

    #[test]
    fn forced_stop_gives_empty_body() {
        let mut net = PolicyNet::<f64>::zeros(dims());
        // huge bias on STOP
        let last = net.params().len() - Vocabulary.len() + Vocabulary::STOP.index();
        net.params_mut()[last] = 1e3;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = sample_batch(&net, 1, 40, &mut rng);
        assert_eq!(batch[0].tokens, vec![Vocabulary::START, Vocabulary::STOP]);
        assert!(batch[0].body().is_empty());
        assert_eq!(batch[0].agent_loglik, 0.0);
        assert_eq!(log_likelihood(&net, &batch[0].tokens), 0.0);
    }

    #[test]
    fn zero_params_give_uniform_loglik() {
        let net = PolicyNet::<f64>::zeros(dims());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = Vocabulary.len() as f64;
        for traj in sample_batch(&net, 16, 12, &mut rng) {
            let len = traj.body().len() as f64;
            assert!((traj.agent_loglik + len * v.ln()).abs() < 1e-10);
            assert!((log_likelihood(&net, &traj.tokens) + len * v.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn recorded_loglik_matches_recomputation() {
        let net = PolicyNet::<f64>::random(dims(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let batch = sample_batch(&net, 32, 30, &mut rng);
        assert_eq!(batch.len(), 32);
        for traj in &batch {
            assert!((traj.agent_loglik - log_likelihood(&net, &traj.tokens)).abs() < 1e-10);
            assert!(traj.tokens.len() <= 30);
            assert_eq!(traj.truncated, traj.tokens.last() != Some(&Vocabulary::STOP));
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let net = PolicyNet::<f64>::random(dims(), 5);
        let a = sample_batch(&net, 128, 40, &mut ChaCha8Rng::seed_from_u64(1));
        let b = sample_batch(&net, 128, 40, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(a.len(), 128);
        assert_eq!(a, b);
    }

    #[test]
    fn body_handles_truncation() {
        let t = [Vocabulary::START, Token(2), Token(3)];
        assert_eq!(body(&t), &[Token(2), Token(3)]);
        assert_eq!(body_mask::<f64>(&t), vec![1.0, 1.0]);
        let t = [Vocabulary::START, Token(2), Vocabulary::STOP];
        assert_eq!(body(&t), &[Token(2)]);
        assert_eq!(body_mask::<f64>(&t), vec![1.0, 0.0]);
    }
}

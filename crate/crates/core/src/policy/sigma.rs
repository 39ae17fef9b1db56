//! Adaptive σ for the augmented likelihood ("margin guard").
//!
//! δ_σ is the mean gap between augmented and agent log-likelihood over all
//! molecules generated since the agent was last (re)initialised. Once at
//! least `window` steps have passed and δ_σ exceeds `margin`, σ grows to
//! `max(σ, δ_σ / D_σ) + margin` with `D_σ = max(mean extrinsic reward,
//! min_score)`, and the caller restores the agent to the prior.

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaParams<F> {
    pub sigma_init: F,
    pub margin: F,
    pub window: usize,
    pub min_score: F,
}

impl<F: Scalar> Default for SigmaParams<F> {
    fn default() -> Self {
        SigmaParams {
            sigma_init: F::lit(128.0),
            margin: F::lit(50.0),
            window: 10,
            min_score: F::lit(0.15),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaState<F> {
    pub sigma: F,
    /// Steps recorded since the last (re)initialisation of the agent.
    pub step: usize,
    pub delta_sum: F,
    pub delta_count: usize,
    pub reward_sum: F,
    pub reward_count: usize,
}

impl<F: Scalar> SigmaState<F> {
    pub fn new(params: &SigmaParams<F>) -> Self {
        SigmaState {
            sigma: params.sigma_init,
            step: 0,
            delta_sum: F::zero(),
            delta_count: 0,
            reward_sum: F::zero(),
            reward_count: 0,
        }
    }

    /// Adds one generative step: the per-molecule gaps
    /// `prior_loglik + σ·R̂ − agent_loglik` and the extrinsic rewards.
    pub fn record(&mut self, gaps: &[F], extrinsic: &[F]) {
        self.step += 1;
        for &g in gaps {
            self.delta_sum += g;
        }
        self.delta_count += gaps.len();
        for &r in extrinsic {
            self.reward_sum += r;
        }
        self.reward_count += extrinsic.len();
    }

    pub fn delta(&self) -> F {
        if self.delta_count == 0 {
            F::zero()
        } else {
            self.delta_sum / F::from_usize_lossy(self.delta_count)
        }
    }

    pub fn mean_reward(&self) -> F {
        if self.reward_count == 0 {
            F::zero()
        } else {
            self.reward_sum / F::from_usize_lossy(self.reward_count)
        }
    }

    /// Applies the margin rule. Returns `true` when σ was raised, in which
    /// case the agent must be reset to the prior. The δ history and the step
    /// window restart after a reset; the reward history is kept.
    pub fn update(&mut self, params: &SigmaParams<F>) -> bool {
        if self.step < params.window {
            return false;
        }
        let delta = self.delta();
        if delta <= params.margin {
            return false;
        }
        let d = self.mean_reward().max(params.min_score);
        self.sigma = self.sigma.max(delta / d) + params.margin;
        self.step = 0;
        self.delta_sum = F::zero();
        self.delta_count = 0;
        true
    }
}

/// Functional form: records one step and applies the margin rule.
pub fn sigma_update<F: Scalar>(
    mut state: SigmaState<F>,
    params: &SigmaParams<F>,
    gaps: &[F],
    extrinsic: &[F],
) -> (SigmaState<F>, bool) {
    state.record(gaps, extrinsic);
    let reset = state.update(params);
    (state, reset)
}

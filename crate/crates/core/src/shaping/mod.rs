//! Diversity-aware reward shaping: R̂(A) = f(A)·R(A) + R_I(A).
//!
//! `f` is a penalty on the number of actives already sharing A's molecular
//! scaffold and `R_I` an intrinsic bonus. KL-UCB instead replaces the
//! reward of an active by an upper confidence bound on its scaffold's mean
//! reward.

mod klucb;
mod memory;
mod penalty;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::chem::{tanimoto_distance, Fingerprint, MolGraph, Token};
use crate::rnd::{min_max_or_zero, rnd_delta, RndState};
use crate::Scalar;

pub use klucb::{kl_bernoulli, klucb_solve, klucb_with_bound, DomainError};
pub use memory::{greedy_insert, ActiveRecord, ScaffoldMemory, ScaffoldStats};
pub use penalty::{penalty_erf, penalty_ims, penalty_linear, penalty_sigmoid, penalty_tanh};

/// Bisection tolerance of the KL-UCB index.
pub const KLUCB_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyId {
    None,
    Ims,
    ErfIms,
    LinIms,
    SigIms,
    TanhIms,
    Da,
    MinDis,
    MeanDis,
    MinDisR,
    MeanDisR,
    KlUcb,
    Rnd,
    Inf,
    TanhRnd,
    TanhInf,
}

impl StrategyId {
    pub const ALL: [StrategyId; 16] = [
        StrategyId::None,
        StrategyId::Ims,
        StrategyId::ErfIms,
        StrategyId::LinIms,
        StrategyId::SigIms,
        StrategyId::TanhIms,
        StrategyId::Da,
        StrategyId::MinDis,
        StrategyId::MeanDis,
        StrategyId::MinDisR,
        StrategyId::MeanDisR,
        StrategyId::KlUcb,
        StrategyId::Rnd,
        StrategyId::Inf,
        StrategyId::TanhRnd,
        StrategyId::TanhInf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::None => "none",
            StrategyId::Ims => "ims",
            StrategyId::ErfIms => "erf_ims",
            StrategyId::LinIms => "lin_ims",
            StrategyId::SigIms => "sig_ims",
            StrategyId::TanhIms => "tanh_ims",
            StrategyId::Da => "da",
            StrategyId::MinDis => "min_dis",
            StrategyId::MeanDis => "mean_dis",
            StrategyId::MinDisR => "min_dis_r",
            StrategyId::MeanDisR => "mean_dis_r",
            StrategyId::KlUcb => "kl_ucb",
            StrategyId::Rnd => "rnd",
            StrategyId::Inf => "inf",
            StrategyId::TanhRnd => "tanh_rnd",
            StrategyId::TanhInf => "tanh_inf",
        }
    }

    /// Needs an [`RndState`] in [`shape_batch`].
    pub fn uses_rnd(self) -> bool {
        matches!(self, StrategyId::Rnd | StrategyId::TanhRnd)
    }

    /// Multiplicative penalty for the `n`-th active of a scaffold.
    pub fn penalty<F: Scalar>(self, n: usize, params: &ShapingParams<F>) -> F {
        let m = params.bucket_size;
        match self {
            StrategyId::Ims => penalty_ims(n, m),
            StrategyId::ErfIms => penalty_erf(n, m),
            StrategyId::LinIms => penalty_linear(n, m),
            StrategyId::SigIms => penalty_sigmoid(n, m),
            StrategyId::TanhIms | StrategyId::TanhRnd | StrategyId::TanhInf => {
                penalty_tanh(n, m, params.tanh_c)
            }
            _ => F::one(),
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown strategy {0:?}")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyId {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapingParams<F> {
    /// Minimum extrinsic reward of an active.
    pub active_threshold: F,
    pub bucket_size: usize,
    pub distance_threshold: F,
    pub klucb_c: F,
    pub tanh_c: F,
    pub coreset_size: usize,
}

impl<F: Scalar> Default for ShapingParams<F> {
    fn default() -> Self {
        ShapingParams {
            active_threshold: F::lit(0.5),
            bucket_size: 25,
            distance_threshold: F::lit(0.7),
            klucb_c: F::zero(),
            tanh_c: F::lit(3.0),
            coreset_size: 5000,
        }
    }
}

impl<F: Scalar> ShapingParams<F> {
    /// Describes the first violated constraint, if any.
    pub fn validate(&self) -> Result<(), String> {
        let h = self.active_threshold;
        if !(h > F::zero() && h < F::one()) {
            return Err(format!("active_threshold must lie in (0, 1), got {h}"));
        }
        if self.bucket_size == 0 {
            return Err("bucket_size must be at least 1".into());
        }
        let d = self.distance_threshold;
        if !(d > F::zero() && d <= F::one()) {
            return Err(format!("distance_threshold must lie in (0, 1], got {d}"));
        }
        if !(self.klucb_c >= F::zero()) || !(self.tanh_c > F::zero()) {
            return Err("klucb_c must be non-negative and tanh_c positive".into());
        }
        if self.coreset_size == 0 {
            return Err("coreset_size must be at least 1".into());
        }
        Ok(())
    }
}

/// One generated molecule with its extrinsic reward.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored<F> {
    /// Framed token sequence as sampled.
    pub tokens: Vec<Token>,
    /// `None` when the body does not parse.
    pub graph: Option<MolGraph>,
    pub reward: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOutcome<F> {
    pub shaped: Vec<F>,
    /// Batch indices of actives that entered memory in this step.
    pub new_actives: Vec<usize>,
}

/// Number of batch fingerprints that a greedy pass adds to a copy of the
/// diverse set.
pub fn intrinsic_da<F: Scalar>(diverse: &[Fingerprint], batch: &[Fingerprint], threshold: F) -> usize {
    let mut set = diverse.to_vec();
    batch.iter().filter(|fp| greedy_insert(&mut set, fp, threshold)).count()
}

fn distances_excluding<'a, F: Scalar>(
    reference: &'a [Fingerprint],
    batch: &'a [Fingerprint],
    a: usize,
) -> impl Iterator<Item = F> + 'a {
    let target = &batch[a];
    reference
        .iter()
        .chain(batch.iter().enumerate().filter(move |&(k, _)| k != a).map(|(_, fp)| fp))
        .map(move |fp| tanimoto_distance::<F>(target, fp))
}

/// Smallest distance from `batch[a]` to `reference` and to the other batch
/// members; 1 when there is nothing to compare against.
pub fn intrinsic_mindis<F: Scalar>(reference: &[Fingerprint], batch: &[Fingerprint], a: usize) -> F {
    distances_excluding(reference, batch, a).fold(None, |acc: Option<F>, d| {
        Some(acc.map_or(d, |m| m.min(d)))
    })
    .unwrap_or_else(F::one)
}

/// Mean distance over the same comparison set as [`intrinsic_mindis`].
pub fn intrinsic_meandis<F: Scalar>(reference: &[Fingerprint], batch: &[Fingerprint], a: usize) -> F {
    let (sum, n) = distances_excluding::<F>(reference, batch, a)
        .fold((F::zero(), 0usize), |(s, n), d| (s + d, n + 1));
    if n == 0 {
        F::one()
    } else {
        sum / F::from_usize_lossy(n)
    }
}

/// Up to `size` fingerprints of the recorded actives, drawn uniformly
/// without replacement; all of them if fewer exist.
pub fn sample_coreset<F: Scalar, R: Rng + ?Sized>(
    actives: &[ActiveRecord<F>],
    size: usize,
    rng: &mut R,
) -> Vec<Fingerprint> {
    if actives.len() <= size {
        return actives.iter().map(|a| a.fingerprint.clone()).collect();
    }
    let mut picked = rand::seq::index::sample(rng, actives.len(), size).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|k| actives[k].fingerprint.clone()).collect()
}

/// Scaffold information `max(0, −ln(count / scaffolds))`.
pub fn inf_raw<F: Scalar>(count: usize, scaffolds: usize) -> F {
    let p = F::from_usize_lossy(count) / F::from_usize_lossy(scaffolds);
    (-p.ln()).max(F::zero())
}

/// Min-max normalises the raw information values of more than two batch
/// actives; smaller batches keep the raw values.
pub fn intrinsic_inf<F: Scalar>(raw: &[F]) -> Vec<F> {
    if raw.len() > 2 {
        min_max_or_zero(raw)
    } else {
        raw.to_vec()
    }
}

/// KL-UCB index of a scaffold from memory.
pub fn intrinsic_klucb<F: Scalar>(
    memory: &ScaffoldMemory<F>,
    molecular: &str,
    c: F,
) -> Result<F, DomainError> {
    let stats = memory.stats(molecular);
    if stats.count == 0 {
        return Err(DomainError::ZeroCount);
    }
    let p_hat = stats.reward_sum / F::from_usize_lossy(stats.count);
    klucb_solve(p_hat, stats.count, memory.n_total(), c, F::lit(KLUCB_TOL))
}

/// Shapes one batch in generation order and updates `memory`.
///
/// Invalid molecules and non-actives keep their extrinsic reward; repeats of
/// an already seen active get 0. New actives are inserted one by one and
/// penalised with the post-insertion scaffold count; batch-level intrinsic
/// rewards follow, then the diverse set absorbs the new actives.
///
/// # Panics
/// When `strategy` needs RND and `rnd` is `None`.
pub fn shape_batch<F: Scalar, R: Rng + ?Sized>(
    strategy: StrategyId,
    params: &ShapingParams<F>,
    memory: &mut ScaffoldMemory<F>,
    batch: &[Scored<F>],
    rnd: Option<&RndState<F>>,
    rng: &mut R,
) -> ShapeOutcome<F> {
    let previous_actives = memory.actives().len();
    let diverse_before = memory.diverse_set().to_vec();
    memory.count_generated(batch.len());

    let mut shaped: Vec<F> = batch.iter().map(|m| m.reward).collect();
    let mut new_actives = Vec::new();
    let mut factors = Vec::new();
    for (i, mol) in batch.iter().enumerate() {
        let Some(graph) = &mol.graph else { continue };
        if mol.reward < params.active_threshold {
            continue;
        }
        let record = ActiveRecord::from_graph(graph, mol.reward);
        if memory.is_seen(&record.canonical) {
            shaped[i] = F::zero();
            continue;
        }
        let n = memory.insert(record);
        factors.push(strategy.penalty(n, params));
        new_actives.push(i);
    }

    let records = &memory.actives()[previous_actives..];
    let fps: Vec<Fingerprint> = records.iter().map(|r| r.fingerprint.clone()).collect();
    let k = new_actives.len();
    let bonus: Vec<F> = match strategy {
        StrategyId::Da => {
            let added = intrinsic_da(&diverse_before, &fps, params.distance_threshold);
            vec![F::from_usize_lossy(added); k]
        }
        StrategyId::MinDis => (0..k)
            .into_par_iter()
            .map(|a| intrinsic_mindis(&diverse_before, &fps, a))
            .collect(),
        StrategyId::MeanDis => (0..k)
            .into_par_iter()
            .map(|a| intrinsic_meandis(&diverse_before, &fps, a))
            .collect(),
        StrategyId::MinDisR | StrategyId::MeanDisR => {
            let core = sample_coreset(&memory.actives()[..previous_actives], params.coreset_size, rng);
            let min = strategy == StrategyId::MinDisR;
            (0..k)
                .into_par_iter()
                .map(|a| {
                    if min {
                        intrinsic_mindis(&core, &fps, a)
                    } else {
                        intrinsic_meandis(&core, &fps, a)
                    }
                })
                .collect()
        }
        StrategyId::Rnd | StrategyId::TanhRnd => {
            let state = rnd.expect("RND strategy without an RND state");
            let deltas: Vec<F> = new_actives
                .par_iter()
                .map(|&i| rnd_delta(state, &batch[i].tokens))
                .collect();
            min_max_or_zero(&deltas)
        }
        StrategyId::Inf | StrategyId::TanhInf => {
            let scaffolds = memory.molecular_scaffolds().len();
            let raw: Vec<F> = records
                .iter()
                .map(|r| inf_raw(memory.stats(&r.molecular.canonical).count, scaffolds))
                .collect();
            intrinsic_inf(&raw)
        }
        _ => vec![F::zero(); k],
    };

    for (j, &i) in new_actives.iter().enumerate() {
        shaped[i] = if strategy == StrategyId::KlUcb {
            intrinsic_klucb(memory, &records[j].molecular.canonical, params.klucb_c)
                .unwrap_or(batch[i].reward)
        } else {
            factors[j] * batch[i].reward + bonus[j]
        };
    }

    for fp in &fps {
        memory.offer_diverse(fp, params.distance_threshold);
    }
    ShapeOutcome { shaped, new_actives }
}

#[cfg(test)]
mod tests;

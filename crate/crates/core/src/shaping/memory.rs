use std::collections::{BTreeMap, HashSet};

use crate::chem::{
    canonical_string, fingerprint, molecular_scaffold, tanimoto_distance, topological_scaffold,
    Fingerprint, MolGraph, ScaffoldKey, DEFAULT_BITS, DEFAULT_RADIUS,
};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveRecord<F> {
    pub canonical: String,
    pub fingerprint: Fingerprint,
    pub reward: F,
    pub molecular: ScaffoldKey,
    pub topological: ScaffoldKey,
}

impl<F: Scalar> ActiveRecord<F> {
    pub fn from_graph(g: &MolGraph, reward: F) -> Self {
        ActiveRecord {
            canonical: canonical_string(g),
            fingerprint: fingerprint(g, DEFAULT_RADIUS, DEFAULT_BITS),
            reward,
            molecular: molecular_scaffold(g),
            topological: topological_scaffold(g),
        }
    }
}

/// Active count and extrinsic reward sum of one molecular scaffold.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScaffoldStats<F> {
    pub count: usize,
    pub reward_sum: F,
}

/// Everything the shaping strategies and the diversity metrics remember
/// across generative steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaffoldMemory<F> {
    scaffolds: BTreeMap<String, ScaffoldStats<F>>,
    topological: BTreeMap<String, usize>,
    actives: Vec<ActiveRecord<F>>,
    seen: HashSet<String>,
    diverse: Vec<Fingerprint>,
    n_total: usize,
}

impl<F: Scalar> Default for ScaffoldMemory<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> ScaffoldMemory<F> {
    pub fn new() -> Self {
        ScaffoldMemory {
            scaffolds: BTreeMap::new(),
            topological: BTreeMap::new(),
            actives: Vec::new(),
            seen: HashSet::new(),
            diverse: Vec::new(),
            n_total: 0,
        }
    }

    pub fn actives(&self) -> &[ActiveRecord<F>] {
        &self.actives
    }

    pub fn diverse_set(&self) -> &[Fingerprint] {
        &self.diverse
    }

    /// Molecules generated so far, valid or not.
    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn molecular_scaffolds(&self) -> &BTreeMap<String, ScaffoldStats<F>> {
        &self.scaffolds
    }

    pub fn topological_scaffolds(&self) -> &BTreeMap<String, usize> {
        &self.topological
    }

    pub fn stats(&self, molecular: &str) -> ScaffoldStats<F> {
        self.scaffolds.get(molecular).copied().unwrap_or_default()
    }

    pub fn is_seen(&self, canonical: &str) -> bool {
        self.seen.contains(canonical)
    }

    pub(crate) fn count_generated(&mut self, n: usize) {
        self.n_total += n;
    }

    /// Records a new active and returns the post-insertion count of its
    /// molecular scaffold.
    pub(crate) fn insert(&mut self, record: ActiveRecord<F>) -> usize {
        let stats = self.scaffolds.entry(record.molecular.canonical.clone()).or_default();
        stats.count += 1;
        stats.reward_sum += record.reward;
        let count = stats.count;
        *self.topological.entry(record.topological.canonical.clone()).or_default() += 1;
        self.seen.insert(record.canonical.clone());
        self.actives.push(record);
        count
    }

    /// Greedy leader insertion into the diverse set.
    pub(crate) fn offer_diverse(&mut self, fp: &Fingerprint, threshold: F) -> bool {
        greedy_insert(&mut self.diverse, fp, threshold)
    }
}

/// Adds `fp` to `set` when it lies at least `threshold` away from every
/// member.
pub fn greedy_insert<F: Scalar>(set: &mut Vec<Fingerprint>, fp: &Fingerprint, threshold: F) -> bool {
    if set.iter().all(|c| tanimoto_distance::<F>(c, fp) >= threshold) {
        set.push(fp.clone());
        true
    } else {
        false
    }
}

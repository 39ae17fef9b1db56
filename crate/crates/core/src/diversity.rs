//! Diversity metrics over the recorded actives.

use std::collections::BTreeSet;

use crate::chem::{tanimoto_distance, Fingerprint};
use crate::shaping::ScaffoldMemory;
use crate::Scalar;

/// Distinct (molecular, topological) scaffolds among the actives.
pub fn count_scaffolds<F: Scalar>(memory: &ScaffoldMemory<F>) -> (usize, usize) {
    (memory.molecular_scaffolds().len(), memory.topological_scaffolds().len())
}

/// The same counts rebuilt from the actives list.
pub fn recount_scaffolds<F: Scalar>(memory: &ScaffoldMemory<F>) -> (usize, usize) {
    let molecular: BTreeSet<&str> =
        memory.actives().iter().map(|a| a.molecular.canonical.as_str()).collect();
    let topological: BTreeSet<&str> =
        memory.actives().iter().map(|a| a.topological.canonical.as_str()).collect();
    (molecular.len(), topological.len())
}

/// Size of the greedily maintained diverse set.
pub fn diverse_actives_count<F: Scalar>(memory: &ScaffoldMemory<F>) -> usize {
    memory.diverse_set().len()
}

/// Greedy leader packing of `fps` in order.
pub fn greedy_packing<F: Scalar>(fps: &[Fingerprint], threshold: F) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for (i, fp) in fps.iter().enumerate() {
        if chosen.iter().all(|&j| tanimoto_distance::<F>(&fps[j], fp) >= threshold) {
            chosen.push(i);
        }
    }
    chosen
}

/// Whether every pair in `fps` is at least `threshold` apart.
pub fn is_separated<F: Scalar>(fps: &[Fingerprint], threshold: F) -> bool {
    fps.iter().enumerate().all(|(i, a)| {
        fps[i + 1..].iter().all(|b| tanimoto_distance::<F>(a, b) >= threshold)
    })
}

/// Largest pairwise-separated subset, by exhaustive search. Exponential;
/// meant for small instances in tests.
#[cfg(any(test, feature = "oracles"))]
pub fn packing_exact<F: Scalar>(fps: &[Fingerprint], threshold: F) -> usize {
    let n = fps.len();
    assert!(n <= 20, "exhaustive packing is limited to 20 points");
    let mut compatible = vec![0u32; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && tanimoto_distance::<F>(&fps[i], &fps[j]) >= threshold {
                compatible[i] |= 1 << j;
            }
        }
    }
    (0u32..1 << n)
        .filter(|&set| (0..n).all(|i| set & (1 << i) == 0 || set & !(1 << i) & !compatible[i] == 0))
        .map(|set| set.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

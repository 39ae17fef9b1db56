//! Circular (Morgan-style) fingerprints and the Tanimoto distance.

use crate::Scalar;

use super::graph::MolGraph;

pub const DEFAULT_RADIUS: usize = 2;
pub const DEFAULT_BITS: usize = 2048;
/// Seed of the environment hash. Stored in checkpoints so that fingerprints
/// stay comparable across builds.
pub const HASH_SEED: u64 = 0x5eed_d1ce_7a91_0b3f;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn mix(h: u64, x: u64) -> u64 {
    splitmix64(h ^ splitmix64(x))
}

/// Fixed-width bit vector with its popcount cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    nbits: usize,
    popcount: u32,
}

impl Fingerprint {
    pub fn empty(nbits: usize) -> Self {
        Fingerprint { words: vec![0; nbits.div_ceil(64)], nbits, popcount: 0 }
    }

    /// Builds a fingerprint from explicit set bits.
    pub fn from_bits(nbits: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut fp = Fingerprint::empty(nbits);
        for b in bits {
            fp.set(b);
        }
        fp
    }

    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.nbits, "bit {bit} out of range");
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        if self.words[w] & m == 0 {
            self.words[w] |= m;
            self.popcount += 1;
        }
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.popcount
    }

    pub fn nbits(&self) -> usize {
        self.nbits
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nbits).filter(|&b| self.get(b))
    }

    pub fn intersection_count(&self, other: &Fingerprint) -> u32 {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum()
    }
}

/// Hashes every atom environment up to `radius` bonds into `nbits` buckets.
pub fn fingerprint(g: &MolGraph, radius: usize, nbits: usize) -> Fingerprint {
    let n = g.atom_count();
    let mut fp = Fingerprint::empty(nbits);
    let mut ids: Vec<u64> = (0..n)
        .map(|i| {
            let h = mix(HASH_SEED, g.atoms()[i].code() as u64);
            let h = mix(h, g.degree(i) as u64);
            let h = mix(h, g.valence(i) as u64);
            mix(h, g.in_ring(i) as u64)
        })
        .collect();
    for &id in &ids {
        fp.set((id % nbits as u64) as usize);
    }
    for r in 1..=radius {
        let next: Vec<u64> = (0..n)
            .map(|i| {
                let mut env: Vec<(u8, u64)> =
                    g.neighbors(i).iter().map(|&(j, o)| (o, ids[j])).collect();
                env.sort_unstable();
                let mut h = mix(mix(HASH_SEED, r as u64), ids[i]);
                for (o, id) in env {
                    h = mix(mix(h, o as u64), id);
                }
                h
            })
            .collect();
        for &id in &next {
            fp.set((id % nbits as u64) as usize);
        }
        ids = next;
    }
    fp
}

/// `1 - |a ∩ b| / |a ∪ b|`; zero when both are empty.
pub fn tanimoto_distance<F: Scalar>(a: &Fingerprint, b: &Fingerprint) -> F {
    assert_eq!(a.nbits, b.nbits, "fingerprint widths differ");
    let inter = a.intersection_count(b);
    let union = a.popcount + b.popcount - inter;
    if union == 0 {
        return F::zero();
    }
    F::one() - F::lit(inter as f64) / F::lit(union as f64)
}

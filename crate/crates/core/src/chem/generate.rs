//! Seeded generator of random valid molecules, used to build the
//! pretraining corpus.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::canon::random_string;
use super::graph::{Bond, Element, MolGraph};
use super::parse_str;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub min_atoms: usize,
    pub max_atoms: usize,
    /// Upper bound on the number of ring-closing bonds.
    pub max_rings: usize,
    /// Longest allowed line, in glyphs.
    pub max_len: usize,
    pub ring_sizes: Vec<usize>,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            min_atoms: 4,
            max_atoms: 16,
            max_rings: 2,
            max_len: 36,
            ring_sizes: vec![3, 4, 5, 5, 6, 6, 6, 7],
        }
    }
}

fn pick_element<R: Rng + ?Sized>(rng: &mut R) -> Element {
    match rng.gen_range(0..100) {
        0..=64 => Element::C,
        65..=79 => Element::N,
        80..=91 => Element::O,
        92..=96 => Element::S,
        _ => Element::F,
    }
}

fn spare(atoms: &[Element], used: &[u8], i: usize) -> u8 {
    atoms[i].max_valence() - used[i]
}

/// Path (as atom list) of exactly `len` bonds starting from `from` inside a
/// tree-like graph, chosen uniformly among neighbours at each step.
fn random_path<R: Rng + ?Sized>(
    adj: &[Vec<usize>],
    from: usize,
    len: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let mut path = vec![from];
    for _ in 0..len {
        let last = *path.last().expect("non-empty");
        let options: Vec<usize> = adj[last].iter().copied().filter(|v| !path.contains(v)).collect();
        if options.is_empty() {
            return None;
        }
        path.push(options[rng.gen_range(0..options.len())]);
    }
    Some(path)
}

/// One random valid molecule graph.
pub fn random_graph<R: Rng + ?Sized>(params: &GeneratorParams, rng: &mut R) -> MolGraph {
    loop {
        let n = rng.gen_range(params.min_atoms..=params.max_atoms);
        let mut atoms = vec![pick_element(rng)];
        let mut used = vec![0u8];
        let mut bonds: Vec<Bond> = Vec::new();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new()];
        while atoms.len() < n {
            let e = pick_element(rng);
            // prefer extending recent atoms so that chains form
            let candidates: Vec<usize> =
                (0..atoms.len()).filter(|&i| spare(&atoms, &used, i) > 0).collect();
            if candidates.is_empty() {
                break;
            }
            let pick = if rng.gen_bool(0.6) {
                *candidates.last().expect("non-empty")
            } else {
                candidates[rng.gen_range(0..candidates.len())]
            };
            let idx = atoms.len();
            atoms.push(e);
            used.push(0);
            adj.push(Vec::new());
            bonds.push(Bond { a: pick, b: idx, order: 1 });
            used[pick] += 1;
            used[idx] += 1;
            adj[pick].push(idx);
            adj[idx].push(pick);
        }
        let rings = rng.gen_range(0..=params.max_rings);
        for _ in 0..rings {
            let size = params.ring_sizes[rng.gen_range(0..params.ring_sizes.len())];
            for _attempt in 0..20 {
                let from = rng.gen_range(0..atoms.len());
                if let Some(path) = random_path(&adj, from, size - 1, rng) {
                    let (a, b) = (path[0], *path.last().expect("non-empty"));
                    if spare(&atoms, &used, a) > 0
                        && spare(&atoms, &used, b) > 0
                        && !adj[a].contains(&b)
                    {
                        bonds.push(Bond { a, b, order: 1 });
                        used[a] += 1;
                        used[b] += 1;
                        adj[a].push(b);
                        adj[b].push(a);
                        break;
                    }
                }
            }
        }
        // upgrade a few bonds to double/triple where valence permits
        for k in 0..bonds.len() {
            let roll = rng.gen_range(0..100);
            let extra = match roll {
                0..=11 => 1,
                12..=13 => 2,
                _ => 0,
            };
            let Bond { a, b, .. } = bonds[k];
            if extra > 0 && spare(&atoms, &used, a) >= extra && spare(&atoms, &used, b) >= extra {
                bonds[k].order += extra;
                used[a] += extra;
                used[b] += extra;
            }
        }
        let g = MolGraph::from_parts(atoms, bonds);
        if g.atom_count() >= params.min_atoms {
            return g;
        }
    }
}

/// One random valid molecule line no longer than `params.max_len`, written
/// with ring digits `1`-`4` only.
pub fn random_molecule<R: Rng + ?Sized>(params: &GeneratorParams, rng: &mut R) -> String {
    loop {
        let g = random_graph(params, rng);
        let line = random_string(&g, rng);
        if line.chars().count() <= params.max_len
            && !line.chars().any(|c| matches!(c, '5'..='9'))
            && parse_str(&line).is_ok()
        {
            return line;
        }
    }
}

/// `n` molecule lines from a seeded stream.
pub fn generate_corpus(n: usize, seed: u64, params: &GeneratorParams) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_molecule(params, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_lines_parse_and_respect_length() {
        let params = GeneratorParams::default();
        let corpus = generate_corpus(500, 11, &params);
        assert_eq!(corpus.len(), 500);
        let mut ringed = 0;
        for line in &corpus {
            let g = parse_str(line).unwrap_or_else(|e| panic!("{line}: {e}"));
            assert!(line.len() <= params.max_len);
            ringed += g.has_ring() as usize;
        }
        assert!(ringed > 150, "only {ringed} ring-bearing molecules");
    }

    #[test]
    fn corpus_is_seed_deterministic() {
        let p = GeneratorParams::default();
        assert_eq!(generate_corpus(50, 3, &p), generate_corpus(50, 3, &p));
        assert_ne!(generate_corpus(50, 3, &p), generate_corpus(50, 4, &p));
    }
}

//! Canonical atom ordering and line-notation writer.
//!
//! Ordering is found by colour refinement over (element, degree, bond-order
//! multiset) followed by individualisation of the first non-singleton cell.
//! Every discrete leaf of the search yields a certificate (elements plus the
//! bond-order matrix in leaf order); the smallest certificate wins. Leaves
//! with equal certificates reveal automorphisms, which prune sibling
//! branches lying in the same orbit of the prefix stabiliser.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use super::graph::MolGraph;

type Colors = Vec<u32>;

/// Ranks `keys` densely by their natural order.
fn dense_rank<K: Ord + Clone>(keys: &[K]) -> Colors {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present") as u32)
        .collect()
}

fn cell_count(colors: &Colors) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

fn initial_colors(g: &MolGraph) -> Colors {
    let keys: Vec<(u8, usize, Vec<u8>)> = (0..g.atom_count())
        .map(|i| {
            let mut orders: Vec<u8> = g.neighbors(i).iter().map(|&(_, o)| o).collect();
            orders.sort_unstable();
            (g.atoms()[i].code(), g.degree(i), orders)
        })
        .collect();
    dense_rank(&keys)
}

/// Refines until the number of cells stops growing. Colour order is a pure
/// function of the invariants, so equal inputs under relabelling give equal
/// outputs.
fn refine(g: &MolGraph, mut colors: Colors) -> Colors {
    let mut cells = cell_count(&colors);
    loop {
        let keys: Vec<(u32, Vec<(u8, u32)>)> = (0..g.atom_count())
            .map(|i| {
                let mut nb: Vec<(u8, u32)> =
                    g.neighbors(i).iter().map(|&(j, o)| (o, colors[j])).collect();
                nb.sort_unstable();
                (colors[i], nb)
            })
            .collect();
        let next = dense_rank(&keys);
        let next_cells = cell_count(&next);
        if next_cells == cells {
            return colors;
        }
        colors = next;
        cells = next_cells;
    }
}

fn individualize(colors: &Colors, vertex: usize) -> Colors {
    let c = colors[vertex];
    let keys: Vec<(u32, u8)> = colors
        .iter()
        .enumerate()
        .map(|(i, &ci)| (ci, u8::from(ci == c && i != vertex)))
        .collect();
    dense_rank(&keys)
}

fn certificate(g: &MolGraph, order: &[usize]) -> Vec<u8> {
    let n = order.len();
    let mut pos = vec![0usize; n];
    for (p, &a) in order.iter().enumerate() {
        pos[a] = p;
    }
    let mut cert = Vec::with_capacity(n + n * n);
    cert.extend(order.iter().map(|&a| g.atoms()[a].code()));
    let mut matrix = vec![0u8; n * n];
    for b in g.bonds() {
        matrix[pos[b.a] * n + pos[b.b]] = b.order;
        matrix[pos[b.b] * n + pos[b.a]] = b.order;
    }
    cert.extend(matrix);
    cert
}

struct Search<'g> {
    graph: &'g MolGraph,
    best: Option<(Vec<u8>, Vec<usize>)>,
    seen: HashMap<Vec<u8>, Vec<usize>>,
    automorphisms: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn leaf(&mut self, colors: &Colors) {
        let mut order: Vec<usize> = (0..colors.len()).collect();
        order.sort_by_key(|&a| colors[a]);
        let cert = certificate(self.graph, &order);
        if let Some(prev) = self.seen.get(&cert) {
            let mut gamma = vec![0; order.len()];
            for (p, &a) in prev.iter().enumerate() {
                gamma[a] = order[p];
            }
            self.automorphisms.push(gamma);
            return;
        }
        let better = self.best.as_ref().is_none_or(|(b, _)| cert < *b);
        if better {
            self.best = Some((cert.clone(), order.clone()));
        }
        self.seen.insert(cert, order);
    }

    /// Orbit representative of `v` under the known automorphisms that fix
    /// every vertex of `prefix`.
    fn orbit_root(&self, prefix: &[usize], n: usize) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for gamma in &self.automorphisms {
            if prefix.iter().any(|&v| gamma[v] != v) {
                continue;
            }
            for (x, &y) in gamma.iter().enumerate() {
                let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
                if rx != ry {
                    parent[rx.max(ry)] = rx.min(ry);
                }
            }
        }
        (0..n).map(|x| find(&mut parent, x)).collect()
    }

    fn explore(&mut self, colors: Colors, prefix: &mut Vec<usize>) {
        let n = colors.len();
        let mut sizes = vec![0usize; cell_count(&colors)];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let Some(target) = (0..sizes.len())
            .filter(|&c| sizes[c] > 1)
            .min_by_key(|&c| (sizes[c], c))
        else {
            self.leaf(&colors);
            return;
        };
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == target as u32).collect();
        let mut explored: Vec<usize> = Vec::new();
        for v in members {
            if !explored.is_empty() {
                let roots = self.orbit_root(prefix, n);
                if explored.iter().any(|&u| roots[u] == roots[v]) {
                    continue;
                }
            }
            prefix.push(v);
            let next = refine(self.graph, individualize(&colors, v));
            self.explore(next, prefix);
            prefix.pop();
            explored.push(v);
        }
    }
}

/// Canonical atom order: `order[k]` is the atom placed at position `k`.
pub fn canonical_order(g: &MolGraph) -> Vec<usize> {
    if g.atom_count() == 0 {
        return Vec::new();
    }
    let mut search = Search {
        graph: g,
        best: None,
        seen: HashMap::new(),
        automorphisms: Vec::new(),
    };
    let colors = refine(g, initial_colors(g));
    search.explore(colors, &mut Vec::new());
    search.best.expect("at least one leaf").1
}

/// Canonical line notation of `g`. Isomorphic graphs give identical strings.
pub fn canonical_string(g: &MolGraph) -> String {
    let order = canonical_order(g);
    let mut rank = vec![0usize; order.len()];
    for (p, &a) in order.iter().enumerate() {
        rank[a] = p;
    }
    write_with_rank(g, &rank)
}

/// Writes `g` with a random traversal order. Used to produce varied but
/// valid training strings.
pub fn random_string<R: Rng + ?Sized>(g: &MolGraph, rng: &mut R) -> String {
    let mut rank: Vec<usize> = (0..g.atom_count()).collect();
    rank.shuffle(rng);
    write_with_rank(g, &rank)
}

fn bond_glyph(order: u8) -> &'static str {
    match order {
        1 => "",
        2 => "=",
        3 => "#",
        _ => unreachable!("bond order {order}"),
    }
}

/// Depth-first writer. Traversal starts at the atom with rank 0 and visits
/// neighbours by increasing rank; non-tree bonds become ring closures using
/// the lowest free digit.
pub fn write_with_rank(g: &MolGraph, rank: &[usize]) -> String {
    let n = g.atom_count();
    if n == 0 {
        return String::new();
    }
    let sorted_neighbors: Vec<Vec<(usize, u8)>> = (0..n)
        .map(|a| {
            let mut nb = g.neighbors(a).to_vec();
            nb.sort_by_key(|&(b, _)| rank[b]);
            nb
        })
        .collect();
    let start = (0..n).min_by_key(|&a| rank[a]).expect("non-empty");

    // Pass 1: DFS tree, visit order and ring-closure bonds.
    let mut visit = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, u8)>> = vec![Vec::new(); n];
    let mut closures: Vec<(usize, usize, u8)> = Vec::new();
    let mut counter = 0;
    let mut stack = vec![(start, usize::MAX)];
    // Iterative DFS that mirrors the recursive visit order.
    let mut cursor = vec![0usize; n];
    visit[start] = counter;
    counter += 1;
    parent[start] = usize::MAX;
    while let Some(&(u, _)) = stack.last() {
        if cursor[u] < sorted_neighbors[u].len() {
            let (v, o) = sorted_neighbors[u][cursor[u]];
            cursor[u] += 1;
            if visit[v] == usize::MAX {
                visit[v] = counter;
                counter += 1;
                parent[v] = u;
                children[u].push((v, o));
                stack.push((v, u));
            } else if v != parent[u] && visit[v] < visit[u] {
                closures.push((v, u, o));
            }
        } else {
            stack.pop();
        }
    }

    // Ring closures opened at each atom (ordered by the closing atom's visit
    // index) and closed at each atom (ordered by the opening atom's).
    let mut opens: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closes: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(early, late, _)) in closures.iter().enumerate() {
        opens[early].push(i);
        closes[late].push(i);
    }
    for list in &mut opens {
        list.sort_by_key(|&i| visit[closures[i].1]);
    }
    for list in &mut closes {
        list.sort_by_key(|&i| visit[closures[i].0]);
    }

    let mut out = String::new();
    let mut digit_of = vec![0u8; closures.len()];
    let mut in_use = [false; 10];
    write_atom(
        g,
        start,
        &children,
        &closures,
        &opens,
        &closes,
        &mut digit_of,
        &mut in_use,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn write_atom(
    g: &MolGraph,
    atom: usize,
    children: &[Vec<(usize, u8)>],
    closures: &[(usize, usize, u8)],
    opens: &[Vec<usize>],
    closes: &[Vec<usize>],
    digit_of: &mut [u8],
    in_use: &mut [bool; 10],
    out: &mut String,
) {
    out.push(g.atoms()[atom].symbol());
    for &i in &closes[atom] {
        let d = digit_of[i];
        out.push((b'0' + d) as char);
        in_use[d as usize] = false;
    }
    for &i in &opens[atom] {
        let d = (1..10).find(|&d| !in_use[d]).expect("more than nine open rings") as u8;
        in_use[d as usize] = true;
        digit_of[i] = d;
        out.push_str(bond_glyph(closures[i].2));
        out.push((b'0' + d) as char);
    }
    let kids = &children[atom];
    for (k, &(child, order)) in kids.iter().enumerate() {
        let last = k + 1 == kids.len();
        if !last {
            out.push('(');
        }
        out.push_str(bond_glyph(order));
        write_atom(g, child, children, closures, opens, closes, digit_of, in_use, out);
        if !last {
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_str;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn canon(s: &str) -> String {
        canonical_string(&parse_str(s).unwrap())
    }

    #[test]
    fn equivalent_spellings_agree() {
        assert_eq!(canon("C1CCCCC1C"), canon("CC1CCCCC1"));
        assert_eq!(canon("OCC"), canon("CCO"));
        assert_eq!(canon("C(O)(N)C"), canon("NC(C)O"));
        assert_eq!(canon("C1=CCCCC1"), canon("C1CCCC=C1"));
        assert_ne!(canon("C1CCCCC1"), canon("C1CCCC1"));
        assert_ne!(canon("C=CC"), canon("CCC"));
    }

    #[test]
    fn output_reparses_to_same_canonical_form() {
        for s in ["C1CCCCC1C", "C1CC2CCC1C2", "N#CC(=O)S", "C12C3C4C1C5C2C3C45", "CC(C)(C)C"] {
            let c = canon(s);
            assert_eq!(canon(&c), c, "{s} -> {c}");
            assert_eq!(parse_str(&c).unwrap().atom_count(), parse_str(s).unwrap().atom_count());
        }
    }

    #[test]
    fn random_strings_are_valid_spellings() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = parse_str("C1CC2CC(N)CC2C(=O)C1").unwrap();
        let c = canonical_string(&g);
        for _ in 0..50 {
            let s = random_string(&g, &mut rng);
            assert_eq!(canon(&s), c);
        }
    }

    #[test]
    fn highly_symmetric_graphs_terminate() {
        // cubane-like cage and a long symmetric chain
        let c = canon("C12C3C4C1C5C2C3C45");
        assert_eq!(parse_str(&c).unwrap().atom_count(), 8);
        let chain = "CC(C)(C)C(C)(C)C(C)(C)C(C)(C)C(C)(C)C";
        assert_eq!(canon(chain), canon(&canon(chain)));
    }
}

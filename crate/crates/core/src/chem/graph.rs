use std::collections::VecDeque;
use std::fmt;

/// Heavy-atom element. Hydrogens are implicit and never represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    C,
    N,
    O,
    S,
    F,
}

impl Element {
    pub const ALL: [Element; 5] = [Element::C, Element::N, Element::O, Element::S, Element::F];

    /// Maximum sum of bond orders.
    pub fn max_valence(self) -> u8 {
        match self {
            Element::C => 4,
            Element::N => 3,
            Element::O | Element::S => 2,
            Element::F => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Element::C => 'C',
            Element::N => 'N',
            Element::O => 'O',
            Element::S => 'S',
            Element::F => 'F',
        }
    }

    pub fn from_symbol(c: char) -> Option<Element> {
        Element::ALL.into_iter().find(|e| e.symbol() == c)
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: u8,
}

/// Connected simple molecular graph with per-atom ring membership.
///
/// Construct through the parser or [`MolGraph::from_parts`]; both keep the
/// adjacency lists and ring flags consistent with `bonds`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolGraph {
    atoms: Vec<Element>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, u8)>>,
    ring: Vec<bool>,
}

impl MolGraph {
    /// Builds a graph from raw parts without valence or connectivity checks.
    /// Panics on self-loops, duplicate bonds or out-of-range indices.
    pub fn from_parts(atoms: Vec<Element>, bonds: Vec<Bond>) -> MolGraph {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for bond in &bonds {
            assert!(bond.a != bond.b, "self-loop on atom {}", bond.a);
            assert!(
                !adjacency[bond.a].iter().any(|&(n, _)| n == bond.b),
                "duplicate bond {}-{}",
                bond.a,
                bond.b
            );
            adjacency[bond.a].push((bond.b, bond.order));
            adjacency[bond.b].push((bond.a, bond.order));
        }
        let mut g = MolGraph { atoms, bonds, adjacency, ring: Vec::new() };
        g.ring = g.compute_ring_membership();
        g
    }

    pub fn atoms(&self) -> &[Element] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn neighbors(&self, atom: usize) -> &[(usize, u8)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    pub fn valence(&self, atom: usize) -> u8 {
        self.adjacency[atom].iter().map(|&(_, o)| o).sum()
    }

    pub fn in_ring(&self, atom: usize) -> bool {
        self.ring[atom]
    }

    pub fn ring_membership(&self) -> &[bool] {
        &self.ring
    }

    pub fn has_ring(&self) -> bool {
        self.ring.iter().any(|&r| r)
    }

    pub fn bond_order(&self, a: usize, b: usize) -> Option<u8> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, o)| o)
    }

    pub fn is_connected(&self) -> bool {
        if self.atoms.is_empty() {
            return true;
        }
        self.reachable_from(0, None).iter().all(|&r| r)
    }

    /// BFS reachability, optionally ignoring one bond.
    fn reachable_from(&self, start: usize, skip: Option<(usize, usize)>) -> Vec<bool> {
        let mut seen = vec![false; self.atoms.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if let Some((a, b)) = skip {
                    if (u == a && v == b) || (u == b && v == a) {
                        continue;
                    }
                }
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Shortest path length between `from` and `to` that avoids the direct
    /// bond between them.
    fn detour_length(&self, from: usize, to: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.atoms.len()];
        let mut queue = VecDeque::from([from]);
        dist[from] = 0;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if (u == from && v == to) || (u == to && v == from) {
                    continue;
                }
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    if v == to {
                        return Some(dist[v]);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }

    fn compute_ring_membership(&self) -> Vec<bool> {
        let mut ring = vec![false; self.atoms.len()];
        for bond in &self.bonds {
            if self.reachable_from(bond.a, Some((bond.a, bond.b)))[bond.b] {
                ring[bond.a] = true;
                ring[bond.b] = true;
            }
        }
        ring
    }

    /// Sizes of the smallest cycle through each ring bond, deduplicated and
    /// sorted.
    pub fn ring_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self
            .bonds
            .iter()
            .filter_map(|b| self.detour_length(b.a, b.b).map(|d| d + 1))
            .collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }

    /// Subgraph induced by the atoms with `keep[i] == true`, atoms renumbered
    /// in their original order.
    pub fn induced(&self, keep: &[bool]) -> MolGraph {
        let mut remap = vec![usize::MAX; self.atoms.len()];
        let mut atoms = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = atoms.len();
                atoms.push(self.atoms[i]);
            }
        }
        let bonds = self
            .bonds
            .iter()
            .filter(|b| keep[b.a] && keep[b.b])
            .map(|b| Bond { a: remap[b.a], b: remap[b.b], order: b.order })
            .collect();
        MolGraph::from_parts(atoms, bonds)
    }

    /// Same connectivity with every atom carbon and every bond single.
    pub fn generic(&self) -> MolGraph {
        MolGraph::from_parts(
            vec![Element::C; self.atoms.len()],
            self.bonds.iter().map(|b| Bond { order: 1, ..*b }).collect(),
        )
    }

    /// Relabels atoms so that new atom `i` is old atom `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> MolGraph {
        let mut inverse = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        MolGraph::from_parts(
            order.iter().map(|&o| self.atoms[o]).collect(),
            self.bonds
                .iter()
                .map(|b| Bond { a: inverse[b.a], b: inverse[b.b], order: b.order })
                .collect(),
        )
    }
}

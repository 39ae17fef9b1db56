use std::fmt;

use super::canon::canonical_string;
use super::graph::MolGraph;

/// Key of the ring-free bucket.
pub const EMPTY_SCAFFOLD: &str = "∅";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScaffoldKind {
    Molecular,
    Topological,
}

/// Canonical identity of a scaffold.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScaffoldKey {
    pub canonical: String,
    pub kind: ScaffoldKind,
}

impl ScaffoldKey {
    pub fn is_empty(&self) -> bool {
        self.canonical == EMPTY_SCAFFOLD
    }

    fn empty(kind: ScaffoldKind) -> Self {
        ScaffoldKey { canonical: EMPTY_SCAFFOLD.to_string(), kind }
    }
}

impl fmt::Display for ScaffoldKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

/// Ring systems plus linkers: repeatedly strips non-ring atoms of degree at
/// most one. `None` for ring-free molecules.
pub fn scaffold_graph(g: &MolGraph) -> Option<MolGraph> {
    if !g.has_ring() {
        return None;
    }
    let n = g.atom_count();
    let mut keep = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| !g.in_ring(i) && degree[i] <= 1).collect();
    while let Some(atom) = stack.pop() {
        if !keep[atom] {
            continue;
        }
        keep[atom] = false;
        for &(nb, _) in g.neighbors(atom) {
            if keep[nb] {
                degree[nb] -= 1;
                if !g.in_ring(nb) && degree[nb] <= 1 {
                    stack.push(nb);
                }
            }
        }
    }
    Some(g.induced(&keep))
}

pub fn molecular_scaffold(g: &MolGraph) -> ScaffoldKey {
    match scaffold_graph(g) {
        Some(s) => ScaffoldKey { canonical: canonical_string(&s), kind: ScaffoldKind::Molecular },
        None => ScaffoldKey::empty(ScaffoldKind::Molecular),
    }
}

pub fn topological_scaffold(g: &MolGraph) -> ScaffoldKey {
    match scaffold_graph(g) {
        Some(s) => ScaffoldKey {
            canonical: canonical_string(&s.generic()),
            kind: ScaffoldKind::Topological,
        },
        None => ScaffoldKey::empty(ScaffoldKind::Topological),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_str;

    fn mol(s: &str) -> String {
        molecular_scaffold(&parse_str(s).unwrap()).canonical
    }

    fn topo(s: &str) -> String {
        topological_scaffold(&parse_str(s).unwrap()).canonical
    }

    #[test]
    fn side_chains_are_removed() {
        assert_eq!(mol("C1CCCCC1C"), mol("C1CCCCC1"));
        assert_eq!(mol("C1CCCCC1CCO"), mol("C1CCCCC1"));
        assert_eq!(mol("CCC"), EMPTY_SCAFFOLD);
        assert_eq!(mol("C"), EMPTY_SCAFFOLD);
        assert_eq!(topo("CCN"), EMPTY_SCAFFOLD);
    }

    #[test]
    fn linkers_between_rings_survive() {
        let s = parse_str("C1CC1CCC1CCC1").unwrap();
        assert_eq!(scaffold_graph(&s).unwrap().atom_count(), 9);
        let s = parse_str("FC1CC1C(C)C1CCC1N").unwrap();
        assert_eq!(scaffold_graph(&s).unwrap().atom_count(), 8);
    }

    #[test]
    fn fused_rings_differing_in_side_chains_share_a_key() {
        assert_eq!(mol("C1CC2CCCCC2CC1CO"), mol("NC1CCC2CCCCC2C1"));
    }

    #[test]
    fn exocyclic_double_bond_is_pruned() {
        // the refinement that keeps exocyclic double-bonded atoms is not applied
        assert_eq!(mol("O=C1CCCCC1"), mol("C1CCCCC1"));
    }

    #[test]
    fn topological_key_ignores_elements_and_orders() {
        assert_eq!(topo("C1CCNC=C1"), topo("C1CCCCC1"));
        assert_ne!(mol("C1CCNC=C1"), mol("C1CCCCC1"));
        assert_eq!(topo("C1CCOCC1"), topo("C1CCSCC1"));
        assert_ne!(topo("C1CCCC1"), topo("C1CCCCC1"));
    }

    #[test]
    fn scaffold_is_idempotent() {
        for s in ["C1CC2CCCCC2CC1CO", "C1CC1CCC1CCC1", "O=C1CCN(CC1)C"] {
            let first = mol(s);
            assert_eq!(mol(&first), first);
        }
    }
}

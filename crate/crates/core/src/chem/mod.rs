//! Restricted molecular line notation: tokens, parsing, scaffolds and
//! fingerprints.

mod canon;
mod fingerprint;
pub mod generate;
mod graph;
mod parse;
mod scaffold;
mod token;

use thiserror::Error;

pub use canon::{canonical_order, canonical_string, random_string, write_with_rank};
pub use fingerprint::{
    fingerprint, tanimoto_distance, Fingerprint, DEFAULT_BITS, DEFAULT_RADIUS, HASH_SEED,
};
pub use graph::{Bond, Element, MolGraph};
pub use parse::{parse, parse_str};
pub use scaffold::{
    molecular_scaffold, scaffold_graph, topological_scaffold, ScaffoldKey, ScaffoldKind,
    EMPTY_SCAFFOLD,
};
pub use token::{Token, Vocabulary};

/// Every way a token string can fail to describe a molecule. Downstream all
/// of these simply mean "invalid molecule".
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    EmptyInput,
    #[error("unknown token {glyph:?} at position {pos}")]
    UnknownToken { pos: usize, glyph: char },
    #[error("unbalanced parentheses")]
    UnbalancedParen,
    #[error("ring closure {digit} never closed")]
    UnclosedRing { digit: u8 },
    #[error("ring closure {digit} forms a self-loop, duplicate or conflicting bond")]
    InvalidRingBond { digit: u8 },
    #[error("valence exceeded on atom {atom}")]
    ValenceExceeded { atom: usize },
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: &'static str },
}

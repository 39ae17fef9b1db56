//! Parser for the restricted line notation.
//!
//! Atoms `C N O S F`, bond prefixes `=` and `#`, branches in parentheses and
//! ring-closure digits. A bond prefix binds to the next atom or ring digit.
//! A ring bond may carry its order on either occurrence of the digit, but
//! not conflicting orders on both. Digits become free again once closed.
//! Canonical output may use digits up to `9`; the action vocabulary only
//! emits `1`-`4`.

use std::collections::BTreeMap;

use super::graph::{Bond, Element, MolGraph};
use super::token::{Token, Vocabulary};
use super::ParseError;

/// Parses a token body (no START/STOP framing).
pub fn parse(tokens: &[Token]) -> Result<MolGraph, ParseError> {
    let vocab = Vocabulary;
    let mut line = String::with_capacity(tokens.len());
    for (pos, &t) in tokens.iter().enumerate() {
        if t == Vocabulary::START || t == Vocabulary::STOP {
            return Err(ParseError::UnknownToken { pos, glyph: vocab.glyph(t) });
        }
        line.push(vocab.glyph(t));
    }
    parse_str(&line)
}

pub fn parse_str(line: &str) -> Result<MolGraph, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    if chars.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    let mut depth = 0i32;
    for (pos, &c) in chars.iter().enumerate() {
        match c {
            'C' | 'N' | 'O' | 'S' | 'F' | '=' | '#' | '1'..='9' => {}
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(ParseError::UnbalancedParen);
                }
            }
            _ => return Err(ParseError::UnknownToken { pos, glyph: c }),
        }
    }
    if depth != 0 {
        return Err(ParseError::UnbalancedParen);
    }

    let mut atoms: Vec<Element> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<u8> = None;
    let mut branches: Vec<usize> = Vec::new();
    let mut open: BTreeMap<u8, (usize, Option<u8>)> = BTreeMap::new();

    let has_bond = |bonds: &[Bond], a: usize, b: usize| {
        bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
    };

    for (pos, &c) in chars.iter().enumerate() {
        let syntax = |msg| ParseError::Syntax { pos, msg };
        match c {
            'C' | 'N' | 'O' | 'S' | 'F' => {
                let idx = atoms.len();
                atoms.push(Element::from_symbol(c).expect("element glyph"));
                if let Some(p) = prev {
                    bonds.push(Bond { a: p, b: idx, order: pending.take().unwrap_or(1) });
                }
                prev = Some(idx);
            }
            '=' | '#' => {
                if prev.is_none() {
                    return Err(syntax("bond before first atom"));
                }
                if pending.is_some() {
                    return Err(syntax("consecutive bond symbols"));
                }
                pending = Some(if c == '=' { 2 } else { 3 });
            }
            '(' => {
                let p = prev.ok_or_else(|| syntax("branch before first atom"))?;
                if pending.is_some() {
                    return Err(syntax("bond symbol before branch"));
                }
                if pos > 0 && chars[pos - 1] == '(' {
                    return Err(syntax("nested branch opening"));
                }
                branches.push(p);
            }
            ')' => {
                if pending.is_some() {
                    return Err(syntax("dangling bond symbol"));
                }
                if chars[pos - 1] == '(' {
                    return Err(syntax("empty branch"));
                }
                prev = Some(branches.pop().ok_or(ParseError::UnbalancedParen)?);
            }
            '1'..='9' => {
                let p = prev.ok_or_else(|| syntax("ring digit before first atom"))?;
                let digit = c as u8 - b'0';
                let here = pending.take();
                match open.remove(&digit) {
                    Some((other, there)) => {
                        let order = match (there, here) {
                            (Some(x), Some(y)) if x != y => {
                                return Err(ParseError::InvalidRingBond { digit })
                            }
                            (x, y) => x.or(y).unwrap_or(1),
                        };
                        if other == p || has_bond(&bonds, other, p) {
                            return Err(ParseError::InvalidRingBond { digit });
                        }
                        bonds.push(Bond { a: other, b: p, order });
                    }
                    None => {
                        open.insert(digit, (p, here));
                    }
                }
            }
            _ => unreachable!("filtered by the pre-scan"),
        }
    }
    if pending.is_some() {
        return Err(ParseError::Syntax { pos: chars.len(), msg: "dangling bond symbol" });
    }
    if let Some((&digit, _)) = open.iter().next() {
        return Err(ParseError::UnclosedRing { digit });
    }

    let graph = MolGraph::from_parts(atoms, bonds);
    for atom in 0..graph.atom_count() {
        if graph.valence(atom) > graph.atoms()[atom].max_valence() {
            return Err(ParseError::ValenceExceeded { atom });
        }
    }
    debug_assert!(graph.is_connected());
    Ok(graph)
}

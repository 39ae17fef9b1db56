//! Synthetic extrinsic reward landscapes.
//!
//! An oracle is a weighted list of structural predicates. Dense oracles
//! return the matched weight fraction; sparse oracles pay out only when
//! every predicate holds and otherwise give a small partial credit that
//! never reaches the active threshold.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::chem::{parse, scaffold_graph, Element, MolGraph, Token};
use crate::Scalar;

/// Reward of a token string that does not parse.
pub const INVALID_REWARD: f64 = -1.0;
/// Sparse-mode scale of the matched fraction when not every feature holds.
pub const SPARSE_PARTIAL_SCALE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeaturePredicate {
    RingOfSize(usize),
    ContainsElement(Element),
    BondOrderPresent(u8),
    /// Inclusive heavy-atom count range.
    AtomCountInRange(usize, usize),
    ScaffoldNonempty,
}

impl FeaturePredicate {
    pub fn holds(&self, g: &MolGraph) -> bool {
        match *self {
            FeaturePredicate::RingOfSize(k) => g.ring_sizes().contains(&k),
            FeaturePredicate::ContainsElement(e) => g.atoms().contains(&e),
            FeaturePredicate::BondOrderPresent(o) => g.bonds().iter().any(|b| b.order == o),
            FeaturePredicate::AtomCountInRange(lo, hi) => (lo..=hi).contains(&g.atom_count()),
            FeaturePredicate::ScaffoldNonempty => scaffold_graph(g).is_some(),
        }
    }
}

impl fmt::Display for FeaturePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeaturePredicate::RingOfSize(k) => write!(f, "ring_of_size {k}"),
            FeaturePredicate::ContainsElement(e) => write!(f, "contains_element {e}"),
            FeaturePredicate::BondOrderPresent(o) => write!(f, "bond_order_present {o}"),
            FeaturePredicate::AtomCountInRange(lo, hi) => write!(f, "atom_count_in_range {lo} {hi}"),
            FeaturePredicate::ScaffoldNonempty => write!(f, "scaffold_nonempty"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("oracle has no features or zero total weight")]
    NoWeight,
    #[error("unknown oracle {0:?}")]
    UnknownName(String),
    #[error("cannot read oracle file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec<F> {
    pub features: Vec<(FeaturePredicate, F)>,
    pub mode: OracleMode,
    /// Sparse-mode reward when every feature matches.
    pub sparse_full_bonus: F,
    /// Dense-mode exponent on the matched weight fraction.
    pub dense_power: F,
}

impl<F: Scalar> OracleSpec<F> {
    pub fn new(
        features: Vec<(FeaturePredicate, F)>,
        mode: OracleMode,
    ) -> Result<Self, OracleError> {
        let total: F = features.iter().map(|&(_, w)| w).sum();
        if features.is_empty() || !(total > F::zero()) || features.iter().any(|&(_, w)| w < F::zero()) {
            return Err(OracleError::NoWeight);
        }
        Ok(OracleSpec { features, mode, sparse_full_bonus: F::one(), dense_power: F::one() })
    }

    /// Reward of an already parsed molecule; `None` means invalid.
    pub fn score(&self, graph: Option<&MolGraph>) -> F {
        let Some(g) = graph else {
            return F::lit(INVALID_REWARD);
        };
        match self.mode {
            OracleMode::Dense => {
                let total: F = self.features.iter().map(|&(_, w)| w).sum();
                let matched: F =
                    self.features.iter().filter(|(p, _)| p.holds(g)).map(|&(_, w)| w).sum();
                (matched / total).powf(self.dense_power)
            }
            OracleMode::Sparse => {
                let k = self.features.iter().filter(|(p, _)| p.holds(g)).count();
                if k == self.features.len() {
                    self.sparse_full_bonus
                } else {
                    F::lit(SPARSE_PARTIAL_SCALE) * F::from_usize_lossy(k)
                        / F::from_usize_lossy(self.features.len())
                }
            }
        }
    }

    /// Reward of a token body: −1 if it does not parse.
    pub fn evaluate(&self, tokens: &[Token]) -> F {
        self.score(parse(tokens).ok().as_ref())
    }

    /// Parses the line format: one `kind arg* weight` per line, plus the
    /// optional directives `mode dense|sparse`, `full_bonus <x>` and `power <x>`. `#`
    /// starts a comment.
    pub fn parse_spec(text: &str) -> Result<Self, OracleError> {
        let mut features = Vec::new();
        let mut mode = OracleMode::Dense;
        let mut bonus = F::one();
        let mut power = F::one();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| OracleError::Syntax { line: line_no, msg: msg.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| -> Result<f64, OracleError> {
                s.parse::<f64>().map_err(|_| err(&format!("bad number {s:?}")))
            };
            let int = |s: &str| -> Result<usize, OracleError> {
                s.parse::<usize>().map_err(|_| err(&format!("bad integer {s:?}")))
            };
            let args = &parts[1..];
            let (pred, weight) = match (parts[0], args.len()) {
                ("mode", 1) => {
                    mode = match args[0] {
                        "dense" => OracleMode::Dense,
                        "sparse" => OracleMode::Sparse,
                        other => return Err(err(&format!("unknown mode {other:?}"))),
                    };
                    continue;
                }
                ("full_bonus", 1) => {
                    bonus = F::lit(num(args[0])?);
                    continue;
                }
                ("power", 1) => {
                    let p = num(args[0])?;
                    if !(p > 0.0 && p.is_finite()) {
                        return Err(err("power must be positive"));
                    }
                    power = F::lit(p);
                    continue;
                }
                ("ring_of_size", 2) => (FeaturePredicate::RingOfSize(int(args[0])?), args[1]),
                ("contains_element", 2) => {
                    let mut chars = args[0].chars();
                    let e = match (chars.next(), chars.next()) {
                        (Some(c), None) => Element::from_symbol(c),
                        _ => None,
                    }
                    .ok_or_else(|| err(&format!("unknown element {:?}", args[0])))?;
                    (FeaturePredicate::ContainsElement(e), args[1])
                }
                ("bond_order_present", 2) => {
                    let o = int(args[0])?;
                    if !(1..=3).contains(&o) {
                        return Err(err("bond order must be 1, 2 or 3"));
                    }
                    (FeaturePredicate::BondOrderPresent(o as u8), args[1])
                }
                ("atom_count_in_range", 3) => {
                    (FeaturePredicate::AtomCountInRange(int(args[0])?, int(args[1])?), args[2])
                }
                ("scaffold_nonempty", 1) => (FeaturePredicate::ScaffoldNonempty, args[0]),
                (kind, _) => return Err(err(&format!("unrecognised line {kind:?}"))),
            };
            let w = num(weight)?;
            if !(w >= 0.0) {
                return Err(err("weights must be non-negative"));
            }
            features.push((pred, F::lit(w)));
        }
        let mut spec = OracleSpec::new(features, mode)?;
        spec.sparse_full_bonus = bonus;
        spec.dense_power = power;
        Ok(spec)
    }

    pub fn to_spec_string(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.mode {
            OracleMode::Dense => "mode dense\n",
            OracleMode::Sparse => "mode sparse\n",
        });
        out.push_str(&format!("full_bonus {}\n", self.sparse_full_bonus));
        out.push_str(&format!("power {}\n", self.dense_power));
        for (p, w) in &self.features {
            out.push_str(&format!("{p} {w}\n"));
        }
        out
    }
}

/// Many attainable modes: any ring-bearing molecule of moderate size with
/// the right decorations can be active. The cubed weight fraction keeps the
/// prior's mean reward low while leaving many distinct actives reachable.
pub fn dense_easy<F: Scalar>() -> OracleSpec<F> {
    let features = vec![
        (FeaturePredicate::ScaffoldNonempty, F::one()),
        (FeaturePredicate::ContainsElement(Element::N), F::one()),
        (FeaturePredicate::ContainsElement(Element::O), F::one()),
        (FeaturePredicate::BondOrderPresent(2), F::one()),
        (FeaturePredicate::RingOfSize(6), F::lit(2.0)),
        (FeaturePredicate::AtomCountInRange(10, 16), F::one()),
    ];
    let mut spec = OracleSpec::new(features, OracleMode::Dense).expect("positive weights");
    spec.dense_power = F::lit(3.0);
    spec
}

/// Conjunctive target: rarely satisfied by the prior.
pub fn sparse_hard<F: Scalar>() -> OracleSpec<F> {
    let features = vec![
        (FeaturePredicate::RingOfSize(5), F::one()),
        (FeaturePredicate::ContainsElement(Element::S), F::one()),
        (FeaturePredicate::ContainsElement(Element::N), F::one()),
        (FeaturePredicate::BondOrderPresent(2), F::one()),
        (FeaturePredicate::AtomCountInRange(12, 18), F::one()),
    ];
    OracleSpec::new(features, OracleMode::Sparse).expect("positive weights")
}

pub fn builtin_oracles<F: Scalar>() -> BTreeMap<&'static str, OracleSpec<F>> {
    BTreeMap::from([("dense-easy", dense_easy()), ("sparse-hard", sparse_hard())])
}

/// How a run names its oracle: a builtin or `file:<path>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleRef {
    Builtin(String),
    File(String),
}

impl FromStr for OracleRef {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(OracleRef::File(path.to_string()));
        }
        if builtin_oracles::<f64>().contains_key(s) {
            Ok(OracleRef::Builtin(s.to_string()))
        } else {
            Err(OracleError::UnknownName(s.to_string()))
        }
    }
}

impl fmt::Display for OracleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleRef::Builtin(name) => f.write_str(name),
            OracleRef::File(path) => write!(f, "file:{path}"),
        }
    }
}

impl OracleRef {
    pub fn load<F: Scalar>(&self) -> Result<OracleSpec<F>, OracleError> {
        match self {
            OracleRef::Builtin(name) => builtin_oracles()
                .remove(name.as_str())
                .ok_or_else(|| OracleError::UnknownName(name.clone())),
            OracleRef::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| OracleError::Io(format!("{path}: {e}")))?;
                OracleSpec::parse_spec(&text)
            }
        }
    }
}

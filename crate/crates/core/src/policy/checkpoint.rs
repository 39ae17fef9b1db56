//! Versioned text checkpoints.
//!
//! ```text
//! divrl-policy v1
//! vocab 15
//! embedding 32
//! hidden 64
//! layers 2
//! hash_seed 5eedd1ce7a910b3f
//! params 59231
//! 3fb999999999999a
//! ...
//! ```
//!
//! Parameters are stored as the hex bits of their `f64` value, one per line,
//! so loading reproduces them exactly.

use std::io::{BufRead, Write};

use crate::chem::HASH_SEED;
use crate::Scalar;

use super::net::{NetDims, PolicyNet};
use super::PolicyError;

pub const MAGIC: &str = "divrl-policy v1";

pub fn write_checkpoint<F: Scalar, W: Write>(net: &PolicyNet<F>, mut out: W) -> std::io::Result<()> {
    let d = net.dims();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "vocab {}", d.vocab)?;
    writeln!(out, "embedding {}", d.embedding)?;
    writeln!(out, "hidden {}", d.hidden)?;
    writeln!(out, "layers {}", d.layers)?;
    writeln!(out, "hash_seed {HASH_SEED:016x}")?;
    writeln!(out, "params {}", net.params().len())?;
    for p in net.params() {
        writeln!(out, "{:016x}", p.as_f64().to_bits())?;
    }
    out.flush()
}

pub fn read_checkpoint<F: Scalar, R: BufRead>(input: R) -> Result<PolicyNet<F>, PolicyError> {
    let bad = |msg: String| PolicyError::Checkpoint(msg);
    let mut lines = input.lines();
    let mut next = || -> Result<String, PolicyError> {
        lines
            .next()
            .ok_or_else(|| bad("unexpected end of file".into()))?
            .map_err(|e| bad(e.to_string()))
    };
    let magic = next()?;
    if magic.trim() != MAGIC {
        return Err(bad(format!("unsupported header {magic:?}")));
    }
    let mut field = |name: &str| -> Result<String, PolicyError> {
        let line = next()?;
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("malformed line {line:?}")))?;
        if key != name {
            return Err(bad(format!("expected {name}, found {key}")));
        }
        Ok(value.trim().to_string())
    };
    let int = |s: String| s.parse::<usize>().map_err(|_| bad(format!("bad integer {s:?}")));
    let dims = NetDims {
        vocab: int(field("vocab")?)?,
        embedding: int(field("embedding")?)?,
        hidden: int(field("hidden")?)?,
        layers: int(field("layers")?)?,
    };
    let seed = u64::from_str_radix(&field("hash_seed")?, 16)
        .map_err(|_| bad("bad hash seed".into()))?;
    if seed != HASH_SEED {
        return Err(bad(format!("fingerprint hash seed {seed:016x} differs from {HASH_SEED:016x}")));
    }
    let count = int(field("params")?)?;
    if dims.layers == 0 || count != dims.param_count() {
        return Err(bad(format!("parameter count {count} does not match dimensions")));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next()?;
        let bits = u64::from_str_radix(line.trim(), 16)
            .map_err(|_| bad(format!("bad parameter {line:?}")))?;
        params.push(F::lit(f64::from_bits(bits)));
    }
    Ok(PolicyNet::from_params(dims, params))
}

pub fn save<F: Scalar>(net: &PolicyNet<F>, path: &std::path::Path) -> Result<(), PolicyError> {
    let file = std::fs::File::create(path).map_err(|e| PolicyError::Checkpoint(e.to_string()))?;
    write_checkpoint(net, std::io::BufWriter::new(file)).map_err(|e| PolicyError::Checkpoint(e.to_string()))
}

pub fn load<F: Scalar>(path: &std::path::Path) -> Result<PolicyNet<F>, PolicyError> {
    let file = std::fs::File::open(path)
        .map_err(|e| PolicyError::CheckpointMissing(format!("{}: {e}", path.display())))?;
    read_checkpoint(std::io::BufReader::new(file))
}

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use divrl_core::oracle::OracleRef;
use divrl_core::policy::{NetDims, SigmaParams};
use divrl_core::shaping::{ShapingParams, StrategyId};
use divrl_core::chem::Vocabulary;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("bad value for {key}: {msg}")]
    Value { key: String, msg: String },
    #[error("cannot read config {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Everything one experiment needs. Keys of the text format are the field
/// names.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub oracle: OracleRef,
    pub strategy: StrategyId,
    pub steps: usize,
    pub batch_size: usize,
    pub max_length: usize,
    pub seed: u64,
    pub reruns: usize,
    pub active_threshold: f64,
    pub bucket_size: usize,
    pub distance_threshold: f64,
    pub klucb_c: f64,
    pub tanh_c: f64,
    pub coreset_size: usize,
    pub embedding_dim: usize,
    pub hidden_dim: usize,
    pub layers: usize,
    pub lr: f64,
    pub rnd_lr: f64,
    pub sigma_init: f64,
    pub sigma_margin: f64,
    pub sigma_window: usize,
    pub sigma_min_score: f64,
    pub output_dir: PathBuf,
    pub prior: PathBuf,
}

pub const KEYS: [&str; 24] = [
    "oracle",
    "strategy",
    "steps",
    "batch_size",
    "max_length",
    "seed",
    "reruns",
    "active_threshold",
    "bucket_size",
    "distance_threshold",
    "klucb_c",
    "tanh_c",
    "coreset_size",
    "embedding_dim",
    "hidden_dim",
    "layers",
    "lr",
    "rnd_lr",
    "sigma_init",
    "sigma_margin",
    "sigma_window",
    "sigma_min_score",
    "output_dir",
    "prior",
];

impl Default for RunConfig {
    fn default() -> Self {
        let shaping = ShapingParams::<f64>::default();
        let sigma = SigmaParams::<f64>::default();
        RunConfig {
            oracle: OracleRef::Builtin("dense-easy".into()),
            strategy: StrategyId::None,
            steps: 300,
            batch_size: 32,
            max_length: 40,
            seed: 0,
            reruns: 10,
            active_threshold: shaping.active_threshold,
            bucket_size: shaping.bucket_size,
            distance_threshold: shaping.distance_threshold,
            klucb_c: shaping.klucb_c,
            tanh_c: shaping.tanh_c,
            coreset_size: shaping.coreset_size,
            embedding_dim: 32,
            hidden_dim: 64,
            layers: 2,
            lr: 1e-3,
            rnd_lr: 1e-3,
            sigma_init: sigma.sigma_init,
            sigma_margin: sigma.margin,
            sigma_window: sigma.window,
            sigma_min_score: sigma.min_score,
            output_dir: PathBuf::from("runs"),
            prior: PathBuf::from("prior.ckpt"),
        }
    }
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    raw.parse().map_err(|e: T::Err| ConfigError::Value { key: key.into(), msg: format!("{raw:?}: {e}") })
}

impl RunConfig {
    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, val)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: n + 1 });
            };
            let (key, val) = (key.trim(), val.trim());
            if seen.contains(&key) {
                return Err(ConfigError::DuplicateKey { line: n + 1, key: key.into() });
            }
            seen.push(key);
            cfg.set(key, val).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line: n + 1, key },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        Self::parse(&text)
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        match key {
            "oracle" => self.oracle = value(key, raw)?,
            "strategy" => self.strategy = value(key, raw)?,
            "steps" => self.steps = value(key, raw)?,
            "batch_size" => self.batch_size = value(key, raw)?,
            "max_length" => self.max_length = value(key, raw)?,
            "seed" => self.seed = value(key, raw)?,
            "reruns" => self.reruns = value(key, raw)?,
            "active_threshold" => self.active_threshold = value(key, raw)?,
            "bucket_size" => self.bucket_size = value(key, raw)?,
            "distance_threshold" => self.distance_threshold = value(key, raw)?,
            "klucb_c" => self.klucb_c = value(key, raw)?,
            "tanh_c" => self.tanh_c = value(key, raw)?,
            "coreset_size" => self.coreset_size = value(key, raw)?,
            "embedding_dim" => self.embedding_dim = value(key, raw)?,
            "hidden_dim" => self.hidden_dim = value(key, raw)?,
            "layers" => self.layers = value(key, raw)?,
            "lr" => self.lr = value(key, raw)?,
            "rnd_lr" => self.rnd_lr = value(key, raw)?,
            "sigma_init" => self.sigma_init = value(key, raw)?,
            "sigma_margin" => self.sigma_margin = value(key, raw)?,
            "sigma_window" => self.sigma_window = value(key, raw)?,
            "sigma_min_score" => self.sigma_min_score = value(key, raw)?,
            "output_dir" => self.output_dir = PathBuf::from(raw),
            "prior" => self.prior = PathBuf::from(raw),
            _ => return Err(ConfigError::UnknownKey { line: 0, key: key.into() }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: &str| Err(ConfigError::Value { key: key.into(), msg: msg.into() });
        let counts = [
            ("steps", self.steps),
            ("batch_size", self.batch_size),
            ("reruns", self.reruns),
            ("embedding_dim", self.embedding_dim),
            ("hidden_dim", self.hidden_dim),
            ("layers", self.layers),
            ("sigma_window", self.sigma_window),
        ];
        for (key, v) in counts {
            if v == 0 {
                return bad(key, "must be positive");
            }
        }
        if self.max_length < 2 {
            return bad("max_length", "must be at least 2");
        }
        let rates = [
            ("lr", self.lr),
            ("rnd_lr", self.rnd_lr),
            ("sigma_init", self.sigma_init),
            ("sigma_margin", self.sigma_margin),
            ("sigma_min_score", self.sigma_min_score),
        ];
        for (key, v) in rates {
            if !(v > 0.0 && v.is_finite()) {
                return bad(key, "must be positive and finite");
            }
        }
        self.shaping()
            .validate()
            .map_err(|msg| ConfigError::Value { key: "shaping".into(), msg })
    }

    pub fn shaping(&self) -> ShapingParams<f64> {
        ShapingParams {
            active_threshold: self.active_threshold,
            bucket_size: self.bucket_size,
            distance_threshold: self.distance_threshold,
            klucb_c: self.klucb_c,
            tanh_c: self.tanh_c,
            coreset_size: self.coreset_size,
        }
    }

    pub fn sigma(&self) -> SigmaParams<f64> {
        SigmaParams {
            sigma_init: self.sigma_init,
            margin: self.sigma_margin,
            window: self.sigma_window,
            min_score: self.sigma_min_score,
        }
    }

    pub fn dims(&self) -> NetDims {
        NetDims {
            vocab: Vocabulary.len(),
            embedding: self.embedding_dim,
            hidden: self.hidden_dim,
            layers: self.layers,
        }
    }

    /// Seed of rerun `k`.
    pub fn rerun_seed(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }
}

impl fmt::Display for RunConfig {
    /// The text format, one key per line, parseable by [`RunConfig::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn fmt::Display| writeln!(out, "{k} = {v}");
        kv("oracle", &self.oracle)?;
        kv("strategy", &self.strategy)?;
        kv("steps", &self.steps)?;
        kv("batch_size", &self.batch_size)?;
        kv("max_length", &self.max_length)?;
        kv("seed", &self.seed)?;
        kv("reruns", &self.reruns)?;
        kv("active_threshold", &self.active_threshold)?;
        kv("bucket_size", &self.bucket_size)?;
        kv("distance_threshold", &self.distance_threshold)?;
        kv("klucb_c", &self.klucb_c)?;
        kv("tanh_c", &self.tanh_c)?;
        kv("coreset_size", &self.coreset_size)?;
        kv("embedding_dim", &self.embedding_dim)?;
        kv("hidden_dim", &self.hidden_dim)?;
        kv("layers", &self.layers)?;
        kv("lr", &self.lr)?;
        kv("rnd_lr", &self.rnd_lr)?;
        kv("sigma_init", &self.sigma_init)?;
        kv("sigma_margin", &self.sigma_margin)?;
        kv("sigma_window", &self.sigma_window)?;
        kv("sigma_min_score", &self.sigma_min_score)?;
        kv("output_dir", &self.output_dir.display())?;
        kv("prior", &self.prior.display())?;
        f.write_str(&out)
    }
}

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use divrl_core::chem::parse;
use divrl_core::diversity::{count_scaffolds, diverse_actives_count};
use divrl_core::oracle::{OracleError, OracleSpec};
use divrl_core::policy::{
    checkpoint, log_likelihood, sample_batch, step_towards, Adam, PolicyError, PolicyNet,
    SigmaState, Trajectory,
};
use divrl_core::rnd::{rnd_train, RndState};
use divrl_core::shaping::{shape_batch, ScaffoldMemory, Scored};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

pub const CSV_HEADER: [&str; 10] = [
    "step",
    "mean_extrinsic",
    "mean_shaped",
    "actives",
    "mol_scaffolds",
    "topo_scaffolds",
    "diverse_actives",
    "sigma",
    "loss",
    "valid_frac",
];

/// Offset between a run seed and the seed of its RND fixed network.
const RND_SEED_SALT: u64 = 0x72_6e_64;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("prior: {0}")]
    Prior(PolicyError),
    #[error("run with seed {seed} aborted at step {step}: {source}")]
    Aborted { seed: u64, step: usize, source: PolicyError },
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

impl RunError {
    /// Configuration problems exit with 2, everything else with 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Oracle(_) => 2,
            _ => 3,
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        RunError::Io { path: path.display().to_string(), msg: e.to_string() }
    }
}

/// One row of the per-step log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub mean_extrinsic: f64,
    pub mean_shaped: f64,
    pub actives: usize,
    pub mol_scaffolds: usize,
    pub topo_scaffolds: usize,
    pub diverse_actives: usize,
    pub sigma: f64,
    pub loss: f64,
    pub valid_frac: f64,
}

impl StepRecord {
    pub fn fields(&self) -> [String; 10] {
        [
            self.step.to_string(),
            self.mean_extrinsic.to_string(),
            self.mean_shaped.to_string(),
            self.actives.to_string(),
            self.mol_scaffolds.to_string(),
            self.topo_scaffolds.to_string(),
            self.diverse_actives.to_string(),
            self.sigma.to_string(),
            self.loss.to_string(),
            self.valid_frac.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub records: Vec<StepRecord>,
}

impl RunSummary {
    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }

    pub fn final_counts(&self) -> (usize, usize, usize, usize) {
        self.last().map_or((0, 0, 0, 0), |r| {
            (r.actives, r.mol_scaffolds, r.topo_scaffolds, r.diverse_actives)
        })
    }

    /// Mean extrinsic reward over the last `k` steps.
    pub fn trailing_reward(&self, k: usize) -> f64 {
        let tail = &self.records[self.records.len().saturating_sub(k)..];
        tail.iter().map(|r| r.mean_extrinsic).sum::<f64>() / tail.len().max(1) as f64
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// State of a single generative run.
pub struct Experiment<'a> {
    config: &'a RunConfig,
    prior: &'a PolicyNet<f64>,
    oracle: OracleSpec<f64>,
    pub agent: PolicyNet<f64>,
    optimizer: Adam<f64>,
    pub memory: ScaffoldMemory<f64>,
    pub sigma: SigmaState<f64>,
    pub rnd: Option<RndState<f64>>,
    rng: ChaCha8Rng,
    step: usize,
}

impl<'a> Experiment<'a> {
    pub fn new(config: &'a RunConfig, prior: &'a PolicyNet<f64>, seed: u64) -> Result<Self, RunError> {
        config.validate()?;
        if prior.dims() != config.dims() {
            return Err(RunError::Prior(PolicyError::Checkpoint(format!(
                "prior has shape {:?}, config asks for {:?}",
                prior.dims(),
                config.dims()
            ))));
        }
        let oracle = config.oracle.load()?;
        let rnd = config
            .strategy
            .uses_rnd()
            .then(|| RndState::new(prior, seed ^ RND_SEED_SALT, config.rnd_lr));
        Ok(Experiment {
            config,
            prior,
            oracle,
            agent: prior.clone(),
            optimizer: Adam::new(prior.params().len(), config.lr),
            memory: ScaffoldMemory::new(),
            sigma: SigmaState::new(&config.sigma()),
            rnd,
            rng: ChaCha8Rng::seed_from_u64(seed),
            step: 0,
        })
    }

    /// sample → score → shape → learn → σ update.
    pub fn step(&mut self) -> Result<StepRecord, PolicyError> {
        let cfg = self.config;
        let batch: Vec<Trajectory<f64>> =
            sample_batch(&self.agent, cfg.batch_size, cfg.max_length, &mut self.rng);
        let scored: Vec<Scored<f64>> = batch
            .par_iter()
            .map(|t| {
                let graph = if t.truncated { None } else { parse(t.body()).ok() };
                let reward = self.oracle.score(graph.as_ref());
                Scored { tokens: t.tokens.clone(), graph, reward }
            })
            .collect();
        let extrinsic: Vec<f64> = scored.iter().map(|s| s.reward).collect();
        let valid = scored.iter().filter(|s| s.graph.is_some()).count();

        let outcome = shape_batch(
            cfg.strategy,
            &cfg.shaping(),
            &mut self.memory,
            &scored,
            self.rnd.as_ref(),
            &mut self.rng,
        );

        let sigma = self.sigma.sigma;
        let targets: Vec<f64> = batch
            .par_iter()
            .zip(&outcome.shaped)
            .map(|(t, &r)| log_likelihood(self.prior, &t.tokens) + sigma * r)
            .collect();
        let gaps: Vec<f64> =
            targets.iter().zip(&batch).map(|(&y, t)| y - t.agent_loglik).collect();
        let loss = step_towards(&mut self.agent, &mut self.optimizer, &batch, &targets)?;

        if let Some(rnd) = self.rnd.as_mut() {
            let actives: Vec<_> =
                outcome.new_actives.iter().map(|&i| batch[i].tokens.clone()).collect();
            rnd_train(rnd, &actives)?;
        }

        self.sigma.record(&gaps, &extrinsic);
        if self.sigma.update(&cfg.sigma()) {
            self.agent = self.prior.clone();
            self.optimizer.reset();
        }

        self.step += 1;
        let (mol, topo) = count_scaffolds(&self.memory);
        Ok(StepRecord {
            step: self.step,
            mean_extrinsic: mean(&extrinsic),
            mean_shaped: mean(&outcome.shaped),
            actives: self.memory.actives().len(),
            mol_scaffolds: mol,
            topo_scaffolds: topo,
            diverse_actives: diverse_actives_count(&self.memory),
            sigma: self.sigma.sigma,
            loss,
            valid_frac: valid as f64 / batch.len() as f64,
        })
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// Runs one seed for `config.steps` steps, streaming rows to `out`. Rows
/// completed before an abort are flushed.
pub fn run_single<W: Write>(
    config: &RunConfig,
    prior: &PolicyNet<f64>,
    seed: u64,
    out: W,
) -> Result<(RunSummary, PolicyNet<f64>), RunError> {
    let mut exp = Experiment::new(config, prior, seed)?;
    let mut wtr = csv_writer(out);
    let io = |e: csv::Error| RunError::Io { path: format!("seed {seed} log"), msg: e.to_string() };
    wtr.write_record(CSV_HEADER).map_err(io)?;
    let mut records = Vec::with_capacity(config.steps);
    for _ in 0..config.steps {
        match exp.step() {
            Ok(rec) => {
                wtr.write_record(rec.fields()).map_err(io)?;
                records.push(rec);
            }
            Err(source) => {
                wtr.flush().map_err(|e| RunError::Io { path: format!("seed {seed} log"), msg: e.to_string() })?;
                return Err(RunError::Aborted { seed, step: records.len() + 1, source });
            }
        }
    }
    wtr.flush().map_err(|e| RunError::Io { path: format!("seed {seed} log"), msg: e.to_string() })?;
    Ok((RunSummary { seed, records }, exp.agent))
}

/// Per-rerun artifact paths inside the output directory.
pub fn csv_path(config: &RunConfig, seed: u64) -> PathBuf {
    config.output_dir.join(format!("{}_seed{seed}.csv", config.strategy))
}

pub fn load_prior(config: &RunConfig) -> Result<PolicyNet<f64>, RunError> {
    checkpoint::load(&config.prior).map_err(RunError::Prior)
}

/// Loads the prior named by the config and runs every rerun.
pub fn run(config: &RunConfig) -> Result<Vec<RunSummary>, RunError> {
    config.validate()?;
    config.oracle.load::<f64>()?;
    let prior = load_prior(config)?;
    run_with_prior(config, &prior)
}

/// Runs reruns `seed, seed+1, …` in parallel, writing a CSV and an agent
/// checkpoint per rerun plus a summary table.
pub fn run_with_prior(config: &RunConfig, prior: &PolicyNet<f64>) -> Result<Vec<RunSummary>, RunError> {
    config.validate()?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let config_path = dir.join(format!("{}_config.txt", config.strategy));
    std::fs::write(&config_path, config.to_string()).map_err(|e| RunError::io(&config_path, e))?;

    let results: Vec<Result<RunSummary, RunError>> = (0..config.reruns)
        .into_par_iter()
        .map(|k| {
            let seed = config.rerun_seed(k);
            let path = csv_path(config, seed);
            let file = File::create(&path).map_err(|e| RunError::io(&path, e))?;
            let (summary, agent) = run_single(config, prior, seed, BufWriter::new(file))?;
            let ckpt = path.with_extension("ckpt");
            checkpoint::save(&agent, &ckpt).map_err(|e| RunError::io(&ckpt, e))?;
            log::info!(
                "{} seed {seed}: final (actives, mol, topo, diverse) = {:?}",
                config.strategy,
                summary.final_counts()
            );
            Ok(summary)
        })
        .collect();
    let summaries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_summary(&dir.join(format!("{}_summary.csv", config.strategy)), &summaries)?;
    Ok(summaries)
}

fn write_summary(path: &Path, summaries: &[RunSummary]) -> Result<(), RunError> {
    let file = File::create(path).map_err(|e| RunError::io(path, e))?;
    let mut wtr = csv_writer(BufWriter::new(file));
    let err = |e: csv::Error| RunError::io(path, e);
    wtr.write_record(["seed", "actives", "mol_scaffolds", "topo_scaffolds", "diverse_actives"])
        .map_err(err)?;
    for s in summaries {
        let (a, m, t, d) = s.final_counts();
        wtr.write_record([s.seed.to_string(), a.to_string(), m.to_string(), t.to_string(), d.to_string()])
            .map_err(err)?;
    }
    wtr.flush().map_err(|e| RunError::io(path, e))
}

/// Reads a per-step log back.
pub fn read_log(path: &Path) -> Result<Vec<StepRecord>, RunError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| RunError::io(path, e))?;
    let headers = rdr.headers().map_err(|e| RunError::io(path, e))?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(RunError::io(path, "unexpected header"));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| RunError::io(path, e))?;
        let f = |i: usize| -> Result<f64, RunError> {
            row[i].parse::<f64>().map_err(|e| RunError::io(path, e))
        };
        let u = |i: usize| -> Result<usize, RunError> {
            row[i].parse::<usize>().map_err(|e| RunError::io(path, e))
        };
        out.push(StepRecord {
            step: u(0)?,
            mean_extrinsic: f(1)?,
            mean_shaped: f(2)?,
            actives: u(3)?,
            mol_scaffolds: u(4)?,
            topo_scaffolds: u(5)?,
            diverse_actives: u(6)?,
            sigma: f(7)?,
            loss: f(8)?,
            valid_frac: f(9)?,
        });
    }
    Ok(out)
}

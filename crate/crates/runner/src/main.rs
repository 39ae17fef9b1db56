use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use divrl_core::chem::Vocabulary;
use divrl_core::policy::{checkpoint, validity_rate, sample_batch, NetDims};
use divrl_runner::compare::write_comparison;
use divrl_runner::config::RunConfig;
use divrl_runner::run::{read_log, run, RunError, CSV_HEADER};
use divrl_runner::svg::{line_chart, Series};
use divrl_runner::{read_corpus, synthetic_corpus, train_prior, DEFAULT_CORPUS_SIZE, DEFAULT_EPOCHS};
use rand::SeedableRng;

#[derive(Parser)]
#[command(name = "divrl", about = "Diversity-aware RL for molecule generation", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a prior policy and write its checkpoint.
    Pretrain {
        /// Molecule corpus, one line per molecule.
        #[arg(long, conflicts_with = "generate")]
        corpus: Option<PathBuf>,
        /// Generate a synthetic corpus of this many molecules instead.
        #[arg(long)]
        generate: Option<usize>,
        /// Also write the generated corpus here.
        #[arg(long, requires = "generate")]
        write_corpus: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EPOCHS)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        embedding_dim: usize,
        #[arg(long, default_value_t = 64)]
        hidden_dim: usize,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run every rerun of one configuration.
    Run {
        config: PathBuf,
        /// Override a config entry, `key=value`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run several configurations and compare their diversity metrics.
    Compare {
        configs: Vec<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Plot one column of per-step logs.
    Plot {
        logs: Vec<PathBuf>,
        #[arg(long, default_value = "mean_extrinsic")]
        column: String,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn load_config(path: &PathBuf, overrides: &[String]) -> Result<RunConfig, RunError> {
    let mut cfg = RunConfig::load(path)?;
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or(divrl_runner::ConfigError::Syntax { line: 0 })?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn pretrain_cmd(
    corpus: Option<PathBuf>,
    generate: Option<usize>,
    write_corpus: Option<PathBuf>,
    epochs: usize,
    seed: u64,
    dims: NetDims,
    out: PathBuf,
) -> anyhow::Result<()> {
    let lines = match (corpus, generate) {
        (Some(path), _) => read_corpus(&path).with_context(|| format!("corpus {}", path.display()))?,
        (None, n) => synthetic_corpus(n.unwrap_or(DEFAULT_CORPUS_SIZE), seed),
    };
    if let Some(path) = write_corpus {
        std::fs::write(&path, lines.join("\n") + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    log::info!("pretraining on {} molecules for {epochs} epochs", lines.len());
    let net = train_prior(&lines, dims, epochs, seed)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let validity = validity_rate(&sample_batch(&net, 1000, 40, &mut rng));
    println!("valid samples: {:.1}%", 100.0 * validity);
    checkpoint::save(&net, &out)?;
    Ok(())
}

fn plot_cmd(logs: &[PathBuf], column: &str, out: &PathBuf) -> anyhow::Result<()> {
    let idx = CSV_HEADER
        .iter()
        .position(|c| *c == column)
        .with_context(|| format!("unknown column {column:?}"))?;
    let mut series = Vec::new();
    for path in logs {
        let rows = read_log(path)?;
        let values = rows.iter().map(|r| r.fields()[idx].parse::<f64>().unwrap_or(f64::NAN)).collect();
        let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        series.push(Series { label, values });
    }
    std::fs::write(out, line_chart(column, "step", &series))?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result: anyhow::Result<()> = match cli.command {
        Command::Pretrain { corpus, generate, write_corpus, epochs, seed, embedding_dim, hidden_dim, layers, out } => {
            let dims = NetDims { vocab: Vocabulary.len(), embedding: embedding_dim, hidden: hidden_dim, layers };
            pretrain_cmd(corpus, generate, write_corpus, epochs, seed, dims, out)
        }
        Command::Run { config, overrides } => load_config(&config, &overrides)
            .and_then(|cfg| run(&cfg))
            .map(|runs| {
                for r in &runs {
                    let (a, m, t, d) = r.final_counts();
                    println!("seed {}: actives {a}, molecular scaffolds {m}, topological scaffolds {t}, diverse actives {d}", r.seed);
                }
            })
            .map_err(anyhow::Error::from),
        Command::Compare { configs, out } => (|| {
            let mut groups = Vec::new();
            for path in &configs {
                let cfg = load_config(path, &[])?;
                let label = format!("{}#{}", cfg.strategy, groups.len());
                groups.push((label, run(&cfg)?));
            }
            write_comparison(&out, &groups)?;
            Ok::<_, RunError>(())
        })()
        .map_err(anyhow::Error::from),
        Command::Plot { logs, column, out } => plot_cmd(&logs, &column, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<RunError>().map_or(3, RunError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

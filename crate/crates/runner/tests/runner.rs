use std::path::Path;
use std::process::Command;

use divrl_core::chem::Vocabulary;
use divrl_core::policy::{checkpoint, NetDims, PolicyError, PolicyNet};
use divrl_runner::config::RunConfig;
use divrl_runner::run::{csv_path, read_log, run_single, run_with_prior};
use divrl_runner::{read_corpus, synthetic_corpus, train_prior, Experiment, RunError, CSV_HEADER};
use tempfile::TempDir;

fn small_config(dir: &Path) -> RunConfig {
    let mut cfg = RunConfig::default();
    for (k, v) in [
        ("steps", "6"),
        ("batch_size", "8"),
        ("reruns", "2"),
        ("embedding_dim", "8"),
        ("hidden_dim", "16"),
        ("layers", "1"),
        ("max_length", "24"),
    ] {
        cfg.set(k, v).unwrap();
    }
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn prior(cfg: &RunConfig) -> PolicyNet<f64> {
    PolicyNet::random(cfg.dims(), 42)
}

fn trained_prior(cfg: &RunConfig) -> PolicyNet<f64> {
    train_prior(&synthetic_corpus(400, 1), cfg.dims(), 2, 0).unwrap()
}

/// An oracle under which every valid carbon-bearing molecule is active.
fn always_active(dir: &Path) -> String {
    let path = dir.join("always.txt");
    std::fs::write(&path, "contains_element C 1\n").unwrap();
    format!("file:{}", path.display())
}

fn run_to_bytes(cfg: &RunConfig, net: &PolicyNet<f64>, seed: u64) -> Vec<u8> {
    let mut out = Vec::new();
    run_single(cfg, net, seed, &mut out).unwrap();
    out
}

#[test]
fn one_step_writes_header_and_one_row() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_config(tmp.path());
    cfg.set("steps", "1").unwrap();
    cfg.set("batch_size", "2").unwrap();
    let text = String::from_utf8(run_to_bytes(&cfg, &prior(&cfg), 0)).unwrap();
    let lines: Vec<&str> = text.split_terminator('\n').collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert!(lines[1].starts_with("1,"));
    assert!(!text.contains('\r'));
}

#[test]
fn same_seed_same_bytes() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_config(tmp.path());
    cfg.strategy = "tanh_rnd".parse().unwrap();
    let net = prior(&cfg);
    let a = run_to_bytes(&cfg, &net, 5);
    assert_eq!(a, run_to_bytes(&cfg, &net, 5));
    assert_ne!(a, run_to_bytes(&cfg, &net, 6));
}

#[test]
fn reruns_write_logs_checkpoints_and_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let net = prior(&cfg);
    let runs = run_with_prior(&cfg, &net).unwrap();
    assert_eq!(runs.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![0, 1]);
    for r in &runs {
        let path = csv_path(&cfg, r.seed);
        assert_eq!(read_log(&path).unwrap(), r.records);
        let agent: PolicyNet<f64> = checkpoint::load(&path.with_extension("ckpt")).unwrap();
        assert_eq!(agent.dims(), cfg.dims());
    }
    assert!(tmp.path().join("none_summary.csv").exists());
    let saved = RunConfig::load(&tmp.path().join("none_config.txt")).unwrap();
    assert_eq!(saved, cfg);
}

#[test]
fn cumulative_columns_never_decrease() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_config(tmp.path());
    cfg.set("oracle", &always_active(tmp.path())).unwrap();
    cfg.set("steps", "15").unwrap();
    cfg.strategy = "ims".parse().unwrap();
    let net = trained_prior(&cfg);
    let (summary, _) = run_single(&cfg, &net, 3, std::io::sink()).unwrap();
    assert!(summary.final_counts().0 > 0);
    for w in summary.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(b.actives >= a.actives);
        assert!(b.mol_scaffolds >= a.mol_scaffolds);
        assert!(b.topo_scaffolds >= a.topo_scaffolds);
        assert!(b.diverse_actives >= a.diverse_actives);
        assert!(b.sigma >= a.sigma);
        assert_eq!(b.step, a.step + 1);
    }
}

#[test]
fn truncated_rollouts_never_enter_memory() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_config(tmp.path());
    cfg.set("oracle", &always_active(tmp.path())).unwrap();
    // room for START and a single token: every non-empty body is truncated
    cfg.set("max_length", "2").unwrap();
    let net = prior(&cfg);
    let mut exp = Experiment::new(&cfg, &net, 0).unwrap();
    for _ in 0..4 {
        let rec = exp.step().unwrap();
        assert_eq!(rec.valid_frac, 0.0);
        assert_eq!(rec.mean_extrinsic, -1.0);
    }
    assert!(exp.memory.actives().is_empty());
}

#[test]
fn aborted_run_keeps_completed_rows() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = small_config(tmp.path());
    // the first update pushes the weights past the floating-point range
    cfg.set("lr", "1e300").unwrap();
    let mut out = Vec::new();
    let err = run_single(&cfg, &prior(&cfg), 0, &mut out).unwrap_err();
    let RunError::Aborted { step, source, .. } = &err else { panic!("{err}") };
    assert_eq!(*source, PolicyError::NonFiniteGradient);
    assert_eq!(err.exit_code(), 3);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), *step, "header plus every completed row");
}

#[test]
fn prior_shape_mismatch_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let other = PolicyNet::<f64>::random(NetDims { vocab: Vocabulary.len(), embedding: 4, hidden: 4, layers: 1 }, 1);
    assert!(matches!(Experiment::new(&cfg, &other, 0), Err(RunError::Prior(_))));
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_config(tmp.path());
    let net = prior(&cfg);
    let path = tmp.path().join("p.ckpt");
    checkpoint::save(&net, &path).unwrap();
    let back: PolicyNet<f64> = checkpoint::load(&path).unwrap();
    assert_eq!(back.params(), net.params());
    assert_eq!(back.param_hash(), net.param_hash());
}

#[test]
fn missing_or_blank_corpus_is_empty() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(read_corpus(&tmp.path().join("absent.txt")), Err(PolicyError::CorpusEmpty));
    let blank = tmp.path().join("blank.txt");
    std::fs::write(&blank, "\n  \n").unwrap();
    assert_eq!(read_corpus(&blank), Err(PolicyError::CorpusEmpty));
}

fn divrl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_divrl")).args(args).env("RUST_LOG", "error").output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "steps = zero\n").unwrap();
    assert_eq!(divrl(&["run", bad.to_str().unwrap()]).status.code(), Some(2));

    let unknown = dir.join("unknown.txt");
    std::fs::write(&unknown, "strategy = everything\n").unwrap();
    assert_eq!(divrl(&["run", unknown.to_str().unwrap()]).status.code(), Some(2));

    let no_prior = dir.join("no_prior.txt");
    std::fs::write(&no_prior, format!("prior = {}\noutput_dir = {}\n", dir.join("none.ckpt").display(), dir.display()))
        .unwrap();
    assert_eq!(divrl(&["run", no_prior.to_str().unwrap()]).status.code(), Some(3));

    let missing = dir.join("missing.txt");
    let out = divrl(&["pretrain", "--corpus", missing.to_str().unwrap(), "-o", dir.join("p.ckpt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn cli_pretrain_then_run() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let ckpt = dir.join("prior.ckpt");
    let corpus = dir.join("corpus.txt");
    let out = divrl(&[
        "pretrain", "--generate", "300", "--write-corpus", corpus.to_str().unwrap(), "--epochs", "1",
        "--embedding-dim", "8", "--hidden-dim", "16", "--layers", "1", "-o", ckpt.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid samples"));
    assert_eq!(std::fs::read_to_string(&corpus).unwrap().lines().count(), 300);

    let cfg = dir.join("run.txt");
    std::fs::write(
        &cfg,
        format!(
            "steps = 3\nbatch_size = 4\nreruns = 1\nembedding_dim = 8\nhidden_dim = 16\nlayers = 1\nprior = {}\noutput_dir = {}\n",
            ckpt.display(),
            dir.join("out").display()
        ),
    )
    .unwrap();
    let out = divrl(&["run", cfg.to_str().unwrap(), "--set", "strategy=tanh_inf"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = dir.join("out").join("tanh_inf_seed0.csv");
    assert_eq!(read_log(&log).unwrap().len(), 3);

    let svg = dir.join("plot.svg");
    let out = divrl(&["plot", log.to_str().unwrap(), "--column", "sigma", "-o", svg.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let cmp = dir.join("cmp");
    let out = divrl(&["compare", cfg.to_str().unwrap(), cfg.to_str().unwrap(), "-o", cmp.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["comparison.csv", "reward_curves.csv", "reward.svg", "mol_scaffolds.svg"] {
        assert!(cmp.join(f).exists(), "{f}");
    }
}

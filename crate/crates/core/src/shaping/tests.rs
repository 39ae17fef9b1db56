use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::chem::{parse_str, Vocabulary};
use crate::policy::{NetDims, PolicyNet};

fn scored(line: &str, reward: f64) -> Scored<f64> {
    let graph = parse_str(line).ok();
    let tokens = Vocabulary.encode_framed(line).unwrap();
    let reward = if graph.is_some() { reward } else { -1.0 };
    Scored { tokens, graph, reward }
}

fn run(strategy: StrategyId, memory: &mut ScaffoldMemory<f64>, batch: &[Scored<f64>]) -> Vec<f64> {
    let params = ShapingParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let rnd = strategy.uses_rnd().then(|| {
        let prior = PolicyNet::random(NetDims { vocab: Vocabulary.len(), embedding: 4, hidden: 8, layers: 1 }, 1);
        RndState::new(&prior, 2, 1e-3)
    });
    shape_batch(strategy, &params, memory, batch, rnd.as_ref(), &mut rng).shaped
}

fn bits(range: impl IntoIterator<Item = usize>) -> Fingerprint {
    Fingerprint::from_bits(64, range)
}

/// Cyclohexane with a carbon chain of length `k`: distinct molecules, one
/// scaffold.
fn ring_with_chain(k: usize) -> String {
    format!("C1CCCCC1{}", "C".repeat(k))
}

#[test]
fn strategy_names_round_trip() {
    for id in StrategyId::ALL {
        assert_eq!(id.name().parse::<StrategyId>().unwrap(), id);
    }
    assert!("tanhrnd".parse::<StrategyId>().is_err());
}

#[test]
fn default_params_are_valid() {
    assert!(ShapingParams::<f64>::default().validate().is_ok());
    let bad = ShapingParams { active_threshold: 1.0, ..ShapingParams::<f64>::default() };
    assert!(bad.validate().is_err());
}

#[test]
fn no_shaping_is_identity() {
    let mut mem = ScaffoldMemory::new();
    let batch = [scored("CCO", 0.3), scored("C1CCNCC1", 0.7), scored("C1CC", 0.0)];
    assert_eq!(run(StrategyId::None, &mut mem, &batch), vec![0.3, 0.7, -1.0]);
    assert_eq!(mem.actives().len(), 1);
    assert_eq!(mem.n_total(), 3);
}

#[test]
fn repeats_get_zero_under_every_strategy() {
    for id in StrategyId::ALL {
        let mut mem = ScaffoldMemory::new();
        // the second line is the same molecule written differently
        let batch = [scored("C1CCNCC1O", 0.9), scored("OC1CCCNC1", 0.9)];
        let shaped = run(id, &mut mem, &batch);
        assert_eq!(shaped[1], 0.0, "{id}");
        let later = run(id, &mut mem, &[scored("C1CCNCC1O", 0.9)]);
        assert_eq!(later, vec![0.0], "{id}");
        assert_eq!(mem.actives().len(), 1);
    }
}

#[test]
fn invalid_molecules_never_enter_memory() {
    for id in StrategyId::ALL {
        let mut mem = ScaffoldMemory::new();
        let shaped = run(id, &mut mem, &[scored("C1CC", 1.0), scored("C(", 1.0)]);
        assert_eq!(shaped, vec![-1.0, -1.0]);
        assert!(mem.actives().is_empty());
        assert_eq!(mem.n_total(), 2);
    }
}

#[test]
fn bucket_fills_under_ims() {
    let mut mem = ScaffoldMemory::new();
    let batch: Vec<_> = (0..26).map(|k| scored(&ring_with_chain(k), 1.0)).collect();
    let shaped = run(StrategyId::Ims, &mut mem, &batch);
    assert!(shaped[..24].iter().all(|&r| r == 1.0));
    assert_eq!(shaped[24], 0.0);
    assert_eq!(shaped[25], 0.0);
    // a fresh scaffold is not affected
    let other = run(StrategyId::Ims, &mut mem, &[scored("C1CCC1", 1.0)]);
    assert_eq!(other, vec![1.0]);
}

#[test]
fn non_actives_pass_through_exactly() {
    for id in StrategyId::ALL {
        let mut mem = ScaffoldMemory::new();
        let shaped = run(id, &mut mem, &[scored("CCO", 0.49), scored("C1CCCCC1", 0.1)]);
        assert_eq!(shaped, vec![0.49, 0.1], "{id}");
    }
}

#[test]
fn tanh_penalty_on_the_first_active_is_one() {
    let mut mem = ScaffoldMemory::new();
    assert_eq!(run(StrategyId::TanhIms, &mut mem, &[scored("C1CCCCC1", 0.8)]), vec![0.8]);
}

#[test]
fn da_examples() {
    let d = 0.7;
    assert_eq!(intrinsic_da::<f64>(&[], &[bits(0..4)], d), 1);
    let base = [bits(0..10)];
    assert_eq!(intrinsic_da::<f64>(&base, &[bits(0..9), bits(1..10)], d), 0);
    assert_eq!(intrinsic_da::<f64>(&base, &[bits(20..30), bits(40..50)], d), 2);
}

#[test]
fn da_adds_the_same_bonus_to_every_new_active() {
    let mut mem = ScaffoldMemory::new();
    let shaped = run(StrategyId::Da, &mut mem, &[scored("C1CCCCC1", 0.6), scored("SC1=NC=CS1", 0.7)]);
    assert!((shaped[0] - 2.6).abs() < 1e-12);
    assert!((shaped[1] - 2.7).abs() < 1e-12);
    assert_eq!(mem.diverse_set().len(), 2);
}

#[test]
fn distance_bonus_examples() {
    let a = bits(0..10);
    // distances 0.3 and 0.9 from `a`
    let near = bits(0..7);
    let far = bits([0]);
    assert!((intrinsic_mindis::<f64>(&[near.clone()], &[a.clone(), far.clone()], 0) - 0.3).abs() < 1e-12);
    assert_eq!(intrinsic_mindis::<f64>(&[], &[a.clone()], 0), 1.0);
    assert_eq!(intrinsic_mindis::<f64>(&[a.clone()], &[a.clone()], 0), 0.0);
    // distances 0.2 and 0.8
    let pair = [bits(0..8), bits(0..2)];
    assert!((intrinsic_meandis::<f64>(&pair, &[a.clone()], 0) - 0.5).abs() < 1e-12);
    let four = bits(0..6);
    assert!((intrinsic_meandis::<f64>(&[four], &[a.clone()], 0) - 0.4).abs() < 1e-12);
    assert_eq!(intrinsic_meandis::<f64>(&[], &[a], 0), 1.0);
}

#[test]
fn coreset_uses_all_actives_when_few() {
    let mut mem = ScaffoldMemory::<f64>::new();
    run(StrategyId::None, &mut mem, &[scored("C1CCCCC1", 0.9), scored("C1CCC1N", 0.9)]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(sample_coreset(mem.actives(), 5000, &mut rng).len(), 2);
    assert_eq!(sample_coreset(mem.actives(), 1, &mut rng).len(), 1);
}

#[test]
fn coreset_equal_to_diverse_set_reproduces_min_dis() {
    let reference = [bits(0..10), bits(30..40)];
    let batch = [bits(0..12), bits(30..35)];
    for a in 0..2 {
        let direct: f64 = intrinsic_mindis(&reference, &batch, a);
        let via: f64 = intrinsic_mindis(&reference.to_vec(), &batch, a);
        assert_eq!(direct, via);
    }
}

#[test]
fn inf_examples() {
    assert!((inf_raw::<f64>(1, 10) - 10f64.ln()).abs() < 1e-12);
    assert_eq!(inf_raw::<f64>(5, 1), 0.0);
    let raw = [10f64.ln(), 2f64.ln(), 5f64.ln()];
    let norm = intrinsic_inf(&raw);
    assert!((norm[0] - 1.0).abs() < 1e-12);
    assert!(norm[1].abs() < 1e-12);
    assert!((norm[2] - 0.569_323_900_376_869_4).abs() < 1e-6);
    assert_eq!(intrinsic_inf(&[1.5, 0.5]), vec![1.5, 0.5]);
    assert_eq!(intrinsic_inf(&[0.3, 0.3, 0.3]), vec![0.0; 3]);
}

#[test]
fn klucb_from_memory() {
    let mut mem = ScaffoldMemory::new();
    let batch: Vec<_> = (0..40).map(|k| scored(&format!("{}O", "C".repeat(k + 1)), 0.2)).collect();
    run(StrategyId::None, &mut mem, &batch);
    let shaped = run(StrategyId::KlUcb, &mut mem, &[scored("C1CCCCC1N", 0.8)]);
    assert!(shaped[0] >= 0.8);
    let mut all_one = ScaffoldMemory::new();
    let ones = run(StrategyId::KlUcb, &mut all_one, &[scored("C1CCCCC1", 1.0), scored("C1CCCCC1C", 1.0)]);
    assert_eq!(ones, vec![1.0, 1.0]);
}

#[test]
fn tanh_rnd_composition() {
    let expected = 1.0 - 3f64.tanh() + 1.0;
    let shaped = StrategyId::TanhRnd.penalty::<f64>(26, &ShapingParams::default()) * 1.0 + 1.0;
    assert!((shaped - expected).abs() < 1e-12);
    assert!((shaped - 1.00494).abs() < 1e-5);
}

#[test]
fn first_active_under_tanh_rnd_has_no_bonus() {
    let mut mem = ScaffoldMemory::new();
    assert_eq!(run(StrategyId::TanhRnd, &mut mem, &[scored("C1CCCCC1", 0.7)]), vec![0.7]);
}

#[test]
fn memory_counts_track_actives() {
    let mut mem = ScaffoldMemory::new();
    let batch = [
        scored("C1CCCCC1C", 0.9),
        scored("C1CCCCC1CC", 0.9),
        scored("C1CCNCC1", 0.6),
        scored("CCN", 0.8),
        scored("CCO", 0.2),
    ];
    run(StrategyId::None, &mut mem, &batch);
    assert_eq!(mem.actives().len(), 4);
    assert_eq!(mem.molecular_scaffolds().len(), 3);
    assert_eq!(mem.topological_scaffolds().len(), 2);
    let ring = &mem.actives()[0].molecular.canonical;
    let stats = mem.stats(ring);
    assert_eq!(stats.count, 2);
    assert!((stats.reward_sum - 1.8).abs() < 1e-12);
}

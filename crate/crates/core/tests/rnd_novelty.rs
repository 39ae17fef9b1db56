use divrl_core::chem::generate::{generate_corpus, GeneratorParams};
use divrl_core::chem::{parse_str, Token, Vocabulary};
use divrl_core::policy::{NetDims, PolicyNet};
use divrl_core::rnd::{rnd_delta, rnd_train, RndState};

fn framed(lines: &[String]) -> Vec<Vec<Token>> {
    lines.iter().map(|l| Vocabulary.encode_framed(l).unwrap()).collect()
}

fn mean_delta(state: &RndState<f64>, seqs: &[Vec<Token>]) -> f64 {
    seqs.iter().map(|t| rnd_delta(state, t)).sum::<f64>() / seqs.len() as f64
}

#[test]
fn unseen_structure_class_is_more_novel() {
    let chains = GeneratorParams { max_rings: 0, min_atoms: 6, max_atoms: 12, ..GeneratorParams::default() };
    let rings = GeneratorParams { max_rings: 2, min_atoms: 8, max_atoms: 14, ring_sizes: vec![5, 6], ..GeneratorParams::default() };
    let familiar = framed(&generate_corpus(400, 1, &chains));
    let held_out = framed(&generate_corpus(150, 2, &chains));
    let novel: Vec<Vec<Token>> = framed(&generate_corpus(600, 3, &rings))
        .into_iter()
        .filter(|t| parse_str(&Vocabulary.decode(&t[1..t.len() - 1])).unwrap().has_ring())
        .take(150)
        .collect();
    assert!(novel.len() >= 100);

    let dims = NetDims { vocab: Vocabulary.len(), embedding: 8, hidden: 16, layers: 1 };
    let mut fixed = PolicyNet::<f64>::random(dims, 10);
    fixed.params_mut().iter_mut().for_each(|p| *p *= 4.0);
    let mut state = RndState::from_parts(fixed, PolicyNet::random(dims, 11), 3e-3);
    let fixed_hash = state.fixed_hash();

    for step in 0..200 {
        let k = (step * 16) % familiar.len();
        rnd_train(&mut state, &familiar[k..k + 16]).unwrap();
        assert_eq!(state.fixed().param_hash(), fixed_hash);
    }
    let seen = mean_delta(&state, &held_out);
    let unseen = mean_delta(&state, &novel);
    assert!(unseen > seen, "novel {unseen} vs familiar {seen}");
}

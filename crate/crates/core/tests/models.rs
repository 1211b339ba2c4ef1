mod common;

use commitvec::commit::sample_context_list;
use commitvec::models::{
    index_commit, load_path_attention, train_path_attention, train_svm, Init, ModelError, PathAttentionModel, PathDims,
    SparseVec, SvmConfig, TrainConfig,
};
use commitvec::neural::Activation;
use commitvec::scalar::Dtype;
use commitvec::tokens::Vocabulary;
use proptest::prelude::*;

fn small_corpus() -> (Vec<commitvec::models::IndexedCommit>, Vec<usize>, Vocabulary, Vocabulary) {
    let (corpus, y) = common::synth::planted_corpus(40, 2);
    let terminals =
        Vocabulary::build(corpus.iter().map(|c| c.iter().flat_map(|x| [x.left.as_str(), x.right.as_str()])), 1000)
            .unwrap();
    let paths = Vocabulary::build(corpus.iter().map(|c| c.iter().map(|x| x.path.as_str())), 1000).unwrap();
    let indexed = corpus
        .iter()
        .enumerate()
        .map(|(i, c)| index_commit(&sample_context_list(&format!("c{i}"), c, 500, 0).unwrap(), &terminals, &paths))
        .collect();
    (indexed, y.into_iter().map(usize::from).collect(), terminals, paths)
}

fn fresh<S>(t: &Vocabulary, p: &Vocabulary, dims: PathDims) -> Init<S> {
    Init::Fresh {
        terminal_vocab: t.len(),
        path_vocab: p.len(),
        dims,
        terminal_fingerprint: t.fingerprint(),
        path_fingerprint: p.fingerprint(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn duplicating_rows_with_fixed_lambda_keeps_the_svm(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<bool> = (0..12).map(|i| i % 2 == 0).collect();
        let x: Vec<SparseVec> = y
            .iter()
            .map(|&l| SparseVec::from_dense(&[if l { 1.0 } else { -1.0 } + rng.random_range(-0.5..0.5), rng.random_range(-1.0..1.0)]))
            .collect();
        let cfg = SvmConfig { lambda: Some(0.05), epochs: 2000, tol: 1e-12 };
        let once = train_svm(&x, &y, 2, &cfg).unwrap();
        let x2: Vec<SparseVec> = x.iter().chain(&x).cloned().collect();
        let y2: Vec<bool> = y.iter().chain(&y).copied().collect();
        let twice = train_svm(&x2, &y2, 2, &cfg).unwrap();
        for (a, b) in once.w.iter().zip(&twice.w) {
            prop_assert!((a - b).abs() < 1e-4, "{:?} vs {:?}", once.w, twice.w);
        }
        prop_assert!((once.b - twice.b).abs() < 1e-4);
    }
}

#[test]
fn training_lowers_the_loss_in_both_precisions() {
    let (indexed, y, t, p) = small_corpus();
    let dims = PathDims { embed: 16, code: 16 };
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 8,
        learning_rate: 0.01,
        validation_fraction: 0.0,
        ..TrainConfig::default()
    };
    let (_, r64) = train_path_attention::<f64>(&indexed, &y, 2, &cfg, fresh(&t, &p, dims)).unwrap();
    let (_, r32) = train_path_attention::<f32>(&indexed, &y, 2, &cfg, fresh(&t, &p, dims)).unwrap();
    for r in [&r64, &r32] {
        assert!(r.train_loss.last().unwrap() < &r.train_loss[0], "{:?}", r.train_loss);
        assert_eq!(r.train_loss.len(), 6);
    }
    assert!((r64.train_loss[0] - r32.train_loss[0]).abs() < 1e-4);
}

#[test]
fn checkpoint_round_trips_in_f32() {
    let (indexed, _, t, p) = small_corpus();
    let m: PathAttentionModel<f32> =
        PathAttentionModel::for_vocabularies(&t, &p, 6, PathDims { embed: 8, code: 8 }, Activation::Tanh, 3);
    let mut buf = Vec::new();
    m.save(&mut buf, Dtype::F32).unwrap();
    let back: PathAttentionModel<f32> = load_path_attention(buf.as_slice()).unwrap();
    assert_eq!(back, m);
    back.check_vocab(&t, &p).unwrap();
    let as64: PathAttentionModel<f64> = load_path_attention(buf.as_slice()).unwrap();
    let a = m.commit_forward(&indexed[0]).unwrap().probs;
    let b = as64.commit_forward(&indexed[0]).unwrap().probs;
    assert!((a[0] as f64 - b[0]).abs() < 1e-5);
}

#[test]
fn foreign_vocabulary_is_rejected() {
    let (_, _, t, p) = small_corpus();
    let m: PathAttentionModel<f64> =
        PathAttentionModel::for_vocabularies(&t, &p, 2, PathDims::default(), Activation::Tanh, 0);
    let other = Vocabulary::build([["zzz"]], 10).unwrap();
    assert!(matches!(m.check_vocab(&other, &p), Err(ModelError::VocabMismatch { what: "terminal", .. })));
}

#[test]
fn fine_tuning_swaps_a_mismatched_head() {
    let (indexed, y, t, p) = small_corpus();
    let dims = PathDims { embed: 8, code: 8 };
    let six: PathAttentionModel<f64> = PathAttentionModel::for_vocabularies(&t, &p, 6, dims, Activation::Tanh, 0);
    let cfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
    let (m, _) = train_path_attention(&indexed, &y, 2, &cfg, Init::Model(six)).unwrap();
    assert_eq!(m.k, 2);
    assert_eq!(m.head_w.value.shape(), [8, 2]);
    assert!(train_path_attention::<f64>(&indexed, &vec![0; y.len()], 2, &cfg, fresh(&t, &p, dims)).is_err());
}

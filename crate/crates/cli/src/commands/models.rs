use std::path::Path;

use anyhow::Result;
use commitvec::corpus::LabelScheme;
use commitvec::eval::{export_code_vectors, holdout, multiclass_metrics, ExportRow};
use commitvec::models::{
    load_path_attention, train_lstm, train_path_attention, train_svm, IndexedCommit, Init, ModelManifest,
    PathAttentionModel, SparseVec, TrainReport,
};
use commitvec::scalar::{Dtype, Scalar};
use commitvec::tokens::{encode_sequence, vectorize_bow, Vocabulary};
use log::info;
use serde_json::json;

use crate::data::{
    binary_labels, class_indices, commit_corpus, index_corpus, open, path_vocabularies, read_vocab, require_binary,
    token_corpus, token_vocabulary,
};
use crate::run::{model_error, DataContext, Run};
use crate::ModelKind;

fn save_path_model<S: Scalar>(
    run: &mut Run,
    model: &PathAttentionModel<S>,
    terminals: &Vocabulary,
    paths: &Vocabulary,
    name: &str,
    report: Option<TrainReport>,
    dtype: Dtype,
) -> Result<()> {
    run.write_with("model.ckpt", |w| Ok(model.save(w, dtype)?))?;
    run.write_with("terminals.vocab", |w| Ok(terminals.write(w)?))?;
    run.write_with("paths.vocab", |w| Ok(paths.write(w)?))?;
    let manifest = ModelManifest {
        model: name.to_string(),
        k: model.k,
        terminal_vocab_sha256: terminals.fingerprint(),
        path_vocab_sha256: paths.fingerprint(),
        config: run.config.train.clone(),
        seed: run.seed,
        report,
    };
    run.write_json("model.json", &manifest)
}

/// Model, vocabularies and manifest written by `pretrain`, `train` or
/// `finetune` for the path-attention network.
pub fn load_path_dir<S: Scalar>(dir: &Path, run: &mut Run) -> Result<(PathAttentionModel<S>, Vocabulary, Vocabulary)> {
    let ckpt = dir.join("model.ckpt");
    let (tv, pv) = (dir.join("terminals.vocab"), dir.join("paths.vocab"));
    for p in [&ckpt, &tv, &pv] {
        run.input(p)?;
    }
    let model: PathAttentionModel<S> = load_path_attention(open(&ckpt)?).data(format!("loading {}", ckpt.display()))?;
    let (terminals, paths) = (read_vocab(&tv)?, read_vocab(&pv)?);
    model.check_vocab(&terminals, &paths).map_err(|e| model_error(e, "vocabularies next to the checkpoint"))?;
    Ok((model, terminals, paths))
}

fn fresh<S>(terminals: &Vocabulary, paths: &Vocabulary, run: &Run) -> Init<S> {
    Init::Fresh {
        terminal_vocab: terminals.len(),
        path_vocab: paths.len(),
        dims: run.config.path_attention,
        terminal_fingerprint: terminals.fingerprint(),
        path_fingerprint: paths.fingerprint(),
    }
}

/// Trains on a stratified 80% of a (typically priority-labeled) corpus and
/// reports per-class metrics on the remaining 20%.
pub fn pretrain<S: Scalar>(run: &mut Run, corpus: &Path, dtype: Dtype) -> Result<()> {
    run.input(corpus)?;
    let cfg = run.config.train.clone();
    cfg.validate().data("[train]")?;
    let (entries, scheme) = commit_corpus(corpus)?;
    let labels = class_indices(entries.iter().map(|e| &e.label), scheme)?;
    let (terminals, paths) = path_vocabularies(&entries, &cfg)?;
    let indexed = index_corpus(&entries, &terminals, &paths, &cfg)?;
    let (train, test) = holdout(&labels, 0.2, run.seed);
    let pick = |idx: &[usize]| -> (Vec<IndexedCommit>, Vec<usize>) {
        (idx.iter().map(|&i| indexed[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
    };
    let (tx, ty) = pick(&train);
    let (vx, vy) = pick(&test);
    info!("pretraining on {} commits, {} classes", tx.len(), scheme.classes());
    let (model, report) = train_path_attention::<S>(&tx, &ty, scheme.classes(), &cfg, fresh(&terminals, &paths, run))
        .map_err(|e| model_error(e, "pretraining"))?;
    let probs: Vec<Vec<f64>> = vx
        .iter()
        .map(|c| Ok(model.commit_forward(c)?.probs.iter().map(|p| p.f64()).collect()))
        .collect::<Result<_, commitvec::models::ModelError>>()?;
    let metrics = multiclass_metrics(&vy, &probs, scheme.classes());
    info!("held-out accuracy {:.2}%", metrics.accuracy);
    let classes: Vec<&str> = (0..scheme.classes()).map(|i| scheme.name(i)).collect();
    run.write_json("pretext_metrics.json", &json!({ "classes": classes, "test_size": vy.len(), "metrics": metrics }))?;
    save_path_model(run, &model, &terminals, &paths, "path-attention-pretext", Some(report), dtype)
}

pub fn train<S: Scalar>(run: &mut Run, kind: ModelKind, corpus: &Path, dtype: Dtype) -> Result<()> {
    run.input(corpus)?;
    let cfg = run.config.train.clone();
    cfg.validate().data("[train]")?;
    match kind {
        ModelKind::BowSvm | ModelKind::Lstm => {
            let (entries, scheme) = token_corpus(corpus)?;
            require_binary(scheme, corpus)?;
            let y = binary_labels(entries.iter().map(|e| &e.label));
            let vocab = token_vocabulary(&entries, &cfg)?;
            run.write_with("tokens.vocab", |w| Ok(vocab.write(w)?))?;
            if kind == ModelKind::BowSvm {
                let x: Vec<SparseVec> =
                    entries.iter().map(|e| SparseVec::from(&vectorize_bow(&e.tokens, &vocab))).collect();
                let m = train_svm(&x, &y, vocab.len(), &run.config.svm).map_err(|e| model_error(e, "training"))?;
                run.write_json(
                    "model.json",
                    &json!({ "model": "bow-svm", "vocab_sha256": vocab.fingerprint(), "svm": m }),
                )
            } else {
                let seqs: Vec<Vec<usize>> =
                    entries.iter().map(|e| encode_sequence(&e.tokens, &vocab, cfg.max_len)).collect();
                let (m, report) =
                    train_lstm::<S>(&seqs, &y, vocab.len(), &cfg).map_err(|e| model_error(e, "training"))?;
                run.write_with("model.ckpt", |w| Ok(m.save(w, dtype)?))?;
                run.write_json(
                    "model.json",
                    &json!({ "model": "lstm", "vocab_sha256": vocab.fingerprint(), "config": cfg, "seed": run.seed, "report": report }),
                )
            }
        }
        ModelKind::PathAttention => {
            let (entries, scheme) = commit_corpus(corpus)?;
            let labels = class_indices(entries.iter().map(|e| &e.label), scheme)?;
            let (terminals, paths) = path_vocabularies(&entries, &cfg)?;
            let indexed = index_corpus(&entries, &terminals, &paths, &cfg)?;
            let (m, report) =
                train_path_attention::<S>(&indexed, &labels, scheme.classes(), &cfg, fresh(&terminals, &paths, run))
                    .map_err(|e| model_error(e, "training"))?;
            save_path_model(run, &m, &terminals, &paths, "path-attention", Some(report), dtype)
        }
    }
}

/// Replaces the head of a pretrained network and trains every weight on a
/// pos/neg corpus indexed with the pretrained vocabularies.
pub fn finetune<S: Scalar>(run: &mut Run, corpus: &Path, pretrained: &Path, dtype: Dtype) -> Result<()> {
    run.input(corpus)?;
    let cfg = run.config.train.clone();
    cfg.validate().data("[train]")?;
    let (base, terminals, paths) = load_path_dir::<S>(pretrained, run)?;
    let (entries, scheme) = commit_corpus(corpus)?;
    require_binary(scheme, corpus)?;
    let labels = class_indices(entries.iter().map(|e| &e.label), LabelScheme::Binary)?;
    let indexed = index_corpus(&entries, &terminals, &paths, &cfg)?;
    let (m, report) = train_path_attention(&indexed, &labels, 2, &cfg, Init::Model(base))
        .map_err(|e| model_error(e, "fine-tuning"))?;
    save_path_model(run, &m, &terminals, &paths, "path-attention-pretrained", Some(report), dtype)
}

pub fn export_vectors<S: Scalar>(run: &mut Run, model_dir: &Path, corpus: &Path) -> Result<()> {
    run.input(corpus)?;
    let (model, terminals, paths) = load_path_dir::<S>(model_dir, run)?;
    let (entries, _) = commit_corpus(corpus)?;
    let indexed = index_corpus(&entries, &terminals, &paths, &run.config.train)?;
    let rows: Vec<ExportRow<'_>> =
        indexed.iter().zip(&entries).map(|(c, e)| ExportRow { commit: c, label: &e.label }).collect();
    let mut n = 0;
    run.write_with("vectors.csv", |w| {
        n = export_code_vectors(&model, &rows, w)?;
        Ok(())
    })?;
    info!("exported {n} code vectors");
    Ok(())
}

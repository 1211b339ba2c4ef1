use std::path::Path;

use anyhow::Result;
use commitvec::eval::{
    cross_validate, variability_experiment, write_metrics_csv, write_metrics_table, write_pr_curve, Experiment,
    LstmExperiment, PathAttentionExperiment, SvmExperiment,
};
use commitvec::models::{Init, SparseVec};
use commitvec::scalar::Scalar;
use commitvec::tokens::{encode_sequence, vectorize_bow};
use log::info;
use serde_json::json;

use super::models::load_path_dir;
use crate::data::{
    binary_labels, commit_corpus, index_corpus, path_vocabularies, require_binary, token_corpus, token_vocabulary,
};
use crate::run::{data_error, eval_error, DataContext, Run};
use crate::EvalModel;

/// The experiment and its labels. Vocabularies are built from the whole
/// corpus; labels never enter them.
fn experiment<S: Scalar>(
    run: &mut Run,
    model: EvalModel,
    corpus: &Path,
    pretrained: Option<&Path>,
) -> Result<(Box<dyn Experiment>, Vec<bool>)> {
    run.input(corpus)?;
    let cfg = run.config.train.clone();
    cfg.validate().data("[train]")?;
    if pretrained.is_some() != (model == EvalModel::PathAttentionPretrained) {
        return Err(data_error("--pretrained is required by, and only valid for, path-attention-pretrained"));
    }
    match model {
        EvalModel::BowSvm | EvalModel::Lstm => {
            let (entries, scheme) = token_corpus(corpus)?;
            require_binary(scheme, corpus)?;
            let y = binary_labels(entries.iter().map(|e| &e.label));
            let vocab = token_vocabulary(&entries, &cfg)?;
            let exp: Box<dyn Experiment> = if model == EvalModel::BowSvm {
                let x = entries.iter().map(|e| SparseVec::from(&vectorize_bow(&e.tokens, &vocab))).collect();
                Box::new(SvmExperiment { x, y: y.clone(), dim: vocab.len(), config: run.config.svm })
            } else {
                let seqs = entries.iter().map(|e| encode_sequence(&e.tokens, &vocab, cfg.max_len)).collect();
                Box::new(LstmExperiment::<S>::new(seqs, y.clone(), vocab.len(), cfg))
            };
            Ok((exp, y))
        }
        EvalModel::PathAttention | EvalModel::PathAttentionPretrained => {
            let (entries, scheme) = commit_corpus(corpus)?;
            require_binary(scheme, corpus)?;
            let y = binary_labels(entries.iter().map(|e| &e.label));
            let (init, terminals, paths) = match pretrained {
                Some(dir) => {
                    let (m, t, p) = load_path_dir::<S>(dir, run)?;
                    (Init::Model(m), t, p)
                }
                None => {
                    let (t, p) = path_vocabularies(&entries, &cfg)?;
                    let init = Init::Fresh {
                        terminal_vocab: t.len(),
                        path_vocab: p.len(),
                        dims: run.config.path_attention,
                        terminal_fingerprint: t.fingerprint(),
                        path_fingerprint: p.fingerprint(),
                    };
                    (init, t, p)
                }
            };
            let corpus = index_corpus(&entries, &terminals, &paths, &cfg)?;
            let exp = PathAttentionExperiment::<S> {
                name: model.name().to_string(),
                corpus,
                y: y.clone(),
                config: cfg,
                init,
            };
            Ok((Box::new(exp), y))
        }
    }
}

fn metadata(extra: serde_json::Value) -> serde_json::Value {
    let mut m = json!({
        "pr_auc": "average precision: sum over decreasing score thresholds of (recall increase) x (precision at that threshold); tied scores form one threshold",
        "threshold_rule": "score >= threshold is a positive prediction",
        "std": "population standard deviation",
        "percent_columns": ["precision", "recall", "f1", "accuracy", "pr_auc"],
    });
    if let (Some(m), Some(e)) = (m.as_object_mut(), extra.as_object()) {
        m.extend(e.clone());
    }
    m
}

pub fn evaluate<S: Scalar>(
    run: &mut Run,
    model: EvalModel,
    corpus: &Path,
    pretrained: Option<&Path>,
    folds: Option<usize>,
) -> Result<()> {
    let (exp, y) = experiment::<S>(run, model, corpus, pretrained)?;
    let k = folds.unwrap_or(run.config.evaluate.folds);
    let threshold = run.config.evaluate.threshold;
    info!("{}: {k}-fold cross validation over {} commits", exp.name(), y.len());
    let report =
        cross_validate(exp.as_ref(), &y, k, run.seed, threshold).map_err(|e| eval_error(e, "cross validation"))?;
    let rows = [(model.name(), &report.summary)];
    run.write_with("metrics.txt", |w| Ok(write_metrics_table(w, &rows)?))?;
    run.write_with("metrics.csv", |w| Ok(write_metrics_csv(w, &rows)?))?;
    run.write_with("pr_curve.csv", |w| Ok(write_pr_curve(w, &report.pr_curve)?))?;
    run.write_json("folds.json", &report)?;
    run.write_json(
        "metadata.json",
        &metadata(json!({
            "model": model.name(),
            "folds": k,
            "threshold": threshold,
            "fold_assignment": "stratified by label, seeded shuffle per class, dealt round-robin",
            "pr_curve": "per fold: right-max interpolated precision on recall 0.00..1.00 step 0.01; averaged pointwise over folds (macro)",
        })),
    )?;
    for (name, c) in report.summary.columns() {
        info!("{name}: {:.2} ± {:.2}", c.mean, c.std);
    }
    Ok(())
}

pub fn variability<S: Scalar>(
    run: &mut Run,
    model: EvalModel,
    corpus: &Path,
    pretrained: Option<&Path>,
    runs: Option<usize>,
) -> Result<()> {
    let (exp, y) = experiment::<S>(run, model, corpus, pretrained)?;
    let vcfg = run.config.variability.clone();
    let runs = runs.unwrap_or(vcfg.runs);
    if runs == 0 {
        return Err(data_error("--runs must be at least 1"));
    }
    let split_seed = vcfg.split_seed.unwrap_or(run.seed);
    info!("{}: {runs} runs on a fixed 80/20 split", exp.name());
    let report = variability_experiment(exp.as_ref(), &y, runs, split_seed, run.seed, vcfg.threshold)
        .map_err(|e| eval_error(e, "variability runs"))?;
    let rows = [(model.name(), &report.summary)];
    run.write_with("metrics.txt", |w| Ok(write_metrics_table(w, &rows)?))?;
    run.write_with("metrics.csv", |w| Ok(write_metrics_csv(w, &rows)?))?;
    run.write_json("runs.json", &report)?;
    run.write_json(
        "metadata.json",
        &metadata(json!({
            "model": model.name(),
            "runs": runs,
            "split": "stratified 80/20, fixed for every run",
            "split_seed": split_seed,
            "run_seeds": "seed + run index",
            "threshold": vcfg.threshold,
        })),
    )?;
    Ok(())
}

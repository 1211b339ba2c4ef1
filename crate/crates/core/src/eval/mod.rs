//! Cross-validation, metrics, variability runs and code-vector export.

mod experiments;
mod export;
mod metrics;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use experiments::{LstmExperiment, PathAttentionExperiment, SvmExperiment};
pub use export::{export_code_vectors, write_metrics_csv, write_metrics_table, write_pr_curve, ExportRow};
pub use metrics::{
    average_pr_curves, average_precision, compute_metrics, interpolated_precision, mean, multiclass_metrics, pr_points,
    std_dev, ClassMetrics, MeanStd, MetricSummary, MetricsReport, MulticlassReport, PrCurve, UndefinedMetric, PR_GRID,
};

use crate::models::ModelError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot split {n} examples into {k} folds")]
    TooFewExamples { n: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    BadFoldCount(usize),
    #[error("expected {expected} scores, got {got}")]
    ScoreCount { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldSplit {
    /// Every index outside fold `i`, ascending.
    pub fn train_indices(&self, i: usize) -> Vec<usize> {
        let mut idx: Vec<usize> =
            self.folds.iter().enumerate().filter(|(j, _)| *j != i).flat_map(|(_, f)| f.iter().copied()).collect();
        idx.sort_unstable();
        idx
    }
}

/// Stratified folds: each class is shuffled and dealt round-robin, the
/// dealing position carrying over from one class to the next so fold sizes
/// differ by at most one.
pub fn kfold_split(labels: &[usize], k: usize, seed: u64) -> Result<FoldSplit, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFoldCount(k));
    }
    if labels.len() < k {
        return Err(EvalError::TooFewExamples { n: labels.len(), k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut idx in by_class.into_values() {
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldSplit { folds, seed })
}

/// Fixed stratified train/test split with `test_fraction` of each class held
/// out.
pub fn holdout(labels: &[usize], test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for mut idx in by_class.into_values() {
        idx.shuffle(&mut rng);
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// A model family bound to a corpus: trains on some indices and scores
/// others with the probability of the positive class.
pub trait Experiment: Sync {
    fn name(&self) -> &str;
    fn fit_predict(&self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<f64>, EvalError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub folds: Vec<MetricsReport>,
    pub summary: MetricSummary,
    pub pr_curve: PrCurve,
    pub split: FoldSplit,
}

fn run_fold<E: Experiment + ?Sized>(
    exp: &E,
    labels: &[bool],
    train: &[usize],
    test: &[usize],
    seed: u64,
    threshold: f64,
) -> Result<(MetricsReport, Vec<bool>, Vec<f64>), EvalError> {
    let scores = exp.fit_predict(train, test, seed)?;
    if scores.len() != test.len() {
        return Err(EvalError::ScoreCount { expected: test.len(), got: scores.len() });
    }
    let y: Vec<bool> = test.iter().map(|&i| labels[i]).collect();
    Ok((compute_metrics(&y, &scores, threshold), y, scores))
}

/// k-fold evaluation; the model for fold `i` never sees fold `i`.
pub fn cross_validate<E: Experiment + ?Sized>(
    exp: &E,
    labels: &[bool],
    k: usize,
    seed: u64,
    threshold: f64,
) -> Result<CvReport, EvalError> {
    let strata: Vec<usize> = labels.iter().map(|&v| usize::from(v)).collect();
    let split = kfold_split(&strata, k, seed)?;
    let results: Vec<_> = (0..k)
        .into_par_iter()
        .map(|i| run_fold(exp, labels, &split.train_indices(i), &split.folds[i], seed, threshold))
        .collect::<Result<_, _>>()?;
    let folds: Vec<MetricsReport> = results.iter().map(|r| r.0.clone()).collect();
    let curves: Vec<(Vec<bool>, Vec<f64>)> = results.into_iter().map(|r| (r.1, r.2)).collect();
    Ok(CvReport {
        model: exp.name().to_string(),
        summary: MetricSummary::of(&folds),
        pr_curve: average_pr_curves(&curves),
        folds,
        split,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariabilityReport {
    pub model: String,
    pub runs: Vec<MetricsReport>,
    pub seeds: Vec<u64>,
    pub summary: MetricSummary,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Repeats training on one fixed 80/20 split, varying only the run seed.
pub fn variability_experiment<E: Experiment + ?Sized>(
    exp: &E,
    labels: &[bool],
    runs: usize,
    split_seed: u64,
    base_seed: u64,
    threshold: f64,
) -> Result<VariabilityReport, EvalError> {
    let strata: Vec<usize> = labels.iter().map(|&v| usize::from(v)).collect();
    let (train, test) = holdout(&strata, 0.2, split_seed);
    let seeds: Vec<u64> = (0..runs as u64).map(|r| base_seed.wrapping_add(r)).collect();
    let reports: Vec<MetricsReport> = seeds
        .par_iter()
        .map(|&s| run_fold(exp, labels, &train, &test, s, threshold).map(|r| r.0))
        .collect::<Result<_, _>>()?;
    Ok(VariabilityReport {
        model: exp.name().to_string(),
        summary: MetricSummary::of(&reports),
        runs: reports,
        seeds,
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_ten_into_five() {
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let s = kfold_split(&labels, 5, 1).unwrap();
        for f in &s.folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().map(|&i| labels[i]).sum::<usize>(), 1);
        }
        let mut all: Vec<usize> = s.folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(s, kfold_split(&labels, 5, 1).unwrap());
    }

    #[test]
    fn holdout_fractions() {
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i < 30)).collect();
        let (train, test) = holdout(&labels, 0.2, 9);
        assert_eq!(test.len(), 20);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 6);
        assert_eq!(train.len(), 80);
    }

    struct Constant;

    impl Experiment for Constant {
        fn name(&self) -> &str {
            "constant"
        }

        fn fit_predict(&self, _: &[usize], test: &[usize], _: u64) -> Result<Vec<f64>, EvalError> {
            Ok(test.iter().map(|&i| (i % 7) as f64 / 7.0).collect())
        }
    }

    #[test]
    fn deterministic_model_has_no_spread() {
        let labels: Vec<bool> = (0..40).map(|i| i % 3 == 0).collect();
        let r = variability_experiment(&Constant, &labels, 5, 1, 100, 0.5).unwrap();
        for (_, c) in r.summary.columns() {
            assert_eq!(c.std, 0.0);
        }
        let cv = cross_validate(&Constant, &labels, 5, 2, 0.5).unwrap();
        assert_eq!(cv.folds.len(), 5);
    }
}

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UndefinedMetric {
    /// No predicted positives.
    Precision,
    /// No actual positives.
    Recall,
    F1,
    PrAuc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percentages at `threshold`.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Average precision in `[0, 1]`.
    pub pr_auc: f64,
    pub threshold: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub undefined: Vec<UndefinedMetric>,
}

/// Confusion-matrix metrics with `score >= threshold` counted as positive,
/// plus average precision. Undefined ratios are reported as 0 and flagged.
pub fn compute_metrics(y: &[bool], scores: &[f64], threshold: f64) -> MetricsReport {
    assert_eq!(y.len(), scores.len(), "labels and scores differ in length");
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&label, &s) in y.iter().zip(scores) {
        match (label, s >= threshold) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fn_ += 1,
        }
    }
    let mut undefined = Vec::new();
    let ratio = |num: usize, den: usize, flag: UndefinedMetric, undefined: &mut Vec<UndefinedMetric>| {
        if den == 0 {
            undefined.push(flag);
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let p = ratio(tp, tp + fp, UndefinedMetric::Precision, &mut undefined);
    let r = ratio(tp, tp + fn_, UndefinedMetric::Recall, &mut undefined);
    let f1 = if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        undefined.push(UndefinedMetric::F1);
        0.0
    };
    let n = y.len();
    let accuracy = if n == 0 { 0.0 } else { (tp + tn) as f64 / n as f64 };
    let pr_auc = match average_precision(y, scores) {
        Some(ap) => ap,
        None => {
            undefined.push(UndefinedMetric::PrAuc);
            0.0
        }
    };
    MetricsReport {
        precision: 100.0 * p,
        recall: 100.0 * r,
        f1: 100.0 * f1,
        accuracy: 100.0 * accuracy,
        pr_auc,
        threshold,
        tp,
        fp,
        tn,
        fn_,
        undefined,
    }
}

/// `(recall, precision)` after each distinct score, from the highest score
/// down. Tied scores enter together.
pub fn pr_points(y: &[bool], scores: &[f64]) -> Vec<(f64, f64)> {
    let total_pos = y.iter().filter(|&&v| v).count();
    if total_pos == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = Vec::new();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            tp += usize::from(y[order[i]]);
            seen += 1;
            i += 1;
        }
        points.push((tp as f64 / total_pos as f64, tp as f64 / seen as f64));
    }
    points
}

/// `Σ (Rₖ − Rₖ₋₁) Pₖ` over decreasing thresholds; `None` without positives.
pub fn average_precision(y: &[bool], scores: &[f64]) -> Option<f64> {
    let points = pr_points(y, scores);
    if points.is_empty() {
        return None;
    }
    let mut prev_r = 0.0;
    let mut ap = 0.0;
    for (r, p) in points {
        ap += (r - prev_r) * p;
        prev_r = r;
    }
    Some(ap)
}

pub const PR_GRID: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
    /// Folds that contributed.
    pub folds: Vec<usize>,
}

/// Precision on the recall grid `0.00, 0.01, …, 1.00`, each value being the
/// highest precision reached at that recall or beyond.
pub fn interpolated_precision(y: &[bool], scores: &[f64]) -> Vec<f64> {
    let points = pr_points(y, scores);
    (0..PR_GRID)
        .map(|g| {
            let r = g as f64 / (PR_GRID - 1) as f64;
            points.iter().filter(|(pr, _)| *pr >= r - 1e-12).map(|&(_, p)| p).fold(0.0, f64::max)
        })
        .collect()
}

/// Pointwise mean of each fold's interpolated curve.
pub fn average_pr_curves(folds: &[(Vec<bool>, Vec<f64>)]) -> PrCurve {
    let recall: Vec<f64> = (0..PR_GRID).map(|g| g as f64 / (PR_GRID - 1) as f64).collect();
    let mut precision = vec![0.0; PR_GRID];
    let curves: Vec<Vec<f64>> = folds.iter().map(|(y, s)| interpolated_precision(y, s)).collect();
    for (g, p) in precision.iter_mut().enumerate() {
        *p = mean(&curves.iter().map(|c| c[g]).collect::<Vec<_>>());
    }
    PrCurve { recall, precision, folds: (0..folds.len()).collect() }
}

/// Mean computed relative to the first value, so a list of identical values
/// averages to exactly that value.
pub fn mean(v: &[f64]) -> f64 {
    match v.first() {
        None => 0.0,
        Some(&first) => first + v.iter().map(|x| x - first).sum::<f64>() / v.len() as f64,
    }
}

/// Population standard deviation.
pub fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(v: &[f64]) -> Self {
        Self { mean: mean(v), std: std_dev(v) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub f1: MeanStd,
    pub accuracy: MeanStd,
    /// Percent, like the other columns.
    pub pr_auc: MeanStd,
}

impl MetricSummary {
    pub fn of(reports: &[MetricsReport]) -> Self {
        let col = |f: fn(&MetricsReport) -> f64| MeanStd::of(&reports.iter().map(f).collect::<Vec<_>>());
        Self {
            precision: col(|r| r.precision),
            recall: col(|r| r.recall),
            f1: col(|r| r.f1),
            accuracy: col(|r| r.accuracy),
            pr_auc: col(|r| 100.0 * r.pr_auc),
        }
    }

    pub fn columns(&self) -> [(&'static str, MeanStd); 5] {
        [
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
            ("accuracy", self.accuracy),
            ("pr_auc", self.pr_auc),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassReport {
    /// Percent of argmax predictions that are correct; equals micro-averaged
    /// precision, recall and F1.
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
}

/// Argmax predictions scored one-vs-rest per class.
pub fn multiclass_metrics(labels: &[usize], probs: &[Vec<f64>], k: usize) -> MulticlassReport {
    let preds: Vec<usize> = probs
        .iter()
        .map(|p| {
            p.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best }).0
        })
        .collect();
    let correct = labels.iter().zip(&preds).filter(|(a, b)| a == b).count();
    let per_class = (0..k)
        .map(|c| {
            let tp = labels.iter().zip(&preds).filter(|(&l, &p)| l == c && p == c).count();
            let predicted = preds.iter().filter(|&&p| p == c).count();
            let support = labels.iter().filter(|&&l| l == c).count();
            let p = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
            let r = if support == 0 { 0.0 } else { tp as f64 / support as f64 };
            let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            ClassMetrics { precision: 100.0 * p, recall: 100.0 * r, f1: 100.0 * f1, support }
        })
        .collect();
    MulticlassReport {
        accuracy: if labels.is_empty() { 0.0 } else { 100.0 * correct as f64 / labels.len() as f64 },
        per_class,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_inverted() {
        let y = [true, true, false, false];
        let m = compute_metrics(&y, &[0.9, 0.8, 0.2, 0.1], 0.5);
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy, m.pr_auc), (100.0, 100.0, 100.0, 100.0, 1.0));
        let m = compute_metrics(&y, &[0.1, 0.2, 0.8, 0.9], 0.5);
        assert_eq!(m.recall, 0.0);
        assert!(m.undefined.contains(&UndefinedMetric::F1));
    }

    #[test]
    fn undefined_precision_is_flagged() {
        let m = compute_metrics(&[true, false], &[0.1, 0.2], 0.5);
        assert_eq!(m.precision, 0.0);
        assert!(m.undefined.contains(&UndefinedMetric::Precision));
        let m = compute_metrics(&[false, false], &[0.1, 0.7], 0.5);
        assert!(m.undefined.contains(&UndefinedMetric::PrAuc));
    }

    #[test]
    fn threshold_is_inclusive() {
        let m = compute_metrics(&[true], &[0.5], 0.5);
        assert_eq!(m.tp, 1);
    }

    #[test]
    fn tied_scores_enter_together() {
        // both at 0.5: one threshold, precision 1/2 at recall 1
        assert_eq!(average_precision(&[true, false], &[0.5, 0.5]), Some(0.5));
        assert_eq!(average_precision(&[true, false, true], &[0.9, 0.8, 0.7]), Some(0.5 + 0.5 * 2.0 / 3.0));
    }

    #[test]
    fn hand_interpolated_average() {
        // fold a: points (0.5, 1), (0.5, 0.5), (1, 2/3)
        let a = (vec![true, false, true], vec![0.9, 0.8, 0.7]);
        // fold b: points (0, 0), (1, 0.5)
        let b = (vec![false, true], vec![0.9, 0.1]);
        let avg = average_pr_curves(&[a.clone(), b.clone()]);
        assert_eq!(avg.precision.len(), 101);
        assert!((avg.precision[0] - (1.0 + 0.5) / 2.0).abs() < 1e-15);
        assert!((avg.precision[50] - (1.0 + 0.5) / 2.0).abs() < 1e-15);
        assert!((avg.precision[51] - (2.0 / 3.0 + 0.5) / 2.0).abs() < 1e-15);
        assert!((avg.precision[100] - (2.0 / 3.0 + 0.5) / 2.0).abs() < 1e-15);
        let one = average_pr_curves(&[a.clone()]);
        assert_eq!(one.precision, interpolated_precision(&a.0, &a.1));
        assert_eq!(average_pr_curves(&[a.clone(), a.clone()]).precision, one.precision);
    }

    #[test]
    fn identical_values_have_zero_spread() {
        let v = [63.67123, 63.67123, 63.67123];
        assert_eq!(mean(&v), 63.67123);
        assert_eq!(std_dev(&v), 0.0);
        assert_eq!(std_dev(&[1.0]), 0.0);
    }

    #[test]
    fn multiclass() {
        let r = multiclass_metrics(
            &[0, 1, 2, 2],
            &[vec![0.8, 0.1, 0.1], vec![0.2, 0.7, 0.1], vec![0.1, 0.2, 0.7], vec![0.5, 0.3, 0.2]],
            3,
        );
        assert_eq!(r.accuracy, 75.0);
        assert_eq!(r.per_class[2].recall, 50.0);
        assert_eq!(r.per_class[0].precision, 50.0);
    }
}

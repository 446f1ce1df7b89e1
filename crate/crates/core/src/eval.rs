//! Evaluation: confusion metrics, ROC sweeps, stratified folding and the
//! cross-validation driver over a synthetic corpus manifest.
//!
//! Ratios with a zero denominator are reported as absent rather than 0 so a
//! single-class evaluation cannot masquerade as a perfect one.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub total_accuracy: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
}

/// Confusion counts and the derived rates; `true` marks the melanoma class.
pub fn confusion_metrics(pred: &[bool], truth: &[bool]) -> Result<ConfusionMetrics> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let ratio = |num: usize, den: usize| {
        if den > 0 {
            Some(num as f64 / den as f64)
        } else {
            None
        }
    };
    let sensitivity = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let balanced_accuracy = match (sensitivity, specificity) {
        (Some(se), Some(sp)) => Some((se + sp) / 2.0),
        _ => None,
    };
    Ok(ConfusionMetrics {
        tp,
        fp,
        tn,
        fn_,
        sensitivity,
        specificity,
        balanced_accuracy,
        total_accuracy: ratio(tp + tn, pred.len()),
        ppv: ratio(tp, tp + fp),
        npv: ratio(tn, tn + fn_),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub sensitivity: f64,
    pub specificity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// Highest sensitivity among operating points with specificity >= s.
    /// Always defined: the predict-nothing endpoint has specificity 1.
    pub fn sens_at_spec(&self, s: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.specificity >= s)
            .map(|p| p.sensitivity)
            .fold(0.0, f64::max)
    }
}

/// Sweep every distinct score as a `score >= t` threshold and integrate the
/// trapezoid area under the resulting curve. Ties at equal scores contribute
/// half, matching the pair-counting view of AUC.
pub fn roc_auc(soft: &[f64], truth: &[bool]) -> Result<RocCurve> {
    if soft.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: soft.len(),
        });
    }
    let n_pos = truth.iter().filter(|&&t| t).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if soft.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite score".into()));
    }
    let mut thresholds: Vec<f64> = soft.to_vec();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();

    // Predict-nothing endpoint first, then loosen threshold downwards.
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        sensitivity: 0.0,
        specificity: 1.0,
    }];
    for &t in thresholds.iter().rev() {
        let (mut tp, mut fp) = (0usize, 0usize);
        for (&s, &y) in soft.iter().zip(truth) {
            if s >= t {
                if y {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        points.push(RocPoint {
            threshold: t,
            sensitivity: tp as f64 / n_pos as f64,
            specificity: 1.0 - fp as f64 / n_neg as f64,
        });
    }
    let mut auc = 0.0;
    for w in points.windows(2) {
        let (fpr0, fpr1) = (1.0 - w[0].specificity, 1.0 - w[1].specificity);
        auc += (fpr1 - fpr0) * (w[0].sensitivity + w[1].sensitivity) / 2.0;
    }
    Ok(RocCurve { points, auc })
}

/// Fold id per sample: each class is shuffled with the seeded generator and
/// dealt round-robin, so fold class counts differ by at most one.
pub fn stratified_kfold(labels: &[i8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("fold count {k} must be at least 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0usize; labels.len()];
    for class in [1i8, -1] {
        let mut idx: Vec<usize> = (0..labels.len())
            .filter(|&i| (labels[i] > 0) == (class > 0))
            .collect();
        if idx.len() < k {
            return Err(Error::InsufficientSamples {
                what: if class > 0 {
                    "positive-class samples"
                } else {
                    "negative-class samples"
                },
                needed: k,
                got: idx.len(),
            });
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            folds[i] = pos % k;
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldRecord {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub metrics: ConfusionMetrics,
    /// Feature names selected on this fold's training split, per category.
    pub selected: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: RunConfig,
    pub n_samples: usize,
    pub pooled: ConfusionMetrics,
    pub roc: RocCurve,
    pub sens_at_spec: Vec<(f64, f64)>,
    pub mean_tdr: Option<f64>,
    pub per_fold: Vec<FoldRecord>,
    pub fold_errors: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Stratified k-fold cross-validation of the full pipeline over an on-disk
/// corpus; see [`crate::pipeline::cross_validate`] for the driver.
pub use crate::pipeline::cross_validate;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let truth = vec![true, true, false, false, true];
        let m = confusion_metrics(&truth, &truth).unwrap();
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.specificity, Some(1.0));
        assert_eq!(m.balanced_accuracy, Some(1.0));
        assert_eq!(m.total_accuracy, Some(1.0));
    }

    #[test]
    fn all_positive_predictor() {
        let truth = vec![true, false, true, false];
        let pred = vec![true; 4];
        let m = confusion_metrics(&pred, &truth).unwrap();
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.specificity, Some(0.0));
        assert_eq!(m.balanced_accuracy, Some(0.5));
        assert_eq!(m.npv, None, "no negative predictions made");
    }

    #[test]
    fn hand_counts() {
        // TP=3, FN=1, TN=4, FP=2.
        let truth = vec![true, true, true, true, false, false, false, false, false, false];
        let pred = vec![true, true, true, false, true, true, false, false, false, false];
        let m = confusion_metrics(&pred, &truth).unwrap();
        assert_eq!((m.tp, m.fn_, m.tn, m.fp), (3, 1, 4, 2));
        assert!((m.sensitivity.unwrap() - 0.75).abs() < 1e-12);
        assert!((m.specificity.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.balanced_accuracy.unwrap() - (0.75 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(confusion_metrics(&[true], &[true, false]).is_err());
    }

    #[test]
    fn roc_perfect_separation() {
        let soft = vec![0.9, 0.8, 0.2, 0.1];
        let truth = vec![true, true, false, false];
        let roc = roc_auc(&soft, &truth).unwrap();
        assert!((roc.auc - 1.0).abs() < 1e-12);
        assert_eq!(roc.sens_at_spec(0.9), 1.0);
    }

    #[test]
    fn roc_constant_scores_give_half() {
        let soft = vec![0.5; 6];
        let truth = vec![true, false, true, false, true, false];
        let roc = roc_auc(&soft, &truth).unwrap();
        assert!((roc.auc - 0.5).abs() < 1e-12);
    }

    fn pair_counting_auc(soft: &[f64], truth: &[bool]) -> f64 {
        let mut correct = 0.0;
        let mut total = 0.0;
        for (i, &sp) in soft.iter().enumerate() {
            if !truth[i] {
                continue;
            }
            for (j, &sn) in soft.iter().enumerate() {
                if truth[j] {
                    continue;
                }
                total += 1.0;
                if sp > sn {
                    correct += 1.0;
                } else if sp == sn {
                    correct += 0.5;
                }
            }
        }
        correct / total
    }

    #[test]
    fn roc_matches_pair_counting() {
        let soft = vec![0.1, 0.4, 0.35, 0.8, 0.8, 0.7, 0.2, 0.6];
        let truth = vec![false, true, false, true, false, true, false, true];
        let roc = roc_auc(&soft, &truth).unwrap();
        assert!((roc.auc - pair_counting_auc(&soft, &truth)).abs() < 1e-12);
    }

    #[test]
    fn sens_at_spec_is_non_increasing() {
        let soft = vec![0.1, 0.45, 0.3, 0.85, 0.6, 0.75, 0.2, 0.55];
        let truth = vec![false, true, false, true, false, true, false, true];
        let roc = roc_auc(&soft, &truth).unwrap();
        let mut prev = f64::INFINITY;
        for s in [0.0, 0.25, 0.5, 0.75, 0.9, 1.0] {
            let v = roc.sens_at_spec(s);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn roc_rejects_single_class() {
        assert!(roc_auc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn kfold_balanced_20_into_10() {
        let labels: Vec<i8> = (0..20).map(|i| if i < 10 { 1 } else { -1 }).collect();
        let folds = stratified_kfold(&labels, 10, 42).unwrap();
        for f in 0..10 {
            let pos = (0..20).filter(|&i| folds[i] == f && labels[i] > 0).count();
            let neg = (0..20).filter(|&i| folds[i] == f && labels[i] < 0).count();
            assert_eq!((pos, neg), (1, 1), "fold {f}");
        }
    }

    #[test]
    fn kfold_deterministic_and_stratified() {
        let labels: Vec<i8> = (0..37).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let a = stratified_kfold(&labels, 5, 7).unwrap();
        let b = stratified_kfold(&labels, 5, 7).unwrap();
        assert_eq!(a, b);
        let n_pos = labels.iter().filter(|&&l| l > 0).count();
        let n_neg = labels.len() - n_pos;
        for f in 0..5 {
            let pos = (0..37).filter(|&i| a[i] == f && labels[i] > 0).count();
            let neg = (0..37).filter(|&i| a[i] == f && labels[i] < 0).count();
            assert!((pos as i64 - (n_pos / 5) as i64).abs() <= 1);
            assert!((neg as i64 - (n_neg / 5) as i64).abs() <= 1);
        }
    }

    #[test]
    fn kfold_rejects_small_class() {
        let labels: Vec<i8> = vec![1, 1, 1, -1, -1, -1, -1, -1, -1, -1];
        assert!(stratified_kfold(&labels, 4, 0).is_err());
    }
}

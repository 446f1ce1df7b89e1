//! Class-weighted RBF support vector machines (sequential minimal
//! optimization solver), sigmoid-calibrated soft outputs, a cosine-distance
//! kNN over binary-pattern histograms, and fusion of the four category
//! classifiers.
//!
//! Hard decisions use the sign of the raw margin. The calibrated sigmoid is
//! strictly monotone in the margin, so this equals thresholding the soft
//! score at a fixed cut; thresholding the margin at zero stays stable in
//! degenerate cases where calibration lands exactly on the midpoint.

use serde::{Deserialize, Serialize};

use crate::config::FusionRule;
use crate::error::{Error, Result};
use crate::eval::{roc_auc, stratified_kfold};

/// Solver and audit tolerance on the KKT conditions.
pub const KKT_TOL: f64 = 1e-3;
const ALPHA_EPS: f64 = 1e-12;
const MAX_EPOCHS: usize = 400;
const CALIBRATION_SEED: u64 = 0x51d2;

/// Per-feature z-scoring learned from training rows. A constant feature maps
/// to 0 so rescaling cannot produce non-finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut mean = vec![0.0f64; d];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut sd = vec![0.0f64; d];
        for row in rows {
            for (s, (v, m)) in sd.iter_mut().zip(row.iter().zip(&mean)) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut sd {
            *s = (*s / n).sqrt();
        }
        Self { mean, sd }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Benign-class box constraint; the melanoma class gets
    /// `c * positive_weight`.
    pub c: f64,
    /// RBF width; defaults to 1 / feature count.
    pub gamma: Option<f64>,
    pub positive_weight: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            positive_weight: 1.5,
        }
    }
}

/// The full dual solution is stored (every training point with its
/// multiplier, label and box constraint), so the optimality conditions can
/// be re-audited on the deserialized model at any time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    /// Standardized training rows.
    points: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    /// Labels as +-1.
    y: Vec<f64>,
    /// Per-point box constraint (class-weighted penalty).
    c_box: Vec<f64>,
    bias: f64,
    gamma: f64,
    standardizer: Standardizer,
    /// Sigmoid (a, b): soft = 1 / (1 + exp(a * decision + b)).
    sigmoid: (f64, f64),
    pub n_features: usize,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    (-gamma * d2).exp()
}

impl SvmModel {
    /// Raw margin for a raw (unstandardized) input row.
    pub fn decision(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let z = self.standardizer.transform(row);
        Ok(self.decision_standardized(&z))
    }

    fn decision_standardized(&self, z: &[f64]) -> f64 {
        let mut f = self.bias;
        for i in 0..self.points.len() {
            if self.alpha[i] > 0.0 {
                f += self.alpha[i] * self.y[i] * rbf(&self.points[i], z, self.gamma);
            }
        }
        f
    }

    /// Worst violation of the dual optimality conditions over the stored
    /// training points: margin shortfall for zero multipliers, margin excess
    /// for bound ones, absolute margin error for interior ones.
    pub fn kkt_max_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.points.len() {
            let yf = self.y[i] * self.decision_standardized(&self.points[i]);
            let r = if self.alpha[i] <= ALPHA_EPS {
                (1.0 - yf).max(0.0)
            } else if self.alpha[i] >= self.c_box[i] - ALPHA_EPS {
                (yf - 1.0).max(0.0)
            } else {
                (yf - 1.0).abs()
            };
            worst = worst.max(r);
        }
        worst
    }

    /// Calibrated confidence in (0, 1), monotone in the margin.
    pub fn soft(&self, row: &[f64]) -> Result<f64> {
        Ok(sigmoid_predict(self.decision(row)?, self.sigmoid))
    }

    /// Melanoma iff the margin is non-negative.
    pub fn hard(&self, row: &[f64]) -> Result<bool> {
        Ok(self.decision(row)? >= 0.0)
    }
}

fn sigmoid_predict(decision: f64, (a, b): (f64, f64)) -> f64 {
    let f = a * decision + b;
    if f >= 0.0 {
        (-f).exp() / (1.0 + (-f).exp())
    } else {
        1.0 / (1.0 + f.exp())
    }
}

/// Sigmoid maximum-likelihood fit of p(melanoma | decision) with smoothed
/// targets, by Newton iterations with backtracking.
fn sigmoid_train(decisions: &[f64], y: &[i8]) -> (f64, f64) {
    let n = decisions.len();
    let prior1 = y.iter().filter(|&&l| l > 0).count() as f64;
    let prior0 = n as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = y.iter().map(|&l| if l > 0 { hi } else { lo }).collect();

    let mut a = 0.0f64;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let fval = |a: f64, b: f64| -> f64 {
        let mut v = 0.0;
        for (&d, &ti) in decisions.iter().zip(&t) {
            let f = a * d + b;
            // Cross-entropy written to avoid overflow for large |f|.
            v += if f >= 0.0 {
                ti * f + (1.0 + (-f).exp()).ln()
            } else {
                (ti - 1.0) * f + (1.0 + f.exp()).ln()
            };
        }
        v
    };
    let mut fv = fval(a, b);
    const SIGMA: f64 = 1e-12;
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21) = (SIGMA, SIGMA, 0.0);
        let (mut g1, mut g2) = (0.0f64, 0.0f64);
        for (&d, &ti) in decisions.iter().zip(&t) {
            let f = a * d + b;
            let p = if f >= 0.0 {
                (-f).exp() / (1.0 + (-f).exp())
            } else {
                1.0 / (1.0 + f.exp())
            };
            let q = 1.0 - p;
            h11 += d * d * p * q;
            h22 += p * q;
            h21 += d * p * q;
            g1 += d * (ti - p);
            g2 += ti - p;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0f64;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = fval(na, nb);
            if nf < fv + 1e-4 * step * gd {
                a = na;
                b = nb;
                fv = nf;
                break;
            }
            step /= 2.0;
        }
        if step < 1e-10 {
            break;
        }
    }
    (a, b)
}

/// Dual solution over standardized rows.
struct SmoSolution {
    alpha: Vec<f64>,
    bias: f64,
}

fn solve_smo(z: &[Vec<f64>], y: &[f64], c_box: &[f64], gamma: f64) -> SmoSolution {
    let n = z.len();
    let mut kmat = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf(&z[i], &z[j], gamma);
            kmat[i * n + j] = k;
            kmat[j * n + i] = k;
        }
    }
    let k = |i: usize, j: usize| kmat[i * n + j];

    let mut alpha = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let mut errors: Vec<f64> = (0..n).map(|i| -y[i]).collect();

    let take_step = |alpha: &mut Vec<f64>,
                         bias: &mut f64,
                         errors: &mut Vec<f64>,
                         i1: usize,
                         i2: usize|
     -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (alpha[i1], alpha[i2]);
        let (y1, y2) = (y[i1], y[i2]);
        let (e1, e2) = (errors[i1], errors[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            let g = a2 - a1;
            (g.max(0.0), (c_box[i1] + g).min(c_box[i2]))
        } else {
            let g = a1 + a2;
            ((g - c_box[i1]).max(0.0), g.min(c_box[i2]))
        };
        if hi - lo < ALPHA_EPS {
            return false;
        }
        let k11 = k(i1, i1);
        let k12 = k(i1, i2);
        let k22 = k(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            // The RBF kernel makes eta >= 0; eta = 0 means duplicate rows,
            // where the dual is linear along the constraint line. Move to
            // the endpoint the slope favors.
            let slope = y2 * (e1 - e2);
            if slope > 1e-12 {
                hi
            } else if slope < -1e-12 {
                lo
            } else {
                return false;
            }
        };
        if a2_new < ALPHA_EPS {
            a2_new = 0.0;
        } else if a2_new > c_box[i2] - ALPHA_EPS {
            a2_new = c_box[i2];
        }
        if (a2_new - a2).abs() < ALPHA_EPS * (a2_new + a2 + ALPHA_EPS) {
            return false;
        }
        let mut a1_new = a1 + s * (a2 - a2_new);
        if a1_new < ALPHA_EPS {
            a1_new = 0.0;
        } else if a1_new > c_box[i1] - ALPHA_EPS {
            a1_new = c_box[i1];
        }
        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);
        let b1 = *bias - e1 - d1 * k11 - d2 * k12;
        let b2 = *bias - e2 - d1 * k12 - d2 * k22;
        let b_new = if a1_new > 0.0 && a1_new < c_box[i1] {
            b1
        } else if a2_new > 0.0 && a2_new < c_box[i2] {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = b_new - *bias;
        for t in 0..n {
            errors[t] += d1 * k(i1, t) + d2 * k(i2, t) + db;
        }
        alpha[i1] = a1_new;
        alpha[i2] = a2_new;
        *bias = b_new;
        true
    };

    let violation = |alpha: &[f64], errors: &[f64], i: usize| -> bool {
        let r = errors[i] * y[i];
        (r < -KKT_TOL && alpha[i] < c_box[i]) || (r > KKT_TOL && alpha[i] > 0.0)
    };

    let examine = |alpha: &mut Vec<f64>,
                       bias: &mut f64,
                       errors: &mut Vec<f64>,
                       i2: usize|
     -> bool {
        if !violation(alpha, errors, i2) {
            return false;
        }
        let non_bound: Vec<usize> = (0..n)
            .filter(|&i| alpha[i] > 0.0 && alpha[i] < c_box[i])
            .collect();
        if non_bound.len() > 1 {
            let e2 = errors[i2];
            let best = non_bound
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    (errors[a] - e2)
                        .abs()
                        .total_cmp(&(errors[b] - e2).abs())
                        .then(b.cmp(&a))
                })
                .unwrap();
            if take_step(alpha, bias, errors, best, i2) {
                return true;
            }
        }
        for &i1 in &non_bound {
            if take_step(alpha, bias, errors, i1, i2) {
                return true;
            }
        }
        for i1 in 0..n {
            if take_step(alpha, bias, errors, i1, i2) {
                return true;
            }
        }
        false
    };

    let mut examine_all = true;
    for _ in 0..MAX_EPOCHS {
        if examine_all {
            // Refresh the error cache against drift once per full sweep.
            for i in 0..n {
                let mut f = bias;
                for j in 0..n {
                    if alpha[j] > 0.0 {
                        f += alpha[j] * y[j] * k(j, i);
                    }
                }
                errors[i] = f - y[i];
            }
        }
        let mut changed = 0usize;
        for i in 0..n {
            if examine_all || (alpha[i] > 0.0 && alpha[i] < c_box[i]) {
                if examine(&mut alpha, &mut bias, &mut errors, i) {
                    changed += 1;
                }
            }
        }
        if changed == 0 {
            if examine_all {
                break;
            }
            examine_all = true;
        } else {
            examine_all = false;
        }
    }

    SmoSolution { alpha, bias }
}

fn check_training_input(rows: &[Vec<f64>], y: &[i8]) -> Result<usize> {
    if rows.len() != y.len() || rows.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: rows.len(),
        });
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::DegenerateInput("empty feature rows".into()));
    }
    for row in rows {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("non-finite feature value".into()));
        }
    }
    let n_pos = y.iter().filter(|&&l| l > 0).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::SingleClass);
    }
    Ok(d)
}

fn class_boxes(y: &[i8], params: &SvmParams) -> (Vec<f64>, Vec<f64>) {
    let yf: Vec<f64> = y.iter().map(|&l| if l > 0 { 1.0 } else { -1.0 }).collect();
    let c_box: Vec<f64> = y
        .iter()
        .map(|&l| {
            if l > 0 {
                params.c * params.positive_weight
            } else {
                params.c
            }
        })
        .collect();
    (yf, c_box)
}

fn fit_uncalibrated(z: &[Vec<f64>], y: &[i8], params: &SvmParams, gamma: f64) -> (Vec<f64>, f64) {
    let (yf, c_box) = class_boxes(y, params);
    let sol = solve_smo(z, &yf, &c_box, gamma);
    (sol.alpha, sol.bias)
}

fn raw_decision(z: &[Vec<f64>], y: &[i8], alpha: &[f64], bias: f64, gamma: f64, q: &[f64]) -> f64 {
    let mut f = bias;
    for i in 0..z.len() {
        if alpha[i] > 0.0 {
            let sign = if y[i] > 0 { 1.0 } else { -1.0 };
            f += alpha[i] * sign * rbf(&z[i], q, gamma);
        }
    }
    f
}

/// Train a class-weighted RBF SVM on raw feature rows. Inputs are z-scored
/// internally; the melanoma class gets a `positive_weight` times larger box.
/// Soft outputs come from a sigmoid fit on out-of-fold decision values of an
/// internal stratified 3-fold split (falling back to training decisions when
/// a class is too small to fold).
pub fn train_svm(rows: &[Vec<f64>], y: &[i8], params: &SvmParams) -> Result<SvmModel> {
    let d = check_training_input(rows, y)?;
    if params.c <= 0.0 || params.positive_weight <= 0.0 {
        return Err(Error::Config("penalties must be positive".into()));
    }
    let standardizer = Standardizer::fit(rows);
    let z: Vec<Vec<f64>> = rows.iter().map(|r| standardizer.transform(r)).collect();
    let gamma = params.gamma.unwrap_or(1.0 / d as f64);
    if gamma <= 0.0 {
        return Err(Error::Config("gamma must be positive".into()));
    }

    let (alpha, bias) = fit_uncalibrated(&z, y, params, gamma);

    // Out-of-fold decision values for calibration.
    let n_pos = y.iter().filter(|&&l| l > 0).count();
    let n_neg = y.len() - n_pos;
    let mut cal_dec = Vec::with_capacity(y.len());
    let mut cal_y = Vec::with_capacity(y.len());
    if n_pos >= 3 && n_neg >= 3 {
        let folds = stratified_kfold(y, 3, CALIBRATION_SEED)?;
        for f in 0..3 {
            let tr: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != f).collect();
            let te: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == f).collect();
            let z_tr: Vec<Vec<f64>> = tr.iter().map(|&i| z[i].clone()).collect();
            let y_tr: Vec<i8> = tr.iter().map(|&i| y[i]).collect();
            let (fa, fb) = fit_uncalibrated(&z_tr, &y_tr, params, gamma);
            for &i in &te {
                cal_dec.push(raw_decision(&z_tr, &y_tr, &fa, fb, gamma, &z[i]));
                cal_y.push(y[i]);
            }
        }
    } else {
        for (i, zi) in z.iter().enumerate() {
            cal_dec.push(raw_decision(&z, y, &alpha, bias, gamma, zi));
            cal_y.push(y[i]);
        }
    }
    let sigmoid = sigmoid_train(&cal_dec, &cal_y);

    let (yf, c_box) = class_boxes(y, params);
    Ok(SvmModel {
        points: z,
        alpha,
        y: yf,
        c_box,
        bias,
        gamma,
        standardizer,
        sigmoid,
        n_features: d,
    })
}

/// Cosine distance 1 - a.b / (|a||b|); zero-norm inputs count as maximally
/// distant.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na <= 0.0 || nb <= 0.0 {
        return 1.0;
    }
    1.0 - dot / (na * nb)
}

/// Score for a query whose two nearest neighbors disagree: closer melanoma
/// neighbor means higher score. Both distances zero is a perfect tie.
pub fn mixed_pair_score(d_m: f64, d_b: f64) -> f64 {
    if d_m + d_b <= 0.0 {
        0.5
    } else {
        d_b / (d_m + d_b)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnModel {
    pub histograms: Vec<Vec<f64>>,
    pub labels: Vec<i8>,
    pub k: usize,
}

impl KnnModel {
    pub fn fit(histograms: Vec<Vec<f64>>, labels: Vec<i8>, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if histograms.len() != labels.len() || histograms.len() < k {
            return Err(Error::InsufficientSamples {
                what: "stored histograms",
                needed: k,
                got: histograms.len(),
            });
        }
        let d = histograms[0].len();
        for h in &histograms {
            if h.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: h.len(),
                });
            }
            let sum: f64 = h.iter().sum();
            if h.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-6 {
                return Err(Error::DegenerateInput(
                    "histograms must be L1-normalized".into(),
                ));
            }
        }
        Ok(Self {
            histograms,
            labels,
            k,
        })
    }

    /// Soft melanoma score in [0, 1]. With k = 2: both neighbors melanoma
    /// gives 1, both benign 0, and a disagreement uses the distance ratio of
    /// [`mixed_pair_score`]. Other k values use the melanoma fraction among
    /// the k nearest.
    pub fn soft(&self, h: &[f64]) -> Result<f64> {
        if h.len() != self.histograms[0].len() {
            return Err(Error::DimensionMismatch {
                expected: self.histograms[0].len(),
                got: h.len(),
            });
        }
        let mut dist: Vec<(f64, usize)> = self
            .histograms
            .iter()
            .enumerate()
            .map(|(i, s)| (cosine_distance(s, h), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &dist[..self.k];
        if self.k == 2 {
            let (d0, i0) = nearest[0];
            let (d1, i1) = nearest[1];
            let (l0, l1) = (self.labels[i0] > 0, self.labels[i1] > 0);
            return Ok(match (l0, l1) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                (true, false) => mixed_pair_score(d0, d1),
                (false, true) => mixed_pair_score(d1, d0),
            });
        }
        let pos = nearest
            .iter()
            .filter(|&&(_, i)| self.labels[i] > 0)
            .count();
        Ok(pos as f64 / self.k as f64)
    }

    pub fn hard(&self, h: &[f64]) -> Result<bool> {
        Ok(self.soft(h)? >= 0.5)
    }
}

/// Melanoma iff any category classifier fires (sum of hard values >= 1).
pub fn fuse_sum(hard: [bool; 4]) -> bool {
    hard.iter().any(|&h| h)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FusionModel {
    /// Logical OR of the four hard decisions.
    Sum,
    /// Threshold on an ROC-weighted sum of the hard decisions.
    Weighted {
        rule: FusionRule,
        weights: [f64; 4],
        threshold: f64,
    },
    /// Second-stage SVM over the four soft scores.
    Hierarchical { inner: SvmModel },
}

impl FusionModel {
    /// Fused (hard, soft) verdict from the four category outputs.
    pub fn decide(&self, soft: &[f64; 4], hard: &[bool; 4]) -> Result<(bool, f64)> {
        match self {
            FusionModel::Sum => {
                let mean = soft.iter().sum::<f64>() / 4.0;
                Ok((fuse_sum(*hard), mean))
            }
            FusionModel::Weighted {
                weights, threshold, ..
            } => {
                let s: f64 = weights
                    .iter()
                    .zip(hard)
                    .map(|(w, &h)| if h { *w } else { 0.0 })
                    .sum();
                let total: f64 = weights.iter().sum();
                let norm = if total > 0.0 { s / total } else { 0.0 };
                Ok((s >= *threshold, norm))
            }
            FusionModel::Hierarchical { inner } => {
                let row = soft.to_vec();
                Ok((inner.hard(&row)?, inner.soft(&row)?))
            }
        }
    }
}

/// Fit the weighted fusion rule on validation outputs: each classifier's
/// weight is its validation ROC summary (maximum sensitivity at specificity
/// >= 0.5, or AUC), and the decision threshold is the achievable weighted
/// sum maximizing validation balanced accuracy (ties to the lowest).
pub fn fit_weighted_fusion(
    val_soft: &[[f64; 4]],
    val_hard: &[[bool; 4]],
    val_labels: &[i8],
    rule: FusionRule,
) -> Result<FusionModel> {
    if val_soft.len() != val_labels.len() || val_soft.len() != val_hard.len() {
        return Err(Error::DimensionMismatch {
            expected: val_labels.len(),
            got: val_soft.len(),
        });
    }
    let truth: Vec<bool> = val_labels.iter().map(|&l| l > 0).collect();
    let mut weights = [0.0f64; 4];
    for j in 0..4 {
        let scores: Vec<f64> = val_soft.iter().map(|row| row[j]).collect();
        let roc = roc_auc(&scores, &truth)?;
        weights[j] = match rule {
            FusionRule::WeightedSens => roc.sens_at_spec(0.5),
            FusionRule::WeightedAuc => roc.auc,
            _ => {
                return Err(Error::Config(
                    "weighted fusion needs a weighted rule".into(),
                ))
            }
        };
    }

    // Candidate thresholds: every achievable weighted sum (subset sums).
    let mut candidates = Vec::with_capacity(16);
    for mask in 0..16u32 {
        let s: f64 = (0..4)
            .filter(|&j| mask & (1 << j) != 0)
            .map(|j| weights[j])
            .sum();
        candidates.push(s);
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let sums: Vec<f64> = val_hard
        .iter()
        .map(|row| {
            weights
                .iter()
                .zip(row)
                .map(|(w, &h)| if h { *w } else { 0.0 })
                .sum()
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    for &t in &candidates {
        let pred: Vec<bool> = sums.iter().map(|&s| s >= t).collect();
        let m = confusion_balanced(&pred, &truth);
        if m > best.0 + 1e-12 {
            best = (m, t);
        }
    }
    Ok(FusionModel::Weighted {
        rule,
        weights,
        threshold: best.1,
    })
}

fn confusion_balanced(pred: &[bool], truth: &[bool]) -> f64 {
    crate::eval::confusion_metrics(pred, truth)
        .ok()
        .and_then(|m| m.balanced_accuracy)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Second-stage SVM over 4-dimensional soft-score vectors, same training
/// contract (and class weighting) as the category SVMs.
pub fn train_hierarchical(
    train_soft: &[[f64; 4]],
    labels: &[i8],
    params: &SvmParams,
) -> Result<FusionModel> {
    let rows: Vec<Vec<f64>> = train_soft.iter().map(|r| r.to_vec()).collect();
    let inner = train_svm(&rows, labels, params)?;
    Ok(FusionModel::Hierarchical { inner })
}

//! Per-category feature selection: equal-width discretization, mutual
//! information, greedy relevance-minus-redundancy selection, and a hybrid
//! criterion that blends in an average-neighborhood-margin quality score.
//!
//! Scale conventions, chosen so the two terms of the hybrid criterion are
//! commensurable: entropies and mutual information use log base 2 (so MI
//! with a binary label is at most 1), margin quality is computed on z-scored
//! values and normalized by the best quality among the current candidates.

use serde::{Deserialize, Serialize};

use crate::config::SelectionMode;
use crate::error::{Error, Result};

/// Fraction of a sample's own class size used as the neighborhood count for
/// margin quality.
pub const NEIGHBOR_FRAC: f64 = 0.5;

/// Equal-width binning learned from training values and applicable to new
/// values (out-of-range values land in the extreme bins).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizedFeature {
    pub b: usize,
    pub lo: f64,
    pub hi: f64,
}

impl DiscretizedFeature {
    pub fn from_training(values: &[f64], b: usize) -> Result<Self> {
        if !(2..=6).contains(&b) {
            return Err(Error::Config(format!("bin count {b} outside 2..=6")));
        }
        if values.len() < 2 {
            return Err(Error::InsufficientSamples {
                what: "training values",
                needed: 2,
                got: values.len(),
            });
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::DegenerateInput(
                "constant or non-finite training feature cannot be binned".into(),
            ));
        }
        Ok(Self { b, lo, hi })
    }

    /// Bin index per value; the top edge maps to the last bin (right-closed).
    pub fn apply(&self, values: &[f64]) -> Vec<u32> {
        values
            .iter()
            .map(|&v| {
                let t = (v - self.lo) / (self.hi - self.lo) * self.b as f64;
                (t as u32).min(self.b as u32 - 1)
            })
            .collect()
    }
}

fn joint_counts(x: &[u32], y: &[u32]) -> (Vec<f64>, usize, usize) {
    let nx = x.iter().max().map_or(0, |&m| m as usize + 1);
    let ny = y.iter().max().map_or(0, |&m| m as usize + 1);
    let mut joint = vec![0.0f64; nx * ny];
    let inv = 1.0 / x.len() as f64;
    for (&a, &b) in x.iter().zip(y) {
        joint[a as usize * ny + b as usize] += inv;
    }
    (joint, nx, ny)
}

/// Shannon entropy of a discrete sequence, in bits.
pub fn entropy(x: &[u32]) -> f64 {
    let n = x.iter().max().map_or(0, |&m| m as usize + 1);
    let mut counts = vec![0usize; n];
    for &a in x {
        counts[a as usize] += 1;
    }
    let total = x.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Plug-in mutual information of two equal-length discrete sequences, in
/// bits (0 log 0 taken as 0).
pub fn mutual_information(x: &[u32], y: &[u32]) -> f64 {
    assert_eq!(x.len(), y.len(), "sequences must pair up");
    assert!(x.len() >= 2, "need at least two samples");
    let (joint, nx, ny) = joint_counts(x, y);
    let mut px = vec![0.0f64; nx];
    let mut py = vec![0.0f64; ny];
    for a in 0..nx {
        for b in 0..ny {
            px[a] += joint[a * ny + b];
            py[b] += joint[a * ny + b];
        }
    }
    let mut mi = 0.0;
    for a in 0..nx {
        for b in 0..ny {
            let p = joint[a * ny + b];
            if p > 0.0 {
                mi += p * (p / (px[a] * py[b])).log2();
            }
        }
    }
    mi.max(0.0)
}

/// Mutual information normalized by the smaller marginal entropy, in [0, 1].
pub fn nmi(x: &[u32], y: &[u32]) -> Result<f64> {
    let hx = entropy(x);
    let hy = entropy(y);
    if hx <= 0.0 || hy <= 0.0 {
        return Err(Error::DegenerateInput(
            "normalized mutual information needs non-constant variables".into(),
        ));
    }
    Ok((mutual_information(x, y) / hx.min(hy)).clamp(0.0, 1.0))
}

/// Binary class labels (-1 benign, +1 melanoma) as bin indices.
pub fn labels_to_bins(labels: &[i8]) -> Vec<u32> {
    labels.iter().map(|&l| if l > 0 { 1 } else { 0 }).collect()
}

fn relevance_minus_redundancy(
    idx: usize,
    selected: &[usize],
    feats: &[Vec<u32>],
    label_bins: &[u32],
) -> Result<f64> {
    let rel = mutual_information(label_bins, &feats[idx]);
    if selected.is_empty() {
        return Ok(rel);
    }
    let mut red = 0.0;
    for &s in selected {
        red += nmi(&feats[idx], &feats[s])?;
    }
    Ok(rel - red / selected.len() as f64)
}

/// One greedy step: the candidate maximizing label relevance minus mean
/// redundancy against the already-selected set (plain relevance when nothing
/// is selected yet). Ties go to the lowest index.
pub fn nmifs_step(
    candidates: &[usize],
    selected: &[usize],
    feats: &[Vec<u32>],
    label_bins: &[u32],
) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::InsufficientSamples {
            what: "candidate features",
            needed: 1,
            got: 0,
        });
    }
    let mut best = (candidates[0], f64::NEG_INFINITY);
    for &c in candidates {
        let score = relevance_minus_redundancy(c, selected, feats, label_bins)?;
        if score > best.1 {
            best = (c, score);
        }
    }
    Ok(best)
}

/// Average-neighborhood-margin quality of one feature: per sample, the gap
/// between the mean distance to its nearest other-class values and the mean
/// distance to its nearest same-class values, summed over samples.
///
/// Values are z-scored first so the score does not depend on feature units;
/// a constant feature scores 0. The neighborhood size is
/// ceil(`n_frac` * size of the sample's class), capped by availability.
pub fn anm_quality(f: &[f64], labels: &[i8], n_frac: f64) -> Result<f64> {
    assert_eq!(f.len(), labels.len(), "feature and labels must pair up");
    let pos: Vec<usize> = (0..f.len()).filter(|&i| labels[i] > 0).collect();
    let neg: Vec<usize> = (0..f.len()).filter(|&i| labels[i] <= 0).collect();
    for (group, what) in [
        (&pos, "positive-class samples"),
        (&neg, "negative-class samples"),
    ] {
        if group.len() < 2 {
            return Err(Error::InsufficientSamples {
                what,
                needed: 2,
                got: group.len(),
            });
        }
    }
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let var = f.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var <= 0.0 {
        return Ok(0.0);
    }
    let sd = var.sqrt();
    let z: Vec<f64> = f.iter().map(|v| (v - mean) / sd).collect();

    let mut q = 0.0;
    for i in 0..z.len() {
        let (same, other) = if labels[i] > 0 {
            (&pos, &neg)
        } else {
            (&neg, &pos)
        };
        let k = (n_frac * same.len() as f64).ceil() as usize;
        let nearest_mean = |group: &[usize], count: usize| -> f64 {
            let mut d: Vec<(f64, usize)> = group
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| ((z[i] - z[j]).abs(), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let take = count.min(d.len());
            d[..take].iter().map(|&(dist, _)| dist).sum::<f64>() / take as f64
        };
        let homo = nearest_mean(same, k);
        let hetero = nearest_mean(other, k);
        q += (hetero - homo).abs();
    }
    Ok(q)
}

/// One greedy step of the hybrid criterion
/// `alpha * Q_hat + (1 - alpha) * (relevance - redundancy)` where `Q_hat` is
/// each candidate's margin quality divided by the best quality among the
/// current candidates. Ties go to the lowest index.
pub fn hybrid_step(
    candidates: &[usize],
    selected: &[usize],
    feats: &[Vec<u32>],
    quality: &[f64],
    label_bins: &[u32],
    alpha: f64,
) -> Result<(usize, f64)> {
    if candidates.is_empty() {
        return Err(Error::InsufficientSamples {
            what: "candidate features",
            needed: 1,
            got: 0,
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Config(format!("alpha {alpha} outside [0, 1]")));
    }
    let q_max = candidates
        .iter()
        .map(|&c| quality[c])
        .fold(0.0f64, f64::max);
    let mut best = (candidates[0], f64::NEG_INFINITY);
    for &c in candidates {
        let q_hat = if q_max > 0.0 { quality[c] / q_max } else { 0.0 };
        let mi_term = relevance_minus_redundancy(c, selected, feats, label_bins)?;
        let score = alpha * q_hat + (1.0 - alpha) * mi_term;
        if score > best.1 {
            best = (c, score);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SelectionResult {
    /// Selected column indices in selection order.
    pub indices: Vec<usize>,
    /// Criterion value at each step.
    pub scores: Vec<f64>,
    pub mode: SelectionMode,
    pub alpha: f64,
    pub bins: usize,
    /// Candidate columns dropped because they were constant on training data.
    pub dropped: Vec<usize>,
}

/// Greedy selection of `m` features from the candidate columns of a dataset
/// (`columns[c]` holds feature `c` across samples). Constant columns carry
/// no information and are dropped from the pool before selection.
pub fn select(
    columns: &[Vec<f64>],
    labels: &[i8],
    candidates: &[usize],
    m: usize,
    mode: SelectionMode,
    alpha: f64,
    b: usize,
) -> Result<SelectionResult> {
    let label_bins = labels_to_bins(labels);
    let mut feats: Vec<Vec<u32>> = vec![Vec::new(); columns.len()];
    let mut pool = Vec::with_capacity(candidates.len());
    let mut dropped = Vec::new();
    for &c in candidates {
        match DiscretizedFeature::from_training(&columns[c], b) {
            Ok(d) => {
                feats[c] = d.apply(&columns[c]);
                pool.push(c);
            }
            Err(_) => dropped.push(c),
        }
    }
    if pool.len() < m {
        return Err(Error::InsufficientSamples {
            what: "usable candidate features",
            needed: m,
            got: pool.len(),
        });
    }
    let quality: Vec<f64> = match mode {
        SelectionMode::Mi => vec![0.0; columns.len()],
        SelectionMode::Hybrid => {
            let mut q = vec![0.0; columns.len()];
            for &c in &pool {
                q[c] = anm_quality(&columns[c], labels, NEIGHBOR_FRAC)?;
            }
            q
        }
    };

    let mut selected = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    for _ in 0..m {
        let (idx, score) = match mode {
            SelectionMode::Mi => nmifs_step(&pool, &selected, &feats, &label_bins)?,
            SelectionMode::Hybrid => {
                hybrid_step(&pool, &selected, &feats, &quality, &label_bins, alpha)?
            }
        };
        selected.push(idx);
        scores.push(score);
        pool.retain(|&c| c != idx);
    }
    Ok(SelectionResult {
        indices: selected,
        scores,
        mode,
        alpha,
        bins: b,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretize_ramp_matches_arithmetic() {
        let values: Vec<f64> = (0..10).map(|v| v as f64).collect();
        let d = DiscretizedFeature::from_training(&values, 5).unwrap();
        assert_eq!(d.apply(&values), vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
    }

    #[test]
    fn discretize_clamps_and_midpoint_goes_right() {
        let d = DiscretizedFeature::from_training(&[0.0, 10.0], 2).unwrap();
        assert_eq!(d.apply(&[-5.0]), vec![0]);
        assert_eq!(d.apply(&[25.0]), vec![1]);
        assert_eq!(d.apply(&[5.0]), vec![1], "midpoint takes the right bin");
    }

    #[test]
    fn discretize_rejects_bad_input() {
        assert!(DiscretizedFeature::from_training(&[3.0, 3.0, 3.0], 5).is_err());
        assert!(DiscretizedFeature::from_training(&[0.0, 1.0], 7).is_err());
        assert!(DiscretizedFeature::from_training(&[0.0, 1.0], 1).is_err());
    }

    #[test]
    fn mi_of_identical_balanced_binary_is_one_bit() {
        let x = vec![0u32, 0, 0, 1, 1, 1];
        assert!((mutual_information(&x, &x) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mi_of_independent_product_table_is_zero() {
        // All four (x, y) combinations equally often: exactly independent.
        let x = vec![0u32, 0, 1, 1];
        let y = vec![0u32, 1, 0, 1];
        assert!(mutual_information(&x, &y).abs() < 1e-12);
    }

    #[test]
    fn mi_matches_entropy_identity() {
        // MI = H(x) + H(y) - H(joint), a distinct computation path.
        let x = vec![0u32, 0, 0, 1, 1, 2, 2, 2, 0];
        let y = vec![0u32, 1, 1, 1, 2, 2, 0, 0, 2];
        let joint: Vec<u32> = x.iter().zip(&y).map(|(&a, &b)| a * 3 + b).collect();
        let expect = entropy(&x) + entropy(&y) - entropy(&joint);
        assert!((mutual_information(&x, &y) - expect).abs() < 1e-12);
    }

    #[test]
    fn mi_is_symmetric_and_relabel_invariant() {
        let x = vec![0u32, 1, 2, 0, 1, 2, 2, 1];
        let y = vec![1u32, 1, 0, 0, 1, 0, 1, 1];
        let a = mutual_information(&x, &y);
        assert!((a - mutual_information(&y, &x)).abs() < 1e-12);
        // Bijective relabeling 0->2, 1->0, 2->1 of x.
        let relabeled: Vec<u32> = x.iter().map(|&v| [2u32, 0, 1][v as usize]).collect();
        assert!((a - mutual_information(&relabeled, &y)).abs() < 1e-12);
    }

    #[test]
    fn nmi_endpoints() {
        let x = vec![0u32, 0, 1, 1, 0, 1];
        assert!((nmi(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        let indep_x = vec![0u32, 0, 1, 1];
        let indep_y = vec![0u32, 1, 0, 1];
        assert!(nmi(&indep_x, &indep_y).unwrap().abs() < 1e-12);
        // Deterministic coarsening: y determines x, H(x) < H(y).
        let y = vec![0u32, 1, 2, 3, 0, 1, 2, 3];
        let coarse: Vec<u32> = y.iter().map(|&v| v / 2).collect();
        assert!((nmi(&coarse, &y).unwrap() - 1.0).abs() < 1e-12);
        let constant = vec![0u32; 6];
        assert!(nmi(&constant, &x).is_err());
    }

    #[test]
    fn nmifs_prefers_novel_over_duplicate() {
        // Column 0: the label with one flip (strongest). Column 1: an exact
        // duplicate of column 0. Column 2: weaker but largely independent of
        // column 0. After selecting 0, the duplicate's redundancy of 1 sinks
        // it below the novel feature.
        let labels: Vec<i8> = vec![-1, -1, -1, -1, 1, 1, 1, 1];
        let label_bins = labels_to_bins(&labels);
        let near_label = vec![0u32, 0, 0, 1, 1, 1, 1, 1];
        let novel = vec![0u32, 0, 1, 0, 1, 1, 0, 1];
        let feats = vec![near_label.clone(), near_label, novel];
        let (first, s1) = nmifs_step(&[0, 1, 2], &[], &feats, &label_bins).unwrap();
        assert_eq!(first, 0, "highest relevance, lowest index on tie");
        assert!(s1 > 0.5);
        let (second, s2) = nmifs_step(&[1, 2], &[0], &feats, &label_bins).unwrap();
        assert_eq!(second, 2, "duplicate scores MI - 1 < 0, novel wins");
        assert!(s2 > 0.0);
    }

    #[test]
    fn nmifs_single_candidate() {
        let labels: Vec<i8> = vec![-1, -1, 1, 1];
        let label_bins = labels_to_bins(&labels);
        let feats = vec![vec![0u32, 1, 0, 1]];
        let (idx, _) = nmifs_step(&[0], &[], &feats, &label_bins).unwrap();
        assert_eq!(idx, 0);
    }

    #[test]
    fn anm_constant_feature_is_zero() {
        let labels: Vec<i8> = vec![-1, -1, 1, 1];
        assert_eq!(anm_quality(&[4.0; 4], &labels, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn anm_separated_balanced_classes() {
        // z-scores are -1/+1; every sample sees homogeneous mean 0 and
        // heterogeneous mean 2, so Q = 2n.
        let labels: Vec<i8> = vec![-1, -1, -1, 1, 1, 1];
        let f = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let q = anm_quality(&f, &labels, 0.5).unwrap();
        assert!((q - 12.0).abs() < 1e-12);
    }

    #[test]
    fn anm_needs_two_per_class() {
        let labels: Vec<i8> = vec![-1, -1, -1, 1];
        assert!(anm_quality(&[0.0, 0.1, 0.2, 1.0], &labels, 0.5).is_err());
    }

    #[test]
    fn anm_exactly_invariant_under_binary_scaling() {
        let labels: Vec<i8> = vec![-1, -1, -1, -1, 1, 1, 1, 1];
        let f = vec![0.3, 0.1, 0.4, 0.15, 0.9, 1.2, 0.8, 1.1];
        let q = anm_quality(&f, &labels, 0.5).unwrap();
        for a in [2.0f64, -1.0, 0.5, -4.0] {
            let g: Vec<f64> = f.iter().map(|v| a * v).collect();
            assert_eq!(anm_quality(&g, &labels, 0.5).unwrap(), q, "a = {a}");
        }
        let shifted: Vec<f64> = f.iter().map(|v| 1.7 * v + 3.1).collect();
        assert!((anm_quality(&shifted, &labels, 0.5).unwrap() - q).abs() < 1e-9);
    }

    /// Two features with identical discretized patterns (equal MI) but very
    /// different class margins.
    fn margin_scenario() -> (Vec<Vec<f64>>, Vec<i8>) {
        let labels: Vec<i8> = (0..20).map(|i| if i < 10 { -1 } else { 1 }).collect();
        // Narrow margin: classes nearly touch relative to their spread.
        let narrow: Vec<f64> = (0..20)
            .map(|i| {
                if i < 10 {
                    i as f64 * 0.1
                } else {
                    1.0 + (i - 10) as f64 * 0.1
                }
            })
            .collect();
        // Wide margin: tight clusters far apart.
        let wide: Vec<f64> = (0..20)
            .map(|i| {
                if i < 10 {
                    i as f64 * 0.01
                } else {
                    10.0 + (i - 10) as f64 * 0.01
                }
            })
            .collect();
        (vec![narrow, wide], labels)
    }

    #[test]
    fn hybrid_alpha_zero_matches_plain_step() {
        let (cols, labels) = margin_scenario();
        let label_bins = labels_to_bins(&labels);
        let feats: Vec<Vec<u32>> = cols
            .iter()
            .map(|c| {
                DiscretizedFeature::from_training(c, 2)
                    .unwrap()
                    .apply(c)
            })
            .collect();
        let quality: Vec<f64> = cols
            .iter()
            .map(|c| anm_quality(c, &labels, 0.5).unwrap())
            .collect();
        let plain = nmifs_step(&[0, 1], &[], &feats, &label_bins).unwrap();
        let hybrid = hybrid_step(&[0, 1], &[], &feats, &quality, &label_bins, 0.0).unwrap();
        assert_eq!(plain.0, hybrid.0);
        assert!((plain.1 - hybrid.1).abs() < 1e-12);
    }

    #[test]
    fn hybrid_breaks_equal_mi_tie_by_margin() {
        let (cols, labels) = margin_scenario();
        let label_bins = labels_to_bins(&labels);
        let feats: Vec<Vec<u32>> = cols
            .iter()
            .map(|c| {
                DiscretizedFeature::from_training(c, 2)
                    .unwrap()
                    .apply(c)
            })
            .collect();
        assert_eq!(feats[0], feats[1], "identical bins, so identical MI");
        let quality: Vec<f64> = cols
            .iter()
            .map(|c| anm_quality(c, &labels, 0.5).unwrap())
            .collect();
        assert!(quality[1] > quality[0], "wide margin has higher quality");
        // Plain MI ties and falls back to the lowest index (the narrow one);
        // the hybrid criterion picks the wide-margin feature instead.
        let (plain, _) = nmifs_step(&[0, 1], &[], &feats, &label_bins).unwrap();
        assert_eq!(plain, 0);
        let (mixed, _) =
            hybrid_step(&[0, 1], &[], &feats, &quality, &label_bins, 0.4).unwrap();
        assert_eq!(mixed, 1);
    }

    #[test]
    fn hybrid_alpha_one_is_pure_quality() {
        let (cols, labels) = margin_scenario();
        let label_bins = labels_to_bins(&labels);
        let feats: Vec<Vec<u32>> = cols
            .iter()
            .map(|c| {
                DiscretizedFeature::from_training(c, 2)
                    .unwrap()
                    .apply(c)
            })
            .collect();
        let quality: Vec<f64> = cols
            .iter()
            .map(|c| anm_quality(c, &labels, 0.5).unwrap())
            .collect();
        let (idx, score) =
            hybrid_step(&[0, 1], &[], &feats, &quality, &label_bins, 1.0).unwrap();
        assert_eq!(idx, 1);
        assert!((score - 1.0).abs() < 1e-12, "normalized top quality is 1");
    }

    #[test]
    fn select_full_category_is_a_permutation() {
        let labels: Vec<i8> = (0..12).map(|i| if i % 2 == 0 { -1 } else { 1 }).collect();
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|c| {
                (0..12)
                    .map(|i| ((i * (c + 3) + c) % 7) as f64)
                    .collect()
            })
            .collect();
        let res = select(&cols, &labels, &[0, 1, 2, 3], 4, SelectionMode::Mi, 0.4, 5).unwrap();
        let mut sorted = res.indices.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
        let rerun = select(&cols, &labels, &[0, 1, 2, 3], 4, SelectionMode::Mi, 0.4, 5).unwrap();
        assert_eq!(res, rerun, "selection is deterministic");
    }

    #[test]
    fn select_label_copy_wins_first_in_both_modes() {
        let labels: Vec<i8> = (0..16).map(|i| if i < 8 { -1 } else { 1 }).collect();
        let mut cols: Vec<Vec<f64>> = (0..5)
            .map(|c| {
                (0..16)
                    .map(|i| (((i * 5 + c * 11 + i * i) % 13) as f64) * 0.3)
                    .collect()
            })
            .collect();
        cols.push(labels.iter().map(|&l| l as f64).collect());
        let cands: Vec<usize> = (0..6).collect();
        for mode in [SelectionMode::Mi, SelectionMode::Hybrid] {
            let res = select(&cols, &labels, &cands, 3, mode, 0.4, 5).unwrap();
            assert_eq!(res.indices[0], 5, "mode {mode:?}");
        }
    }

    #[test]
    fn select_drops_constant_columns() {
        let labels: Vec<i8> = (0..10).map(|i| if i < 5 { -1 } else { 1 }).collect();
        let cols = vec![
            vec![7.0; 10],
            (0..10).map(|i| i as f64).collect::<Vec<f64>>(),
            (0..10).map(|i| (i % 3) as f64).collect::<Vec<f64>>(),
        ];
        let res = select(&cols, &labels, &[0, 1, 2], 2, SelectionMode::Mi, 0.4, 5).unwrap();
        assert_eq!(res.dropped, vec![0]);
        assert!(!res.indices.contains(&0));
        // Asking for more features than usable candidates fails.
        assert!(select(&cols, &labels, &[0, 1, 2], 3, SelectionMode::Mi, 0.4, 5).is_err());
    }
}

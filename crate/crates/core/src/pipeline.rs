//! End-to-end drivers: corpus feature extraction, the trained model bundle
//! (per-category selection, four category SVMs, the LBP kNN and a fusion
//! stage), single-image prediction and stratified cross-validation.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    fit_weighted_fusion, train_hierarchical, train_svm, FusionModel, KnnModel, SvmModel, SvmParams,
};
use crate::config::{FusionRule, RunConfig, SkinConfig, TextureSource};
use crate::error::{Error, Result};
use crate::eval::{confusion_metrics, roc_auc, stratified_kfold, EvalReport, FoldRecord};
use crate::features::{
    catalog, category_indices, extract_all, FeatureCategory, LBP_RANGE, NUM_FEATURES,
};
use crate::featsel::{select, SelectionResult};
use crate::imgproc::{BinaryMask, RasterImage};
use crate::segment::{segment_lesion, tdr, LesionSegmentation};
use crate::skin::{default_model, detect_skin};
use crate::synth::{load_mask_png, Corpus};

/// Bundle format version written to and checked on (de)serialization.
pub const BUNDLE_VERSION: u32 = 1;
const FUSION_FOLD_SALT: u64 = 0xf05e;

/// Extracted feature rows for a corpus, in manifest order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureDataset {
    pub ids: Vec<String>,
    /// +1 melanoma, -1 benign.
    pub labels: Vec<i8>,
    /// One row of [`NUM_FEATURES`] values per sample.
    pub rows: Vec<Vec<f64>>,
    /// Segmentation true-detection rate against ground truth, when known.
    pub tdrs: Vec<Option<f64>>,
}

impl FeatureDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            tdrs: idx.iter().map(|&i| self.tdrs[i]).collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ds: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if ds.rows.iter().any(|r| r.len() != NUM_FEATURES) {
            return Err(Error::ModelFormat("feature row length mismatch".into()));
        }
        if ds.ids.len() != ds.rows.len()
            || ds.labels.len() != ds.rows.len()
            || ds.tdrs.len() != ds.rows.len()
        {
            return Err(Error::ModelFormat("dataset column lengths differ".into()));
        }
        Ok(ds)
    }
}

/// Skin mask per the run configuration: either every pixel (corpora without
/// background clutter) or the bundled likelihood-ratio detector.
pub fn skin_mask_for(img: &RasterImage, cfg: &SkinConfig) -> Result<BinaryMask> {
    if cfg.assume_all_skin {
        Ok(BinaryMask::from_fn(img.width(), img.height(), |_, _| true))
    } else {
        detect_skin(img, default_model(), cfg.theta)
    }
}

fn with_sample_context<T>(id: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Sample {
        id: id.to_string(),
        cause: Box::new(e),
    })
}

/// Segment every corpus image and extract its feature row. `root` is the
/// directory holding the manifest's relative paths. Entries keep manifest
/// order regardless of thread count.
pub fn extract_dataset(corpus: &Corpus, root: &Path, config: &RunConfig) -> Result<FeatureDataset> {
    let extracted: Vec<(String, i8, Vec<f64>, Option<f64>)> = corpus
        .entries
        .par_iter()
        .map(|entry| {
            let id = entry
                .image
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| entry.image.display().to_string());
            let run = || -> Result<(Vec<f64>, Option<f64>)> {
                let img = RasterImage::load_png(&root.join(&entry.image))?;
                let gt = load_mask_png(&root.join(&entry.mask))?;
                let skin = skin_mask_for(&img, &config.skin)?;
                let seg = segment_lesion(&img, &skin, &config.segmentation)?;
                let fv = extract_all(&img, &seg.mask)?;
                let rate = tdr(&gt, &seg.mask).ok();
                Ok((fv.values, rate))
            };
            let (values, rate) = with_sample_context(&id, run())?;
            Ok((id, entry.class.label(), values, rate))
        })
        .collect::<Result<_>>()?;

    let mut ds = FeatureDataset {
        ids: Vec::with_capacity(extracted.len()),
        labels: Vec::with_capacity(extracted.len()),
        rows: Vec::with_capacity(extracted.len()),
        tdrs: Vec::with_capacity(extracted.len()),
    };
    for (id, label, values, rate) in extracted {
        ds.ids.push(id);
        ds.labels.push(label);
        ds.rows.push(values);
        ds.tdrs.push(rate);
    }
    Ok(ds)
}

/// One category arm: the feature indices chosen on training data and the SVM
/// fit on them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryModel {
    pub name: String,
    pub feature_indices: Vec<usize>,
    pub feature_names: Vec<String>,
    pub svm: SvmModel,
}

impl CategoryModel {
    pub fn project(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != NUM_FEATURES {
            return Err(Error::DimensionMismatch {
                expected: NUM_FEATURES,
                got: values.len(),
            });
        }
        Ok(self.feature_indices.iter().map(|&i| values[i]).collect())
    }
}

/// Everything needed to score a new image: selection outcomes, the four
/// category SVMs, the LBP kNN store and the fitted fusion stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedBundle {
    pub version: u32,
    pub config: RunConfig,
    pub color: CategoryModel,
    pub border: CategoryModel,
    pub asymmetry: CategoryModel,
    pub texture: CategoryModel,
    pub knn: KnnModel,
    pub fusion: FusionModel,
}

/// Single-image verdict: the fused call plus each arm's output in the order
/// color, border, asymmetry, texture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub melanoma: bool,
    pub score: f64,
    pub soft: [f64; 4],
    pub hard: [bool; 4],
}

fn svm_params(config: &RunConfig) -> SvmParams {
    SvmParams {
        c: config.classifier.c,
        gamma: config.classifier.gamma,
        positive_weight: config.classifier.positive_weight,
    }
}

/// Candidate feature indices feeding each category's SVM. The texture arm
/// draws from the co-occurrence and edge statistics or from the LBP bins,
/// per configuration.
fn category_candidates(cat: FeatureCategory, source: TextureSource) -> Vec<usize> {
    match (cat, source) {
        (FeatureCategory::Texture, TextureSource::GlcmEdge) => {
            category_indices(FeatureCategory::Texture)
                .into_iter()
                .filter(|i| !LBP_RANGE.contains(i))
                .collect()
        }
        (FeatureCategory::Texture, TextureSource::Lbp) => LBP_RANGE.collect(),
        (cat, _) => category_indices(cat),
    }
}

fn transpose(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut cols = vec![Vec::with_capacity(rows.len()); NUM_FEATURES];
    for row in rows {
        for (c, &v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    cols
}

const CATEGORY_ORDER: [FeatureCategory; 4] = [
    FeatureCategory::Color,
    FeatureCategory::Border,
    FeatureCategory::Asymmetry,
    FeatureCategory::Texture,
];

fn category_m(cat: FeatureCategory, config: &RunConfig) -> usize {
    match cat {
        FeatureCategory::Color => config.selection.m_color,
        FeatureCategory::Border => config.selection.m_border,
        FeatureCategory::Asymmetry => 1,
        FeatureCategory::Texture => config.selection.m_texture,
    }
}

fn select_categories(ds: &FeatureDataset, config: &RunConfig) -> Result<Vec<SelectionResult>> {
    let cols = transpose(&ds.rows);
    CATEGORY_ORDER
        .iter()
        .map(|&cat| {
            let candidates = category_candidates(cat, config.classifier.texture_source);
            select(
                &cols,
                &ds.labels,
                &candidates,
                category_m(cat, config),
                config.selection.mode,
                config.selection.alpha,
                config.selection.bins,
            )
        })
        .collect()
}

struct ArmModels {
    categories: Vec<CategoryModel>,
    knn: KnnModel,
}

fn train_arms(
    ds: &FeatureDataset,
    selections: &[SelectionResult],
    config: &RunConfig,
) -> Result<ArmModels> {
    let params = svm_params(config);
    let defs = catalog();
    let mut categories = Vec::with_capacity(4);
    for (cat, sel) in CATEGORY_ORDER.iter().zip(selections) {
        let rows: Vec<Vec<f64>> = ds
            .rows
            .iter()
            .map(|r| sel.indices.iter().map(|&i| r[i]).collect())
            .collect();
        let svm = train_svm(&rows, &ds.labels, &params)?;
        categories.push(CategoryModel {
            name: format!("{cat:?}").to_lowercase(),
            feature_indices: sel.indices.clone(),
            feature_names: sel.indices.iter().map(|&i| defs[i].name.clone()).collect(),
            svm,
        });
    }
    let hists: Vec<Vec<f64>> = ds.rows.iter().map(|r| r[LBP_RANGE].to_vec()).collect();
    let knn = KnnModel::fit(hists, ds.labels.clone(), config.classifier.knn_k)?;
    Ok(ArmModels { categories, knn })
}

fn arm_outputs(
    arms: &ArmModels,
    source: TextureSource,
    values: &[f64],
) -> Result<([f64; 4], [bool; 4])> {
    let mut soft = [0.0f64; 4];
    let mut hard = [false; 4];
    for (j, cat) in arms.categories.iter().enumerate() {
        if j == 3 && source == TextureSource::Lbp {
            let s = arms.knn.soft(&values[LBP_RANGE])?;
            soft[j] = s;
            hard[j] = s >= 0.5;
        } else {
            let row: Vec<f64> = cat.feature_indices.iter().map(|&i| values[i]).collect();
            soft[j] = cat.svm.soft(&row)?;
            hard[j] = cat.svm.hard(&row)?;
        }
    }
    Ok((soft, hard))
}

/// Out-of-fold arm outputs for fusion fitting: an internal stratified
/// three-fold split keeps the fusion stage from seeing its own training
/// outputs. Falls back to in-sample outputs when a class is too small.
fn fusion_training_outputs(
    ds: &FeatureDataset,
    selections: &[SelectionResult],
    arms: &ArmModels,
    config: &RunConfig,
) -> Result<(Vec<[f64; 4]>, Vec<[bool; 4]>, Vec<i8>)> {
    let source = config.classifier.texture_source;
    let n_pos = ds.labels.iter().filter(|&&l| l > 0).count();
    let n_neg = ds.len() - n_pos;
    let mut soft = Vec::with_capacity(ds.len());
    let mut hard = Vec::with_capacity(ds.len());
    let mut labels = Vec::with_capacity(ds.len());
    if n_pos >= 3 && n_neg >= 3 {
        let folds = stratified_kfold(&ds.labels, 3, config.seed ^ FUSION_FOLD_SALT)?;
        for f in 0..3 {
            let tr: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] != f).collect();
            let te: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] == f).collect();
            let sub = ds.subset(&tr);
            let fold_arms = train_arms(&sub, selections, config)?;
            for &i in &te {
                let (s, h) = arm_outputs(&fold_arms, source, &ds.rows[i])?;
                soft.push(s);
                hard.push(h);
                labels.push(ds.labels[i]);
            }
        }
    } else {
        for i in 0..ds.len() {
            let (s, h) = arm_outputs(arms, source, &ds.rows[i])?;
            soft.push(s);
            hard.push(h);
            labels.push(ds.labels[i]);
        }
    }
    Ok((soft, hard, labels))
}

fn train_bundle_with(
    ds: &FeatureDataset,
    config: &RunConfig,
    preset: Option<&[SelectionResult]>,
) -> Result<TrainedBundle> {
    if ds.is_empty() {
        return Err(Error::InsufficientSamples {
            what: "training samples",
            needed: 1,
            got: 0,
        });
    }
    let owned;
    let selections: &[SelectionResult] = match preset {
        Some(s) => s,
        None => {
            owned = select_categories(ds, config)?;
            &owned
        }
    };
    let arms = train_arms(ds, selections, config)?;
    let fusion = match config.classifier.fusion {
        FusionRule::Sum => FusionModel::Sum,
        rule @ (FusionRule::WeightedSens | FusionRule::WeightedAuc) => {
            let (soft, hard, labels) = fusion_training_outputs(ds, selections, &arms, config)?;
            fit_weighted_fusion(&soft, &hard, &labels, rule)?
        }
        FusionRule::Hierarchical => {
            let (soft, _, labels) = fusion_training_outputs(ds, selections, &arms, config)?;
            train_hierarchical(&soft, &labels, &svm_params(config))?
        }
    };
    let mut cats = arms.categories.into_iter();
    Ok(TrainedBundle {
        version: BUNDLE_VERSION,
        config: config.clone(),
        color: cats.next().unwrap(),
        border: cats.next().unwrap(),
        asymmetry: cats.next().unwrap(),
        texture: cats.next().unwrap(),
        knn: arms.knn,
        fusion,
    })
}

/// Fit the full bundle on a dataset: per-category selection, the four SVMs,
/// the kNN store and the configured fusion stage.
pub fn train_bundle(ds: &FeatureDataset, config: &RunConfig) -> Result<TrainedBundle> {
    train_bundle_with(ds, config, None)
}

impl TrainedBundle {
    fn arms(&self) -> ArmModels {
        ArmModels {
            categories: vec![
                self.color.clone(),
                self.border.clone(),
                self.asymmetry.clone(),
                self.texture.clone(),
            ],
            knn: self.knn.clone(),
        }
    }

    /// Selected feature names per arm, kNN bins last.
    pub fn selected_names(&self) -> Vec<Vec<String>> {
        let defs = catalog();
        vec![
            self.color.feature_names.clone(),
            self.border.feature_names.clone(),
            self.asymmetry.feature_names.clone(),
            self.texture.feature_names.clone(),
            LBP_RANGE.map(|i| defs[i].name.clone()).collect(),
        ]
    }

    /// Verdict for an already-extracted feature row.
    pub fn predict_values(&self, values: &[f64]) -> Result<Verdict> {
        if values.len() != NUM_FEATURES {
            return Err(Error::DimensionMismatch {
                expected: NUM_FEATURES,
                got: values.len(),
            });
        }
        let arms = self.arms();
        let (soft, hard) = arm_outputs(&arms, self.config.classifier.texture_source, values)?;
        let (melanoma, score) = self.fusion.decide(&soft, &hard)?;
        Ok(Verdict {
            melanoma,
            score,
            soft,
            hard,
        })
    }

    /// Segment, extract and score one image.
    pub fn predict_image(&self, img: &RasterImage) -> Result<(Verdict, LesionSegmentation)> {
        let skin = skin_mask_for(img, &self.config.skin)?;
        let seg = segment_lesion(img, &skin, &self.config.segmentation)?;
        let fv = extract_all(img, &seg.mask)?;
        Ok((self.predict_values(&fv.values)?, seg))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bundle: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if bundle.version != BUNDLE_VERSION {
            return Err(Error::ModelFormat(format!(
                "bundle version {} unsupported",
                bundle.version
            )));
        }
        Ok(bundle)
    }
}

/// Stratified k-fold cross-validation over extracted features. Selection
/// runs inside each fold's training split (or once globally when the
/// configuration says so), fold failures are recorded rather than fatal, and
/// the report is byte-identical across runs for a fixed dataset and
/// configuration.
pub fn cross_validate(ds: &FeatureDataset, config: &RunConfig) -> Result<EvalReport> {
    let k = config.eval.folds;
    let folds = stratified_kfold(&ds.labels, k, config.seed)?;
    let global_sel = if config.selection.per_fold {
        None
    } else {
        Some(select_categories(ds, config)?)
    };

    let mut pred: Vec<Option<(bool, f64)>> = vec![None; ds.len()];
    let mut per_fold = Vec::with_capacity(k);
    let mut fold_errors = Vec::new();
    for f in 0..k {
        let tr: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] != f).collect();
        let te: Vec<usize> = (0..ds.len()).filter(|&i| folds[i] == f).collect();
        let run = || -> Result<(TrainedBundle, Vec<(bool, f64)>)> {
            let bundle = train_bundle_with(&ds.subset(&tr), config, global_sel.as_deref())?;
            let mut out = Vec::with_capacity(te.len());
            for &i in &te {
                let v = bundle.predict_values(&ds.rows[i])?;
                out.push((v.melanoma, v.score));
            }
            Ok((bundle, out))
        };
        match run() {
            Ok((bundle, out)) => {
                let fold_pred: Vec<bool> = out.iter().map(|&(m, _)| m).collect();
                let fold_truth: Vec<bool> = te.iter().map(|&i| ds.labels[i] > 0).collect();
                per_fold.push(FoldRecord {
                    fold: f,
                    train_size: tr.len(),
                    test_size: te.len(),
                    metrics: confusion_metrics(&fold_pred, &fold_truth)?,
                    selected: bundle.selected_names(),
                });
                for (&i, v) in te.iter().zip(out) {
                    pred[i] = Some(v);
                }
            }
            Err(e) => fold_errors.push(format!("fold {f}: {e}")),
        }
    }

    let scored: Vec<usize> = (0..ds.len()).filter(|&i| pred[i].is_some()).collect();
    if scored.is_empty() {
        return Err(Error::InsufficientSamples {
            what: "scored samples",
            needed: 1,
            got: 0,
        });
    }
    let pooled_pred: Vec<bool> = scored.iter().map(|&i| pred[i].unwrap().0).collect();
    let pooled_score: Vec<f64> = scored.iter().map(|&i| pred[i].unwrap().1).collect();
    let pooled_truth: Vec<bool> = scored.iter().map(|&i| ds.labels[i] > 0).collect();
    let pooled = confusion_metrics(&pooled_pred, &pooled_truth)?;
    let roc = roc_auc(&pooled_score, &pooled_truth)?;
    let sens_at_spec = config
        .eval
        .sens_at_spec
        .iter()
        .map(|&s| (s, roc.sens_at_spec(s)))
        .collect();
    let known_tdrs: Vec<f64> = ds.tdrs.iter().flatten().copied().collect();
    let mean_tdr = if known_tdrs.is_empty() {
        None
    } else {
        Some(known_tdrs.iter().sum::<f64>() / known_tdrs.len() as f64)
    };
    Ok(EvalReport {
        config: config.clone(),
        n_samples: ds.len(),
        pooled,
        roc,
        sens_at_spec,
        mean_tdr,
        per_fold,
        fold_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// A synthetic feature dataset with class structure in every category:
    /// melanoma shifts a couple of columns per category and skews the LBP
    /// mass; the rest is noise.
    fn toy_dataset(n_per_class: usize, seed: u64) -> FeatureDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ds = FeatureDataset {
            ids: Vec::new(),
            labels: Vec::new(),
            rows: Vec::new(),
            tdrs: Vec::new(),
        };
        for i in 0..2 * n_per_class {
            let melanoma = i % 2 == 0;
            let shift = if melanoma { 1.2 } else { 0.0 };
            let mut row = vec![0.0f64; NUM_FEATURES];
            for v in row.iter_mut() {
                *v = rng.gen_range(-0.5..0.5);
            }
            // Informative columns: two per SVM category.
            row[2] += shift + rng.gen_range(-0.2..0.2);
            row[7] += shift + rng.gen_range(-0.2..0.2);
            row[55] += shift + rng.gen_range(-0.2..0.2);
            row[58] += shift + rng.gen_range(-0.2..0.2);
            row[70] += shift + rng.gen_range(-0.2..0.2);
            row[71] += shift + rng.gen_range(-0.2..0.2);
            row[74] += shift + rng.gen_range(-0.2..0.2);
            // LBP histogram: melanoma mass leans to the high bins.
            let lean = if melanoma { 0.8 } else { 0.2 };
            let mut hist = vec![0.0f64; 36];
            for (b, v) in hist.iter_mut().enumerate() {
                let side = if b >= 18 { lean } else { 1.0 - lean };
                *v = side + rng.gen_range(0.0..0.05);
            }
            let total: f64 = hist.iter().sum();
            for (dst, v) in row[LBP_RANGE].iter_mut().zip(&hist) {
                *dst = v / total;
            }
            ds.ids.push(format!("toy_{i:03}"));
            ds.labels.push(if melanoma { 1 } else { -1 });
            ds.rows.push(row);
            ds.tdrs.push(Some(0.9 + 0.05 * ((i % 3) as f64)));
        }
        ds
    }

    #[test]
    fn bundle_trains_and_separates_toy_data() {
        let ds = toy_dataset(24, 3);
        let config = RunConfig::default();
        let bundle = train_bundle(&ds, &config).unwrap();
        assert_eq!(bundle.color.feature_indices.len(), 3);
        assert_eq!(bundle.border.feature_indices.len(), 2);
        assert_eq!(bundle.asymmetry.feature_indices, vec![70]);
        assert_eq!(bundle.texture.feature_indices.len(), 3);
        assert_eq!(bundle.knn.histograms[0].len(), 36);
        let mut correct = 0;
        for (row, &l) in ds.rows.iter().zip(&ds.labels) {
            let v = bundle.predict_values(row).unwrap();
            if v.melanoma == (l > 0) {
                correct += 1;
            }
        }
        assert!(
            correct as f64 / ds.len() as f64 >= 0.95,
            "training accuracy {correct}/{}",
            ds.len()
        );
    }

    #[test]
    fn bundle_roundtrips_through_json() {
        let ds = toy_dataset(12, 5);
        let config = RunConfig::default();
        let bundle = train_bundle(&ds, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bundle.json");
        bundle.save(&path).unwrap();
        let loaded = TrainedBundle::load(&path).unwrap();
        for row in &ds.rows {
            let a = bundle.predict_values(row).unwrap();
            let b = loaded.predict_values(row).unwrap();
            assert_eq!(a.melanoma, b.melanoma);
            assert_eq!(a.score, b.score);
        }
    }

    #[test]
    fn selected_names_match_catalog() {
        let ds = toy_dataset(12, 5);
        let bundle = train_bundle(&ds, &RunConfig::default()).unwrap();
        let defs = catalog();
        let names = bundle.selected_names();
        assert_eq!(names.len(), 5);
        assert_eq!(
            names.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![3, 2, 1, 3, 36]
        );
        for (sel, cat) in bundle
            .color
            .feature_indices
            .iter()
            .zip(std::iter::repeat(FeatureCategory::Color))
        {
            assert_eq!(defs[*sel].category, cat);
        }
        assert_eq!(names[2], vec!["asymmetry".to_string()]);
    }

    #[test]
    fn cross_validation_report_is_deterministic() {
        let ds = toy_dataset(20, 9);
        let config = RunConfig::default();
        let a = cross_validate(&ds, &config).unwrap();
        let b = cross_validate(&ds, &config).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.fold_errors.is_empty(), "{:?}", a.fold_errors);
        assert_eq!(a.per_fold.len(), config.eval.folds);
        assert!(a.pooled.balanced_accuracy.unwrap() > 0.8);
        assert_eq!(a.n_samples, 40);
        assert!(a.mean_tdr.unwrap() > 0.89);
    }

    #[test]
    fn cross_validation_respects_global_selection_flag() {
        let ds = toy_dataset(15, 2);
        let mut config = RunConfig::default();
        config.selection.per_fold = false;
        let report = cross_validate(&ds, &config).unwrap();
        let first = &report.per_fold[0].selected;
        for fold in &report.per_fold[1..] {
            assert_eq!(&fold.selected, first, "global selection must not vary");
        }
    }

    #[test]
    fn lbp_texture_source_uses_knn_arm() {
        let ds = toy_dataset(16, 4);
        let mut config = RunConfig::default();
        config.classifier.texture_source = TextureSource::Lbp;
        let bundle = train_bundle(&ds, &config).unwrap();
        // The kNN leans on the histogram halves, so the texture arm must
        // track class perfectly on this construction.
        for (row, &l) in ds.rows.iter().zip(&ds.labels) {
            let v = bundle.predict_values(row).unwrap();
            assert_eq!(v.hard[3], l > 0, "kNN arm");
        }
    }

    #[test]
    fn small_classes_fall_back_without_folding() {
        // Two melanomas cannot be split three ways; the fusion stage must
        // still train via the in-sample fallback.
        let mut ds = toy_dataset(12, 8);
        let keep: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.labels[i] < 0 || i < 4)
            .collect();
        ds = ds.subset(&keep);
        assert_eq!(ds.labels.iter().filter(|&&l| l > 0).count(), 2);
        let bundle = train_bundle(&ds, &RunConfig::default());
        assert!(bundle.is_ok(), "{:?}", bundle.err());
    }
}

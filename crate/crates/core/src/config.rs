//! Run configuration for the full pipeline, loadable from JSON. Every field
//! has a default matching the reference operating point, so partial config
//! files only need to name what they change.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub skin: SkinConfig,
    pub segmentation: SegmentConfig,
    pub selection: SelectionConfig,
    pub classifier: ClassifierConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            skin: SkinConfig::default(),
            segmentation: SegmentConfig::default(),
            selection: SelectionConfig::default(),
            classifier: ClassifierConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkinConfig {
    /// Mixture components per class.
    pub components: usize,
    /// Likelihood-ratio threshold; a pixel is skin when
    /// `p(rgb|skin) / p(rgb|non-skin) >= theta`.
    pub theta: f64,
    /// Lower bound applied to fitted per-channel variances.
    pub variance_floor: f64,
    /// Skip skin detection and treat every pixel as skin. Useful for
    /// corpora that contain no non-skin background.
    pub assume_all_skin: bool,
}

impl Default for SkinConfig {
    fn default() -> Self {
        Self {
            components: 8,
            theta: 1.0,
            variance_floor: 1.0,
            assume_all_skin: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    /// Longest image side after coarse-stage downsampling.
    pub max_dim: u32,
    /// Fraction of the image (per axis, centred) in which a candidate
    /// lesion centroid must fall during the coarse stage.
    pub valid_frac: f64,
    /// Region-growing scale parameter for the coarse stage.
    pub k_coarse: f64,
    /// Fine-stage scale parameter; defaults to `k_coarse / 2`.
    pub k_fine: Option<f64>,
    /// Minimum component size for the coarse stage, as a fraction of the
    /// pixels under consideration.
    pub min_size_frac_coarse: f64,
    /// Minimum component size for the fine stage, as a fraction of crop
    /// pixels.
    pub min_size_frac_fine: f64,
    /// Padding added around the coarse bounding box before refinement, as a
    /// fraction of the box size per side.
    pub crop_pad_frac: f64,
    /// Window of the majority filter applied to fused masks. Odd, >= 3.
    pub majority_window: u32,
}

impl SegmentConfig {
    pub fn k_fine(&self) -> f64 {
        self.k_fine.unwrap_or(self.k_coarse / 2.0)
    }
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            max_dim: 256,
            valid_frac: 0.8,
            k_coarse: 500.0,
            k_fine: None,
            min_size_frac_coarse: 0.005,
            min_size_frac_fine: 0.01,
            crop_pad_frac: 0.25,
            majority_window: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Normalised mutual-information redundancy criterion alone.
    Mi,
    /// Margin-quality term blended with the MI criterion.
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub mode: SelectionMode,
    /// Weight of the margin-quality term under `Hybrid`.
    pub alpha: f64,
    /// Number of equal-width discretisation bins.
    pub bins: usize,
    pub m_color: usize,
    pub m_border: usize,
    pub m_texture: usize,
    /// Re-run selection inside every cross-validation fold rather than once
    /// on the full set.
    pub per_fold: bool,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            mode: SelectionMode::Hybrid,
            alpha: 0.4,
            bins: 5,
            m_color: 3,
            m_border: 2,
            m_texture: 3,
            per_fold: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionRule {
    /// Melanoma if any category classifier says melanoma.
    Sum,
    /// Weighted vote, classifier weight = best sensitivity at >= 50%
    /// specificity on validation scores.
    WeightedSens,
    /// Weighted vote, classifier weight = validation AUC.
    WeightedAuc,
    /// A second-level SVM over the four category soft scores.
    Hierarchical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextureSource {
    /// Co-occurrence and edge-density features, selected like the other
    /// categories.
    GlcmEdge,
    /// The full 36-bin rotation-invariant binary-pattern histogram,
    /// classified by cosine kNN instead of an SVM.
    Lbp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Soft-margin penalty for the benign class; the melanoma class gets
    /// `c * positive_weight`.
    pub c: f64,
    /// RBF kernel width; defaults to `1 / n_features`.
    pub gamma: Option<f64>,
    /// Penalty multiplier for the melanoma class.
    pub positive_weight: f64,
    pub knn_k: usize,
    pub fusion: FusionRule,
    pub texture_source: TextureSource,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            positive_weight: 1.5,
            knn_k: 2,
            fusion: FusionRule::Hierarchical,
            texture_source: TextureSource::GlcmEdge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub folds: usize,
    /// Specificity floors for the sensitivity-at-specificity report.
    pub sens_at_spec: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            sens_at_spec: vec![0.8, 0.9, 0.95],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bail = |msg: String| Err(Error::Config(msg));
        if self.skin.components == 0 {
            return bail("skin.components must be >= 1".into());
        }
        if self.skin.theta <= 0.0 {
            return bail("skin.theta must be positive".into());
        }
        if self.segmentation.max_dim < 16 {
            return bail("segmentation.max_dim must be >= 16".into());
        }
        if !(0.0 < self.segmentation.valid_frac && self.segmentation.valid_frac <= 1.0) {
            return bail("segmentation.valid_frac must be in (0, 1]".into());
        }
        if self.segmentation.majority_window % 2 == 0 || self.segmentation.majority_window < 3 {
            return bail("segmentation.majority_window must be odd and >= 3".into());
        }
        if self.selection.bins < 2 {
            return bail("selection.bins must be >= 2".into());
        }
        if !(0.0..=1.0).contains(&self.selection.alpha) {
            return bail("selection.alpha must be in [0, 1]".into());
        }
        if self.selection.m_color == 0 || self.selection.m_border == 0 || self.selection.m_texture == 0 {
            return bail("selection sizes must be >= 1".into());
        }
        if self.classifier.c <= 0.0 {
            return bail("classifier.c must be positive".into());
        }
        if self.classifier.positive_weight <= 0.0 {
            return bail("classifier.positive_weight must be positive".into());
        }
        if self.classifier.knn_k == 0 {
            return bail("classifier.knn_k must be >= 1".into());
        }
        if self.eval.folds < 2 {
            return bail("eval.folds must be >= 2".into());
        }
        for &s in &self.eval.sens_at_spec {
            if !(0.0..=1.0).contains(&s) {
                return bail("eval.sens_at_spec entries must be in [0, 1]".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_json_overrides() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"seed": 3, "selection": {"bins": 4}}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.selection.bins, 4);
        assert_eq!(cfg.selection.m_color, 3);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sneed": 3}"#).is_err());
    }

    #[test]
    fn roundtrips_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}

//! The 116-entry feature catalog computed over a segmented lesion.
//!
//! Categories: 54 colour (basic statistics, occupied histogram bins, colour
//! triangles), 16 border (4 shape descriptors + 12 border-fitting angle
//! statistics), 1 asymmetry, 45 texture (8 co-occurrence, 1 edge density,
//! 36 rotation-invariant binary-pattern bins). Extraction works on a crop of
//! the mask's bounding box plus a fixed 8-pixel margin, which makes every
//! feature exactly translation invariant.

mod asymmetry;
mod border;
mod color;
mod texture;

pub use asymmetry::asymmetry;
pub use border::{border_fitting, shape_features};
pub use color::{basic_stats, color_triangle, hist_nonzero, CtAssignment};
pub use texture::{edge_density, glcm_features, lbp_histogram, lbp_necklace_table};

use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{
    connected_components, to_gray, to_hsv, trace_boundary, BinaryMask, ChannelPlane,
    Connectivity, RasterImage, Rect, Region,
};

pub const NUM_FEATURES: usize = 116;
/// Crop margin around the mask bounding box; large enough for every window
/// used by the texture features (blur radius 5 + gradient + non-maximum
/// suppression needs 7).
pub const CROP_MARGIN: u32 = 8;
/// Columns holding the binary-pattern histogram.
pub const LBP_RANGE: Range<usize> = 80..116;

pub const CT_PA: [usize; 4] = [4, 8, 12, 16];
pub const CT_SP: [usize; 3] = [2, 4, 8];
pub const CT_CHANNELS: [&str; 3] = ["gray", "red", "hue"];
pub const BF_NT: [usize; 6] = [8, 12, 16, 20, 24, 28];
pub const GLCM_LEVELS: [usize; 2] = [32, 64];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureCategory {
    Color,
    Border,
    Asymmetry,
    Texture,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureDef {
    pub name: String,
    pub category: FeatureCategory,
}

/// The fixed, ordered feature catalog.
pub fn catalog() -> &'static [FeatureDef] {
    static CATALOG: OnceLock<Vec<FeatureDef>> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut defs = Vec::with_capacity(NUM_FEATURES);
        let mut push = |name: String, category: FeatureCategory| {
            defs.push(FeatureDef { name, category });
        };
        for ch in ["red", "green", "blue", "gray", "hue", "value"] {
            push(format!("mean_{ch}"), FeatureCategory::Color);
            push(format!("var_{ch}"), FeatureCategory::Color);
        }
        for ch in ["red", "green", "blue", "gray", "hue", "value"] {
            push(format!("num_{ch}"), FeatureCategory::Color);
        }
        for ch in CT_CHANNELS {
            for pa in CT_PA {
                for sp in CT_SP {
                    push(format!("ct_{ch}_pa{pa}_sp{sp}"), FeatureCategory::Color);
                }
            }
        }
        for name in ["compactness", "solidity", "convexity", "border_dist_var"] {
            push(name.to_string(), FeatureCategory::Border);
        }
        for nt in BF_NT {
            push(format!("bf_mean_nt{nt}"), FeatureCategory::Border);
            push(format!("bf_var_nt{nt}"), FeatureCategory::Border);
        }
        push("asymmetry".to_string(), FeatureCategory::Asymmetry);
        for levels in GLCM_LEVELS {
            for f in ["contrast", "energy", "correlation", "homogeneity"] {
                push(format!("glcm_q{levels}_{f}"), FeatureCategory::Texture);
            }
        }
        push("edge_density".to_string(), FeatureCategory::Texture);
        for i in 0..36 {
            push(format!("lbp_s_{i:02}"), FeatureCategory::Texture);
        }
        assert_eq!(defs.len(), NUM_FEATURES);
        defs
    })
}

/// Catalog indices belonging to one category, in catalog order.
pub fn category_indices(cat: FeatureCategory) -> Vec<usize> {
    catalog()
        .iter()
        .enumerate()
        .filter(|(_, d)| d.category == cat)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionFlags {
    /// Centre of mass fell outside the lesion (highly non-convex shape);
    /// triangle features still measure from it.
    pub centroid_outside: bool,
    /// Boundary trace revisited pixels (one-pixel-wide necks or spurs).
    pub thin_boundary: bool,
    /// Second moments were isotropic; asymmetry axes fell back to the image
    /// axes.
    pub isotropic_axes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub flags: ExtractionFlags,
}

/// Compute all 116 features for a segmented lesion (full-size mask).
///
/// The mask must be one 8-connected region, at least 128 pixels, with a
/// boundary of at least 112 pixels so every parameterised feature is
/// defined.
pub fn extract_all(img: &RasterImage, mask: &BinaryMask) -> Result<FeatureVector> {
    if (img.width(), img.height()) != (mask.w, mask.h) {
        return Err(Error::DimensionMismatch {
            expected: (img.width() as usize) * (img.height() as usize),
            got: (mask.w as usize) * (mask.h as usize),
        });
    }
    let n_comp = connected_components(mask, Connectivity::Eight).n_components;
    if n_comp != 1 {
        return Err(Error::DegenerateRegion(format!(
            "feature extraction needs one connected region, got {n_comp}"
        )));
    }
    let full = Region::from_mask(mask.clone())?;
    let crop = crop_rect(full.bbox, img.width(), img.height());
    let sub = img.crop(crop)?;
    let sub_mask = mask.cropped(crop);
    let region = Region::from_mask(sub_mask.clone())?;
    let trace = trace_boundary(&region.mask)?;

    let gray = to_gray(&sub);
    let (hue, _sat, value) = to_hsv(&sub);
    let n = (sub.width() as usize) * (sub.height() as usize);
    let mut red = Vec::with_capacity(n);
    let mut green = Vec::with_capacity(n);
    let mut blue = Vec::with_capacity(n);
    for p in sub.as_raw().chunks_exact(3) {
        red.push(p[0] as f32);
        green.push(p[1] as f32);
        blue.push(p[2] as f32);
    }
    let red = ChannelPlane::new(sub.width(), sub.height(), red);
    let green = ChannelPlane::new(sub.width(), sub.height(), green);
    let blue = ChannelPlane::new(sub.width(), sub.height(), blue);

    let planes6 = [&red, &green, &blue, &gray, &hue, &value];

    let mut values = Vec::with_capacity(NUM_FEATURES);
    values.extend(basic_stats(&planes6, &region.mask)?);
    values.extend(hist_nonzero(&planes6, &region.mask)?);

    let assignment = CtAssignment::build(&region, &trace)?;
    for plane in [&gray, &red, &hue] {
        for pa in CT_PA {
            for sp in CT_SP {
                values.push(color_triangle(plane, &region, &assignment, pa, sp)?);
            }
        }
    }

    values.extend(shape_features(&region, &trace)?);
    for nt in BF_NT {
        let (mean, var) = border_fitting(&trace, nt)?;
        values.push(mean);
        values.push(var);
    }

    let (asym, isotropic) = asymmetry(&region)?;
    values.push(asym);

    for levels in GLCM_LEVELS {
        values.extend(glcm_features(&gray, &region.mask, levels)?);
    }
    values.push(edge_density(&gray, &region.mask)?);
    values.extend(lbp_histogram(&gray, &region.mask)?);

    debug_assert_eq!(values.len(), NUM_FEATURES);
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "feature '{}' is not finite",
                catalog()[i].name
            )));
        }
    }
    Ok(FeatureVector {
        values,
        flags: ExtractionFlags {
            centroid_outside: !assignment.centroid_inside,
            thin_boundary: trace.revisited,
            isotropic_axes: isotropic,
        },
    })
}

fn crop_rect(bbox: Rect, w: u32, h: u32) -> Rect {
    let x0 = bbox.x.saturating_sub(CROP_MARGIN);
    let y0 = bbox.y.saturating_sub(CROP_MARGIN);
    let x1 = (bbox.x + bbox.w + CROP_MARGIN).min(w);
    let y1 = (bbox.y + bbox.h + CROP_MARGIN).min(h);
    Rect {
        x: x0,
        y: y0,
        w: x1 - x0,
        h: y1 - y0,
    }
}

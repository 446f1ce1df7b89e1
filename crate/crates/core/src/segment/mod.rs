//! Hierarchical lesion segmentation.
//!
//! Two complementary detectors run over skin pixels: a dark-side global
//! threshold and graph-based region growing. Candidate regions are filtered
//! (no border contact, centroid inside the central valid area) and scored by
//! size and centrality; the winning masks from both detectors are fused
//! (union, largest component, majority smoothing, hole filling). This runs
//! first on a downsampled image to localise the lesion, then again at full
//! resolution inside a padded crop around the coarse region to recover an
//! accurate border.

mod mst;
mod otsu;

pub use mst::{mst_segment, MstParams};
pub use otsu::{histogram256, otsu_from_histogram, otsu_segment};

use serde::{Deserialize, Serialize};

use crate::config::SegmentConfig;
use crate::error::{Error, Result};
use crate::imgproc::{
    connected_components, downsample, downsample_mask_nearest, fill_holes, largest_component,
    majority_filter, to_gray, trace_boundary, upsample_mask_nearest, BinaryMask, ChannelPlane,
    ComponentStats, Connectivity, LabelMap, RasterImage, Rect, Region,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegMethod {
    OtsuOnly,
    MstOnly,
    Fused,
}

/// Region-of-interest score: area times a centrality factor that decays with
/// the normalised distance of the centroid from the image centre and is
/// clamped at zero.
pub fn roi_score(area: f64, cx: f64, cy: f64, w: f64, h: f64) -> f64 {
    let dx = cx / w - 0.5;
    let dy = cy / h - 0.5;
    let c = 1.0 - 2.0 * (dx * dx + dy * dy).sqrt();
    area * c.max(0.0).powi(4)
}

#[derive(Debug, Clone)]
pub struct RoiCandidate {
    pub stats: ComponentStats,
    pub score: f64,
}

/// Filter and score labelled components: drop any that touch the image
/// border or whose centroid falls outside the centred `valid_frac` window,
/// then score the rest.
pub fn score_rois(lm: &LabelMap, valid_frac: f64) -> Vec<RoiCandidate> {
    let (w, h) = (lm.w as f64, lm.h as f64);
    lm.stats()
        .into_iter()
        .filter(|s| !s.touches_border)
        .filter(|s| {
            let (cx, cy) = s.centroid;
            (cx - w / 2.0).abs() <= valid_frac * w / 2.0
                && (cy - h / 2.0).abs() <= valid_frac * h / 2.0
        })
        .map(|stats| {
            let score = roi_score(stats.area as f64, stats.centroid.0, stats.centroid.1, w, h);
            RoiCandidate { stats, score }
        })
        .collect()
}

/// Highest-scoring candidate; ties keep the earliest label.
pub fn best_roi(cands: &[RoiCandidate]) -> Option<&RoiCandidate> {
    cands.iter().reduce(|best, c| {
        if c.score > best.score {
            c
        } else {
            best
        }
    })
}

/// Fuse per-detector masks: union, keep the largest 8-connected component,
/// majority-smooth, fill holes. At least one input must be present and the
/// result must be non-empty.
pub fn fuse_masks(
    a: Option<&BinaryMask>,
    b: Option<&BinaryMask>,
    majority_window: u32,
) -> Result<BinaryMask> {
    let union = match (a, b) {
        (Some(a), Some(b)) => a.union(b),
        (Some(a), None) => a.clone(),
        (None, Some(b)) => b.clone(),
        (None, None) => {
            return Err(Error::NoLesionFound(
                "no detector produced a candidate region".into(),
            ))
        }
    };
    let largest = largest_component(&union, Connectivity::Eight)
        .ok_or_else(|| Error::NoLesionFound("candidate masks are empty".into()))?;
    // Smoothing can sever a weak isthmus, so re-isolate the dominant
    // component before filling holes.
    let smoothed = majority_filter(&largest, majority_window);
    let trimmed = largest_component(&smoothed, Connectivity::Eight).ok_or_else(|| {
        Error::NoLesionFound("candidate region vanished during smoothing".into())
    })?;
    Ok(fill_holes(&trimmed))
}

/// Run the two detectors over one gray plane and return each detector's best
/// candidate mask.
fn branch_masks(
    gray: &ChannelPlane,
    mask: &BinaryMask,
    valid_frac: f64,
    params: MstParams,
    method: SegMethod,
) -> (BranchOutcome, BranchOutcome) {
    let otsu = if method == SegMethod::MstOnly {
        BranchOutcome::default()
    } else {
        match otsu_segment(gray, mask) {
            Ok(seg) => {
                let lm = connected_components(&seg, Connectivity::Eight);
                pick(&lm, valid_frac)
            }
            Err(_) => BranchOutcome::default(),
        }
    };
    let mst = if method == SegMethod::OtsuOnly {
        BranchOutcome::default()
    } else {
        let lm = mst_segment(gray, mask, params);
        pick(&lm, valid_frac)
    };
    (otsu, mst)
}

#[derive(Debug, Clone, Default)]
struct BranchOutcome {
    mask: Option<BinaryMask>,
    score: Option<f64>,
}

fn pick(lm: &LabelMap, valid_frac: f64) -> BranchOutcome {
    let cands = score_rois(lm, valid_frac);
    match best_roi(&cands) {
        Some(best) => BranchOutcome {
            mask: Some(lm.component_mask(best.stats.label)),
            score: Some(best.score),
        },
        None => BranchOutcome::default(),
    }
}

/// Output of the coarse localisation stage, in downsampled coordinates.
#[derive(Debug, Clone)]
pub struct CoarseResult {
    pub width: u32,
    pub height: u32,
    pub otsu_mask: Option<BinaryMask>,
    pub mst_mask: Option<BinaryMask>,
    pub otsu_score: Option<f64>,
    pub mst_score: Option<f64>,
    pub fused: BinaryMask,
    pub region: Region,
}

impl CoarseResult {
    /// Fused coarse mask resampled to the given full-image dimensions.
    pub fn mask_at(&self, w: u32, h: u32) -> BinaryMask {
        upsample_mask_nearest(&self.fused, w, h)
    }
}

/// Locate the lesion on a downsampled copy of the image.
pub fn coarse_localize(
    img: &RasterImage,
    skin_mask: &BinaryMask,
    cfg: &SegmentConfig,
    method: SegMethod,
) -> Result<CoarseResult> {
    assert_eq!((img.width(), img.height()), (skin_mask.w, skin_mask.h));
    let small = downsample(img, cfg.max_dim)?;
    let skin_small = if (small.width(), small.height()) == (img.width(), img.height()) {
        skin_mask.clone()
    } else {
        downsample_mask_nearest(skin_mask, small.width(), small.height())
    };
    let gray = to_gray(&small);
    let skin_px = skin_small.count_ones();
    if skin_px == 0 {
        return Err(Error::NoLesionFound("no skin pixels to segment".into()));
    }
    let params = MstParams {
        k: cfg.k_coarse,
        min_size: ((cfg.min_size_frac_coarse * skin_px as f64).ceil() as usize).max(1),
    };
    let (otsu, mst) = branch_masks(&gray, &skin_small, cfg.valid_frac, params, method);
    let fused = fuse_masks(otsu.mask.as_ref(), mst.mask.as_ref(), cfg.majority_window)?;
    let region = Region::from_mask(fused.clone())?;
    Ok(CoarseResult {
        width: small.width(),
        height: small.height(),
        otsu_mask: otsu.mask,
        mst_mask: mst.mask,
        otsu_score: otsu.score,
        mst_score: mst.score,
        fused,
        region,
    })
}

/// Full segmentation result.
#[derive(Debug, Clone)]
pub struct LesionSegmentation {
    pub coarse: CoarseResult,
    /// Refinement crop in full-resolution coordinates.
    pub crop: Rect,
    /// Full-resolution lesion mask (contained in `crop`).
    pub mask: BinaryMask,
    pub region: Region,
}

/// Re-segment at full resolution inside a padded crop around the coarse
/// region.
pub fn refine_border(
    img: &RasterImage,
    skin_mask: &BinaryMask,
    coarse: &CoarseResult,
    cfg: &SegmentConfig,
    method: SegMethod,
) -> Result<LesionSegmentation> {
    let (iw, ih) = (img.width(), img.height());
    let sx = iw as f64 / coarse.width as f64;
    let sy = ih as f64 / coarse.height as f64;
    let bb = coarse.region.bbox;
    let x0 = (bb.x as f64 * sx).floor();
    let y0 = (bb.y as f64 * sy).floor();
    let x1 = ((bb.x + bb.w) as f64 * sx).ceil();
    let y1 = ((bb.y + bb.h) as f64 * sy).ceil();
    let pad_x = (cfg.crop_pad_frac * (x1 - x0)).round();
    let pad_y = (cfg.crop_pad_frac * (y1 - y0)).round();
    let cx0 = (x0 - pad_x).max(0.0) as u32;
    let cy0 = (y0 - pad_y).max(0.0) as u32;
    let cx1 = ((x1 + pad_x) as u32).min(iw);
    let cy1 = ((y1 + pad_y) as u32).min(ih);
    if cx1 - cx0 < 16 || cy1 - cy0 < 16 {
        return Err(Error::DegenerateRegion(format!(
            "refinement crop {}x{} below 16 px",
            cx1 - cx0,
            cy1 - cy0
        )));
    }
    let crop = Rect {
        x: cx0,
        y: cy0,
        w: cx1 - cx0,
        h: cy1 - cy0,
    };
    let sub = img.crop(crop)?;
    let skin_sub = skin_mask.cropped(crop);
    let gray = to_gray(&sub);
    let params = MstParams {
        k: cfg.k_fine(),
        min_size: ((cfg.min_size_frac_fine * (crop.w as f64) * (crop.h as f64)).ceil() as usize)
            .max(1),
    };
    let (otsu, mst) = branch_masks(&gray, &skin_sub, 1.0, params, method);
    let fused = fuse_masks(otsu.mask.as_ref(), mst.mask.as_ref(), cfg.majority_window)?;
    let mask = fused.embedded(iw, ih, crop.x, crop.y);
    let region = Region::from_mask(mask.clone())?;
    Ok(LesionSegmentation {
        coarse: coarse.clone(),
        crop,
        mask,
        region,
    })
}

/// Coarse localisation followed by border refinement with both detectors.
pub fn segment_lesion(
    img: &RasterImage,
    skin_mask: &BinaryMask,
    cfg: &SegmentConfig,
) -> Result<LesionSegmentation> {
    segment_lesion_with(img, skin_mask, cfg, SegMethod::Fused)
}

/// Coarse-to-fine segmentation restricted to one detector, or fused.
pub fn segment_lesion_with(
    img: &RasterImage,
    skin_mask: &BinaryMask,
    cfg: &SegmentConfig,
    method: SegMethod,
) -> Result<LesionSegmentation> {
    let coarse = coarse_localize(img, skin_mask, cfg, method)?;
    refine_border(img, skin_mask, &coarse, cfg, method)
}

/// True-detection rate: percentage of ground-truth pixels covered by the
/// segmentation.
pub fn tdr(gt: &BinaryMask, seg: &BinaryMask) -> Result<f64> {
    assert_eq!((gt.w, gt.h), (seg.w, seg.h));
    let gt_area = gt.count_ones();
    if gt_area == 0 {
        return Err(Error::DegenerateInput("empty ground-truth mask".into()));
    }
    Ok(100.0 * gt.intersection_count(seg) as f64 / gt_area as f64)
}

/// Overlay the mask boundary onto a copy of the image (used by the CLI).
pub fn overlay_boundary(img: &RasterImage, mask: &BinaryMask, rgb: [u8; 3]) -> RasterImage {
    let mut out = img.clone();
    if let Ok(trace) = trace_boundary(mask) {
        for &(x, y) in &trace.points {
            out.set(x, y, rgb);
        }
    }
    out
}

use crate::error::{Error, Result};
use crate::imgproc::{BinaryMask, ChannelPlane};

/// 256-bin histogram of the masked plane values (rounded and clamped).
pub fn histogram256(plane: &ChannelPlane, mask: &BinaryMask) -> [u64; 256] {
    assert_eq!((plane.w, plane.h), (mask.w, mask.h));
    let mut hist = [0u64; 256];
    for y in 0..plane.h {
        for x in 0..plane.w {
            if mask.get(x, y) {
                let bin = plane.at(x, y).round().clamp(0.0, 255.0) as usize;
                hist[bin] += 1;
            }
        }
    }
    hist
}

/// Threshold maximizing the between-class variance
/// `w0(t) * w1(t) * (mu0(t) - mu1(t))^2`, where class 0 is `value <= t`.
/// Ties resolve to the lowest threshold. Needs at least two occupied bins.
///
/// Sums are recomputed per candidate so the scan is a direct transcription
/// of the objective; 256 candidates keep that affordable.
pub fn otsu_from_histogram(hist: &[u64; 256]) -> Result<u8> {
    let occupied = hist.iter().filter(|&&c| c > 0).count();
    if occupied < 2 {
        return Err(Error::DegenerateInput(format!(
            "threshold selection needs >= 2 distinct levels, got {occupied}"
        )));
    }
    let mut best_t = 0u8;
    let mut best_score = f64::NEG_INFINITY;
    for t in 0..=255usize {
        let mut w0 = 0.0;
        let mut s0 = 0.0;
        for (v, &c) in hist.iter().enumerate().take(t + 1) {
            w0 += c as f64;
            s0 += (v as f64) * c as f64;
        }
        let mut w1 = 0.0;
        let mut s1 = 0.0;
        for (v, &c) in hist.iter().enumerate().skip(t + 1) {
            w1 += c as f64;
            s1 += (v as f64) * c as f64;
        }
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = s0 / w0 - s1 / w1;
        let score = w0 * w1 * diff * diff;
        if score > best_score {
            best_score = score;
            best_t = t as u8;
        }
    }
    Ok(best_t)
}

/// Dark-side threshold segmentation: masked pixels with value at or below
/// the optimal threshold (lesions are darker than surrounding skin).
pub fn otsu_segment(plane: &ChannelPlane, mask: &BinaryMask) -> Result<BinaryMask> {
    let hist = histogram256(plane, mask);
    let t = otsu_from_histogram(&hist)? as f32;
    Ok(BinaryMask::from_fn(plane.w, plane.h, |x, y| {
        mask.get(x, y) && plane.at(x, y).round().clamp(0.0, 255.0) <= t
    }))
}

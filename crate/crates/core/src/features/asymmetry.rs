//! Shape asymmetry: align the lesion's principal axes with the image axes,
//! then measure how far the pixel set is from mirror symmetric about each
//! axis through the centroid.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::imgproc::Region;

const MIN_AREA: usize = 16;

/// Returns the asymmetry score and whether the second moments were isotropic
/// (no preferred axis; the image axes are used and the flag is set).
///
/// Score = (A_x + A_y) / area where A_x counts rotated pixels whose mirror
/// about the horizontal axis is missing (half the symmetric difference), and
/// A_y likewise for the vertical axis. A perfectly symmetric shape scores 0;
/// the score can exceed 1 for strongly asymmetric shapes.
pub fn asymmetry(region: &Region) -> Result<(f64, bool)> {
    if region.area < MIN_AREA {
        return Err(Error::InsufficientSamples {
            what: "lesion pixels",
            needed: MIN_AREA,
            got: region.area,
        });
    }
    let (cx, cy) = region.centroid;
    let mask = &region.mask;
    let mut rel = Vec::with_capacity(region.area);
    let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for y in 0..mask.h {
        for x in 0..mask.w {
            if !mask.get(x, y) {
                continue;
            }
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
            rel.push((dx, dy));
        }
    }
    let n = region.area as f64;
    sxx /= n;
    syy /= n;
    sxy /= n;

    let scale = (sxx + syy).max(f64::EPSILON);
    let isotropic = (sxx - syy).abs() <= 1e-9 * scale && sxy.abs() <= 1e-9 * scale;
    let theta = if isotropic {
        0.0
    } else {
        0.5 * (2.0 * sxy).atan2(sxx - syy)
    };

    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    let mut rotated: BTreeSet<(i64, i64)> = BTreeSet::new();
    for (dx, dy) in rel {
        let u = dx * cos_t + dy * sin_t;
        let v = -dx * sin_t + dy * cos_t;
        rotated.insert((u.round() as i64, v.round() as i64));
    }
    let a_x = rotated
        .iter()
        .filter(|&&(u, v)| !rotated.contains(&(u, -v)))
        .count();
    let a_y = rotated
        .iter()
        .filter(|&&(u, v)| !rotated.contains(&(-u, v)))
        .count();
    Ok(((a_x + a_y) as f64 / n, isotropic))
}

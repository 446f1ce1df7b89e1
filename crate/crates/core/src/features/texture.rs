//! Texture features over the gray plane: co-occurrence statistics, Canny
//! edge density, and a rotation-invariant local binary pattern histogram.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::imgproc::{BinaryMask, ChannelPlane};
use crate::segment::otsu_from_histogram;

/// Contrast, energy, correlation and homogeneity of the symmetric horizontal
/// co-occurrence matrix after quantizing masked gray values into `levels`
/// equal-width bins over [0, 255]. A constant region gives (0, 1, 0, 1);
/// correlation is defined as 0 whenever either marginal is constant.
pub fn glcm_features(gray: &ChannelPlane, mask: &BinaryMask, levels: usize) -> Result<[f64; 4]> {
    debug_assert!(levels >= 2 && levels <= 256);
    let quant = |x: u32, y: u32| -> usize {
        let v = gray.at(x, y).clamp(0.0, 255.0);
        ((v as f64 * levels as f64 / 256.0) as usize).min(levels - 1)
    };
    let mut counts = vec![0u64; levels * levels];
    let mut total = 0u64;
    for y in 0..mask.h {
        for x in 0..mask.w.saturating_sub(1) {
            if mask.get(x, y) && mask.get(x + 1, y) {
                let a = quant(x, y);
                let b = quant(x + 1, y);
                counts[a * levels + b] += 1;
                counts[b * levels + a] += 1;
                total += 2;
            }
        }
    }
    if total == 0 {
        return Err(Error::InsufficientSamples {
            what: "horizontal pixel pairs",
            needed: 1,
            got: 0,
        });
    }

    let norm = total as f64;
    let mut contrast = 0.0;
    let mut energy = 0.0;
    let mut homogeneity = 0.0;
    let mut marginal = vec![0.0f64; levels];
    for a in 0..levels {
        for b in 0..levels {
            let p = counts[a * levels + b] as f64 / norm;
            if p == 0.0 {
                continue;
            }
            let d = a as f64 - b as f64;
            contrast += p * d * d;
            energy += p * p;
            homogeneity += p / (1.0 + d.abs());
            marginal[a] += p;
        }
    }
    let mu: f64 = marginal.iter().enumerate().map(|(a, p)| a as f64 * p).sum();
    let var: f64 = marginal
        .iter()
        .enumerate()
        .map(|(a, p)| p * (a as f64 - mu) * (a as f64 - mu))
        .sum();
    let correlation = if var <= f64::EPSILON {
        0.0
    } else {
        let mut cov = 0.0;
        for a in 0..levels {
            for b in 0..levels {
                let p = counts[a * levels + b] as f64 / norm;
                if p > 0.0 {
                    cov += p * (a as f64 - mu) * (b as f64 - mu);
                }
            }
        }
        cov / var
    };
    Ok([contrast, energy, correlation, homogeneity])
}

fn gaussian_blur(plane: &ChannelPlane, sigma: f64, radius: i64) -> Vec<f64> {
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    for i in -radius..=radius {
        kernel.push((-((i * i) as f64) / (2.0 * sigma * sigma)).exp());
    }
    let s: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= s;
    }
    let (w, h) = (plane.w as i64, plane.h as i64);
    let at = |buf: &[f64], x: i64, y: i64| buf[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];
    let src: Vec<f64> = plane.data.iter().map(|&v| v as f64).collect();
    let mut tmp = vec![0.0f64; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                acc += k * at(&src, x + ki as i64 - radius, y);
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    let mut out = vec![0.0f64; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (ki, k) in kernel.iter().enumerate() {
                acc += k * at(&tmp, x, y + ki as i64 - radius);
            }
            out[(y * w + x) as usize] = acc;
        }
    }
    out
}

/// Fraction of masked pixels that lie on a Canny edge. The high hysteresis
/// threshold comes from Otsu's method applied to the in-mask gradient
/// magnitude histogram; the low threshold is half of it. A constant region
/// yields 0.
pub fn edge_density(gray: &ChannelPlane, mask: &BinaryMask) -> Result<f64> {
    let area = mask.count_ones();
    if area < 16 {
        return Err(Error::InsufficientSamples {
            what: "lesion pixels",
            needed: 16,
            got: area,
        });
    }
    let (w, h) = (gray.w as i64, gray.h as i64);
    let blurred = gaussian_blur(gray, 1.4, 5);
    let at = |x: i64, y: i64| blurred[(y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize];

    let n = (w * h) as usize;
    let mut gx = vec![0.0f64; n];
    let mut gy = vec![0.0f64; n];
    let mut mag = vec![0.0f64; n];
    for y in 0..h {
        for x in 0..w {
            let sx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let sy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            let i = (y * w + x) as usize;
            gx[i] = sx;
            gy[i] = sy;
            mag[i] = sx.hypot(sy);
        }
    }

    let mut gmax = 0.0f64;
    for y in 0..mask.h {
        for x in 0..mask.w {
            if mask.get(x, y) {
                gmax = gmax.max(mag[(y * mask.w + x) as usize]);
            }
        }
    }
    if gmax <= 1e-12 {
        return Ok(0.0);
    }
    let mut hist = [0u64; 256];
    for y in 0..mask.h {
        for x in 0..mask.w {
            if mask.get(x, y) {
                let b = ((mag[(y * mask.w + x) as usize] / gmax * 256.0) as usize).min(255);
                hist[b] += 1;
            }
        }
    }
    let t_high = match otsu_from_histogram(&hist) {
        // Upper edge of the selected bin, rescaled to magnitude units.
        Ok(t) => (t as f64 + 1.0) / 256.0 * gmax,
        // Effectively constant gradient inside the mask: no edges.
        Err(_) => return Ok(0.0),
    };
    let t_low = 0.5 * t_high;

    // Non-maximum suppression along the quantized gradient direction.
    let mut ridge = vec![false; n];
    for y in 0..h {
        for x in 0..w {
            let i = (y * w + x) as usize;
            if mag[i] < t_low {
                continue;
            }
            let mut angle = gy[i].atan2(gx[i]);
            if angle < 0.0 {
                angle += std::f64::consts::PI;
            }
            let sector = ((angle / (std::f64::consts::PI / 4.0)).round() as usize) % 4;
            let (dx, dy) = match sector {
                0 => (1i64, 0i64),
                1 => (1, 1),
                2 => (0, 1),
                _ => (1, -1),
            };
            let m_at = |x: i64, y: i64| {
                if x < 0 || y < 0 || x >= w || y >= h {
                    0.0
                } else {
                    mag[(y * w + x) as usize]
                }
            };
            ridge[i] = mag[i] >= m_at(x + dx, y + dy) && mag[i] >= m_at(x - dx, y - dy);
        }
    }

    // Hysteresis: grow strong ridge pixels through weak ones, 8-connected.
    let mut edge = vec![false; n];
    let mut stack = Vec::new();
    for i in 0..n {
        if ridge[i] && mag[i] >= t_high {
            edge[i] = true;
            stack.push(i);
        }
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i as i64) % w, (i as i64) / w);
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if !edge[j] && ridge[j] && mag[j] >= t_low {
                    edge[j] = true;
                    stack.push(j);
                }
            }
        }
    }

    let mut hits = 0usize;
    for y in 0..mask.h {
        for x in 0..mask.w {
            if mask.get(x, y) && edge[(y * mask.w + x) as usize] {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / area as f64)
}

/// Map from 8-bit neighborhood codes to their rotation class (36 classes),
/// plus the class count. Classes are numbered by ascending canonical code,
/// so an all-ones neighborhood (flat patch) lands in the last class.
pub fn lbp_necklace_table() -> &'static ([u8; 256], usize) {
    static TABLE: OnceLock<([u8; 256], usize)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let canon = |c: u8| -> u8 {
            (0..8)
                .map(|k| c.rotate_left(k))
                .min()
                .unwrap()
        };
        let mut canons: Vec<u8> = (0..=255u8).map(canon).collect();
        let mut classes = canons.clone();
        classes.sort_unstable();
        classes.dedup();
        let mut table = [0u8; 256];
        for c in 0..=255usize {
            table[c] = classes.binary_search(&canons[c]).unwrap() as u8;
            canons[c] = table[c];
        }
        (table, classes.len())
    })
}

/// Neighbor ring in circular order; a 90 degree image rotation shifts it by
/// two positions, which the rotation-invariant code absorbs exactly.
const LBP_RING: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Normalized histogram over the 36 rotation classes of the 8-neighbor sign
/// pattern (neighbor >= center counts as 1). Only masked pixels whose full
/// 3x3 neighborhood lies inside the plane contribute.
pub fn lbp_histogram(gray: &ChannelPlane, mask: &BinaryMask) -> Result<[f64; 36]> {
    let area = mask.count_ones();
    if area < 64 {
        return Err(Error::InsufficientSamples {
            what: "lesion pixels",
            needed: 64,
            got: area,
        });
    }
    let (table, n_classes) = lbp_necklace_table();
    debug_assert_eq!(*n_classes, 36);
    let mut hist = [0u64; 36];
    let mut total = 0u64;
    for y in 1..mask.h.saturating_sub(1) {
        for x in 1..mask.w.saturating_sub(1) {
            if !mask.get(x, y) {
                continue;
            }
            let c = gray.at(x, y);
            let mut code = 0u8;
            for (bit, (dx, dy)) in LBP_RING.iter().enumerate() {
                let v = gray.at((x as i64 + dx) as u32, (y as i64 + dy) as u32);
                if v >= c {
                    code |= 1 << bit;
                }
            }
            hist[table[code as usize] as usize] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::InsufficientSamples {
            what: "interior pixels",
            needed: 1,
            got: 0,
        });
    }
    let mut out = [0.0f64; 36];
    for (o, &c) in out.iter_mut().zip(hist.iter()) {
        *o = c as f64 / total as f64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_from(w: u32, h: u32, f: impl Fn(u32, u32) -> f32) -> ChannelPlane {
        let mut data = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                data.push(f(x, y));
            }
        }
        ChannelPlane::new(w, h, data)
    }

    fn full_mask(w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| true)
    }

    #[test]
    fn glcm_constant_region() {
        let plane = plane_from(16, 16, |_, _| 100.0);
        let mask = full_mask(16, 16);
        for levels in [32usize, 64] {
            let [contrast, energy, correlation, homogeneity] =
                glcm_features(&plane, &mask, levels).unwrap();
            assert_eq!(contrast, 0.0);
            assert_eq!(energy, 1.0);
            assert_eq!(correlation, 0.0);
            assert_eq!(homogeneity, 1.0);
        }
    }

    #[test]
    fn glcm_adjacent_bin_checkerboard() {
        // Values 4 and 12 land in adjacent bins at 32 levels (bin width 8).
        let plane = plane_from(16, 16, |x, y| if (x + y) % 2 == 0 { 4.0 } else { 12.0 });
        let mask = full_mask(16, 16);
        let [contrast, energy, correlation, homogeneity] =
            glcm_features(&plane, &mask, 32).unwrap();
        assert!((contrast - 1.0).abs() < 1e-12);
        assert!((energy - 0.5).abs() < 1e-12);
        assert!((correlation + 1.0).abs() < 1e-12);
        assert!((homogeneity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn glcm_needs_a_horizontal_pair() {
        let plane = plane_from(8, 8, |x, _| x as f32);
        // A single column has no horizontal neighbors.
        let mask = BinaryMask::from_fn(8, 8, |x, _| x == 3);
        assert!(glcm_features(&plane, &mask, 32).is_err());
    }

    #[test]
    fn edge_density_constant_is_zero() {
        let plane = plane_from(40, 40, |_, _| 77.0);
        let mask = BinaryMask::from_fn(40, 40, |x, y| {
            (8..32).contains(&x) && (8..32).contains(&y)
        });
        assert_eq!(edge_density(&plane, &mask).unwrap(), 0.0);
    }

    #[test]
    fn edge_density_single_step_edge() {
        // One vertical step through a 32x32 region: expect roughly one
        // edge column, density near L / A.
        let plane = plane_from(48, 48, |x, _| if x < 24 { 60.0 } else { 180.0 });
        let mask = BinaryMask::from_fn(48, 48, |x, y| {
            (8..40).contains(&x) && (8..40).contains(&y)
        });
        let d = edge_density(&plane, &mask).unwrap();
        let expected = 32.0 / 1024.0;
        assert!(d > 0.0, "edge must be detected");
        assert!(d <= 3.0 * expected, "got {d}, expected about {expected}");
    }

    #[test]
    fn lbp_has_36_rotation_classes() {
        let (_, n) = lbp_necklace_table();
        assert_eq!(*n, 36);
    }

    #[test]
    fn lbp_flat_patch_lands_in_last_class() {
        let plane = plane_from(16, 16, |_, _| 42.0);
        let mask = full_mask(16, 16);
        let hist = lbp_histogram(&plane, &mask).unwrap();
        assert_eq!(hist[35], 1.0);
        assert!(hist[..35].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lbp_is_exactly_rotation_invariant() {
        let w = 24u32;
        let plane = plane_from(w, w, |x, y| ((x * 7 + y * 13) % 200) as f32 + (x % 3) as f32);
        let mask = BinaryMask::from_fn(w, w, |x, y| {
            let dx = x as f64 - 11.5;
            let dy = y as f64 - 11.5;
            (dx * dx + dy * dy).sqrt() <= 9.0
        });
        // Rotate plane and mask 90 degrees clockwise: (x, y) -> (w-1-y, x).
        let rot_plane = plane_from(w, w, |x, y| plane.at(y, w - 1 - x));
        let rot_mask = BinaryMask::from_fn(w, w, |x, y| mask.get(y, w - 1 - x));
        let h0 = lbp_histogram(&plane, &mask).unwrap();
        let h1 = lbp_histogram(&rot_plane, &rot_mask).unwrap();
        assert_eq!(h0, h1);
    }

    #[test]
    fn lbp_histogram_sums_to_one() {
        let plane = plane_from(32, 32, |x, y| ((x * 31 + y * 17) % 256) as f32);
        let mask = BinaryMask::from_fn(32, 32, |x, y| {
            (4..28).contains(&x) && (4..28).contains(&y)
        });
        let hist = lbp_histogram(&plane, &mask).unwrap();
        let sum: f64 = hist.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }
}

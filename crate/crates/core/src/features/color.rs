//! Colour features: per-channel statistics, occupied histogram bins, and
//! colour-triangle contrast over six planes (red, green, blue, gray, hue,
//! value), all sampled under the lesion mask.

use crate::error::{Error, Result};
use crate::imgproc::{BinaryMask, BoundaryTrace, ChannelPlane, Region};

const MIN_AREA_STATS: usize = 16;

fn check_area(area: usize) -> Result<()> {
    if area < MIN_AREA_STATS {
        return Err(Error::InsufficientSamples {
            what: "lesion pixels",
            needed: MIN_AREA_STATS,
            got: area,
        });
    }
    Ok(())
}

fn masked_values(plane: &ChannelPlane, mask: &BinaryMask) -> Vec<f64> {
    let mut out = Vec::new();
    for y in 0..mask.h {
        for x in 0..mask.w {
            if mask.get(x, y) {
                out.push(plane.at(x, y) as f64);
            }
        }
    }
    out
}

/// Mean and population variance per plane, interleaved
/// `[mean_0, var_0, mean_1, var_1, ..]`.
pub fn basic_stats(planes: &[&ChannelPlane; 6], mask: &BinaryMask) -> Result<Vec<f64>> {
    check_area(mask.count_ones())?;
    let mut out = Vec::with_capacity(12);
    for plane in planes {
        let vals = masked_values(plane, mask);
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        out.push(mean);
        out.push(var);
    }
    Ok(out)
}

/// Number of occupied bins per plane when masked values are dropped into 16
/// equal-width bins over [0, 255]. Always in 1..=16 for a non-empty mask.
pub fn hist_nonzero(planes: &[&ChannelPlane; 6], mask: &BinaryMask) -> Result<Vec<f64>> {
    check_area(mask.count_ones())?;
    let mut out = Vec::with_capacity(6);
    for plane in planes {
        let mut bins = [0u32; 16];
        for y in 0..mask.h {
            for x in 0..mask.w {
                if mask.get(x, y) {
                    let v = plane.at(x, y).clamp(0.0, 255.0);
                    let b = ((v / 16.0) as usize).min(15);
                    bins[b] += 1;
                }
            }
        }
        out.push(bins.iter().filter(|&&c| c > 0).count() as f64);
    }
    Ok(out)
}

struct PixelAssign {
    /// Index into the boundary trace of the nearest-angle boundary pixel.
    boundary_idx: usize,
    /// Distance of the lesion pixel from the centroid.
    r: f64,
    /// Distance of the assigned boundary pixel from the centroid.
    big_r: f64,
}

/// Per-pixel polar assignment shared by all colour-triangle variants.
///
/// Each lesion pixel maps to the boundary pixel whose angle from the centroid
/// is circularly closest (ties pick the earliest trace index), giving the
/// pixel a boundary position and a radial fraction r / R.
pub struct CtAssignment {
    per_pixel: Vec<PixelAssign>,
    n_boundary: usize,
    pub centroid_inside: bool,
}

impl CtAssignment {
    pub fn build(region: &Region, trace: &BoundaryTrace) -> Result<Self> {
        let (cx, cy) = region.centroid;
        let n = trace.points.len();
        if n < 2 {
            return Err(Error::DegenerateRegion(
                "boundary too short for polar assignment".into(),
            ));
        }
        // Boundary angles sorted for circular nearest-angle lookup. Runs of
        // equal angles keep their lowest trace index first.
        let mut by_angle: Vec<(f64, usize, f64)> = trace
            .points
            .iter()
            .enumerate()
            .map(|(j, &(bx, by))| {
                let dx = bx as f64 - cx;
                let dy = by as f64 - cy;
                (dy.atan2(dx), j, (dx * dx + dy * dy).sqrt())
            })
            .collect();
        by_angle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        // First element of each equal-angle run (that one has the lowest j).
        let mut run_first = vec![0usize; n];
        for i in 1..n {
            run_first[i] = if by_angle[i].0 == by_angle[i - 1].0 {
                run_first[i - 1]
            } else {
                i
            };
        }

        let nearest = |theta: f64| -> usize {
            let pos = by_angle.partition_point(|e| e.0 < theta);
            // Candidates: runs at or after theta and before it, wrapping.
            let succ = if pos == n { 0 } else { pos };
            let pred = if pos == 0 { n - 1 } else { pos - 1 };
            let circ = |a: f64| {
                let d = (a - theta).abs();
                d.min(std::f64::consts::TAU - d)
            };
            let (ds, dp) = (circ(by_angle[succ].0), circ(by_angle[pred].0));
            let pick = |i: usize| by_angle[run_first[i]].1;
            if ds < dp {
                pick(succ)
            } else if dp < ds {
                pick(pred)
            } else {
                pick(succ).min(pick(pred))
            }
        };

        let mut big_r_of = vec![0.0f64; n];
        for &(_, j, r) in &by_angle {
            big_r_of[j] = r;
        }

        let mask = &region.mask;
        let mut per_pixel = Vec::with_capacity(region.area);
        for y in 0..mask.h {
            for x in 0..mask.w {
                if !mask.get(x, y) {
                    continue;
                }
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let j = nearest(dy.atan2(dx));
                per_pixel.push(PixelAssign {
                    boundary_idx: j,
                    r: (dx * dx + dy * dy).sqrt(),
                    big_r: big_r_of[j],
                });
            }
        }

        let centroid_inside = {
            let (ix, iy) = (cx.round(), cy.round());
            ix >= 0.0
                && iy >= 0.0
                && (ix as u32) < mask.w
                && (iy as u32) < mask.h
                && mask.get(ix as u32, iy as u32)
        };
        Ok(Self {
            per_pixel,
            n_boundary: n,
            centroid_inside,
        })
    }
}

/// Colour-triangle contrast: split the boundary into `pa` equal arcs starting
/// at the trace origin, split each radius into `sp` bands, average the plane
/// over every (arc, band) cell, and return the largest pairwise Euclidean
/// distance between the per-arc band vectors. Empty bands take the arc mean,
/// empty arcs the region mean, so a uniform region scores exactly 0.
pub fn color_triangle(
    plane: &ChannelPlane,
    region: &Region,
    assignment: &CtAssignment,
    pa: usize,
    sp: usize,
) -> Result<f64> {
    let n = assignment.n_boundary;
    if n < 2 * pa {
        return Err(Error::InsufficientSamples {
            what: "boundary pixels",
            needed: 2 * pa,
            got: n,
        });
    }
    if region.area < pa * sp {
        return Err(Error::InsufficientSamples {
            what: "lesion pixels",
            needed: pa * sp,
            got: region.area,
        });
    }

    let mask = &region.mask;
    let mut sums = vec![0.0f64; pa * sp];
    let mut counts = vec![0u32; pa * sp];
    let mut total = 0.0f64;
    let mut idx = 0usize;
    for y in 0..mask.h {
        for x in 0..mask.w {
            if !mask.get(x, y) {
                continue;
            }
            let a = &assignment.per_pixel[idx];
            idx += 1;
            let part = a.boundary_idx * pa / n;
            let band = if a.big_r <= f64::EPSILON {
                0
            } else {
                (((sp as f64) * a.r / a.big_r) as usize).min(sp - 1)
            };
            let v = plane.at(x, y) as f64;
            sums[part * sp + band] += v;
            counts[part * sp + band] += 1;
            total += v;
        }
    }
    let region_mean = total / region.area as f64;

    let mut vectors = vec![[0.0f64; 8]; pa];
    for p in 0..pa {
        let psum: f64 = sums[p * sp..(p + 1) * sp].iter().sum();
        let pcount: u32 = counts[p * sp..(p + 1) * sp].iter().sum();
        let part_mean = if pcount > 0 {
            psum / pcount as f64
        } else {
            region_mean
        };
        for b in 0..sp {
            vectors[p][b] = if counts[p * sp + b] > 0 {
                sums[p * sp + b] / counts[p * sp + b] as f64
            } else {
                part_mean
            };
        }
    }

    let mut best = 0.0f64;
    for i in 0..pa {
        for j in (i + 1)..pa {
            let d2: f64 = (0..sp)
                .map(|b| {
                    let d = vectors[i][b] - vectors[j][b];
                    d * d
                })
                .sum();
            best = best.max(d2.sqrt());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imgproc::trace_boundary;

    fn disk_mask(w: u32, h: u32, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            (dx * dx + dy * dy).sqrt() <= r
        })
    }

    fn plane_from(w: u32, h: u32, f: impl Fn(u32, u32) -> f32) -> ChannelPlane {
        let mut data = Vec::with_capacity((w * h) as usize);
        for y in 0..h {
            for x in 0..w {
                data.push(f(x, y));
            }
        }
        ChannelPlane::new(w, h, data)
    }

    #[test]
    fn basic_stats_two_values() {
        let mask = BinaryMask::from_fn(8, 8, |x, y| x < 4 || y < 2);
        let plane = plane_from(8, 8, |x, _| if x < 4 { 10.0 } else { 30.0 });
        let planes = [&plane, &plane, &plane, &plane, &plane, &plane];
        let stats = basic_stats(&planes, &mask).unwrap();
        let n = mask.count_ones() as f64;
        let n_hi = (2 * 4) as f64;
        let mean = (10.0 * (n - n_hi) + 30.0 * n_hi) / n;
        assert!((stats[0] - mean).abs() < 1e-12);
        let var = ((n - n_hi) * (10.0 - mean).powi(2) + n_hi * (30.0 - mean).powi(2)) / n;
        assert!((stats[1] - var).abs() < 1e-12);
    }

    #[test]
    fn hist_counts_occupied_bins() {
        let mask = BinaryMask::from_fn(8, 8, |_, _| true);
        let constant = plane_from(8, 8, |_, _| 42.0);
        let two = plane_from(8, 8, |x, _| if x < 4 { 10.0 } else { 100.0 });
        let planes = [&constant, &two, &constant, &two, &constant, &two];
        let nums = hist_nonzero(&planes, &mask).unwrap();
        assert_eq!(nums, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn hist_full_range_hits_sixteen() {
        let mask = BinaryMask::from_fn(16, 16, |_, _| true);
        let ramp = plane_from(16, 16, |x, _| (x * 16) as f32);
        let planes = [&ramp, &ramp, &ramp, &ramp, &ramp, &ramp];
        let nums = hist_nonzero(&planes, &mask).unwrap();
        assert_eq!(nums[0], 16.0);
    }

    #[test]
    fn triangle_uniform_region_is_exactly_zero() {
        let mask = disk_mask(64, 64, 31.5, 31.5, 20.0);
        let region = Region::from_mask(mask).unwrap();
        let trace = trace_boundary(&region.mask).unwrap();
        let asg = CtAssignment::build(&region, &trace).unwrap();
        let plane = plane_from(64, 64, |_, _| 123.0);
        for pa in [4usize, 8, 12, 16] {
            for sp in [2usize, 4, 8] {
                let v = color_triangle(&plane, &region, &asg, pa, sp).unwrap();
                assert_eq!(v, 0.0, "pa={pa} sp={sp}");
            }
        }
    }

    #[test]
    fn triangle_sees_left_right_contrast() {
        let mask = disk_mask(64, 64, 31.5, 31.5, 22.0);
        let region = Region::from_mask(mask).unwrap();
        let trace = trace_boundary(&region.mask).unwrap();
        let asg = CtAssignment::build(&region, &trace).unwrap();
        let plane = plane_from(64, 64, |x, _| if x < 32 { 50.0 } else { 200.0 });
        let v = color_triangle(&plane, &region, &asg, 4, 2).unwrap();
        // Opposite arcs see pure 50 vs pure 200 in both bands.
        assert!(v > 120.0, "got {v}");
        assert!(v <= 150.0 * std::f64::consts::SQRT_2 + 1e-9);
    }

    #[test]
    fn triangle_radial_gradient_scores_low() {
        let mask = disk_mask(64, 64, 31.5, 31.5, 22.0);
        let region = Region::from_mask(mask).unwrap();
        let trace = trace_boundary(&region.mask).unwrap();
        let asg = CtAssignment::build(&region, &trace).unwrap();
        let radial = plane_from(64, 64, |x, y| {
            let dx = x as f64 - 31.5;
            let dy = y as f64 - 31.5;
            (50.0 + 6.0 * (dx * dx + dy * dy).sqrt()) as f32
        });
        let half = plane_from(64, 64, |x, _| if x < 32 { 50.0 } else { 200.0 });
        let v_radial = color_triangle(&radial, &region, &asg, 8, 4).unwrap();
        let v_half = color_triangle(&half, &region, &asg, 8, 4).unwrap();
        assert!(
            v_radial < 0.25 * v_half,
            "radial {v_radial} vs half {v_half}"
        );
    }

    #[test]
    fn triangle_preconditions_enforced() {
        let mask = disk_mask(32, 32, 15.5, 15.5, 4.0);
        let region = Region::from_mask(mask).unwrap();
        let trace = trace_boundary(&region.mask).unwrap();
        let asg = CtAssignment::build(&region, &trace).unwrap();
        let plane = plane_from(32, 32, |_, _| 1.0);
        // Boundary of a radius-4 disk is ~20 px, below 2 * 16.
        assert!(color_triangle(&plane, &region, &asg, 16, 8).is_err());
    }
}

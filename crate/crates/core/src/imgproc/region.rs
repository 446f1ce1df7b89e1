use crate::error::{Error, Result};
use crate::imgproc::{BinaryMask, Rect};

/// A single connected foreground region with cached statistics.
#[derive(Debug, Clone)]
pub struct Region {
    pub mask: BinaryMask,
    pub area: usize,
    /// Mean pixel coordinate, `(x, y)`.
    pub centroid: (f64, f64),
    pub bbox: Rect,
}

impl Region {
    pub fn from_mask(mask: BinaryMask) -> Result<Self> {
        let mut area = 0usize;
        let (mut sx, mut sy) = (0f64, 0f64);
        let (mut min_x, mut min_y) = (u32::MAX, u32::MAX);
        let (mut max_x, mut max_y) = (0u32, 0u32);
        for y in 0..mask.h {
            for x in 0..mask.w {
                if mask.get(x, y) {
                    area += 1;
                    sx += x as f64;
                    sy += y as f64;
                    min_x = min_x.min(x);
                    min_y = min_y.min(y);
                    max_x = max_x.max(x);
                    max_y = max_y.max(y);
                }
            }
        }
        if area == 0 {
            return Err(Error::DegenerateRegion("empty mask".into()));
        }
        Ok(Region {
            mask,
            area,
            centroid: (sx / area as f64, sy / area as f64),
            bbox: Rect {
                x: min_x,
                y: min_y,
                w: max_x - min_x + 1,
                h: max_y - min_y + 1,
            },
        })
    }
}

/// Ordered outer boundary of a region.
#[derive(Debug, Clone)]
pub struct BoundaryTrace {
    /// Boundary pixels in clockwise order (image coordinates, y down).
    pub points: Vec<(u32, u32)>,
    /// True when some pixel was visited more than once, which happens on
    /// one-pixel-wide necks and spurs.
    pub revisited: bool,
}

/// Moore boundary trace of an 8-connected region.
///
/// Starts from the leftmost (then topmost) foreground pixel and walks the
/// outer contour clockwise, examining the 8-neighbourhood of the current
/// pixel starting just after the backtrack position. The walk stops when a
/// directed step repeats, which closes the contour even when it passes
/// through the start pixel on a spur. Regions of fewer than 4 pixels are
/// rejected.
pub fn trace_boundary(mask: &BinaryMask) -> Result<BoundaryTrace> {
    let area = mask.count_ones();
    if area < 4 {
        return Err(Error::DegenerateRegion(format!(
            "boundary trace needs at least 4 pixels, got {area}"
        )));
    }
    let at = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && x < mask.w as i64 && y < mask.h as i64 && mask.get(x as u32, y as u32)
    };
    // Clockwise ring starting west, screen coordinates (y down).
    const RING: [(i64, i64); 8] = [
        (-1, 0),
        (-1, -1),
        (0, -1),
        (1, -1),
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
    ];
    let ring_index = |from: (i64, i64), to: (i64, i64)| -> usize {
        let d = (to.0 - from.0, to.1 - from.1);
        RING.iter().position(|&o| o == d).expect("8-neighbour")
    };

    let mut start = None;
    'scan: for x in 0..mask.w {
        for y in 0..mask.h {
            if mask.get(x, y) {
                start = Some((x as i64, y as i64));
                break 'scan;
            }
        }
    }
    let p0 = start.unwrap();
    let b0 = (p0.0 - 1, p0.1);

    let mut points: Vec<(u32, u32)> = vec![(p0.0 as u32, p0.1 as u32)];
    // One bit per (pixel, step direction) pair.
    let mut taken = vec![0u8; (mask.w as usize) * (mask.h as usize)];
    let mut p = p0;
    let mut b = b0;
    let limit = 8 * area + 16;
    let mut closed = false;
    for _ in 0..limit {
        let mut idx = ring_index(p, b);
        let mut next = None;
        for _ in 0..8 {
            idx = (idx + 1) % 8;
            let cand = (p.0 + RING[idx].0, p.1 + RING[idx].1);
            if at(cand.0, cand.1) {
                next = Some((cand, idx));
                break;
            }
            b = cand;
        }
        let Some((np, dir)) = next else {
            return Err(Error::DegenerateRegion(
                "isolated pixel during boundary trace".into(),
            ));
        };
        let bit = 1u8 << dir;
        let cell = &mut taken[(p.1 as usize) * (mask.w as usize) + p.0 as usize];
        if *cell & bit != 0 {
            // This step was walked before: the contour has closed and the
            // trailing re-entry belongs to the next lap.
            points.pop();
            closed = true;
            break;
        }
        *cell |= bit;
        p = np;
        points.push((p.0 as u32, p.1 as u32));
    }
    if !closed {
        return Err(Error::DegenerateRegion(
            "boundary trace failed to close; mask is not a single region".into(),
        ));
    }
    let mut seen = BinaryMask::new(mask.w, mask.h);
    let mut revisited = false;
    for &(x, y) in &points {
        if seen.get(x, y) {
            revisited = true;
        }
        seen.set(x, y, true);
    }
    Ok(BoundaryTrace { points, revisited })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_of(rows: &[&str]) -> BinaryMask {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        BinaryMask::from_fn(w, h, |x, y| {
            rows[y as usize].as_bytes()[x as usize] == b'#'
        })
    }

    #[test]
    fn square_boundary_excludes_interior() {
        let m = mask_of(&["###", "###", "###"]);
        let t = trace_boundary(&m).unwrap();
        assert_eq!(t.points.len(), 8);
        assert!(!t.points.contains(&(1, 1)));
        assert!(!t.revisited);
        assert_eq!(t.points[0], (0, 0));
    }

    #[test]
    fn square_boundary_is_clockwise() {
        let m = mask_of(&["###", "###", "###"]);
        let t = trace_boundary(&m).unwrap();
        assert_eq!(
            t.points,
            vec![
                (0, 0),
                (1, 0),
                (2, 0),
                (2, 1),
                (2, 2),
                (1, 2),
                (0, 2),
                (0, 1)
            ]
        );
    }

    #[test]
    fn thin_spur_sets_revisit_flag() {
        let m = mask_of(&["####", "#...", "#...", "#..."]);
        let t = trace_boundary(&m).unwrap();
        assert!(t.revisited);
    }

    #[test]
    fn rejects_tiny_regions() {
        let m = mask_of(&["##.", "...", "..."]);
        assert!(trace_boundary(&m).is_err());
    }

    #[test]
    fn disk_boundary_length_tracks_circumference() {
        let m = BinaryMask::from_fn(64, 64, |x, y| {
            ((x as f64 - 32.0).powi(2) + (y as f64 - 32.0).powi(2)).sqrt() <= 20.0
        });
        let t = trace_boundary(&m).unwrap();
        // Digital circle contour has between 4r and 8r pixels.
        assert!(t.points.len() >= 80 && t.points.len() <= 180);
        assert!(!t.revisited);
        for win in t.points.windows(2) {
            let dx = (win[1].0 as i64 - win[0].0 as i64).abs();
            let dy = (win[1].1 as i64 - win[0].1 as i64).abs();
            assert!(dx <= 1 && dy <= 1, "boundary must be 8-connected chain");
        }
    }

    #[test]
    fn region_stats() {
        let m = mask_of(&["....", ".##.", ".##.", "...."]);
        let r = Region::from_mask(m).unwrap();
        assert_eq!(r.area, 4);
        assert_eq!(r.centroid, (1.5, 1.5));
        assert_eq!(
            r.bbox,
            Rect {
                x: 1,
                y: 1,
                w: 2,
                h: 2
            }
        );
    }
}

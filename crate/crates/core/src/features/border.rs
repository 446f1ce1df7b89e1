//! Border features: four global shape descriptors and the border-fitting
//! angle statistics obtained by fitting lines to equal arcs of the boundary.
//!
//! Discrete conventions, applied consistently everywhere: the perimeter of a
//! traced boundary is the closed step sum (1 per axis step, sqrt(2) per
//! diagonal) plus pi, which makes a single pixel measure pi and an n by n
//! square measure 4(n-1) + pi; the hull area used by solidity is the number
//! of lattice points covered by the convex hull of the boundary pixels
//! (Pick's theorem), so solid convex shapes score exactly 1.

use crate::error::{Error, Result};
use crate::imgproc::{BoundaryTrace, Region};

/// Closed step-sum length of the trace polygon plus pi.
fn step_perimeter(points: &[(u32, u32)]) -> f64 {
    let n = points.len();
    let mut sum = 0.0;
    for i in 0..n {
        let (x0, y0) = points[i];
        let (x1, y1) = points[(i + 1) % n];
        let dx = (x0 as i64 - x1 as i64).abs();
        let dy = (y0 as i64 - y1 as i64).abs();
        if dx + dy == 1 {
            sum += 1.0;
        } else if dx == 1 && dy == 1 {
            sum += std::f64::consts::SQRT_2;
        }
    }
    sum + std::f64::consts::PI
}

/// Convex hull of integer points via monotone chain, counterclockwise,
/// without collinear points. Returns fewer than 3 points for degenerate
/// input.
fn convex_hull(points: &[(u32, u32)]) -> Vec<(i64, i64)> {
    let mut pts: Vec<(i64, i64)> = points.iter().map(|&(x, y)| (x as i64, y as i64)).collect();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let chain = |iter: &mut dyn Iterator<Item = (i64, i64)>| {
        let mut half: Vec<(i64, i64)> = Vec::new();
        for p in iter {
            while half.len() >= 2 && cross(half[half.len() - 2], half[half.len() - 1], p) <= 0 {
                half.pop();
            }
            half.push(p);
        }
        half.pop();
        half
    };
    let mut hull = chain(&mut pts.iter().copied());
    hull.extend(chain(&mut pts.iter().rev().copied()));
    hull
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `[compactness, solidity, convexity, border_dist_var]`.
///
/// compactness = 4 pi A / P^2, solidity = A / A_hull, convexity = P_hull / P,
/// border_dist_var = population variance of boundary-to-centroid distances
/// divided by their squared mean (scale free).
pub fn shape_features(region: &Region, trace: &BoundaryTrace) -> Result<[f64; 4]> {
    let area = region.area as f64;
    let perim = step_perimeter(&trace.points);
    let compactness = 4.0 * std::f64::consts::PI * area / (perim * perim);

    let hull = convex_hull(&trace.points);
    if hull.len() < 3 {
        return Err(Error::DegenerateRegion(
            "boundary is collinear, hull has no area".into(),
        ));
    }
    let mut shoelace2 = 0i64;
    let mut boundary_pts = 0i64;
    let mut hull_perim = 0.0f64;
    for i in 0..hull.len() {
        let (x0, y0) = hull[i];
        let (x1, y1) = hull[(i + 1) % hull.len()];
        shoelace2 += x0 * y1 - x1 * y0;
        boundary_pts += gcd(x1 - x0, y1 - y0);
        let (dx, dy) = ((x1 - x0) as f64, (y1 - y0) as f64);
        hull_perim += (dx * dx + dy * dy).sqrt();
    }
    // Lattice points covered by the hull polygon (Pick's theorem).
    let hull_area = (shoelace2.abs() as f64) / 2.0 + (boundary_pts as f64) / 2.0 + 1.0;
    let solidity = area / hull_area;
    let convexity = (hull_perim + std::f64::consts::PI) / perim;

    let (cx, cy) = region.centroid;
    let dists: Vec<f64> = trace
        .points
        .iter()
        .map(|&(x, y)| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            (dx * dx + dy * dy).sqrt()
        })
        .collect();
    let n = dists.len() as f64;
    let mean = dists.iter().sum::<f64>() / n;
    if mean <= f64::EPSILON {
        return Err(Error::DegenerateRegion(
            "boundary coincides with centroid".into(),
        ));
    }
    let var = dists.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    Ok([compactness, solidity, convexity, var / (mean * mean)])
}

/// Direction of the orthogonal least-squares line through a run of boundary
/// points, in (-pi/2, pi/2].
fn segment_direction(points: &[(u32, u32)]) -> Result<f64> {
    let n = points.len() as f64;
    let (mut mx, mut my) = (0.0f64, 0.0f64);
    for &(x, y) in points {
        mx += x as f64;
        my += y as f64;
    }
    mx /= n;
    my /= n;
    let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for &(x, y) in points {
        let dx = x as f64 - mx;
        let dy = y as f64 - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx + syy <= f64::EPSILON {
        return Err(Error::DegenerateInput(
            "boundary segment has no spatial extent".into(),
        ));
    }
    Ok(0.5 * (2.0 * sxy).atan2(sxx - syy))
}

/// Mean and population variance of the acute angles between lines fitted to
/// `nt` consecutive equal arcs of the boundary (consecutive pairs include the
/// wrap-around). Needs at least `4 * nt` boundary pixels.
pub fn border_fitting(trace: &BoundaryTrace, nt: usize) -> Result<(f64, f64)> {
    let n = trace.points.len();
    if n < 4 * nt {
        return Err(Error::InsufficientSamples {
            what: "boundary pixels",
            needed: 4 * nt,
            got: n,
        });
    }
    let mut dirs = Vec::with_capacity(nt);
    for i in 0..nt {
        let lo = i * n / nt;
        let hi = (i + 1) * n / nt;
        dirs.push(segment_direction(&trace.points[lo..hi])?);
    }
    let mut angles = Vec::with_capacity(nt);
    for i in 0..nt {
        let d = (dirs[i] - dirs[(i + 1) % nt]).abs();
        // Directions differ by at most pi; fold to the acute angle.
        let d = if d > std::f64::consts::PI {
            d - std::f64::consts::PI
        } else {
            d
        };
        angles.push(d.min(std::f64::consts::PI - d));
    }
    let nf = nt as f64;
    let mean = angles.iter().sum::<f64>() / nf;
    let var = angles.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / nf;
    Ok((mean, var))
}

//! Graph-based region growing on the pixel grid.
//!
//! Pixels under the mask form a graph with 8-neighbour edges weighted by
//! absolute gray-level difference. Edges are visited in non-decreasing
//! weight order; two components merge when the edge weight does not exceed
//! `min(Int(C) + k / |C|)` over both components, where `Int` is the largest
//! edge weight previously merged into the component. Larger `k` favours
//! larger components. A final pass merges components smaller than
//! `min_size` into their nearest neighbour by edge weight.

use crate::imgproc::{BinaryMask, ChannelPlane, LabelMap};

#[derive(Debug, Clone, Copy)]
pub struct MstParams {
    pub k: f64,
    pub min_size: usize,
}

struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
    /// Largest merged edge weight per root.
    internal: Vec<f32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            internal: vec![0.0; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32, w: f32) -> u32 {
        let (a, b) = if self.size[a as usize] >= self.size[b as usize] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        self.internal[a as usize] = w;
        a
    }
}

/// Segment the masked pixels; unmasked pixels get label 0. Components are
/// numbered from 1 in scan order of their first pixel. Deterministic: edge
/// ties keep construction (scan) order.
pub fn mst_segment(gray: &ChannelPlane, mask: &BinaryMask, params: MstParams) -> LabelMap {
    assert_eq!((gray.w, gray.h), (mask.w, mask.h));
    let (w, h) = (gray.w as usize, gray.h as usize);
    let idx = |x: usize, y: usize| y * w + x;

    let mut edges: Vec<(f32, u32, u32)> = Vec::with_capacity(4 * w * h);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as u32, y as u32) {
                continue;
            }
            let g = gray.at(x as u32, y as u32);
            // Forward neighbours only, so each edge appears once.
            let neighbours = [
                (x + 1, y),
                (x, y + 1),
                (x + 1, y + 1),
                (x.wrapping_sub(1), y + 1),
            ];
            for (nx, ny) in neighbours {
                if nx >= w || ny >= h || !mask.get(nx as u32, ny as u32) {
                    continue;
                }
                let wgt = (g - gray.at(nx as u32, ny as u32)).abs();
                edges.push((wgt, idx(x, y) as u32, idx(nx, ny) as u32));
            }
        }
    }
    edges.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut dsu = Dsu::new(w * h);
    for &(wgt, a, b) in &edges {
        let ra = dsu.find(a);
        let rb = dsu.find(b);
        if ra == rb {
            continue;
        }
        let thr_a = dsu.internal[ra as usize] as f64 + params.k / dsu.size[ra as usize] as f64;
        let thr_b = dsu.internal[rb as usize] as f64 + params.k / dsu.size[rb as usize] as f64;
        if (wgt as f64) <= thr_a.min(thr_b) {
            dsu.union(ra, rb, wgt);
        }
    }
    if params.min_size > 1 {
        for &(wgt, a, b) in &edges {
            let ra = dsu.find(a);
            let rb = dsu.find(b);
            if ra == rb {
                continue;
            }
            if (dsu.size[ra as usize] as usize) < params.min_size
                || (dsu.size[rb as usize] as usize) < params.min_size
            {
                dsu.union(ra, rb, wgt);
            }
        }
    }

    let mut labels = vec![0u32; w * h];
    let mut remap = vec![0u32; w * h];
    let mut next = 0u32;
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x as u32, y as u32) {
                continue;
            }
            let root = dsu.find(idx(x, y) as u32) as usize;
            if remap[root] == 0 {
                next += 1;
                remap[root] = next;
            }
            labels[idx(x, y)] = remap[root];
        }
    }
    LabelMap {
        w: gray.w,
        h: gray.h,
        labels,
        n_components: next,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_mask(w: u32, h: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| true)
    }

    #[test]
    fn uniform_plane_is_one_component() {
        let gray = ChannelPlane::new(32, 32, vec![100.0; 1024]);
        let lm = mst_segment(&gray, &full_mask(32, 32), MstParams { k: 100.0, min_size: 1 });
        assert_eq!(lm.n_components, 1);
    }

    #[test]
    fn high_contrast_halves_stay_separate() {
        let gray = ChannelPlane::new(
            32,
            32,
            (0..1024)
                .map(|i| if i % 32 < 16 { 40.0 } else { 220.0 })
                .collect(),
        );
        let lm = mst_segment(&gray, &full_mask(32, 32), MstParams { k: 50.0, min_size: 1 });
        assert_eq!(lm.n_components, 2);
        assert_ne!(lm.label(0, 0), lm.label(31, 0));
        assert_eq!(lm.label(0, 0), lm.label(15, 31));
    }

    #[test]
    fn min_size_absorbs_specks() {
        let mut vals = vec![100.0f32; 1024];
        vals[5 * 32 + 5] = 250.0;
        let gray = ChannelPlane::new(32, 32, vals);
        let free = mst_segment(&gray, &full_mask(32, 32), MstParams { k: 10.0, min_size: 1 });
        assert_eq!(free.n_components, 2);
        let merged = mst_segment(&gray, &full_mask(32, 32), MstParams { k: 10.0, min_size: 4 });
        assert_eq!(merged.n_components, 1);
    }

    #[test]
    fn labels_number_in_scan_order_and_respect_mask() {
        let gray = ChannelPlane::new(
            16,
            16,
            (0..256)
                .map(|i| if i % 16 < 8 { 10.0 } else { 240.0 })
                .collect(),
        );
        let mask = BinaryMask::from_fn(16, 16, |_, y| y > 0);
        let lm = mst_segment(&gray, &mask, MstParams { k: 20.0, min_size: 1 });
        assert_eq!(lm.n_components, 2);
        assert_eq!(lm.label(0, 0), 0);
        assert_eq!(lm.label(0, 1), 1);
        assert_eq!(lm.label(8, 1), 2);
    }

    #[test]
    fn deterministic_output() {
        let vals: Vec<f32> = (0..64 * 64)
            .map(|i| ((i * 2654435761u64 as usize) % 97) as f32)
            .collect();
        let gray = ChannelPlane::new(64, 64, vals);
        let a = mst_segment(&gray, &full_mask(64, 64), MstParams { k: 30.0, min_size: 8 });
        let b = mst_segment(&gray, &full_mask(64, 64), MstParams { k: 30.0, min_size: 8 });
        assert_eq!(a.labels, b.labels);
    }
}

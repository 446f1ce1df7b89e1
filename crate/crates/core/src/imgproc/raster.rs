use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::BinaryMask;

/// Axis-aligned pixel rectangle, `x..x+w` by `y..y+h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl Rect {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }
}

/// Interleaved 8-bit RGB image. Dimensions are at least 8x8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    w: u32,
    h: u32,
    data: Vec<u8>,
}

pub const MIN_DIM: u32 = 8;

impl RasterImage {
    pub fn from_raw(w: u32, h: u32, data: Vec<u8>) -> Result<Self> {
        if w < MIN_DIM || h < MIN_DIM {
            return Err(Error::InvalidImage(format!(
                "dimensions {w}x{h} below minimum {MIN_DIM}x{MIN_DIM}"
            )));
        }
        if data.len() != (w as usize) * (h as usize) * 3 {
            return Err(Error::InvalidImage(format!(
                "buffer length {} does not match {w}x{h} RGB",
                data.len()
            )));
        }
        Ok(Self { w, h, data })
    }

    /// Solid-colour image, mostly useful in tests.
    pub fn filled(w: u32, h: u32, rgb: [u8; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity((w as usize) * (h as usize) * 3);
        for _ in 0..(w as usize) * (h as usize) {
            data.extend_from_slice(&rgb);
        }
        Self::from_raw(w, h, data)
    }

    pub fn width(&self) -> u32 {
        self.w
    }

    pub fn height(&self) -> u32 {
        self.h
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        let i = ((y as usize) * (self.w as usize) + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = ((y as usize) * (self.w as usize) + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let img = image::open(path)?.into_rgb8();
        Self::from_raw(img.width(), img.height(), img.into_raw())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        let buf: image::RgbImage =
            image::ImageBuffer::from_raw(self.w, self.h, self.data.clone())
                .expect("buffer length is validated at construction");
        buf.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    /// Crop to `rect`, which must lie inside the image and satisfy the
    /// minimum-dimension invariant.
    pub fn crop(&self, rect: Rect) -> Result<Self> {
        if rect.x + rect.w > self.w || rect.y + rect.h > self.h {
            return Err(Error::InvalidImage(format!(
                "crop {rect:?} exceeds {}x{}",
                self.w, self.h
            )));
        }
        let mut data = Vec::with_capacity((rect.w as usize) * (rect.h as usize) * 3);
        for y in rect.y..rect.y + rect.h {
            let row = ((y as usize) * (self.w as usize) + rect.x as usize) * 3;
            data.extend_from_slice(&self.data[row..row + (rect.w as usize) * 3]);
        }
        Self::from_raw(rect.w, rect.h, data)
    }
}

/// One float channel in `[0, 255]`, same geometry as the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlane {
    pub w: u32,
    pub h: u32,
    pub data: Vec<f32>,
}

impl ChannelPlane {
    pub fn new(w: u32, h: u32, data: Vec<f32>) -> Self {
        assert_eq!(data.len(), (w as usize) * (h as usize));
        Self { w, h, data }
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> f32 {
        self.data[(y as usize) * (self.w as usize) + x as usize]
    }
}

/// Rec. 601 luma: `0.299 R + 0.587 G + 0.114 B`.
pub fn to_gray(img: &RasterImage) -> ChannelPlane {
    let data = img
        .as_raw()
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f32 + 0.587 * p[1] as f32 + 0.114 * p[2] as f32)
        .collect();
    ChannelPlane::new(img.width(), img.height(), data)
}

/// Hexcone HSV with all three planes scaled to `[0, 255]`.
///
/// Hue of a gray pixel (max = min) is defined as 0. Value is `max(R, G, B)`.
pub fn to_hsv(img: &RasterImage) -> (ChannelPlane, ChannelPlane, ChannelPlane) {
    let n = (img.width() as usize) * (img.height() as usize);
    let mut hue = Vec::with_capacity(n);
    let mut sat = Vec::with_capacity(n);
    let mut val = Vec::with_capacity(n);
    for p in img.as_raw().chunks_exact(3) {
        let (r, g, b) = (p[0] as f32, p[1] as f32, p[2] as f32);
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let d = max - min;
        let h_deg = if d == 0.0 {
            0.0
        } else if max == r {
            let mut h = 60.0 * (g - b) / d;
            if h < 0.0 {
                h += 360.0;
            }
            h
        } else if max == g {
            120.0 + 60.0 * (b - r) / d
        } else {
            240.0 + 60.0 * (r - g) / d
        };
        hue.push(h_deg / 360.0 * 255.0);
        sat.push(if max == 0.0 { 0.0 } else { d / max * 255.0 });
        val.push(max);
    }
    (
        ChannelPlane::new(img.width(), img.height(), hue),
        ChannelPlane::new(img.width(), img.height(), sat),
        ChannelPlane::new(img.width(), img.height(), val),
    )
}

/// Bilinear downsample so that `max(w, h) == max_dim`, preserving aspect
/// ratio to within one pixel of rounding. Images already small enough are
/// returned unchanged.
pub fn downsample(img: &RasterImage, max_dim: u32) -> Result<RasterImage> {
    let (w, h) = (img.width(), img.height());
    if w.max(h) <= max_dim {
        return Ok(img.clone());
    }
    let (nw, nh) = scaled_dims(w, h, max_dim)?;
    let sx = w as f32 / nw as f32;
    let sy = h as f32 / nh as f32;
    let mut data = Vec::with_capacity((nw as usize) * (nh as usize) * 3);
    for y in 0..nh {
        let fy = ((y as f32 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f32);
        let y0 = fy.floor() as u32;
        let y1 = (y0 + 1).min(h - 1);
        let wy = fy - y0 as f32;
        for x in 0..nw {
            let fx = ((x as f32 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f32);
            let x0 = fx.floor() as u32;
            let x1 = (x0 + 1).min(w - 1);
            let wx = fx - x0 as f32;
            let (p00, p10) = (img.get(x0, y0), img.get(x1, y0));
            let (p01, p11) = (img.get(x0, y1), img.get(x1, y1));
            for c in 0..3 {
                let top = p00[c] as f32 * (1.0 - wx) + p10[c] as f32 * wx;
                let bot = p01[c] as f32 * (1.0 - wx) + p11[c] as f32 * wx;
                let v = top * (1.0 - wy) + bot * wy;
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::from_raw(nw, nh, data)
}

fn scaled_dims(w: u32, h: u32, max_dim: u32) -> Result<(u32, u32)> {
    let (nw, nh) = if w >= h {
        let nh = ((h as f64) * (max_dim as f64) / (w as f64)).round() as u32;
        (max_dim, nh)
    } else {
        let nw = ((w as f64) * (max_dim as f64) / (h as f64)).round() as u32;
        (nw, max_dim)
    };
    if nw < MIN_DIM || nh < MIN_DIM {
        return Err(Error::InvalidImage(format!(
            "aspect ratio {w}x{h} too extreme to downsample to {max_dim}"
        )));
    }
    Ok((nw, nh))
}

/// Nearest-neighbour mask resample to the given dimensions.
pub fn downsample_mask_nearest(mask: &BinaryMask, nw: u32, nh: u32) -> BinaryMask {
    resample_mask(mask, nw, nh)
}

/// Nearest-neighbour mask upsample to the given dimensions.
pub fn upsample_mask_nearest(mask: &BinaryMask, nw: u32, nh: u32) -> BinaryMask {
    resample_mask(mask, nw, nh)
}

fn resample_mask(mask: &BinaryMask, nw: u32, nh: u32) -> BinaryMask {
    let sx = mask.w as f32 / nw as f32;
    let sy = mask.h as f32 / nh as f32;
    let mut out = BinaryMask::new(nw, nh);
    for y in 0..nh {
        let sy0 = (((y as f32 + 0.5) * sy).floor() as u32).min(mask.h - 1);
        for x in 0..nw {
            let sx0 = (((x as f32 + 0.5) * sx).floor() as u32).min(mask.w - 1);
            out.set(x, y, mask.get(sx0, sy0));
        }
    }
    out
}

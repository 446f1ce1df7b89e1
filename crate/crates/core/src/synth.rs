//! Synthetic lesion corpus with exact ground truth.
//!
//! Lesions are star-convex blobs: a truncated Fourier contour
//! `r(theta) = r0 * (1 + sum_k a_k * cos(k*theta + phi_k))` rasterised onto a
//! skin-toned background. The ground-truth mask is the rasterisation itself,
//! never a post-processed segmentation, so segmentation quality can be
//! scored exactly. Benign and malignant presets differ along three axes:
//! contour harmonic content, contour skew, and colour composition (uniform
//! or radial versus multi-region).

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{BinaryMask, RasterImage};

pub const GENERATOR_VERSION: u32 = 1;
/// Maximum harmonic order of the contour.
pub const MAX_HARMONIC: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LesionClass {
    Benign,
    Melanoma,
}

impl LesionClass {
    pub fn label(self) -> i8 {
        match self {
            LesionClass::Benign => -1,
            LesionClass::Melanoma => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorMode {
    /// One flat lesion colour.
    Uniform { rgb: [u8; 3] },
    /// Linear blend from a centre colour to an edge colour by normalised
    /// radius.
    RadialGradient { center: [u8; 3], edge: [u8; 3] },
    /// Voronoi cells of `sites` interior points, one colour each.
    MultiRegion {
        colors: Vec<[u8; 3]>,
        /// Relative site positions in the unit disk, one per colour.
        sites: Vec<(f64, f64)>,
    },
}

/// Full description of one synthetic image; enough to reproduce it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesionSpec {
    pub seed: u64,
    pub class: LesionClass,
    pub width: u32,
    pub height: u32,
    /// Base contour radius in pixels.
    pub radius: f64,
    /// Harmonic amplitudes `a_k` for k = 1.., at most [`MAX_HARMONIC`].
    pub harmonics: Vec<f64>,
    /// Harmonic phases, same length as `harmonics`.
    pub phases: Vec<f64>,
    /// Lesion centre as a fraction of image size.
    pub center: (f64, f64),
    pub color: ColorMode,
    pub skin_tone: [u8; 3],
    /// Per-channel Gaussian noise sigma.
    pub noise_sigma: f64,
    /// Left-to-right multiplicative illumination gradient amplitude.
    pub illumination: f64,
}

impl LesionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width < 32 || self.height < 32 {
            return Err(Error::Config("lesion image must be at least 32x32".into()));
        }
        if self.harmonics.len() != self.phases.len() {
            return Err(Error::Config("harmonics/phases length mismatch".into()));
        }
        if self.harmonics.len() > MAX_HARMONIC {
            return Err(Error::Config(format!(
                "at most {MAX_HARMONIC} harmonics supported"
            )));
        }
        if self.harmonics.iter().any(|a| a.abs() > 0.5) {
            return Err(Error::Config("harmonic amplitude above 0.5".into()));
        }
        let total: f64 = self.harmonics.iter().map(|a| a.abs()).sum();
        if total >= 0.95 {
            return Err(Error::Config(
                "harmonic amplitudes sum too close to 1; contour could vanish".into(),
            ));
        }
        if self.radius <= 4.0 {
            return Err(Error::Config("radius must exceed 4 px".into()));
        }
        if !(0.0..64.0).contains(&self.noise_sigma) {
            return Err(Error::Config("noise sigma out of range".into()));
        }
        if !(0.0..=0.5).contains(&self.illumination) {
            return Err(Error::Config("illumination gradient out of range".into()));
        }
        Ok(())
    }

    /// Contour radius at polar angle `theta` around the lesion centre.
    pub fn contour_radius(&self, theta: f64) -> f64 {
        let mut f = 1.0;
        for (i, (&a, &p)) in self.harmonics.iter().zip(&self.phases).enumerate() {
            let k = (i + 1) as f64;
            f += a * (k * theta + p).cos();
        }
        self.radius * f
    }
}

/// Rendered image plus its exact ground-truth mask.
#[derive(Debug, Clone)]
pub struct SynthImage {
    pub image: RasterImage,
    pub mask: BinaryMask,
    pub spec: LesionSpec,
}

/// Rasterise a lesion spec. Deterministic for a given spec.
pub fn gen_lesion(spec: &LesionSpec) -> Result<SynthImage> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let cx = spec.center.0 * w as f64;
    let cy = spec.center.1 * h as f64;

    let mask = BinaryMask::from_fn(w, h, |x, y| {
        let dx = x as f64 - cx;
        let dy = y as f64 - cy;
        let d = (dx * dx + dy * dy).sqrt();
        d <= spec.contour_radius(dy.atan2(dx))
    });

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = Vec::with_capacity((w as usize) * (h as usize) * 3);
    for y in 0..h {
        for x in 0..w {
            let base = if mask.get(x, y) {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                lesion_color(spec, dx, dy)
            } else {
                [
                    spec.skin_tone[0] as f64,
                    spec.skin_tone[1] as f64,
                    spec.skin_tone[2] as f64,
                ]
            };
            let shade = 1.0 + spec.illumination * (2.0 * x as f64 / (w - 1) as f64 - 1.0);
            for c in base {
                let noisy = c * shade + spec.noise_sigma * gauss(&mut rng);
                data.push(noisy.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Ok(SynthImage {
        image: RasterImage::from_raw(w, h, data)?,
        mask,
        spec: spec.clone(),
    })
}

fn lesion_color(spec: &LesionSpec, dx: f64, dy: f64) -> [f64; 3] {
    match &spec.color {
        ColorMode::Uniform { rgb } => [rgb[0] as f64, rgb[1] as f64, rgb[2] as f64],
        ColorMode::RadialGradient { center, edge } => {
            let r = spec.contour_radius(dy.atan2(dx)).max(1e-9);
            let t = ((dx * dx + dy * dy).sqrt() / r).clamp(0.0, 1.0);
            [
                center[0] as f64 * (1.0 - t) + edge[0] as f64 * t,
                center[1] as f64 * (1.0 - t) + edge[1] as f64 * t,
                center[2] as f64 * (1.0 - t) + edge[2] as f64 * t,
            ]
        }
        ColorMode::MultiRegion { colors, sites } => {
            let (ux, uy) = (dx / spec.radius, dy / spec.radius);
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (i, &(sx, sy)) in sites.iter().enumerate() {
                let d = (ux - sx).powi(2) + (uy - sy).powi(2);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            let c = colors[best % colors.len()];
            [c[0] as f64, c[1] as f64, c[2] as f64]
        }
    }
}

/// Box-Muller standard normal sample.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn jitter(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

fn skin_tone(rng: &mut ChaCha8Rng) -> [u8; 3] {
    let t = jitter(rng, -1.0, 1.0);
    let base = [212.0 + 18.0 * t, 168.0 + 15.0 * t, 142.0 + 13.0 * t];
    [base[0] as u8, base[1] as u8, base[2] as u8]
}

/// Draw a benign-preset spec: low-order, low-amplitude contour, uniform or
/// radial colouring, negligible skew.
pub fn benign_spec(seed: u64, width: u32, height: u32) -> LesionSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_dim = width.min(height) as f64;
    let radius = jitter(&mut rng, 0.14, 0.2) * min_dim;
    // Index 0 is the k=1 skew term.
    let mut harmonics = vec![jitter(&mut rng, 0.0, 0.02)];
    let mut phases = vec![jitter(&mut rng, 0.0, std::f64::consts::TAU)];
    for _k in 2..=3 {
        harmonics.push(jitter(&mut rng, 0.0, 0.04));
        phases.push(jitter(&mut rng, 0.0, std::f64::consts::TAU));
    }
    let base = [
        jitter(&mut rng, 100.0, 150.0) as u8,
        jitter(&mut rng, 65.0, 100.0) as u8,
        jitter(&mut rng, 50.0, 85.0) as u8,
    ];
    let color = if rng.gen_bool(0.5) {
        ColorMode::Uniform { rgb: base }
    } else {
        let delta = jitter(&mut rng, -25.0, 25.0);
        let edge = [
            (base[0] as f64 + delta).clamp(0.0, 255.0) as u8,
            (base[1] as f64 + delta * 0.8).clamp(0.0, 255.0) as u8,
            (base[2] as f64 + delta * 0.7).clamp(0.0, 255.0) as u8,
        ];
        ColorMode::RadialGradient { center: base, edge }
    };
    LesionSpec {
        seed: rng.gen(),
        class: LesionClass::Benign,
        width,
        height,
        radius,
        harmonics,
        phases,
        center: (
            0.5 + jitter(&mut rng, -0.1, 0.1),
            0.5 + jitter(&mut rng, -0.1, 0.1),
        ),
        color,
        skin_tone: skin_tone(&mut rng),
        noise_sigma: jitter(&mut rng, 2.0, 5.0),
        illumination: jitter(&mut rng, 0.0, 0.12),
    }
}

/// Draw a melanoma-preset spec: rich harmonic content, clear skew, and
/// multi-region colouring. Disjoint from the benign preset on harmonic
/// amplitude, skew, and colour mode.
pub fn melanoma_spec(seed: u64, width: u32, height: u32) -> LesionSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_dim = width.min(height) as f64;
    let radius = jitter(&mut rng, 0.15, 0.22) * min_dim;
    let mut harmonics = vec![jitter(&mut rng, 0.08, 0.18)];
    let mut phases = vec![jitter(&mut rng, 0.0, std::f64::consts::TAU)];
    let mut budget = 0.42 - harmonics[0];
    for _k in 2..=MAX_HARMONIC {
        let a = if rng.gen_bool(0.55) && budget >= 0.06 {
            let a = jitter(&mut rng, 0.05, 0.16_f64.min(budget));
            budget -= a;
            a
        } else {
            0.0
        };
        harmonics.push(a);
        phases.push(jitter(&mut rng, 0.0, std::f64::consts::TAU));
    }
    // Guarantee at least one strong high-order harmonic.
    if harmonics[3..].iter().all(|&a| a == 0.0) {
        harmonics[5] = 0.07;
    }
    let palette = [
        [58.0, 34.0, 26.0],
        [36.0, 26.0, 26.0],
        [118.0, 46.0, 34.0],
        [72.0, 70.0, 92.0],
        [150.0, 100.0, 74.0],
    ];
    let n_sites = rng.gen_range(3..=5usize);
    let mut colors = Vec::with_capacity(n_sites);
    let mut sites = Vec::with_capacity(n_sites);
    for i in 0..n_sites {
        let c = palette[(rng.gen_range(0..palette.len()) + i) % palette.len()];
        colors.push([
            (c[0] + jitter(&mut rng, -12.0, 12.0)).clamp(0.0, 255.0) as u8,
            (c[1] + jitter(&mut rng, -12.0, 12.0)).clamp(0.0, 255.0) as u8,
            (c[2] + jitter(&mut rng, -12.0, 12.0)).clamp(0.0, 255.0) as u8,
        ]);
        let ang = jitter(&mut rng, 0.0, std::f64::consts::TAU);
        let rad = jitter(&mut rng, 0.0, 0.9);
        sites.push((rad * ang.cos(), rad * ang.sin()));
    }
    LesionSpec {
        seed: rng.gen(),
        class: LesionClass::Melanoma,
        width,
        height,
        radius,
        harmonics,
        phases,
        center: (
            0.5 + jitter(&mut rng, -0.1, 0.1),
            0.5 + jitter(&mut rng, -0.1, 0.1),
        ),
        color: ColorMode::MultiRegion { colors, sites },
        skin_tone: skin_tone(&mut rng),
        noise_sigma: jitter(&mut rng, 2.0, 5.0),
        illumination: jitter(&mut rng, 0.0, 0.12),
    }
}

/// One line of the corpus manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub mask: PathBuf,
    pub class: LesionClass,
    pub spec: LesionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub generator_version: u32,
    pub seed: u64,
    pub preset: String,
    pub n_benign: usize,
    pub n_melanoma: usize,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub header: ManifestHeader,
    pub entries: Vec<ManifestEntry>,
}

/// Image size per preset name. `standard` (and the alias `paper-shape`,
/// which mirrors a 99:55 class-ratio convention for the caller) renders
/// 256x256; `large` renders 768x768.
fn preset_dims(preset: &str) -> Result<(u32, u32)> {
    match preset {
        "standard" | "paper-shape" => Ok((256, 256)),
        "large" => Ok((768, 768)),
        other => Err(Error::Config(format!("unknown preset '{other}'"))),
    }
}

/// Generate a corpus on disk: PNG image/mask pairs plus `manifest.jsonl`
/// (header line, then one entry per line). Deterministic for a given seed,
/// independent of thread count.
pub fn gen_corpus(
    n_benign: usize,
    n_melanoma: usize,
    preset: &str,
    seed: u64,
    out_dir: &Path,
) -> Result<Corpus> {
    let (w, h) = preset_dims(preset)?;
    std::fs::create_dir_all(out_dir)?;
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<(String, LesionSpec)> = (0..n_benign + n_melanoma)
        .map(|i| {
            let s: u64 = seeder.gen();
            if i < n_benign {
                (format!("benign_{i:04}"), benign_spec(s, w, h))
            } else {
                let j = i - n_benign;
                (format!("melanoma_{j:04}"), melanoma_spec(s, w, h))
            }
        })
        .collect();

    let entries: Vec<ManifestEntry> = specs
        .par_iter()
        .map(|(stem, spec)| -> Result<ManifestEntry> {
            let rendered = gen_lesion(spec)?;
            let image = PathBuf::from(format!("{stem}.png"));
            let mask = PathBuf::from(format!("{stem}_mask.png"));
            rendered.image.save_png(&out_dir.join(&image))?;
            save_mask_png(&rendered.mask, &out_dir.join(&mask))?;
            Ok(ManifestEntry {
                image,
                mask,
                class: spec.class,
                spec: spec.clone(),
            })
        })
        .collect::<Result<_>>()?;

    let header = ManifestHeader {
        generator_version: GENERATOR_VERSION,
        seed,
        preset: preset.to_string(),
        n_benign,
        n_melanoma,
    };
    let mut f = std::fs::File::create(out_dir.join("manifest.jsonl"))?;
    writeln!(f, "{}", serde_json::to_string(&header)?)?;
    for e in &entries {
        writeln!(f, "{}", serde_json::to_string(e)?)?;
    }
    Ok(Corpus { header, entries })
}

/// Load a manifest written by [`gen_corpus`]. Paths stay relative to the
/// manifest directory.
pub fn load_manifest(path: &Path) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    let mut lines = std::io::BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::ModelFormat("empty manifest".into()))??;
    let header: ManifestHeader = serde_json::from_str(&header_line)?;
    if header.generator_version != GENERATOR_VERSION {
        return Err(Error::ModelFormat(format!(
            "manifest generator version {} unsupported",
            header.generator_version
        )));
    }
    let mut entries = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        entries.push(serde_json::from_str::<ManifestEntry>(&line)?);
    }
    if entries.len() != header.n_benign + header.n_melanoma {
        return Err(Error::ModelFormat(format!(
            "manifest declares {} entries, found {}",
            header.n_benign + header.n_melanoma,
            entries.len()
        )));
    }
    Ok(Corpus { header, entries })
}

pub fn save_mask_png(mask: &BinaryMask, path: &Path) -> Result<()> {
    let data: Vec<u8> = (0..mask.h)
        .flat_map(|y| (0..mask.w).map(move |x| (x, y)))
        .map(|(x, y)| if mask.get(x, y) { 255 } else { 0 })
        .collect();
    let buf: image::GrayImage = image::ImageBuffer::from_raw(mask.w, mask.h, data)
        .expect("sized above");
    buf.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

pub fn load_mask_png(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path)?.into_luma8();
    let (w, h) = (img.width(), img.height());
    let mut m = BinaryMask::new(w, h);
    for y in 0..h {
        for x in 0..w {
            m.set(x, y, img.get_pixel(x, y)[0] >= 128);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_matches_contour_exactly() {
        let spec = benign_spec(42, 256, 256);
        let out = gen_lesion(&spec).unwrap();
        let cx = spec.center.0 * 256.0;
        let cy = spec.center.1 * 256.0;
        for y in 0..256 {
            for x in 0..256 {
                let dx = x as f64 - cx;
                let dy = y as f64 - cy;
                let inside =
                    (dx * dx + dy * dy).sqrt() <= spec.contour_radius(dy.atan2(dx));
                assert_eq!(out.mask.get(x, y), inside, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = melanoma_spec(7, 128, 128);
        let a = gen_lesion(&spec).unwrap();
        let b = gen_lesion(&spec).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.mask, b.mask);
    }

    #[test]
    fn presets_are_disjoint_on_declared_axes() {
        for s in 0..40u64 {
            let b = benign_spec(s, 256, 256);
            let m = melanoma_spec(s + 1000, 256, 256);
            // Skew axis (k = 1 amplitude).
            assert!(b.harmonics[0] <= 0.02);
            assert!(m.harmonics[0] >= 0.08);
            // Harmonic-content axis: benign has nothing above k = 3.
            assert!(b.harmonics.len() <= 3);
            assert!(m.harmonics[3..].iter().any(|&a| a >= 0.05));
            // Colour-composition axis.
            assert!(!matches!(b.color, ColorMode::MultiRegion { .. }));
            assert!(matches!(m.color, ColorMode::MultiRegion { .. }));
        }
    }

    #[test]
    fn corpus_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = gen_corpus(3, 2, "paper-shape", 99, dir.path()).unwrap();
        assert_eq!(corpus.entries.len(), 5);
        let loaded = load_manifest(&dir.path().join("manifest.jsonl")).unwrap();
        assert_eq!(loaded.header, corpus.header);
        assert_eq!(loaded.entries, corpus.entries);
        let first = &loaded.entries[0];
        let img = RasterImage::load_png(&dir.path().join(&first.image)).unwrap();
        let mask = load_mask_png(&dir.path().join(&first.mask)).unwrap();
        let regen = gen_lesion(&first.spec).unwrap();
        assert_eq!(img, regen.image);
        assert_eq!(mask, regen.mask);
    }

    #[test]
    fn corpus_regeneration_is_byte_identical() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        gen_corpus(2, 2, "standard", 5, d1.path()).unwrap();
        gen_corpus(2, 2, "standard", 5, d2.path()).unwrap();
        for name in ["manifest.jsonl", "benign_0000.png", "melanoma_0001_mask.png"] {
            let a = std::fs::read(d1.path().join(name)).unwrap();
            let b = std::fs::read(d2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name}");
        }
    }

    #[test]
    fn rejects_wild_contours() {
        let mut spec = benign_spec(1, 256, 256);
        spec.harmonics = vec![0.6];
        spec.phases = vec![0.0];
        assert!(gen_lesion(&spec).is_err());
    }
}

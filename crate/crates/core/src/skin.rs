//! Skin detection: per-class Gaussian mixtures over RGB with diagonal
//! covariances, fitted by EM. A pixel is skin when the likelihood ratio
//! `p(rgb | skin) / p(rgb | non-skin)` clears a threshold; enclosed holes
//! (typically the lesion itself) are then filled so later stages see one
//! contiguous skin area.

use std::path::Path;
use std::sync::OnceLock;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgproc::{fill_holes, BinaryMask, RasterImage};

const MODEL_MAGIC: &str = "skin-gmm";
const MODEL_VERSION: u32 = 1;
const MIN_SAMPLES_PER_COMPONENT: usize = 100;
const MAX_EM_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussComponent {
    pub weight: f64,
    pub mean: [f64; 3],
    pub var: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gmm {
    pub components: Vec<GaussComponent>,
    /// True when the variance floor was active in the final M-step.
    pub variance_floored: bool,
}

impl Gmm {
    /// Log density at `x`.
    pub fn log_pdf(&self, x: [f64; 3]) -> f64 {
        let mut acc = f64::NEG_INFINITY;
        for c in &self.components {
            let mut lp = c.weight.ln();
            for d in 0..3 {
                let z = x[d] - c.mean[d];
                lp -= 0.5 * (z * z / c.var[d] + (std::f64::consts::TAU * c.var[d]).ln());
            }
            acc = log_add(acc, lp);
        }
        acc
    }

    fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::ModelFormat("mixture has no components".into()));
        }
        let wsum: f64 = self.components.iter().map(|c| c.weight).sum();
        if (wsum - 1.0).abs() > 1e-6 {
            return Err(Error::ModelFormat(format!(
                "component weights sum to {wsum}, expected 1"
            )));
        }
        for c in &self.components {
            if c.weight <= 0.0 || !c.weight.is_finite() {
                return Err(Error::ModelFormat("non-positive component weight".into()));
            }
            if c.var.iter().any(|&v| v <= 0.0 || !v.is_finite())
                || c.mean.iter().any(|m| !m.is_finite())
            {
                return Err(Error::ModelFormat("non-finite component parameters".into()));
            }
        }
        Ok(())
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Two-class skin colour model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkinModel {
    magic: String,
    version: u32,
    pub skin: Gmm,
    pub nonskin: Gmm,
}

impl SkinModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let model: SkinModel = serde_json::from_str(&text)?;
        if model.magic != MODEL_MAGIC {
            return Err(Error::ModelFormat(format!(
                "bad magic '{}', expected '{MODEL_MAGIC}'",
                model.magic
            )));
        }
        if model.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported skin model version {}",
                model.version
            )));
        }
        model.skin.validate()?;
        model.nonskin.validate()?;
        Ok(model)
    }

    /// Per-pixel log likelihood ratio `ln p(skin) - ln p(non-skin)`.
    pub fn log_ratio(&self, rgb: [u8; 3]) -> f64 {
        let x = [rgb[0] as f64, rgb[1] as f64, rgb[2] as f64];
        self.skin.log_pdf(x) - self.nonskin.log_pdf(x)
    }
}

/// Fit one mixture with EM. Initial means are `k` distinct sample pixels;
/// initial variances are the global per-channel variance. Deterministic for
/// a given seed.
pub fn fit_gmm(pixels: &[[f64; 3]], k: usize, seed: u64, variance_floor: f64) -> Result<Gmm> {
    if k == 0 {
        return Err(Error::Config("mixture size must be >= 1".into()));
    }
    let n = pixels.len();
    if n < MIN_SAMPLES_PER_COMPONENT * k {
        return Err(Error::InsufficientSamples {
            what: "gmm training pixels",
            needed: MIN_SAMPLES_PER_COMPONENT * k,
            got: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut global_var = [0.0f64; 3];
    let mut global_mean = [0.0f64; 3];
    for p in pixels {
        for d in 0..3 {
            global_mean[d] += p[d];
        }
    }
    for d in 0..3 {
        global_mean[d] /= n as f64;
    }
    for p in pixels {
        for d in 0..3 {
            global_var[d] += (p[d] - global_mean[d]).powi(2);
        }
    }
    for d in 0..3 {
        global_var[d] = (global_var[d] / n as f64).max(variance_floor);
    }

    let mut comps: Vec<GaussComponent> = sample(&mut rng, n, k)
        .into_iter()
        .map(|i| GaussComponent {
            weight: 1.0 / k as f64,
            mean: pixels[i],
            var: global_var,
        })
        .collect();

    let mut floored = global_var.iter().any(|&v| v <= variance_floor);
    let mut resp = vec![0.0f64; k];
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..MAX_EM_ITERS {
        let mut ll = 0.0;
        let mut w = vec![0.0f64; k];
        let mut mu = vec![[0.0f64; 3]; k];
        let mut m2 = vec![[0.0f64; 3]; k];
        for p in pixels {
            let mut norm = f64::NEG_INFINITY;
            for (j, c) in comps.iter().enumerate() {
                let mut lp = c.weight.ln();
                for d in 0..3 {
                    let z = p[d] - c.mean[d];
                    lp -= 0.5 * (z * z / c.var[d] + (std::f64::consts::TAU * c.var[d]).ln());
                }
                resp[j] = lp;
                norm = log_add(norm, lp);
            }
            ll += norm;
            for j in 0..k {
                let r = (resp[j] - norm).exp();
                w[j] += r;
                for d in 0..3 {
                    mu[j][d] += r * p[d];
                    m2[j][d] += r * p[d] * p[d];
                }
            }
        }
        floored = false;
        for j in 0..k {
            // Components that lose all support keep their parameters.
            if w[j] > 1e-9 {
                for d in 0..3 {
                    let mean = mu[j][d] / w[j];
                    let var = (m2[j][d] / w[j] - mean * mean).max(variance_floor);
                    if var <= variance_floor {
                        floored = true;
                    }
                    comps[j].mean[d] = mean;
                    comps[j].var[d] = var;
                }
            }
            comps[j].weight = (w[j] / n as f64).max(1e-12);
        }
        let wsum: f64 = comps.iter().map(|c| c.weight).sum();
        for c in &mut comps {
            c.weight /= wsum;
        }
        if (ll - prev_ll).abs() < 1e-6 * (1.0 + ll.abs()) {
            break;
        }
        prev_ll = ll;
    }
    Ok(Gmm {
        components: comps,
        variance_floored: floored,
    })
}

/// Train a two-class skin model from raw pixel collections.
pub fn train_skin_model(
    skin_pixels: &[[f64; 3]],
    nonskin_pixels: &[[f64; 3]],
    k: usize,
    seed: u64,
    variance_floor: f64,
) -> Result<SkinModel> {
    Ok(SkinModel {
        magic: MODEL_MAGIC.to_string(),
        version: MODEL_VERSION,
        skin: fit_gmm(skin_pixels, k, seed, variance_floor)?,
        nonskin: fit_gmm(nonskin_pixels, k, seed.wrapping_add(1), variance_floor)?,
    })
}

/// Raw likelihood-ratio mask: pixel is skin when the ratio is at least
/// `theta`.
pub fn skin_ratio_mask(img: &RasterImage, model: &SkinModel, theta: f64) -> Result<BinaryMask> {
    if theta <= 0.0 {
        return Err(Error::Config("skin threshold must be positive".into()));
    }
    let log_theta = theta.ln();
    Ok(BinaryMask::from_fn(img.width(), img.height(), |x, y| {
        model.log_ratio(img.get(x, y)) >= log_theta
    }))
}

/// Skin mask used by the pipeline: ratio test plus hole filling, so lesions
/// enclosed by skin count as part of the skin area.
pub fn detect_skin(img: &RasterImage, model: &SkinModel, theta: f64) -> Result<BinaryMask> {
    Ok(fill_holes(&skin_ratio_mask(img, model, theta)?))
}

/// Built-in model trained on the synthetic skin-tone distribution (with
/// shading and sensor noise) against lesion palettes plus a broad spread of
/// unrelated colours. Fitted once per process from a fixed seed.
pub fn default_model() -> &'static SkinModel {
    static MODEL: OnceLock<SkinModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5C17);
        let mut skin = Vec::with_capacity(4000);
        for _ in 0..4000 {
            let t: f64 = rng.gen_range(-1.0..1.0);
            let shade: f64 = rng.gen_range(0.85..1.15);
            let noise: f64 = rng.gen_range(2.0..6.0);
            let mut px = [0.0; 3];
            for (d, base) in [(0, 212.0 + 18.0 * t), (1, 168.0 + 15.0 * t), (2, 142.0 + 13.0 * t)]
            {
                let g: f64 = rng.gen_range(-2.5..2.5);
                px[d] = (base * shade + noise * g).clamp(0.0, 255.0);
            }
            skin.push(px);
        }
        let mut nonskin = Vec::with_capacity(4000);
        let palette: [[f64; 3]; 8] = [
            [58.0, 34.0, 26.0],
            [36.0, 26.0, 26.0],
            [118.0, 46.0, 34.0],
            [72.0, 70.0, 92.0],
            [150.0, 100.0, 74.0],
            [120.0, 80.0, 60.0],
            [90.0, 60.0, 50.0],
            [25.0, 25.0, 25.0],
        ];
        for i in 0..2000 {
            let c = palette[i % palette.len()];
            let px = [
                (c[0] + rng.gen_range(-15.0..15.0)).clamp(0.0, 255.0),
                (c[1] + rng.gen_range(-15.0..15.0)).clamp(0.0, 255.0),
                (c[2] + rng.gen_range(-15.0..15.0)).clamp(0.0, 255.0),
            ];
            nonskin.push(px);
        }
        for _ in 0..2000 {
            nonskin.push([
                rng.gen_range(0.0..256.0),
                rng.gen_range(0.0..256.0),
                rng.gen_range(0.0..256.0),
            ]);
        }
        train_skin_model(&skin, &nonskin, 8, 0x5C17, 1.0)
            .expect("built-in skin model must train")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_blob_data(seed: u64) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for _ in 0..1500 {
            a.push([
                210.0 + rng.gen_range(-12.0..12.0),
                165.0 + rng.gen_range(-12.0..12.0),
                140.0 + rng.gen_range(-12.0..12.0),
            ]);
            b.push([
                60.0 + rng.gen_range(-20.0..20.0),
                40.0 + rng.gen_range(-15.0..15.0),
                30.0 + rng.gen_range(-15.0..15.0),
            ]);
        }
        (a, b)
    }

    #[test]
    fn separates_well_separated_blobs() {
        let (skin, nonskin) = two_blob_data(3);
        let model = train_skin_model(&skin, &nonskin, 4, 9, 1.0).unwrap();
        let hits = skin.iter().filter(|&&p| {
            model.skin.log_pdf(p) - model.nonskin.log_pdf(p) >= 0.0
        });
        assert_eq!(hits.count(), skin.len());
        let misses = nonskin
            .iter()
            .filter(|&&p| model.skin.log_pdf(p) - model.nonskin.log_pdf(p) >= 0.0);
        assert_eq!(misses.count(), 0);
    }

    #[test]
    fn insufficient_samples_error() {
        let px = vec![[1.0, 2.0, 3.0]; 50];
        match fit_gmm(&px, 8, 0, 1.0) {
            Err(Error::InsufficientSamples { needed, got, .. }) => {
                assert_eq!(needed, 800);
                assert_eq!(got, 50);
            }
            other => panic!("expected InsufficientSamples, got {other:?}"),
        }
    }

    #[test]
    fn fitting_is_deterministic() {
        let (skin, nonskin) = two_blob_data(5);
        let m1 = train_skin_model(&skin, &nonskin, 4, 77, 1.0).unwrap();
        let m2 = train_skin_model(&skin, &nonskin, 4, 77, 1.0).unwrap();
        assert_eq!(
            serde_json::to_string(&m1).unwrap(),
            serde_json::to_string(&m2).unwrap()
        );
    }

    #[test]
    fn model_roundtrip_and_validation() {
        let (skin, nonskin) = two_blob_data(8);
        let model = train_skin_model(&skin, &nonskin, 2, 1, 1.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("skin.json");
        model.save(&path).unwrap();
        let loaded = SkinModel::load(&path).unwrap();
        assert_eq!(model, loaded);

        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replace("skin-gmm", "mystery");
        std::fs::write(&path, &text).unwrap();
        assert!(matches!(
            SkinModel::load(&path),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn default_model_covers_synthetic_skin() {
        let spec = crate::synth::benign_spec(21, 256, 256);
        let img = crate::synth::gen_lesion(&spec).unwrap().image;
        let mask = detect_skin(&img, default_model(), 1.0).unwrap();
        let coverage = mask.count_ones() as f64 / (256.0 * 256.0);
        assert!(coverage > 0.99, "coverage {coverage}");

        // Before hole filling the lesion area must be rejected as non-skin.
        let raw = skin_ratio_mask(&img, default_model(), 1.0).unwrap();
        let lesion = crate::synth::gen_lesion(&spec).unwrap().mask;
        let lesion_skin = raw.intersection_count(&lesion) as f64 / lesion.count_ones() as f64;
        assert!(lesion_skin < 0.1, "lesion misread as skin: {lesion_skin}");
    }

    #[test]
    fn higher_threshold_shrinks_raw_mask() {
        let spec = crate::synth::benign_spec(4, 128, 128);
        let img = crate::synth::gen_lesion(&spec).unwrap().image;
        let model = default_model();
        let loose = skin_ratio_mask(&img, model, 0.5).unwrap();
        let tight = skin_ratio_mask(&img, model, 4.0).unwrap();
        assert!(tight.count_ones() <= loose.count_ones());
        for y in 0..128 {
            for x in 0..128 {
                assert!(!tight.get(x, y) || loose.get(x, y));
            }
        }
    }
}

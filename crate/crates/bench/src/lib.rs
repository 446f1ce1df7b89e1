//! Shared fixtures for the pipeline benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use melascan_core::config::RunConfig;
use melascan_core::features::{LBP_RANGE, NUM_FEATURES};
use melascan_core::imgproc::{BinaryMask, RasterImage};
use melascan_core::pipeline::FeatureDataset;
use melascan_core::synth::{gen_lesion, melanoma_spec};

/// One rendered melanoma-style lesion with its exact mask.
pub fn demo_image(seed: u64, dim: u32) -> (RasterImage, BinaryMask) {
    let rendered = gen_lesion(&melanoma_spec(seed, dim, dim)).expect("render fixture");
    (rendered.image, rendered.mask)
}

/// A feature dataset with mild class structure, shaped like real extraction
/// output (including L1-normalized LBP bins).
pub fn demo_dataset(n_per_class: usize, seed: u64) -> FeatureDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ds = FeatureDataset {
        ids: Vec::new(),
        labels: Vec::new(),
        rows: Vec::new(),
        tdrs: Vec::new(),
    };
    for i in 0..2 * n_per_class {
        let melanoma = i % 2 == 0;
        let shift = if melanoma { 0.8 } else { 0.0 };
        let mut row: Vec<f64> = (0..NUM_FEATURES)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        for j in [1, 5, 55, 60, 70, 72, 75] {
            row[j] += shift;
        }
        let lean = if melanoma { 0.7 } else { 0.3 };
        let mut total = 0.0;
        for (b, v) in row[LBP_RANGE].iter_mut().enumerate() {
            *v = if b >= 18 { lean } else { 1.0 - lean } + rng.gen_range(0.0..0.1);
            total += *v;
        }
        for v in row[LBP_RANGE].iter_mut() {
            *v /= total;
        }
        ds.ids.push(format!("bench_{i:04}"));
        ds.labels.push(if melanoma { 1 } else { -1 });
        ds.rows.push(row);
        ds.tdrs.push(None);
    }
    ds
}

/// Default configuration used by every benchmark.
pub fn demo_config() -> RunConfig {
    RunConfig::default()
}

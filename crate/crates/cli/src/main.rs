//! `melascan`: generate synthetic corpora, train the skin detector, segment
//! lesions, extract and select features, train the classifier bundle, score
//! single images and run cross-validated evaluations.
//!
//! Exit codes: 0 on success, 1 on a pipeline error, 2 on bad usage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use melascan_core::config::RunConfig;
use melascan_core::features::catalog;
use melascan_core::imgproc::RasterImage;
use melascan_core::pipeline::{
    cross_validate, extract_dataset, skin_mask_for, train_bundle, FeatureDataset, TrainedBundle,
};
use melascan_core::segment::{
    overlay_boundary, segment_lesion_with, tdr, SegMethod,
};
use melascan_core::skin::train_skin_model;
use melascan_core::synth::{gen_corpus, load_manifest, load_mask_png, save_mask_png};

#[derive(Parser)]
#[command(name = "melascan", version, about = "Skin-lesion analysis pipeline")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration as JSON; omit for built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> anyhow::Result<RunConfig> {
        match &self.config {
            Some(p) => {
                RunConfig::load(p).with_context(|| format!("loading config {}", p.display()))
            }
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Otsu,
    Mst,
    Fused,
}

impl From<MethodArg> for SegMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Otsu => SegMethod::OtsuOnly,
            MethodArg::Mst => SegMethod::MstOnly,
            MethodArg::Fused => SegMethod::Fused,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic lesion corpus with exact ground-truth masks.
    Synth {
        /// Output directory for PNGs and the manifest.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        benign: usize,
        #[arg(long, default_value_t = 100)]
        melanoma: usize,
        /// Corpus preset: `standard` (256x256) or `large` (768x768).
        #[arg(long, default_value = "standard")]
        preset: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },

    /// Fit the two-class skin colour model from a corpus: pixels outside
    /// the ground-truth lesion masks count as skin, pixels inside as
    /// non-skin.
    TrainSkin {
        /// Corpus manifest written by `synth`.
        #[arg(long)]
        manifest: PathBuf,
        /// Where to write the model JSON.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        components: usize,
        /// Pixel budget per class, subsampled evenly across the corpus.
        #[arg(long, default_value_t = 50_000)]
        pixels_per_class: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },

    /// Segment one image and write the lesion mask and boundary overlay.
    Segment {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        mask_out: Option<PathBuf>,
        #[arg(long)]
        overlay_out: Option<PathBuf>,
        /// Ground-truth mask; prints the true-detection rate when given.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MethodArg::Fused)]
        method: MethodArg,
        #[command(flatten)]
        config: ConfigArg,
    },

    /// Extract feature rows for a whole corpus, or dump the feature catalog.
    Features {
        /// Corpus manifest written by `synth`.
        #[arg(long, required_unless_present = "catalog")]
        manifest: Option<PathBuf>,
        /// Where to write the dataset JSON.
        #[arg(long, required_unless_present = "catalog")]
        out: Option<PathBuf>,
        /// Print the 116-entry feature catalog as JSON and exit.
        #[arg(long)]
        catalog: bool,
        #[command(flatten)]
        config: ConfigArg,
    },

    /// Run per-category feature selection on an extracted dataset.
    Select {
        /// Dataset JSON written by `features`.
        #[arg(long)]
        features: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },

    /// Train the classifier bundle on an extracted dataset.
    Train {
        /// Dataset JSON written by `features`.
        #[arg(long)]
        features: PathBuf,
        /// Where to write the bundle JSON.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },

    /// Score one image with a trained bundle.
    Predict {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        image: PathBuf,
        /// Write the segmentation boundary overlay here.
        #[arg(long)]
        overlay_out: Option<PathBuf>,
    },

    /// Stratified cross-validation over an extracted dataset.
    Evaluate {
        /// Dataset JSON written by `features`.
        #[arg(long)]
        features: PathBuf,
        /// Where to write the full report JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArg,
    },

    /// Print the default run configuration as JSON.
    Config,
}

fn main() -> ExitCode {
    // Die quietly when stdout closes early (e.g. piping into `head`),
    // matching standard line-tool behaviour instead of panicking.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: setting thread count: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Synth {
            out,
            benign,
            melanoma,
            preset,
            seed,
        } => {
            let corpus = gen_corpus(benign, melanoma, &preset, seed, &out)?;
            println!(
                "wrote {} images to {} (manifest.jsonl, seed {seed})",
                corpus.entries.len(),
                out.display()
            );
            Ok(())
        }

        Command::TrainSkin {
            manifest,
            out,
            components,
            pixels_per_class,
            seed,
        } => {
            let (skin, nonskin) = corpus_pixels(&manifest, pixels_per_class)?;
            println!(
                "sampled {} skin and {} lesion pixels",
                skin.len(),
                nonskin.len()
            );
            let model = train_skin_model(&skin, &nonskin, components, seed, 1.0)?;
            model.save(&out)?;
            println!("wrote {}", out.display());
            Ok(())
        }

        Command::Segment {
            image,
            mask_out,
            overlay_out,
            gt,
            method,
            config,
        } => {
            let config = config.load()?;
            let img = RasterImage::load_png(&image)
                .with_context(|| format!("loading {}", image.display()))?;
            let skin = skin_mask_for(&img, &config.skin)?;
            let seg = segment_lesion_with(&img, &skin, &config.segmentation, method.into())?;
            println!(
                "lesion: {} px, crop {}x{}+{}+{}",
                seg.region.area, seg.crop.w, seg.crop.h, seg.crop.x, seg.crop.y
            );
            if let Some(gt_path) = gt {
                let gt_mask = load_mask_png(&gt_path)?;
                println!("tdr: {:.2}%", tdr(&gt_mask, &seg.mask)?);
            }
            if let Some(p) = mask_out {
                save_mask_png(&seg.mask, &p)?;
                println!("wrote {}", p.display());
            }
            if let Some(p) = overlay_out {
                overlay_boundary(&img, &seg.mask, [255, 0, 0]).save_png(&p)?;
                println!("wrote {}", p.display());
            }
            Ok(())
        }

        Command::Features {
            manifest,
            out,
            catalog: dump_catalog,
            config,
        } => {
            if dump_catalog {
                println!("{}", serde_json::to_string_pretty(catalog())?);
                return Ok(());
            }
            let (manifest, out) = (manifest.unwrap(), out.unwrap());
            let config = config.load()?;
            let corpus = load_manifest(&manifest)?;
            let root = manifest_root(&manifest);
            let ds = extract_dataset(&corpus, root, &config)?;
            ds.save(&out)?;
            let mean_tdr: Vec<f64> = ds.tdrs.iter().flatten().copied().collect();
            println!(
                "extracted {} rows ({} features each) to {}",
                ds.len(),
                ds.rows.first().map_or(0, Vec::len),
                out.display()
            );
            if !mean_tdr.is_empty() {
                println!(
                    "mean segmentation tdr: {:.2}%",
                    mean_tdr.iter().sum::<f64>() / mean_tdr.len() as f64
                );
            }
            Ok(())
        }

        Command::Select { features, config } => {
            let config = config.load()?;
            let ds = FeatureDataset::load(&features)?;
            let bundle = train_bundle(&ds, &config)?;
            let named = bundle.selected_names();
            let arms = ["color", "border", "asymmetry", "texture", "knn"];
            let summary: serde_json::Value = arms
                .iter()
                .zip(&named)
                .map(|(arm, names)| (arm.to_string(), serde_json::json!(names)))
                .collect::<serde_json::Map<_, _>>()
                .into();
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }

        Command::Train {
            features,
            out,
            config,
        } => {
            let config = config.load()?;
            let ds = FeatureDataset::load(&features)?;
            let bundle = train_bundle(&ds, &config)?;
            bundle.save(&out)?;
            println!(
                "trained on {} samples; selected {:?}; wrote {}",
                ds.len(),
                bundle
                    .selected_names()
                    .iter()
                    .map(Vec::len)
                    .collect::<Vec<_>>(),
                out.display()
            );
            Ok(())
        }

        Command::Predict {
            bundle,
            image,
            overlay_out,
        } => {
            let bundle = TrainedBundle::load(&bundle)?;
            let img = RasterImage::load_png(&image)
                .with_context(|| format!("loading {}", image.display()))?;
            let (verdict, seg) = bundle.predict_image(&img)?;
            if let Some(p) = overlay_out {
                overlay_boundary(&img, &seg.mask, [255, 0, 0]).save_png(&p)?;
            }
            println!("{}", serde_json::to_string_pretty(&verdict)?);
            Ok(())
        }

        Command::Evaluate {
            features,
            out,
            config,
        } => {
            let config = config.load()?;
            let ds = FeatureDataset::load(&features)?;
            let report = cross_validate(&ds, &config)?;
            println!(
                "{} samples, {} folds; balanced accuracy {}, auc {:.4}",
                report.n_samples,
                report.per_fold.len(),
                report
                    .pooled
                    .balanced_accuracy
                    .map_or("n/a".into(), |v| format!("{v:.4}")),
                report.roc.auc
            );
            for (floor, sens) in &report.sens_at_spec {
                println!("sensitivity at specificity >= {floor:.2}: {sens:.4}");
            }
            if let Some(t) = report.mean_tdr {
                println!("mean segmentation tdr: {t:.2}%");
            }
            for e in &report.fold_errors {
                eprintln!("warning: {e}");
            }
            if let Some(p) = out {
                report.save(&p)?;
                println!("wrote {}", p.display());
            }
            Ok(())
        }

        Command::Config => {
            println!("{}", serde_json::to_string_pretty(&RunConfig::default())?);
            Ok(())
        }
    }
}

fn manifest_root(manifest: &Path) -> &Path {
    match manifest.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Evenly subsampled (skin, lesion) pixel sets from a corpus, using the
/// ground-truth masks as the class oracle.
fn corpus_pixels(
    manifest: &Path,
    per_class: usize,
) -> anyhow::Result<(Vec<[f64; 3]>, Vec<[f64; 3]>)> {
    let corpus = load_manifest(manifest)?;
    let root = manifest_root(manifest);
    let mut skin = Vec::new();
    let mut lesion = Vec::new();
    for entry in &corpus.entries {
        let img = RasterImage::load_png(&root.join(&entry.image))?;
        let mask = load_mask_png(&root.join(&entry.mask))?;
        for y in 0..img.height() {
            for x in 0..img.width() {
                let [r, g, b] = img.get(x, y);
                let px = [r as f64, g as f64, b as f64];
                if mask.get(x, y) {
                    lesion.push(px);
                } else {
                    skin.push(px);
                }
            }
        }
    }
    Ok((subsample(skin, per_class), subsample(lesion, per_class)))
}

fn subsample(pixels: Vec<[f64; 3]>, cap: usize) -> Vec<[f64; 3]> {
    if pixels.len() <= cap {
        return pixels;
    }
    let stride = pixels.len() as f64 / cap as f64;
    (0..cap)
        .map(|i| pixels[(i as f64 * stride) as usize])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsample_caps_and_preserves_order() {
        let pixels: Vec<[f64; 3]> = (0..100).map(|i| [i as f64, 0.0, 0.0]).collect();
        let sub = subsample(pixels.clone(), 10);
        assert_eq!(sub.len(), 10);
        assert_eq!(sub[0], [0.0, 0.0, 0.0]);
        let mut last = -1.0;
        for p in &sub {
            assert!(p[0] > last);
            last = p[0];
        }
        assert_eq!(subsample(pixels, 200).len(), 100);
    }

    #[test]
    fn manifest_root_handles_bare_names() {
        assert_eq!(manifest_root(Path::new("manifest.jsonl")), Path::new("."));
        assert_eq!(
            manifest_root(Path::new("corpus/manifest.jsonl")),
            Path::new("corpus")
        );
    }
}

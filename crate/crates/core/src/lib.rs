//! Lesion analysis pipeline for smartphone skin images.
//!
//! The crate is organised as a sequence of pipeline stages, each usable on
//! its own:
//!
//! 1. [`skin`] — Gaussian-mixture skin detection, restricting later stages
//!    to skin pixels.
//! 2. [`segment`] — hierarchical lesion segmentation fusing a global
//!    threshold with a graph-based region grower, coarse-to-fine.
//! 3. [`features`] — a fixed 116-entry catalog of colour, border, asymmetry
//!    and texture features computed over the segmented lesion.
//! 4. [`featsel`] — per-category mutual-information and margin-based
//!    feature selection.
//! 5. [`classify`] — an array of class-weighted RBF SVMs plus a cosine kNN
//!    over texture histograms, combined by one of several fusion rules.
//! 6. [`eval`] — confusion metrics, ROC/AUC and stratified cross-validation.
//!
//! [`synth`] generates a reproducible synthetic lesion corpus with exact
//! ground-truth masks, used by the test-suite and available from the CLI.
//! All randomised stages take explicit seeds and are deterministic for a
//! given seed, thread count notwithstanding.

pub mod classify;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod featsel;
pub mod imgproc;
pub mod pipeline;
pub mod segment;
pub mod skin;
pub mod synth;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use imgproc::{BinaryMask, ChannelPlane, RasterImage, Rect, Region};

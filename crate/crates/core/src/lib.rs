//! Impulsive noise removal for color images.
//!
//! The centerpiece is the fast HSL-based switching filter ([`filters::fhsf_filter`]):
//! a pixel is left untouched when enough of its 3x3 neighbors are similar to it
//! in hue, saturation and lightness, and replaced by the vector median of its
//! window otherwise. Reference vector filters (VMF, BVDF, DDF), the RGB fast peer
//! group filter, a correlated impulsive noise model, the MAE/MSE/NCD/PCD quality
//! metrics and a grid-search tuner are provided alongside it.

pub mod color;
pub mod config;
pub mod error;
pub mod filters;
pub mod image;
pub mod metrics;
pub mod noise;
pub mod ppm;
pub mod report;
pub mod tuner;

pub use color::{Hsl, SimilarityThresholds};
pub use config::Config;
pub use error::{Error, Result};
pub use filters::{FhsfParams, FilterKind, FilterParams, FilterStats, Norm};
pub use image::{Rgb, RgbImage, Window};
pub use metrics::{MetricReport, Scielab};
pub use noise::{CorruptionMask, NoiseSpec};
pub use tuner::ParamGrid;

/// Runs `f` on a dedicated rayon pool with `workers` threads.
///
/// Every parallel routine in this crate produces identical output regardless
/// of the pool size; this only affects wall time.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to build worker pool")
        .install(f)
}

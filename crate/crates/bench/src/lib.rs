//! Shared fixtures for the criterion benchmarks.

use std::path::PathBuf;

use fhsf_core::noise::{inject, NoiseSpec};
use fhsf_core::ppm::load_ppm;
use fhsf_core::RgbImage;

/// Loads one of the core crate's test images by file name.
pub fn fixture(name: &str) -> RgbImage {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name);
    load_ppm(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// `(original, noisy)` pair at corruption probability `p`, fixed seed.
pub fn noisy_pair(name: &str, p: f64) -> (RgbImage, RgbImage) {
    let img = fixture(name);
    let (noisy, _) = inject(&img, &NoiseSpec::with_probability(p, 1)).expect("valid noise spec");
    (img, noisy)
}

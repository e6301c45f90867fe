//! Correlated impulsive noise.
//!
//! Each pixel is hit independently with probability `p`. A hit corrupts
//! either a single channel (R, G or B) or all three at once, chosen by
//! `channel_mix`; every corrupted channel is replaced by a value drawn
//! uniformly from `impulse_values`.
//!
//! Randomness comes from a ChaCha stream selected by the pixel index, so the
//! result does not depend on the order (or the thread) in which pixels are
//! visited.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::RgbImage;

/// Channel subsets a hit can corrupt, in `channel_mix` order.
const SUBSETS: [&[usize]; 4] = [&[0], &[1], &[2], &[0, 1, 2]];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Per-pixel corruption probability.
    pub p: f64,
    /// Probabilities of corrupting R only, G only, B only, all three.
    pub channel_mix: [f64; 4],
    pub impulse_values: Vec<u8>,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            p: 0.05,
            channel_mix: [0.25; 4],
            impulse_values: vec![0, 255],
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn with_probability(p: f64, seed: u64) -> Self {
        NoiseSpec {
            p,
            seed,
            ..NoiseSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidParams(format!(
                "noise probability {} outside [0, 1]",
                self.p
            )));
        }
        if self.channel_mix.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParams(
                "channel mix weights must be non-negative".into(),
            ));
        }
        let total: f64 = self.channel_mix.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "channel mix must sum to 1, sums to {total}"
            )));
        }
        if self.impulse_values.is_empty() {
            return Err(Error::InvalidParams("impulse value set is empty".into()));
        }
        Ok(())
    }

    /// Parses the `key = value` text form (TOML).
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: NoiseSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("noise spec serializes")
    }
}

/// Per-pixel flag set wherever the injector fired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorruptionMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl CorruptionMask {
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn is_set(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Mask rendered as a black/white image (white = corrupted).
    pub fn to_image(&self) -> RgbImage {
        let data = self
            .bits
            .iter()
            .flat_map(|&b| if b { [255u8; 3] } else { [0u8; 3] })
            .collect();
        RgbImage::from_raw(self.width, self.height, data).expect("mask dimensions are valid")
    }
}

/// Corrupts `img` according to `spec`.
pub fn inject(img: &RgbImage, spec: &NoiseSpec) -> Result<(RgbImage, CorruptionMask)> {
    spec.validate()?;
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut data = img.as_bytes().to_vec();
    let mut bits = vec![false; img.pixel_count()];
    let width = img.width();

    data.par_chunks_mut(width * 3)
        .zip(bits.par_chunks_mut(width))
        .enumerate()
        .for_each(|(y, (row, flags))| {
            for (x, (px, flag)) in row.chunks_exact_mut(3).zip(flags.iter_mut()).enumerate() {
                let mut rng = base.clone();
                rng.set_stream((y * width + x) as u64);
                rng.set_word_pos(0);
                *flag = corrupt_pixel(&mut rng, px, spec);
            }
        });

    let noisy = RgbImage::from_raw(img.width(), img.height(), data)?;
    let mask = CorruptionMask {
        width: img.width(),
        height: img.height(),
        bits,
    };
    Ok((noisy, mask))
}

fn corrupt_pixel(rng: &mut ChaCha8Rng, px: &mut [u8], spec: &NoiseSpec) -> bool {
    if rng.random::<f64>() >= spec.p {
        return false;
    }
    let pick: f64 = rng.random();
    let mut acc = 0.0;
    let mut subset = SUBSETS[3];
    for (w, s) in spec.channel_mix.iter().zip(SUBSETS) {
        acc += w;
        if pick < acc {
            subset = s;
            break;
        }
    }
    for &c in subset {
        px[c] = spec.impulse_values[rng.random_range(0..spec.impulse_values.len())];
    }
    true
}

//! Spatial CIELAB: color difference after filtering opponent-color planes
//! with human contrast-sensitivity kernels.
//!
//! Each image goes sRGB → XYZ → opponent planes; every plane is convolved
//! with a weighted sum of separable Gaussians (edge-replicated borders), the
//! result is mapped back to XYZ and then to CIELAB, where per-pixel ΔE*ab is
//! taken.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{
    delta_e, linear_rgb_to_xyz, srgb_to_linear, xyz_to_lab, Lab, OpponentTransform, Xyz, D65,
};
use crate::error::{Error, Result};
use crate::image::RgbImage;

/// Kernel taps whose weight falls below this fraction of the peak are dropped.
const TAP_CUTOFF: f64 = 1e-17;

/// One Gaussian of a plane's kernel mixture: weight and spread (standard
/// deviation) in degrees of visual angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub spread: f64,
}

impl GaussianComponent {
    pub const fn new(weight: f64, spread: f64) -> Self {
        GaussianComponent { weight, spread }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScielabConfig {
    pub samples_per_degree: f64,
    /// Luminance plane.
    pub plane1: Vec<GaussianComponent>,
    /// Red-green plane.
    pub plane2: Vec<GaussianComponent>,
    /// Blue-yellow plane.
    pub plane3: Vec<GaussianComponent>,
}

impl Default for ScielabConfig {
    fn default() -> Self {
        use GaussianComponent as G;
        ScielabConfig {
            samples_per_degree: 23.0,
            plane1: vec![
                G::new(0.921, 0.0283),
                G::new(0.105, 0.133),
                G::new(-0.108, 4.336),
            ],
            plane2: vec![G::new(0.531, 0.0392), G::new(0.330, 0.494)],
            plane3: vec![G::new(0.488, 0.0536), G::new(0.371, 0.386)],
        }
    }
}

impl ScielabConfig {
    pub fn planes(&self) -> [&[GaussianComponent]; 3] {
        [&self.plane1, &self.plane2, &self.plane3]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.samples_per_degree.is_finite() && self.samples_per_degree > 0.0) {
            return Err(Error::Config(format!(
                "samples_per_degree must be positive, got {}",
                self.samples_per_degree
            )));
        }
        for (k, plane) in self.planes().iter().enumerate() {
            if plane.is_empty() {
                return Err(Error::Config(format!(
                    "plane {} has no kernel components",
                    k + 1
                )));
            }
            if plane
                .iter()
                .any(|c| !(c.spread.is_finite() && c.spread > 0.0) || !c.weight.is_finite())
            {
                return Err(Error::Config(format!(
                    "plane {} needs positive spreads and finite weights",
                    k + 1
                )));
            }
            let total: f64 = plane.iter().map(|c| c.weight).sum();
            if total.abs() < 1e-9 {
                return Err(Error::Config(format!(
                    "plane {} kernel weights sum to zero and cannot be normalized",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// A 1D kernel folded onto a line of `n` samples with clamped borders: for
/// every output position, the contiguous source range it reads and the
/// per-source weights.
#[derive(Clone, Debug)]
struct FoldedKernel {
    starts: Vec<usize>,
    lens: Vec<usize>,
    offsets: Vec<usize>,
    weights: Vec<f64>,
}

impl FoldedKernel {
    fn new(taps: &[f64], n: usize) -> Self {
        let radius = (taps.len() / 2) as isize;
        let mut starts = Vec::with_capacity(n);
        let mut lens = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        let mut weights = Vec::new();
        let last = n as isize - 1;
        for i in 0..n as isize {
            let lo = (i - radius).clamp(0, last);
            let hi = (i + radius).clamp(0, last);
            let len = (hi - lo + 1) as usize;
            let base = weights.len();
            weights.resize(base + len, 0.0);
            for (k, &w) in taps.iter().enumerate() {
                let src = (i + k as isize - radius).clamp(0, last);
                weights[base + (src - lo) as usize] += w;
            }
            starts.push(lo as usize);
            lens.push(len);
            offsets.push(base);
        }
        FoldedKernel {
            starts,
            lens,
            offsets,
            weights,
        }
    }

    #[inline]
    fn row(&self, i: usize) -> (usize, &[f64]) {
        let o = self.offsets[i];
        (self.starts[i], &self.weights[o..o + self.lens[i]])
    }
}

/// Normalized, trimmed Gaussian taps with the given standard deviation (in
/// samples) over `[-radius, radius]`.
fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|k| {
            let x = k as f64 - radius as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let peak = taps[radius];
    let keep = (0..radius)
        .find(|&k| taps[k] >= TAP_CUTOFF * peak)
        .unwrap_or(radius);
    taps.drain(..keep);
    taps.truncate(taps.len() - keep);
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

#[derive(Clone, Debug)]
struct PlaneKernel {
    /// Normalized mixture weight and 1D taps of each separable component.
    components: Vec<(f64, Vec<f64>)>,
}

impl PlaneKernel {
    fn new(components: &[GaussianComponent], samples_per_degree: f64) -> Self {
        let max_sigma = components
            .iter()
            .map(|c| c.spread * samples_per_degree)
            .fold(0.0, f64::max);
        let radius = (3.0 * max_sigma).ceil() as usize;
        let total: f64 = components.iter().map(|c| c.weight).sum();
        PlaneKernel {
            components: components
                .iter()
                .map(|c| {
                    (
                        c.weight / total,
                        gaussian_taps(c.spread * samples_per_degree, radius),
                    )
                })
                .collect(),
        }
    }

    /// Sum of the discretized 2D kernel's taps.
    fn mass(&self) -> f64 {
        self.components
            .iter()
            .map(|(w, taps)| w * taps.iter().sum::<f64>().powi(2))
            .sum()
    }

    fn apply(&self, plane: &[f64], width: usize, height: usize) -> Vec<f64> {
        let mut acc = vec![0.0; plane.len()];
        for (weight, taps) in &self.components {
            let horizontal = FoldedKernel::new(taps, width);
            let vertical = FoldedKernel::new(taps, height);
            let mut tmp = vec![0.0; plane.len()];
            tmp.par_chunks_mut(width)
                .zip(plane.par_chunks(width))
                .for_each(|(dst, src)| {
                    for (x, d) in dst.iter_mut().enumerate() {
                        let (start, w) = horizontal.row(x);
                        *d = w.iter().zip(&src[start..]).map(|(a, b)| a * b).sum();
                    }
                });
            acc.par_chunks_mut(width).enumerate().for_each(|(y, dst)| {
                let (start, w) = vertical.row(y);
                for (k, wk) in w.iter().enumerate() {
                    let src = &tmp[(start + k) * width..(start + k + 1) * width];
                    let scale = weight * wk;
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += scale * s;
                    }
                }
            });
        }
        acc
    }
}

/// Prepared S-CIELAB evaluator.
#[derive(Clone, Debug)]
pub struct Scielab {
    kernels: [PlaneKernel; 3],
    opponent: OpponentTransform,
    white: Xyz,
}

impl Default for Scielab {
    fn default() -> Self {
        Scielab::new(&ScielabConfig::default(), OpponentTransform::default(), D65)
            .expect("default configuration is valid")
    }
}

impl Scielab {
    pub fn new(cfg: &ScielabConfig, opponent: OpponentTransform, white: Xyz) -> Result<Self> {
        cfg.validate()?;
        let spd = cfg.samples_per_degree;
        let [p1, p2, p3] = cfg.planes();
        Ok(Scielab {
            kernels: [
                PlaneKernel::new(p1, spd),
                PlaneKernel::new(p2, spd),
                PlaneKernel::new(p3, spd),
            ],
            opponent,
            white,
        })
    }

    /// Total tap mass of each plane's 2D kernel (one, up to rounding).
    pub fn kernel_masses(&self) -> [f64; 3] {
        [
            self.kernels[0].mass(),
            self.kernels[1].mass(),
            self.kernels[2].mass(),
        ]
    }

    /// Spatially filtered CIELAB coordinates of every pixel.
    pub fn lab_field(&self, img: &RgbImage) -> Vec<Lab> {
        let lut = linear_lut();
        let (width, height) = img.dimensions();
        let n = img.pixel_count();
        let mut planes = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (i, px) in img.pixels().enumerate() {
            let xyz = linear_rgb_to_xyz(px.map(|v| lut[v as usize]));
            let o = self.opponent.to_opponent(xyz);
            for k in 0..3 {
                planes[k][i] = o[k];
            }
        }
        let filtered: Vec<Vec<f64>> = planes
            .iter()
            .zip(&self.kernels)
            .map(|(plane, kernel)| kernel.apply(plane, width, height))
            .collect();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let xyz = self
                    .opponent
                    .to_xyz([filtered[0][i], filtered[1][i], filtered[2][i]]);
                xyz_to_lab(xyz, self.white)
            })
            .collect()
    }

    /// Precomputes the filtered field of a reference image for repeated
    /// comparisons against it.
    pub fn reference(&self, img: &RgbImage) -> ScielabReference<'_> {
        ScielabReference {
            scielab: self,
            width: img.width(),
            height: img.height(),
            lab: self.lab_field(img),
        }
    }
}

/// A reference image with its filtered CIELAB field already computed.
pub struct ScielabReference<'a> {
    scielab: &'a Scielab,
    width: usize,
    height: usize,
    lab: Vec<Lab>,
}

impl ScielabReference<'_> {
    pub fn delta_e_map(&self, other: &RgbImage) -> Result<Vec<f64>> {
        if other.dimensions() != (self.width, self.height) {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width(),
                other.height(),
            ));
        }
        let lab = self.scielab.lab_field(other);
        Ok(self
            .lab
            .iter()
            .zip(&lab)
            .map(|(&a, &b)| delta_e(a, b))
            .collect())
    }

    pub fn pcd(&self, other: &RgbImage) -> Result<f64> {
        let map = self.delta_e_map(other)?;
        Ok(map.iter().sum::<f64>() / map.len() as f64)
    }
}

/// Per-pixel S-CIELAB ΔE*ab between `a` and `b`.
pub fn scielab_map(a: &RgbImage, b: &RgbImage, scielab: &Scielab) -> Result<Vec<f64>> {
    a.check_same_size(b)?;
    scielab.reference(a).delta_e_map(b)
}

/// Perceptual color distance: mean S-CIELAB ΔE*ab over all pixels.
pub fn pcd(a: &RgbImage, b: &RgbImage, scielab: &Scielab) -> Result<f64> {
    a.check_same_size(b)?;
    scielab.reference(a).pcd(b)
}

fn linear_lut() -> &'static [f64; 256] {
    static LUT: std::sync::OnceLock<[f64; 256]> = std::sync::OnceLock::new();
    LUT.get_or_init(|| std::array::from_fn(|v| srgb_to_linear(v as u8)))
}

//! Filter suite over a shared 3x3 sliding-window engine.
//!
//! Non-switching filters (VMF, BVDF, DDF) replace every pixel by their window
//! selection. Switching filters (FPGF, FHSF) only replace pixels that fail the
//! peer-group test. All filters read from the input image only and write to a
//! fresh output, so rows can be processed in parallel without changing the
//! result.

pub mod switching;
pub mod vector;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{hsl_plane, SimilarityThresholds};
use crate::error::{Error, Result};
use crate::image::{neighbor_indices, Rgb, RgbImage, WINDOW_LEN};

pub use switching::{peer_count_hsl, scan_peers, PeerScan};
pub use vector::{bvdf_window, ddf_window, vmf_window, Norm, DDF_GAMMA, PAIRS_PER_WINDOW};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterStats {
    /// Pixels whose output came from the window selection rather than the
    /// identity (every pixel for non-switching filters).
    pub pixels_switched: usize,
    /// Pairwise distance or similarity evaluations performed.
    pub distance_evals: u64,
    pub elapsed: Duration,
}

impl FilterStats {
    pub fn elapsed_secs(&self) -> f64 {
        self.elapsed.as_secs_f64()
    }
}

/// Peer-group size and HSL thresholds for the HSL switching filter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FhsfParams {
    pub m: usize,
    pub thresholds: SimilarityThresholds,
}

impl Default for FhsfParams {
    fn default() -> Self {
        FhsfParams {
            m: 3,
            thresholds: SimilarityThresholds::default(),
        }
    }
}

impl FhsfParams {
    pub fn new(m: usize, hue: f64, saturation: f64, lightness: f64) -> Self {
        FhsfParams {
            m,
            thresholds: SimilarityThresholds::new(hue, saturation, lightness),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_m(self.m)?;
        self.thresholds.validate()
    }
}

/// Fast peer group filter: RGB Minkowski distance against a tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FpgfParams {
    pub m: usize,
    pub tol: f64,
    pub norm: Norm,
}

impl FpgfParams {
    pub fn l1() -> Self {
        FpgfParams {
            m: 3,
            tol: 75.0,
            norm: Norm::L1,
        }
    }

    pub fn l2() -> Self {
        FpgfParams {
            m: 3,
            tol: 45.0,
            norm: Norm::L2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_m(self.m)?;
        validate_tol(self.tol)
    }
}

/// HSL switching filter variant using the cylindrical HSL distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FhsfHslParams {
    pub m: usize,
    pub tol: f64,
}

impl Default for FhsfHslParams {
    fn default() -> Self {
        FhsfHslParams { m: 3, tol: 30.0 }
    }
}

impl FhsfHslParams {
    pub fn validate(&self) -> Result<()> {
        validate_m(self.m)?;
        validate_tol(self.tol)
    }
}

fn validate_m(m: usize) -> Result<()> {
    if (1..WINDOW_LEN).contains(&m) {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "peer group size m = {m} outside [1, {}]",
            WINDOW_LEN - 1
        )))
    }
}

fn validate_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "distance threshold {tol} must be finite and non-negative"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Vmf,
    Bvdf,
    Ddf,
    Fpgf1,
    Fpgf2,
    FhsfS,
    FhsfHsl,
}

impl FilterKind {
    pub const ALL: [FilterKind; 7] = [
        FilterKind::Vmf,
        FilterKind::Bvdf,
        FilterKind::Ddf,
        FilterKind::Fpgf1,
        FilterKind::Fpgf2,
        FilterKind::FhsfS,
        FilterKind::FhsfHsl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Vmf => "VMF",
            FilterKind::Bvdf => "BVDF",
            FilterKind::Ddf => "DDF",
            FilterKind::Fpgf1 => "FPGF1",
            FilterKind::Fpgf2 => "FPGF2",
            FilterKind::FhsfS => "FHSF_S",
            FilterKind::FhsfHsl => "FHSF_HSL",
        }
    }

    pub fn default_params(self) -> FilterParams {
        match self {
            FilterKind::Vmf => FilterParams::Vmf(Norm::L2),
            FilterKind::Bvdf | FilterKind::Ddf => FilterParams::None,
            FilterKind::Fpgf1 => FilterParams::Fpgf(FpgfParams::l1()),
            FilterKind::Fpgf2 => FilterParams::Fpgf(FpgfParams::l2()),
            FilterKind::FhsfS => FilterParams::Fhsf(FhsfParams::default()),
            FilterKind::FhsfHsl => FilterParams::FhsfHsl(FhsfHslParams::default()),
        }
    }

    pub fn is_switching(self) -> bool {
        !matches!(self, FilterKind::Vmf | FilterKind::Bvdf | FilterKind::Ddf)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | '-'))
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "vmf" => FilterKind::Vmf,
            "bvdf" => FilterKind::Bvdf,
            "ddf" => FilterKind::Ddf,
            "fpgf1" => FilterKind::Fpgf1,
            "fpgf" | "fpgf2" => FilterKind::Fpgf2,
            "fhsf" | "fhsfs" => FilterKind::FhsfS,
            "fhsfhsl" => FilterKind::FhsfHsl,
            _ => return Err(Error::UnknownFilter(s.to_string())),
        })
    }
}

/// Parameters handed to [`filter_image`]; the variant must fit the kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FilterParams {
    None,
    Vmf(Norm),
    Fpgf(FpgfParams),
    Fhsf(FhsfParams),
    FhsfHsl(FhsfHslParams),
}

/// Runs `kind` over `img`. `FilterParams::None` selects the kind's defaults.
pub fn filter_image(
    img: &RgbImage,
    kind: FilterKind,
    params: &FilterParams,
) -> Result<(RgbImage, FilterStats)> {
    let params = match params {
        FilterParams::None => kind.default_params(),
        p => *p,
    };
    let mismatch = || {
        Err(Error::InvalidParams(format!(
            "{params:?} do not apply to filter {kind}"
        )))
    };
    match (kind, params) {
        (FilterKind::Vmf, FilterParams::Vmf(norm)) => Ok(vmf_filter(img, norm)),
        (FilterKind::Bvdf, FilterParams::None) => Ok(bvdf_filter(img)),
        (FilterKind::Ddf, FilterParams::None) => Ok(ddf_filter(img)),
        (FilterKind::Fpgf1, FilterParams::Fpgf(p)) if p.norm == Norm::L1 => fpgf_filter(img, &p),
        (FilterKind::Fpgf2, FilterParams::Fpgf(p)) if p.norm == Norm::L2 => fpgf_filter(img, &p),
        (FilterKind::FhsfS, FilterParams::Fhsf(p)) => fhsf_filter(img, &p),
        (FilterKind::FhsfHsl, FilterParams::FhsfHsl(p)) => fhsf_hsl_filter(img, p.m, p.tol),
        _ => mismatch(),
    }
}

/// HSL switching filter with the component-wise similarity predicate.
pub fn fhsf_filter(img: &RgbImage, params: &FhsfParams) -> Result<(RgbImage, FilterStats)> {
    params.validate()?;
    let start = Instant::now();
    let plane = hsl_plane(img);
    let peer = switching::HslSimilarity {
        plane: &plane,
        thresholds: params.thresholds,
    };
    let (out, mut stats) = switching::switching_pass(img, params.m, Norm::L2, &peer);
    stats.elapsed = start.elapsed();
    Ok((out, stats))
}

/// HSL switching filter using the cylindrical HSL distance against `tol`.
pub fn fhsf_hsl_filter(img: &RgbImage, m: usize, tol: f64) -> Result<(RgbImage, FilterStats)> {
    FhsfHslParams { m, tol }.validate()?;
    let start = Instant::now();
    let plane = hsl_plane(img);
    let peer = switching::HslDistance { plane: &plane, tol };
    let (out, mut stats) = switching::switching_pass(img, m, Norm::L2, &peer);
    stats.elapsed = start.elapsed();
    Ok((out, stats))
}

/// Fast peer group filter in RGB; the fallback median uses the same norm.
pub fn fpgf_filter(img: &RgbImage, params: &FpgfParams) -> Result<(RgbImage, FilterStats)> {
    params.validate()?;
    let start = Instant::now();
    let peer = switching::RgbDistance {
        img,
        norm: params.norm,
        tol: params.tol,
    };
    let (out, mut stats) = switching::switching_pass(img, params.m, params.norm, &peer);
    stats.elapsed = start.elapsed();
    Ok((out, stats))
}

/// Pixels the HSL switching filter would replace.
pub fn fhsf_noisy_mask(img: &RgbImage, params: &FhsfParams) -> Result<Vec<bool>> {
    params.validate()?;
    let plane = hsl_plane(img);
    let peer = switching::HslSimilarity {
        plane: &plane,
        thresholds: params.thresholds,
    };
    Ok(switching::noisy_mask(
        img.width(),
        img.height(),
        params.m,
        &peer,
    ))
}

pub fn fhsf_hsl_noisy_mask(img: &RgbImage, m: usize, tol: f64) -> Result<Vec<bool>> {
    FhsfHslParams { m, tol }.validate()?;
    let plane = hsl_plane(img);
    let peer = switching::HslDistance { plane: &plane, tol };
    Ok(switching::noisy_mask(img.width(), img.height(), m, &peer))
}

pub fn fpgf_noisy_mask(img: &RgbImage, params: &FpgfParams) -> Result<Vec<bool>> {
    params.validate()?;
    let peer = switching::RgbDistance {
        img,
        norm: params.norm,
        tol: params.tol,
    };
    Ok(switching::noisy_mask(
        img.width(),
        img.height(),
        params.m,
        &peer,
    ))
}

/// Applies `select` (returning a window index) at every pixel.
fn uniform_pass(
    img: &RgbImage,
    select: impl Fn(&[Rgb; WINDOW_LEN]) -> usize + Sync,
) -> (RgbImage, FilterStats) {
    let start = Instant::now();
    let (width, height) = img.dimensions();
    let mut out = vec![0u8; img.as_bytes().len()];
    out.par_chunks_mut(width * 3)
        .enumerate()
        .for_each(|(y, row)| {
            for x in 0..width {
                let px = neighbor_indices(width, height, x, y).map(|i| img.pixel_at_index(i));
                row[x * 3..x * 3 + 3].copy_from_slice(&px[select(&px)]);
            }
        });
    let n = img.pixel_count();
    let stats = FilterStats {
        pixels_switched: n,
        distance_evals: n as u64 * PAIRS_PER_WINDOW,
        elapsed: start.elapsed(),
    };
    (
        RgbImage::from_raw(width, height, out).expect("same dimensions"),
        stats,
    )
}

pub fn vmf_filter(img: &RgbImage, norm: Norm) -> (RgbImage, FilterStats) {
    uniform_pass(img, |px| vector::vmf_index(px, norm))
}

pub fn bvdf_filter(img: &RgbImage) -> (RgbImage, FilterStats) {
    uniform_pass(img, vector::bvdf_index)
}

pub fn ddf_filter(img: &RgbImage) -> (RgbImage, FilterStats) {
    uniform_pass(img, vector::ddf_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulse_image(bg: Rgb, impulse: Rgb, x: usize, y: usize) -> RgbImage {
        let mut img = RgbImage::filled(9, 7, bg).unwrap();
        img.set_pixel(x, y, impulse);
        img
    }

    /// Every pixel distinct; smooth enough that nothing is trivially noisy.
    fn distinct_image(w: usize, h: usize) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let i = y * w + x;
            [
                (i % 256) as u8,
                (i / 256 * 17 % 256) as u8,
                (60 + (x * 3 + y) % 150) as u8,
            ]
        })
        .unwrap()
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("fhsf".parse::<FilterKind>().unwrap(), FilterKind::FhsfS);
        assert_eq!(
            "FHSF_HSL".parse::<FilterKind>().unwrap(),
            FilterKind::FhsfHsl
        );
        assert_eq!("fpgf-1".parse::<FilterKind>().unwrap(), FilterKind::Fpgf1);
        for k in FilterKind::ALL {
            assert_eq!(k.name().parse::<FilterKind>().unwrap(), k);
        }
        assert!(matches!(
            "median".parse::<FilterKind>(),
            Err(Error::UnknownFilter(_))
        ));
    }

    #[test]
    fn wrong_param_shape_rejected() {
        let img = RgbImage::filled(4, 4, [1, 2, 3]).unwrap();
        let fhsf = FilterParams::Fhsf(FhsfParams::default());
        assert!(filter_image(&img, FilterKind::Vmf, &fhsf).is_err());
        assert!(filter_image(
            &img,
            FilterKind::Fpgf1,
            &FilterParams::Fpgf(FpgfParams::l2())
        )
        .is_err());
        assert!(filter_image(&img, FilterKind::Bvdf, &FilterParams::Vmf(Norm::L1)).is_err());
        assert!(filter_image(
            &img,
            FilterKind::FhsfS,
            &FilterParams::Fhsf(FhsfParams::new(0, 1.0, 1.0, 1.0))
        )
        .is_err());
        assert!(filter_image(
            &img,
            FilterKind::FhsfS,
            &FilterParams::Fhsf(FhsfParams::new(9, 1.0, 1.0, 1.0))
        )
        .is_err());
        assert!(filter_image(
            &img,
            FilterKind::FhsfS,
            &FilterParams::Fhsf(FhsfParams::new(3, -1.0, 1.0, 1.0))
        )
        .is_err());
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = RgbImage::filled(12, 10, [90, 140, 30]).unwrap();
        for kind in FilterKind::ALL {
            let (out, stats) = filter_image(&img, kind, &FilterParams::None).unwrap();
            assert_eq!(out, img, "{kind}");
            if kind.is_switching() {
                assert_eq!(stats.pixels_switched, 0, "{kind}");
            }
        }
    }

    #[test]
    fn single_impulse_repaired() {
        let bg = [100, 120, 80];
        for (x, y) in [(4, 3), (1, 1), (8, 3), (0, 3), (5, 0)] {
            let img = impulse_image(bg, [250, 5, 240], x, y);
            let expected = RgbImage::filled(9, 7, bg).unwrap();
            let runs = [
                fhsf_filter(&img, &FhsfParams::default()).unwrap(),
                fpgf_filter(
                    &img,
                    &FpgfParams {
                        m: 3,
                        tol: 30.0,
                        norm: Norm::L2,
                    },
                )
                .unwrap(),
                fpgf_filter(
                    &img,
                    &FpgfParams {
                        m: 3,
                        tol: 30.0,
                        norm: Norm::L1,
                    },
                )
                .unwrap(),
                fhsf_hsl_filter(&img, 3, 30.0).unwrap(),
            ];
            for (out, stats) in runs {
                assert_eq!(out, expected);
                assert_eq!(stats.pixels_switched, 1);
            }
        }
    }

    #[test]
    fn corner_impulse_counts_its_replicas_as_peers() {
        // clamping copies a corner pixel into three neighbor slots
        let img = impulse_image([100, 120, 80], [250, 5, 240], 0, 0);
        let (out, stats) = fhsf_filter(&img, &FhsfParams::default()).unwrap();
        assert_eq!(out, img);
        assert_eq!(stats.pixels_switched, 0);
        let (out, stats) = fhsf_filter(&img, &FhsfParams::new(4, 10.0, 10.0, 48.0)).unwrap();
        assert_eq!(out, RgbImage::filled(9, 7, [100, 120, 80]).unwrap());
        assert_eq!(stats.pixels_switched, 1);
    }

    #[test]
    fn zero_thresholds_degenerate_to_vmf() {
        let img = distinct_image(23, 17);
        let (vmf, _) = vmf_filter(&img, Norm::L2);
        for m in 4..=8 {
            let (out, stats) = fhsf_filter(&img, &FhsfParams::new(m, 0.0, 0.0, 0.0)).unwrap();
            assert_eq!(out, vmf);
            assert_eq!(stats.pixels_switched, img.pixel_count());
            let (out, _) = fhsf_hsl_filter(&img, m, 0.0).unwrap();
            assert_eq!(out, vmf);
            let (out, _) = fpgf_filter(
                &img,
                &FpgfParams {
                    m,
                    tol: 0.0,
                    norm: Norm::L2,
                },
            )
            .unwrap();
            assert_eq!(out, vmf);
        }
    }

    #[test]
    fn huge_tolerance_is_identity() {
        let img = distinct_image(15, 11);
        let (out, stats) = fpgf_filter(
            &img,
            &FpgfParams {
                m: 8,
                tol: 765.0,
                norm: Norm::L1,
            },
        )
        .unwrap();
        assert_eq!(out, img);
        assert_eq!(stats.pixels_switched, 0);
        // the HSL cylinder has diameter sqrt(200^2 + 255^2) < 325
        let (out, _) = fhsf_hsl_filter(&img, 8, 325.0).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn noisy_mask_matches_filter() {
        let img = distinct_image(20, 20);
        let params = FhsfParams::new(3, 40.0, 30.0, 60.0);
        let mask = fhsf_noisy_mask(&img, &params).unwrap();
        let (out, stats) = fhsf_filter(&img, &params).unwrap();
        assert_eq!(mask.iter().filter(|&&b| b).count(), stats.pixels_switched);
        for (i, (a, b)) in img.pixels().zip(out.pixels()).enumerate() {
            if a != b {
                assert!(mask[i]);
            }
        }
    }
}

//! Peer-group switching filters.
//!
//! A pixel is kept when at least `m` of its eight neighbors are peers of it;
//! otherwise it is replaced by the vector median of its window. The peer scan
//! walks the neighbors in raster order and stops as soon as the outcome is
//! decided, either because `m` peers were found or because the unchecked
//! neighbors can no longer make up the difference.

use rayon::prelude::*;

use super::vector::{self, Norm, PAIRS_PER_WINDOW};
use super::FilterStats;
use crate::color::{hsl_distance, similar, Hsl, SimilarityThresholds};
use crate::image::{neighbor_indices, Rgb, RgbImage, CENTER, WINDOW_LEN};

/// Window slots scanned for peers, center excluded.
pub const NEIGHBOR_SLOTS: [usize; WINDOW_LEN - 1] = [0, 1, 2, 3, 5, 6, 7, 8];

/// Outcome of one peer scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeerScan {
    pub is_clean: bool,
    /// Peer tests actually evaluated.
    pub checks: u32,
}

/// Scans neighbor slots in order until the classification is decided.
#[inline]
pub fn scan_peers(m: usize, mut is_peer: impl FnMut(usize) -> bool) -> PeerScan {
    let total = NEIGHBOR_SLOTS.len();
    let mut found = 0;
    for (k, &slot) in NEIGHBOR_SLOTS.iter().enumerate() {
        if is_peer(slot) {
            found += 1;
            if found >= m {
                return PeerScan {
                    is_clean: true,
                    checks: k as u32 + 1,
                };
            }
        }
        let remaining = total - k - 1;
        if found + remaining < m {
            return PeerScan {
                is_clean: false,
                checks: k as u32 + 1,
            };
        }
    }
    PeerScan {
        is_clean: found >= m,
        checks: total as u32,
    }
}

/// Peer scan over a window already converted to HSL.
pub fn peer_count_hsl(window: &[Hsl; WINDOW_LEN], t: &SimilarityThresholds, m: usize) -> PeerScan {
    let center = window[CENTER];
    scan_peers(m, |slot| similar(center, window[slot], t))
}

/// Peer predicate between a window center and one of its neighbors, both
/// given as linear pixel indices.
pub(crate) trait PeerTest: Sync {
    fn scan(&self, m: usize, idx: &[usize; WINDOW_LEN]) -> PeerScan;
}

pub(crate) struct HslSimilarity<'a> {
    pub plane: &'a [Hsl],
    pub thresholds: SimilarityThresholds,
}

impl PeerTest for HslSimilarity<'_> {
    #[inline]
    fn scan(&self, m: usize, idx: &[usize; WINDOW_LEN]) -> PeerScan {
        let c = self.plane[idx[CENTER]];
        scan_peers(m, |slot| {
            similar(c, self.plane[idx[slot]], &self.thresholds)
        })
    }
}

pub(crate) struct HslDistance<'a> {
    pub plane: &'a [Hsl],
    pub tol: f64,
}

impl PeerTest for HslDistance<'_> {
    #[inline]
    fn scan(&self, m: usize, idx: &[usize; WINDOW_LEN]) -> PeerScan {
        let c = self.plane[idx[CENTER]];
        scan_peers(m, |slot| hsl_distance(c, self.plane[idx[slot]]) <= self.tol)
    }
}

pub(crate) struct RgbDistance<'a> {
    pub img: &'a RgbImage,
    pub norm: Norm,
    pub tol: f64,
}

impl PeerTest for RgbDistance<'_> {
    #[inline]
    fn scan(&self, m: usize, idx: &[usize; WINDOW_LEN]) -> PeerScan {
        let c = self.img.pixel_at_index(idx[CENTER]);
        scan_peers(m, |slot| {
            self.norm.distance(c, self.img.pixel_at_index(idx[slot])) <= self.tol
        })
    }
}

/// Calls `f(x, window indices)` for every pixel of row `y`. Interior pixels
/// skip the border clamping.
#[inline]
fn for_each_window(
    width: usize,
    height: usize,
    y: usize,
    mut f: impl FnMut(usize, &[usize; WINDOW_LEN]),
) {
    let interior_row = y > 0 && y + 1 < height;
    for x in 0..width {
        if interior_row && x > 0 && x + 1 < width {
            let c = y * width + x;
            let (up, down) = (c - width, c + width);
            f(
                x,
                &[
                    up - 1,
                    up,
                    up + 1,
                    c - 1,
                    c,
                    c + 1,
                    down - 1,
                    down,
                    down + 1,
                ],
            );
        } else {
            f(x, &neighbor_indices(width, height, x, y));
        }
    }
}

/// Generic switching pass; noisy pixels fall back to the vector median under
/// `fallback`.
pub(crate) fn switching_pass(
    img: &RgbImage,
    m: usize,
    fallback: Norm,
    peer: &impl PeerTest,
) -> (RgbImage, FilterStats) {
    let (width, height) = img.dimensions();
    let mut out = img.as_bytes().to_vec();
    let (switched, evals) = out
        .par_chunks_mut(width * 3)
        .enumerate()
        .map(|(y, row)| {
            let mut switched = 0usize;
            let mut evals = 0u64;
            for_each_window(width, height, y, |x, idx| {
                let scan = peer.scan(m, idx);
                evals += u64::from(scan.checks);
                if !scan.is_clean {
                    let px: [Rgb; WINDOW_LEN] = idx.map(|i| img.pixel_at_index(i));
                    let pick = px[vector::vmf_index(&px, fallback)];
                    evals += PAIRS_PER_WINDOW;
                    switched += 1;
                    row[x * 3..x * 3 + 3].copy_from_slice(&pick);
                }
            });
            (switched, evals)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let image = RgbImage::from_raw(width, height, out).expect("same dimensions as input");
    let stats = FilterStats {
        pixels_switched: switched,
        distance_evals: evals,
        ..FilterStats::default()
    };
    (image, stats)
}

/// Classification only: `true` where the pixel would be replaced.
pub(crate) fn noisy_mask(width: usize, height: usize, m: usize, peer: &impl PeerTest) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    mask.par_chunks_mut(width).enumerate().for_each(|(y, row)| {
        for_each_window(width, height, y, |x, idx| {
            row[x] = !peer.scan(m, idx).is_clean
        });
    });
    mask
}

//! Order-statistics vector filters over a single 3x3 window.
//!
//! Each filter picks the window pixel minimizing an aggregate distance to
//! all window pixels. Ties go to the lowest window index.

use crate::image::{Rgb, Window, WINDOW_LEN};

/// Exponent weighting the angular term of the directional-distance filter.
pub const DDF_GAMMA: f64 = 0.5;

/// Number of distinct pixel pairs in a window, the cost of one aggregate
/// ordering.
pub const PAIRS_PER_WINDOW: u64 = (WINDOW_LEN * (WINDOW_LEN - 1) / 2) as u64;

/// Minkowski norm used for RGB distances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    #[inline]
    pub fn distance(self, a: Rgb, b: Rgb) -> f64 {
        match self {
            Norm::L1 => f64::from(l1(a, b)),
            Norm::L2 => f64::from(l2_squared(a, b)).sqrt(),
        }
    }
}

#[inline]
pub(crate) fn l1(a: Rgb, b: Rgb) -> u32 {
    (0..3).map(|c| u32::from(a[c].abs_diff(b[c]))).sum()
}

#[inline]
pub(crate) fn l2_squared(a: Rgb, b: Rgb) -> u32 {
    (0..3)
        .map(|c| {
            let d = u32::from(a[c].abs_diff(b[c]));
            d * d
        })
        .sum()
}

/// Angle between two RGB vectors in radians; zero when either is black.
#[inline]
pub fn angle(a: Rgb, b: Rgb) -> f64 {
    let dot: u32 = (0..3).map(|c| u32::from(a[c]) * u32::from(b[c])).sum();
    let na = f64::from(l2_squared(a, [0; 3])).sqrt();
    let nb = f64::from(l2_squared(b, [0; 3])).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (f64::from(dot) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Row sums of the symmetric pairwise matrix `dist(x_i, x_j)`, accumulated
/// in window order.
#[inline]
fn aggregate(px: &[Rgb; WINDOW_LEN], dist: impl Fn(Rgb, Rgb) -> f64) -> [f64; WINDOW_LEN] {
    let mut d = [[0.0f64; WINDOW_LEN]; WINDOW_LEN];
    for i in 0..WINDOW_LEN {
        for j in i + 1..WINDOW_LEN {
            let v = dist(px[i], px[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d.map(|row| row.iter().sum())
}

#[inline]
fn argmin(scores: &[f64; WINDOW_LEN]) -> usize {
    let mut best = 0;
    for i in 1..WINDOW_LEN {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    best
}

/// Window index selected by the vector median filter.
#[inline]
pub fn vmf_index(px: &[Rgb; WINDOW_LEN], norm: Norm) -> usize {
    argmin(&aggregate(px, |a, b| norm.distance(a, b)))
}

pub fn vmf_window(w: &Window, norm: Norm) -> Rgb {
    w.0[vmf_index(&w.0, norm)]
}

/// Window index selected by the basic vector directional filter.
pub fn bvdf_index(px: &[Rgb; WINDOW_LEN]) -> usize {
    argmin(&aggregate(px, angle))
}

pub fn bvdf_window(w: &Window) -> Rgb {
    w.0[bvdf_index(&w.0)]
}

/// Window index selected by the directional-distance filter:
/// `(sum of angles)^γ · (sum of L2 distances)^(1-γ)`.
pub fn ddf_index(px: &[Rgb; WINDOW_LEN]) -> usize {
    let angles = aggregate(px, angle);
    let dists = aggregate(px, |a, b| Norm::L2.distance(a, b));
    let mut scores = [0.0; WINDOW_LEN];
    for i in 0..WINDOW_LEN {
        scores[i] = angles[i].powf(DDF_GAMMA) * dists[i].powf(1.0 - DDF_GAMMA);
    }
    argmin(&scores)
}

pub fn ddf_window(w: &Window) -> Rgb {
    w.0[ddf_index(&w.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(px: [Rgb; 9]) -> Window {
        Window(px)
    }

    #[test]
    fn constant_window() {
        let w = window([[40, 50, 60]; 9]);
        assert_eq!(vmf_window(&w, Norm::L2), [40, 50, 60]);
        assert_eq!(vmf_window(&w, Norm::L1), [40, 50, 60]);
        assert_eq!(bvdf_window(&w), [40, 50, 60]);
        assert_eq!(ddf_window(&w), [40, 50, 60]);
    }

    #[test]
    fn vmf_rejects_outlier() {
        let mut px = [[10, 10, 10]; 9];
        px[4] = [255, 255, 255];
        assert_eq!(vmf_window(&window(px), Norm::L2), [10, 10, 10]);
        assert_eq!(vmf_index(&px, Norm::L2), 0);
    }

    #[test]
    fn bvdf_prefers_the_dominant_ray() {
        let mut px: [Rgb; 9] = std::array::from_fn(|k| {
            let s = k as u8 + 1;
            [s, 2 * s, 3 * s]
        });
        px[4] = [200, 10, 10];
        let out = bvdf_window(&window(px));
        assert_eq!(u16::from(out[1]), 2 * u16::from(out[0]));
        assert_eq!(u16::from(out[2]), 3 * u16::from(out[0]));
    }

    #[test]
    fn angle_edge_cases() {
        assert_eq!(angle([0, 0, 0], [10, 20, 30]), 0.0);
        assert_eq!(angle([3, 6, 9], [1, 2, 3]), 0.0);
        let right = angle([255, 0, 0], [0, 255, 0]);
        assert!((right - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn ddf_follows_agreeing_filters() {
        let px = [
            [120, 80, 60],
            [118, 82, 61],
            [121, 79, 59],
            [119, 81, 62],
            [250, 10, 240],
            [117, 80, 60],
            [122, 83, 58],
            [5, 200, 30],
            [120, 81, 60],
        ];
        let v = vmf_index(&px, Norm::L2);
        let b = bvdf_index(&px);
        if v == b {
            assert_eq!(ddf_index(&px), v);
        }
        assert_ne!(vmf_index(&px, Norm::L2), 4);
        assert_ne!(ddf_index(&px), 4);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // four copies each of a and b, plus a ninth pixel equidistant from
        // both: a and b aggregate identically and index 0 wins
        let a = [100, 100, 100];
        let b = [110, 100, 100];
        let px = [b, a, b, a, [105, 200, 100], a, b, a, b];
        assert_eq!(vmf_index(&px, Norm::L1), 0);
        assert_eq!(vmf_index(&px, Norm::L2), 0);
        let swapped = [a, b, a, b, [105, 200, 100], b, a, b, a];
        assert_eq!(vmf_index(&swapped, Norm::L1), 0);
    }
}

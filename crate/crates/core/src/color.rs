//! Color space conversions and color distances.
//!
//! HSL follows the double-hexcone model with hue in degrees `[0, 360)`,
//! saturation in `[0, 100]` and lightness on the 8-bit scale `[0, 255]`.
//! CIELAB conversions assume sRGB primaries with a D65 white point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Rgb, RgbImage};

/// Cylindrical HSL coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Hsl {
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

impl Hsl {
    pub const fn new(h: f64, s: f64, l: f64) -> Self {
        Hsl { h, s, l }
    }
}

/// Converts an RGB triple to double-hexcone HSL. Achromatic colors get `h = 0`.
pub fn rgb_to_hsl(p: Rgb) -> Hsl {
    let [r, g, b] = p.map(f64::from);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let chroma = max - min;
    let l = (max + min) / 2.0;
    if chroma == 0.0 {
        return Hsl { h: 0.0, s: 0.0, l };
    }
    let s = 100.0 * chroma / (255.0 - (2.0 * l - 255.0).abs());
    let sector = if max == r {
        (g - b) / chroma
    } else if max == g {
        (b - r) / chroma + 2.0
    } else {
        (r - g) / chroma + 4.0
    };
    let mut h = 60.0 * sector;
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    Hsl { h, s, l }
}

/// HSL coordinates of every pixel, row-major.
pub fn hsl_plane(img: &RgbImage) -> Vec<Hsl> {
    img.pixels().map(rgb_to_hsl).collect()
}

/// Inverse of [`rgb_to_hsl`], rounded to the nearest 8-bit value.
pub fn hsl_to_rgb(c: Hsl) -> Rgb {
    let chroma = (255.0 - (2.0 * c.l - 255.0).abs()) * c.s / 100.0;
    let hp = c.h.rem_euclid(360.0) / 60.0;
    let x = chroma * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let m = c.l - chroma / 2.0;
    [r, g, b].map(|v| (v + m).round().clamp(0.0, 255.0) as u8)
}

/// Euclidean distance between two HSL points viewed as cylinder coordinates
/// `(s cos h, s sin h, l)`.
#[inline]
pub fn hsl_distance(a: Hsl, b: Hsl) -> f64 {
    let cross = 2.0 * a.s * b.s * (a.h - b.h).to_radians().cos();
    let dl = a.l - b.l;
    // rounding can push the chromatic part a hair below zero for equal pixels
    let chromatic = (a.s * a.s + b.s * b.s - cross).max(0.0);
    (chromatic + dl * dl).sqrt()
}

/// Angular distance between two hues, in `[0, 180]`.
#[inline]
pub fn hue_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(360.0 - d)
}

/// Per-component thresholds for the HSL similarity predicate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityThresholds {
    pub hue: f64,
    pub saturation: f64,
    pub lightness: f64,
}

impl SimilarityThresholds {
    pub const fn new(hue: f64, saturation: f64, lightness: f64) -> Self {
        SimilarityThresholds {
            hue,
            saturation,
            lightness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.hue) && ok(self.saturation) && ok(self.lightness) {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "similarity thresholds must be finite and non-negative, got {self:?}"
            )))
        }
    }
}

impl Default for SimilarityThresholds {
    fn default() -> Self {
        SimilarityThresholds::new(10.0, 10.0, 48.0)
    }
}

/// Component-wise similarity test, evaluated hue first, then saturation,
/// then lightness, stopping at the first failing component.
#[inline]
pub fn similar(a: Hsl, b: Hsl, t: &SimilarityThresholds) -> bool {
    hue_difference(a.h, b.h) <= t.hue
        && (a.s - b.s).abs() <= t.saturation
        && (a.l - b.l).abs() <= t.lightness
}

/// Same as [`similar`] but also reports how many component comparisons ran.
pub fn similar_counted(a: Hsl, b: Hsl, t: &SimilarityThresholds) -> (bool, u32) {
    if hue_difference(a.h, b.h) > t.hue {
        return (false, 1);
    }
    if (a.s - b.s).abs() > t.saturation {
        return (false, 2);
    }
    ((a.l - b.l).abs() <= t.lightness, 3)
}

/// CIE XYZ tristimulus values scaled so that the reference white has `Y = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Xyz {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Xyz {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Xyz { x, y, z }
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub const fn from_array([x, y, z]: [f64; 3]) -> Self {
        Xyz { x, y, z }
    }
}

/// D65 reference white.
pub const D65: Xyz = Xyz::new(0.95047, 1.0, 1.08883);

/// CIELAB coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Lab { l, a, b }
    }

    pub fn norm(&self) -> f64 {
        (self.l * self.l + self.a * self.a + self.b * self.b).sqrt()
    }
}

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

/// Decodes an 8-bit sRGB channel to linear light in `[0, 1]`.
#[inline]
pub fn srgb_to_linear(v: u8) -> f64 {
    let c = f64::from(v) / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Linear-light sRGB (channels in `[0, 1]`) to XYZ.
#[inline]
pub fn linear_rgb_to_xyz(lin: [f64; 3]) -> Xyz {
    Xyz::from_array(mat_vec(&SRGB_TO_XYZ, lin))
}

pub fn srgb_to_xyz(p: Rgb) -> Xyz {
    linear_rgb_to_xyz(p.map(srgb_to_linear))
}

pub fn xyz_to_lab(c: Xyz, white: Xyz) -> Lab {
    const EPS: f64 = 216.0 / 24389.0;
    const KAPPA: f64 = 24389.0 / 27.0;
    let f = |t: f64| {
        if t > EPS {
            t.cbrt()
        } else {
            (KAPPA * t + 16.0) / 116.0
        }
    };
    let fx = f(c.x / white.x);
    let fy = f(c.y / white.y);
    let fz = f(c.z / white.z);
    Lab {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

pub fn srgb_to_lab(p: Rgb) -> Lab {
    xyz_to_lab(srgb_to_xyz(p), D65)
}

/// CIE76 color difference, the Euclidean distance in CIELAB.
#[inline]
pub fn delta_e(a: Lab, b: Lab) -> f64 {
    let (dl, da, db) = (a.l - b.l, a.a - b.a, a.b - b.b);
    (dl * dl + da * da + db * db).sqrt()
}

/// Linear XYZ to opponent-color (luminance, red-green, blue-yellow) map and
/// its inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct OpponentTransform {
    forward: [[f64; 3]; 3],
    inverse: [[f64; 3]; 3],
}

impl OpponentTransform {
    pub const DEFAULT_MATRIX: [[f64; 3]; 3] = [
        [0.279, 0.72, -0.107],
        [-0.449, 0.29, -0.077],
        [0.086, -0.59, 0.501],
    ];

    /// Builds the transform; a singular (or numerically near-singular)
    /// matrix is rejected.
    pub fn new(forward: [[f64; 3]; 3]) -> Result<Self> {
        let inverse = invert3(&forward).ok_or(Error::SingularMatrix)?;
        Ok(OpponentTransform { forward, inverse })
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.forward
    }

    #[inline]
    pub fn to_opponent(&self, c: Xyz) -> [f64; 3] {
        mat_vec(&self.forward, c.to_array())
    }

    #[inline]
    pub fn to_xyz(&self, o: [f64; 3]) -> Xyz {
        Xyz::from_array(mat_vec(&self.inverse, o))
    }
}

impl Default for OpponentTransform {
    fn default() -> Self {
        OpponentTransform::new(Self::DEFAULT_MATRIX).expect("default opponent matrix is invertible")
    }
}

#[inline]
fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return None;
    }
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let c00 = cof(1, 2, 1, 2);
    let c01 = -cof(1, 2, 0, 2);
    let c02 = cof(1, 2, 0, 1);
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 || det.abs() <= 1e-12 * scale.powi(3) {
        return None;
    }
    let inv_det = 1.0 / det;
    Some([
        [
            c00 * inv_det,
            -cof(0, 2, 1, 2) * inv_det,
            cof(0, 1, 1, 2) * inv_det,
        ],
        [
            c01 * inv_det,
            cof(0, 2, 0, 2) * inv_det,
            -cof(0, 1, 0, 2) * inv_det,
        ],
        [
            c02 * inv_det,
            -cof(0, 2, 0, 1) * inv_det,
            cof(0, 1, 0, 1) * inv_det,
        ],
    ])
}

//! Image quality criteria: MAE, MSE, NCD and PCD (S-CIELAB).

mod scielab;

pub use scielab::{pcd, scielab_map, GaussianComponent, Scielab, ScielabConfig, ScielabReference};

use crate::color::{delta_e, srgb_to_xyz, xyz_to_lab, Xyz, D65};
use crate::error::{Error, Result};
use crate::image::RgbImage;

/// Mean absolute error over all pixels and channels.
pub fn mae(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    a.check_same_size(b)?;
    let sum: u64 = a
        .as_bytes()
        .iter()
        .zip(b.as_bytes())
        .map(|(&x, &y)| u64::from(x.abs_diff(y)))
        .sum();
    Ok(sum as f64 / a.as_bytes().len() as f64)
}

/// Mean squared error over all pixels and channels.
pub fn mse(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    a.check_same_size(b)?;
    let sum: u64 = a
        .as_bytes()
        .iter()
        .zip(b.as_bytes())
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum();
    Ok(sum as f64 / a.as_bytes().len() as f64)
}

/// Normalized color distance: summed CIELAB ΔE*ab divided by the summed
/// CIELAB magnitude of `original`. Not symmetric.
pub fn ncd(original: &RgbImage, filtered: &RgbImage) -> Result<f64> {
    ncd_with_white(original, filtered, D65)
}

pub fn ncd_with_white(original: &RgbImage, filtered: &RgbImage, white: Xyz) -> Result<f64> {
    original.check_same_size(filtered)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (p, q) in original.pixels().zip(filtered.pixels()) {
        let lp = xyz_to_lab(srgb_to_xyz(p), white);
        den += lp.norm();
        if p != q {
            num += delta_e(lp, xyz_to_lab(srgb_to_xyz(q), white));
        }
    }
    if den <= 1e-9 * original.pixel_count() as f64 {
        return Err(Error::ZeroReference);
    }
    Ok(num / den)
}

/// One row of quality numbers for a processed image.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub mae: f64,
    pub mse: f64,
    pub ncd: f64,
    pub pcd: f64,
    /// Seconds spent producing the processed image, when known.
    pub elapsed: f64,
}

impl MetricReport {
    pub fn compare(original: &RgbImage, processed: &RgbImage, scielab: &Scielab) -> Result<Self> {
        Ok(MetricReport {
            mae: mae(original, processed)?,
            mse: mse(original, processed)?,
            ncd: ncd(original, processed)?,
            pcd: pcd(original, processed, scielab)?,
            elapsed: 0.0,
        })
    }

    pub const CSV_HEADER: &'static str = "mae,mse,ncd,pcd,elapsed";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{:.6},{:.6},{:.8},{:.6},{:.6}",
            self.mae, self.mse, self.ncd, self.pcd, self.elapsed
        )
    }

    pub fn to_table(&self) -> String {
        format!(
            "{:<8}{:>12}\n{:<8}{:>12.3}\n{:<8}{:>12.3}\n{:<8}{:>12.6}\n{:<8}{:>12.3}\n{:<8}{:>12.3}\n",
            "metric", "value", "MAE", self.mae, "MSE", self.mse, "NCD", self.ncd, "PCD", self.pcd, "time", self.elapsed
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::srgb_to_lab;
    use proptest::prelude::*;

    fn base() -> RgbImage {
        RgbImage::from_fn(10, 10, |x, y| [(x * 20) as u8, (y * 20) as u8, 128]).unwrap()
    }

    #[test]
    fn identical_images() {
        let a = base();
        let r = MetricReport::compare(&a, &a, &Scielab::default()).unwrap();
        assert_eq!((r.mae, r.mse, r.ncd, r.pcd), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn single_channel_closed_forms() {
        let a = base();
        let mut b = a.clone();
        let p = b.pixel(3, 4);
        b.set_pixel(3, 4, [p[0] + 30, p[1], p[2]]);
        assert_eq!(mae(&a, &b).unwrap(), 0.1);
        assert_eq!(mse(&a, &b).unwrap(), 900.0 / 300.0);
        assert_eq!(mae(&b, &a).unwrap(), 0.1);
    }

    #[test]
    fn uniform_ncd_closed_form() {
        let (c1, c2) = ([40, 90, 160], [60, 80, 150]);
        let a = RgbImage::filled(6, 5, c1).unwrap();
        let b = RgbImage::filled(6, 5, c2).unwrap();
        let expect = delta_e(srgb_to_lab(c1), srgb_to_lab(c2)) / srgb_to_lab(c1).norm();
        assert!((ncd(&a, &b).unwrap() - expect).abs() < 1e-12);
        // normalizes by the first argument
        let reverse = delta_e(srgb_to_lab(c1), srgb_to_lab(c2)) / srgb_to_lab(c2).norm();
        assert!((ncd(&b, &a).unwrap() - reverse).abs() < 1e-12);
        assert!((ncd(&a, &b).unwrap() - ncd(&b, &a).unwrap()).abs() > 1e-6);
    }

    #[test]
    fn black_reference_rejected() {
        let a = RgbImage::filled(4, 4, [0, 0, 0]).unwrap();
        let b = RgbImage::filled(4, 4, [10, 0, 0]).unwrap();
        assert!(matches!(ncd(&a, &b), Err(Error::ZeroReference)));
        assert!(ncd(&b, &a).is_ok());
    }

    #[test]
    fn dimension_mismatch_everywhere() {
        let a = RgbImage::filled(4, 4, [1, 1, 1]).unwrap();
        let b = RgbImage::filled(5, 4, [1, 1, 1]).unwrap();
        assert!(mae(&a, &b).is_err());
        assert!(mse(&a, &b).is_err());
        assert!(ncd(&a, &b).is_err());
        assert!(pcd(&a, &b, &Scielab::default()).is_err());
    }

    #[test]
    fn uniform_pcd_equals_delta_e() {
        let (c1, c2) = ([200, 40, 40], [40, 200, 40]);
        let a = RgbImage::filled(32, 24, c1).unwrap();
        let b = RgbImage::filled(32, 24, c2).unwrap();
        let expect = delta_e(srgb_to_lab(c1), srgb_to_lab(c2));
        let got = pcd(&a, &b, &Scielab::default()).unwrap();
        assert!((got - expect).abs() <= 1e-6 * expect);
    }

    proptest! {
        #[test]
        fn scaling_of_single_pixel_difference(d in 1u8..=25, k in 1u8..=10, x in 0usize..10, y in 0usize..10, c in 0usize..3) {
            let a = RgbImage::filled(10, 10, [0, 0, 0]).unwrap();
            let mut b1 = a.clone();
            let mut p = [0u8; 3];
            p[c] = d;
            b1.set_pixel(x, y, p);
            let mut b2 = a.clone();
            p[c] = d * k;
            b2.set_pixel(x, y, p);
            let k = f64::from(k);
            prop_assert!((mae(&a, &b2).unwrap() - k * mae(&a, &b1).unwrap()).abs() < 1e-12);
            prop_assert!((mse(&a, &b2).unwrap() - k * k * mse(&a, &b1).unwrap()).abs() < 1e-9);
            prop_assert_eq!(mse(&a, &b1).unwrap(), f64::from(d) * f64::from(d) / 300.0);
        }

        #[test]
        fn symmetric_nonnegative(seed in any::<u64>()) {
            let a = RgbImage::from_fn(8, 8, |x, y| [(x as u64 * 31 + seed) as u8, (y as u64 * 7 + seed / 3) as u8, 77]).unwrap();
            let b = RgbImage::from_fn(8, 8, |x, y| [(y as u64 * 13 + seed) as u8, (x as u64 * 5) as u8, 70]).unwrap();
            let s = Scielab::default();
            prop_assert_eq!(mae(&a, &b).unwrap(), mae(&b, &a).unwrap());
            prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
            let (p1, p2) = (pcd(&a, &b, &s).unwrap(), pcd(&b, &a, &s).unwrap());
            prop_assert!((p1 - p2).abs() < 1e-9);
            prop_assert!(p1 >= 0.0);
            prop_assert_eq!(p1 == 0.0, a == b);
        }
    }
}

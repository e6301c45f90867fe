//! Interleaved 8-bit RGB raster and 3x3 window extraction.
//!
//! Windows are resolved with edge replication: coordinates that fall outside
//! the image are clamped to the nearest valid row/column, so every window
//! entry is a pixel that actually exists in the source.

use crate::error::{Error, Result};

/// One RGB pixel, channel order `[r, g, b]`.
pub type Rgb = [u8; 3];

/// Number of pixels in a filter window.
pub const WINDOW_LEN: usize = 9;

/// Index of the center pixel inside a [`Window`] (0-based).
pub const CENTER: usize = WINDOW_LEN / 2;

/// Owned, row-major RGB image.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for RgbImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RgbImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl RgbImage {
    /// Wraps an interleaved buffer. Fails unless `data.len() == 3 * width * height`
    /// and both dimensions are at least one.
    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions { width, height });
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(3))
            .ok_or(Error::InvalidDimensions { width, height })?;
        if data.len() != expected {
            return Err(Error::BufferSize {
                expected,
                found: data.len(),
            });
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single color.
    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self> {
        let n = width.saturating_mul(height);
        let data = std::iter::repeat(color).take(n).flatten().collect();
        Self::from_raw(width, height, data)
    }

    pub fn from_pixels(width: usize, height: usize, pixels: &[Rgb]) -> Result<Self> {
        Self::from_raw(width, height, pixels.iter().flatten().copied().collect())
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Rgb,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height).saturating_mul(3));
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::from_raw(width, height, data)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Raw interleaved bytes.
    #[inline]
    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// Pixel by linear (row-major) index.
    #[inline]
    pub fn pixel_at_index(&self, idx: usize) -> Rgb {
        let o = idx * 3;
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        self.pixel_at_index(y * self.width + x)
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, p: Rgb) {
        let o = (y * self.width + x) * 3;
        self.data[o..o + 3].copy_from_slice(&p);
    }

    pub fn pixels(&self) -> impl ExactSizeIterator<Item = Rgb> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    /// 3x3 neighborhood of `(x, y)` in raster order with clamped borders.
    pub fn window_at(&self, x: usize, y: usize) -> Result<Window> {
        if x >= self.width || y >= self.height {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        let idx = neighbor_indices(self.width, self.height, x, y);
        Ok(Window(idx.map(|i| self.pixel_at_index(i))))
    }

    pub(crate) fn check_same_size(&self, other: &RgbImage) -> Result<()> {
        if self.dimensions() != other.dimensions() {
            return Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ));
        }
        Ok(())
    }
}

/// Linear indices of the clamped 3x3 neighborhood of `(x, y)`, raster order.
#[inline]
pub fn neighbor_indices(width: usize, height: usize, x: usize, y: usize) -> [usize; WINDOW_LEN] {
    let xs = [x.saturating_sub(1), x, (x + 1).min(width - 1)];
    let rows = [
        y.saturating_sub(1) * width,
        y * width,
        (y + 1).min(height - 1) * width,
    ];
    let mut out = [0; WINDOW_LEN];
    for (r, row) in rows.iter().enumerate() {
        for (c, col) in xs.iter().enumerate() {
            out[r * 3 + c] = row + col;
        }
    }
    out
}

/// The nine pixels of a 3x3 window, raster order, center at [`CENTER`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window(pub [Rgb; WINDOW_LEN]);

impl Window {
    #[inline]
    pub fn center(&self) -> Rgb {
        self.0[CENTER]
    }

    #[inline]
    pub fn pixels(&self) -> &[Rgb; WINDOW_LEN] {
        &self.0
    }
}

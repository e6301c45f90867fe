//! Binary portable pixmap (P6, maxval 255) reading and writing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::RgbImage;

/// Decodes a P6 stream. Header comments (`#` to end of line) are skipped;
/// bytes following the pixel payload are ignored.
pub fn decode_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let mut cur = HeaderCursor { bytes, pos: 0 };
    let magic = cur.token()?;
    if magic != b"P6" {
        return Err(Error::MalformedHeader(format!(
            "expected magic `P6`, found `{}`",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates maxval from the raster
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::MalformedHeader(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    let (width, height) = (width as usize, height as usize);
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    RgbImage::from_raw(width, height, payload[..expected].to_vec())
}

/// Encodes as `P6\n<w> <h>\n255\n` followed by the raw pixels.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.as_bytes().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(img.as_bytes());
    out
}

pub fn load_ppm(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_ppm(&bytes)
}

pub fn save_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_separators();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader("unexpected end of header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self.token()?;
        if !tok.iter().all(u8::is_ascii_digit) {
            return Err(Error::MalformedHeader(format!(
                "{what} is not a decimal integer: `{}`",
                String::from_utf8_lossy(tok)
            )));
        }
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("{what} out of range")))
    }
}

//! Binary PGM (P5) and PBM (P4) reading and writing.
//!
//! Masks may be stored as P4 (bit 1 = pothole) or as P5 where any nonzero
//! sample is a pothole pixel.

use super::{BinaryMask, GrayImage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pnm {
    Gray(GrayImage),
    Bitmap(BinaryMask),
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Image(format!("missing or invalid {what} in header")))
    }

    /// Consumes the single whitespace byte preceding the raster.
    fn raster(self) -> Result<&'a [u8]> {
        match self.bytes.get(self.pos) {
            Some(c) if c.is_ascii_whitespace() => Ok(&self.bytes[self.pos + 1..]),
            _ => Err(Error::Image("header not terminated by whitespace".into())),
        }
    }
}

pub fn read_pnm(bytes: &[u8]) -> Result<Pnm> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::Image("not a PNM file".into()));
    }
    let kind = bytes[1];
    let mut hdr = Header { bytes, pos: 2 };
    let width = hdr.number("width")?;
    let height = hdr.number("height")?;
    match kind {
        b'5' => {
            let maxval = hdr.number("maxval")?;
            if maxval == 0 || maxval > 255 {
                return Err(Error::Image(format!("unsupported maxval {maxval}")));
            }
            let raster = hdr.raster()?;
            let n = width * height;
            if raster.len() < n {
                return Err(Error::Image(format!(
                    "expected {n} pixels, found {}",
                    raster.len()
                )));
            }
            let data = if maxval == 255 {
                raster[..n].to_vec()
            } else {
                raster[..n]
                    .iter()
                    .map(|p| {
                        ((u32::from(*p).min(maxval as u32) * 255 + maxval as u32 / 2)
                            / maxval as u32) as u8
                    })
                    .collect()
            };
            Ok(Pnm::Gray(GrayImage::new(width, height, data)?))
        }
        b'4' => {
            let raster = hdr.raster()?;
            let stride = width.div_ceil(8);
            if raster.len() < stride * height {
                return Err(Error::Image("truncated PBM raster".into()));
            }
            let mask = BinaryMask::from_fn(width, height, |x, y| {
                raster[y * stride + x / 8] & (0x80 >> (x % 8)) != 0
            });
            Ok(Pnm::Bitmap(mask))
        }
        _ => Err(Error::Image(format!(
            "unsupported PNM kind P{}",
            kind as char
        ))),
    }
}

pub fn read_mask(bytes: &[u8]) -> Result<BinaryMask> {
    match read_pnm(bytes)? {
        Pnm::Bitmap(m) => Ok(m),
        Pnm::Gray(g) => BinaryMask::new(
            g.width(),
            g.height(),
            g.data().iter().map(|p| *p != 0).collect(),
        ),
    }
}

pub fn read_gray(bytes: &[u8]) -> Result<GrayImage> {
    match read_pnm(bytes)? {
        Pnm::Gray(g) => Ok(g),
        Pnm::Bitmap(_) => Err(Error::Image("expected a grayscale (P5) image".into())),
    }
}

pub fn write_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn write_pbm(mask: &BinaryMask) -> Vec<u8> {
    let (w, h) = (mask.width(), mask.height());
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let stride = w.div_ceil(8);
    let mut row = vec![0u8; stride];
    for y in 0..h {
        row.iter_mut().for_each(|b| *b = 0);
        for x in 0..w {
            if mask.get(x, y) {
                row[x / 8] |= 0x80 >> (x % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    out
}

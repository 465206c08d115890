//! Image-side analytics on grayscale frames and binary pothole masks.

mod canny;
mod homography;
mod morphology;
pub mod pnm;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use canny::{canny, gradient_magnitude, DEFAULT_CANNY_HIGH};
pub use homography::{homography_from_points, warp_mask, Homography};
pub use morphology::{components, count_components, dilate, Component};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Image(format!(
                "{} bytes for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let data = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }
}

/// Real-valued intensity plane used by gradient-based processing.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Real> ImagePlane<T> {
    pub fn new(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::Image(format!(
                "{} values for a {width}x{height} plane",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn scaled(&self, alpha: T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| *v * alpha).collect(),
        }
    }
}

impl<T: Real> From<&GrayImage> for ImagePlane<T> {
    fn from(img: &GrayImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            data: img.data.iter().map(|p| T::lit(f64::from(*p))).collect(),
        }
    }
}

/// Row-major boolean mask; `true` marks a pothole pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Image(format!(
                "{} bits for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }
}

/// Logarithmic contrast enhancement followed by a min-max stretch to
/// `[0, 255]`. Constant images are returned unchanged.
pub fn log_stretch(img: &GrayImage) -> GrayImage {
    let lo = img.data.iter().min().copied().unwrap_or(0);
    let hi = img.data.iter().max().copied().unwrap_or(0);
    if lo == hi {
        return img.clone();
    }
    let denom = 256f64.ln();
    let mut lut = [0u8; 256];
    for (p, v) in lut.iter_mut().enumerate() {
        *v = (255.0 * (1.0 + p as f64).ln() / denom).round() as u8;
    }
    let (llo, lhi) = (lut[lo as usize], lut[hi as usize]);
    let data = if llo == lhi {
        img.data.iter().map(|p| lut[*p as usize]).collect()
    } else {
        let span = f64::from(lhi - llo);
        img.data
            .iter()
            .map(|p| (f64::from(lut[*p as usize] - llo) * 255.0 / span).round() as u8)
            .collect()
    };
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Fraction of set pixels.
pub fn area_ratio<T: Real>(mask: &BinaryMask) -> Result<T> {
    let total = mask.width * mask.height;
    if total == 0 {
        return Err(Error::Image("mask has zero area".into()));
    }
    Ok(T::from_usize_lossy(mask.count()) / T::from_usize_lossy(total))
}

/// Whether any set pixel lies on row `line_y`.
pub fn line_gate(mask: &BinaryMask, line_y: usize) -> Result<bool> {
    if line_y >= mask.height {
        return Err(Error::InvalidArgument(format!(
            "gate row {line_y} outside a mask of height {}",
            mask.height
        )));
    }
    let row = &mask.bits[line_y * mask.width..(line_y + 1) * mask.width];
    Ok(row.iter().any(|b| *b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Medium,
    High,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Low => "low",
            Severity::Medium => "medium",
            Severity::High => "high",
        })
    }
}

/// Lower bounds (inclusive) of the medium and high severity bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeverityThresholds<T> {
    pub medium: T,
    pub high: T,
}

impl<T: Real> Default for SeverityThresholds<T> {
    fn default() -> Self {
        Self {
            medium: T::lit(0.05),
            high: T::lit(0.15),
        }
    }
}

pub fn severity<T: Real>(area: T, thresholds: &SeverityThresholds<T>) -> Result<Severity> {
    if !(area >= T::zero() && area <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "area {area} outside [0, 1]"
        )));
    }
    if !(thresholds.medium <= thresholds.high) {
        return Err(Error::InvalidArgument(
            "medium threshold exceeds high".into(),
        ));
    }
    Ok(if area >= thresholds.high {
        Severity::High
    } else if area >= thresholds.medium {
        Severity::Medium
    } else {
        Severity::Low
    })
}

/// Summary printed by the mask statistics command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskStats {
    pub area_ratio: f64,
    pub components: usize,
    /// `None` when no gate row was requested.
    pub gated: Option<bool>,
    pub severity: Severity,
    /// Bounding-box extents of the largest component in pixels (longer side
    /// first). An approximation of pothole length and width.
    pub length_px: usize,
    pub width_px: usize,
    pub dims_approximate: bool,
}

pub fn mask_stats(
    mask: &BinaryMask,
    gate_row: Option<usize>,
    thresholds: &SeverityThresholds<f64>,
) -> Result<MaskStats> {
    let area: f64 = area_ratio(mask)?;
    let comps = components(mask);
    let gated = gate_row.map(|y| line_gate(mask, y)).transpose()?;
    let (length_px, width_px) = comps
        .iter()
        .max_by_key(|c| c.pixels)
        .map(|c| {
            let (w, h) = (c.max_x - c.min_x + 1, c.max_y - c.min_y + 1);
            (w.max(h), w.min(h))
        })
        .unwrap_or((0, 0));
    Ok(MaskStats {
        area_ratio: (area * 1e6).round() / 1e6,
        components: comps.len(),
        gated,
        severity: severity(area, thresholds)?,
        length_px,
        width_px,
        dims_approximate: true,
    })
}

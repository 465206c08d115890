//! Canny edge detection with thresholds relative to the strongest gradient.

use super::{BinaryMask, ImagePlane};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_CANNY_HIGH: f64 = 0.6;
const SIGMA: f64 = 1.4;
const RADIUS: usize = 2;

fn gaussian_kernel<T: Real>() -> [T; 2 * RADIUS + 1] {
    let mut k = [T::zero(); 2 * RADIUS + 1];
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - RADIUS as f64;
        *v = T::lit((-d * d / (2.0 * SIGMA * SIGMA)).exp());
    }
    let s: T = k.iter().copied().sum();
    k.map(|v| v / s)
}

#[inline]
fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Separable 5×5 Gaussian blur with replicated borders.
fn blur<T: Real>(p: &ImagePlane<T>) -> Vec<T> {
    let (w, h) = (p.width, p.height);
    let k = gaussian_kernel::<T>();
    let mut tmp = vec![T::zero(); w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (j, kv) in k.iter().enumerate() {
                let xx = clamp_idx(x as isize + j as isize - RADIUS as isize, w);
                acc += *kv * p.data[y * w + xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![T::zero(); w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = T::zero();
            for (j, kv) in k.iter().enumerate() {
                let yy = clamp_idx(y as isize + j as isize - RADIUS as isize, h);
                acc += *kv * tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Sobel gradients of `data` with replicated borders.
fn sobel<T: Real>(data: &[T], w: usize, h: usize) -> (Vec<T>, Vec<T>) {
    let at = |x: isize, y: isize| data[clamp_idx(y, h) * w + clamp_idx(x, w)];
    let two = T::lit(2.0);
    let mut gx = vec![T::zero(); w * h];
    let mut gy = vec![T::zero(); w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + two * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + two * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + two * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + two * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    (gx, gy)
}

fn normalized<T: Real>(p: &ImagePlane<T>) -> Option<ImagePlane<T>> {
    let m = p.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    (m > T::zero()).then(|| p.scaled(m.recip()))
}

fn check_size<T>(p: &ImagePlane<T>) -> Result<()> {
    if p.width < 2 * RADIUS + 1 || p.height < 2 * RADIUS + 1 {
        return Err(Error::Image(format!(
            "canny needs at least 5x5 pixels, got {}x{}",
            p.width, p.height
        )));
    }
    Ok(())
}

fn gradients<T: Real>(p: &ImagePlane<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
    let (w, h) = (p.width, p.height);
    match normalized(p) {
        Some(n) => {
            let b = blur(&n);
            let (gx, gy) = sobel(&b, w, h);
            let mag = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
            (gx, gy, mag)
        }
        None => (
            vec![T::zero(); w * h],
            vec![T::zero(); w * h],
            vec![T::zero(); w * h],
        ),
    }
}

/// Blurred gradient magnitude of the intensity-normalized plane (the field
/// that the thresholds are relative to).
pub fn gradient_magnitude<T: Real>(p: &ImagePlane<T>) -> Result<Vec<T>> {
    check_size(p)?;
    Ok(gradients(p).2)
}

/// Neighbor offset along the gradient direction, quantized to 4 directions.
fn direction<T: Real>(gx: T, gy: T) -> (isize, isize) {
    let mut deg = gy.atan2(gx).to_degrees().as_f64();
    if deg < 0.0 {
        deg += 180.0;
    }
    if !(22.5..157.5).contains(&deg) {
        (1, 0)
    } else if deg < 67.5 {
        (1, 1)
    } else if deg < 112.5 {
        (0, 1)
    } else {
        (-1, 1)
    }
}

/// Edge mask. `low` and `high` are fractions of the maximum gradient
/// magnitude; pass `high = 0.6, low = 0.3` for the default tuning.
pub fn canny<T: Real>(p: &ImagePlane<T>, low: T, high: T) -> Result<BinaryMask> {
    check_size(p)?;
    if !(low >= T::zero() && low < high && high <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= low < high <= 1, got low={low} high={high}"
        )));
    }
    let (w, h) = (p.width, p.height);
    let (gx, gy, mag) = gradients(p);
    let max = mag.iter().fold(T::zero(), |m, v| m.max(*v));
    if max == T::zero() {
        return Ok(BinaryMask::empty(w, h));
    }

    // Non-maximum suppression; ties keep the pixel on the negative side.
    let mut thin = vec![T::zero(); w * h];
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let i = y * w + x;
            let m = mag[i];
            if m == T::zero() {
                continue;
            }
            let (dx, dy) = direction(gx[i], gy[i]);
            let fwd = mag[(y as isize + dy) as usize * w + (x as isize + dx) as usize];
            let back = mag[(y as isize - dy) as usize * w + (x as isize - dx) as usize];
            if m >= fwd && m > back {
                thin[i] = m;
            }
        }
    }

    let strong = high * max;
    let weak = low * max;
    let mut out = BinaryMask::empty(w, h);
    let mut stack: Vec<usize> = (0..w * h).filter(|&i| thin[i] >= strong).collect();
    for &i in &stack {
        out.bits[i] = true;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !out.bits[j] && thin[j] >= weak && thin[j] > T::zero() {
                    out.bits[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    Ok(out)
}

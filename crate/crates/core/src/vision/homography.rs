//! Four-point planar homography (DLT with `h₃₃ = 1`) and mask warping.

use super::BinaryMask;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography<T> {
    pub h: [[T; 3]; 3],
}

impl<T: Real> Homography<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self {
            h: [[o, z, z], [z, o, z], [z, z, o]],
        }
    }

    /// Validates invertibility and normalizes `h₃₃` to 1 when nonzero.
    pub fn new(mut h: [[T; 3]; 3]) -> Result<Self> {
        if h.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("homography"));
        }
        let s = h[2][2];
        if s != T::zero() {
            for v in h.iter_mut().flatten() {
                *v /= s;
            }
        }
        let m = Self { h };
        if m.det().abs() <= T::lit(1e-12) {
            return Err(Error::Degenerate("homography is singular".into()));
        }
        Ok(m)
    }

    pub fn det(&self) -> T {
        let h = &self.h;
        h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
            - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
            + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])
    }

    pub fn inverse(&self) -> Result<Self> {
        let h = &self.h;
        let d = self.det();
        if d.abs() <= T::lit(1e-12) {
            return Err(Error::Degenerate("homography is singular".into()));
        }
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            h[r0][c0] * h[r1][c1] - h[r0][c1] * h[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Self::new(adj.map(|row| row.map(|v| v / d)))
    }

    /// Maps a point; `None` when it lands on the line at infinity.
    pub fn apply(&self, x: T, y: T) -> Option<(T, T)> {
        let h = &self.h;
        let w = h[2][0] * x + h[2][1] * y + h[2][2];
        if w.abs() <= T::epsilon() {
            return None;
        }
        Some((
            (h[0][0] * x + h[0][1] * y + h[0][2]) / w,
            (h[1][0] * x + h[1][1] * y + h[1][2]) / w,
        ))
    }
}

fn check_general_position<T: Real>(pts: &[(T, T); 4], which: &str) -> Result<()> {
    let scale = pts
        .iter()
        .flat_map(|p| [p.0.abs(), p.1.abs()])
        .fold(T::one(), T::max);
    let eps = T::lit(1e-9) * scale * scale;
    for a in 0..4 {
        for b in a + 1..4 {
            for c in b + 1..4 {
                let (p, q, r) = (pts[a], pts[b], pts[c]);
                let cross = (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
                if cross.abs() <= eps {
                    return Err(Error::Degenerate(format!(
                        "{which} points {a}, {b}, {c} are collinear"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Solves `a·x = b` in place by Gaussian elimination with partial pivoting.
fn solve8<T: Real>(mut a: [[T; 8]; 8], mut b: [T; 8]) -> Result<[T; 8]> {
    for col in 0..8 {
        let piv = (col..8)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite")
            })
            .expect("non-empty");
        if a[piv][col].abs() <= T::lit(1e-12) {
            return Err(Error::Degenerate(
                "point correspondences do not determine a homography".into(),
            ));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..8 {
            let f = a[r][col] / a[col][col];
            if f == T::zero() {
                continue;
            }
            let pivot_row = a[col];
            for (dst, v) in a[r].iter_mut().zip(pivot_row).skip(col) {
                *dst -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = [T::zero(); 8];
    for r in (0..8).rev() {
        let s: T = (r + 1..8).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Homography mapping each `src[i]` onto `dst[i]`.
pub fn homography_from_points<T: Real>(
    src: &[(T, T); 4],
    dst: &[(T, T); 4],
) -> Result<Homography<T>> {
    if src
        .iter()
        .chain(dst)
        .any(|p| !p.0.is_finite() || !p.1.is_finite())
    {
        return Err(Error::NonFinite("point correspondences"));
    }
    check_general_position(src, "source")?;
    check_general_position(dst, "target")?;
    let (o, z) = (T::one(), T::zero());
    let mut a = [[z; 8]; 8];
    let mut b = [z; 8];
    for (i, ((x, y), (u, v))) in src.iter().zip(dst).enumerate() {
        a[2 * i] = [*x, *y, o, z, z, z, -*u * *x, -*u * *y];
        b[2 * i] = *u;
        a[2 * i + 1] = [z, z, z, *x, *y, o, -*v * *x, -*v * *y];
        b[2 * i + 1] = *v;
    }
    let s = solve8(a, b)?;
    Homography::new([[s[0], s[1], s[2]], [s[3], s[4], s[5]], [s[6], s[7], o]])
}

/// Resamples `mask` into an `out_w × out_h` frame where `h` maps mask
/// coordinates to output coordinates (inverse mapping, nearest neighbor).
pub fn warp_mask<T: Real>(
    mask: &BinaryMask,
    h: &Homography<T>,
    out_w: usize,
    out_h: usize,
) -> Result<BinaryMask> {
    let inv = h.inverse()?;
    let half = T::lit(0.5);
    let mut out = BinaryMask::empty(out_w, out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let Some((sx, sy)) = inv.apply(T::from_usize_lossy(x), T::from_usize_lossy(y)) else {
                continue;
            };
            let (fx, fy) = ((sx + half).floor(), (sy + half).floor());
            if fx < T::zero() || fy < T::zero() {
                continue;
            }
            let (ix, iy) = (fx.as_f64() as usize, fy.as_f64() as usize);
            if ix < mask.width && iy < mask.height && mask.get(ix, iy) {
                out.set(x, y, true);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{SMatrix, SVector};

    const SQUARE: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];

    #[test]
    fn identity_from_unit_square() {
        let h = homography_from_points(&SQUARE, &SQUARE).unwrap();
        assert_eq!(h, Homography::identity());
    }

    #[test]
    fn translation_matches_oracle() {
        let src = [(0.0, 0.0), (4.0, 0.0), (5.0, 3.0), (-1.0, 2.0)];
        let dst = src.map(|(x, y)| (x + 10.0, y));
        let h = homography_from_points(&src, &dst).unwrap();
        // independent solve of the same 8x8 system
        let mut a = SMatrix::<f64, 8, 8>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for (i, ((x, y), (u, v))) in src.iter().zip(&dst).enumerate() {
            let r0 = [*x, *y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y];
            let r1 = [0.0, 0.0, 0.0, *x, *y, 1.0, -v * x, -v * y];
            for c in 0..8 {
                a[(2 * i, c)] = r0[c];
                a[(2 * i + 1, c)] = r1[c];
            }
            b[2 * i] = *u;
            b[2 * i + 1] = *v;
        }
        let sol = a.lu().solve(&b).unwrap();
        let flat = [
            h.h[0][0], h.h[0][1], h.h[0][2], h.h[1][0], h.h[1][1], h.h[1][2], h.h[2][0], h.h[2][1],
        ];
        for k in 0..8 {
            assert!((flat[k] - sol[k]).abs() < 1e-12);
        }
        let expect = [[1.0, 0.0, 10.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for (row, exp) in h.h.iter().zip(&expect) {
            for (v, e) in row.iter().zip(exp) {
                assert!((v - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn collinear_rejected() {
        let bad = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (0.0, 1.0)];
        assert!(matches!(
            homography_from_points(&bad, &SQUARE),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            homography_from_points(&SQUARE, &bad),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn inverse_round_trip() {
        let src: [(f64, f64); 4] = [(10.0, 20.0), (300.0, 25.0), (280.0, 200.0), (30.0, 210.0)];
        let dst = [(0.0, 0.0), (200.0, 0.0), (200.0, 300.0), (0.0, 300.0)];
        let h = homography_from_points(&src, &dst).unwrap();
        let inv = h.inverse().unwrap();
        for (x, y) in src {
            let (u, v) = h.apply(x, y).unwrap();
            let (bx, by) = inv.apply(u, v).unwrap();
            assert!((bx - x).abs() < 1e-8 && (by - y).abs() < 1e-8);
        }
    }

    #[test]
    fn identity_warp_preserves_mask() {
        let m = BinaryMask::from_fn(31, 17, |x, y| (x * 3 + y * 5) % 7 == 0);
        assert_eq!(
            warp_mask(&m, &Homography::<f64>::identity(), 31, 17).unwrap(),
            m
        );
    }

    #[test]
    fn warp_translates() {
        let m = BinaryMask::from_fn(20, 10, |x, y| (2..5).contains(&x) && (3..6).contains(&y));
        let src = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)];
        let dst = src.map(|(x, y)| (x + 6.0, y + 1.0));
        let h = homography_from_points(&src, &dst).unwrap();
        let w = warp_mask(&m, &h, 20, 10).unwrap();
        assert_eq!(
            w,
            BinaryMask::from_fn(20, 10, |x, y| (8..11).contains(&x) && (4..7).contains(&y))
        );
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(Homography::new([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_err());
    }
}

use super::BinaryMask;
use crate::error::{Error, Result};

/// Dilation by a `k × k` square of ones (`k` odd), clipped at the borders.
pub fn dilate(mask: &BinaryMask, k: usize) -> Result<BinaryMask> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "kernel size must be odd and positive, got {k}"
        )));
    }
    let r = k / 2;
    let (w, h) = (mask.width, mask.height);
    // separable: horizontal then vertical running max
    let mut rows = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let (a, b) = (x.saturating_sub(r), (x + r).min(w.saturating_sub(1)));
            rows[y * w + x] = mask.bits[y * w + a..=y * w + b].iter().any(|v| *v);
        }
    }
    let mut out = BinaryMask::empty(w, h);
    for y in 0..h {
        let (a, b) = (y.saturating_sub(r), (y + r).min(h.saturating_sub(1)));
        for x in 0..w {
            out.bits[y * w + x] = (a..=b).any(|yy| rows[yy * w + x]);
        }
    }
    Ok(out)
}

/// One 8-connected group of set pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub pixels: usize,
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// 8-connected components in raster order of their first pixel
/// (two-pass union-find labeling).
pub fn components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = (mask.width, mask.height);
    let mut parent: Vec<usize> = (0..w * h).collect();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask.bits[i] {
                continue;
            }
            // previously visited neighbors: W, NW, N, NE
            if x > 0 && mask.bits[i - 1] {
                union(&mut parent, i, i - 1);
            }
            if y > 0 {
                let up = i - w;
                if mask.bits[up] {
                    union(&mut parent, i, up);
                }
                if x > 0 && mask.bits[up - 1] {
                    union(&mut parent, i, up - 1);
                }
                if x + 1 < w && mask.bits[up + 1] {
                    union(&mut parent, i, up + 1);
                }
            }
        }
    }

    let mut index_of_root = std::collections::HashMap::new();
    let mut out: Vec<Component> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask.bits[i] {
                continue;
            }
            let root = find(&mut parent, i);
            let k = *index_of_root.entry(root).or_insert_with(|| {
                out.push(Component {
                    pixels: 0,
                    min_x: x,
                    min_y: y,
                    max_x: x,
                    max_y: y,
                });
                out.len() - 1
            });
            let c = &mut out[k];
            c.pixels += 1;
            c.min_x = c.min_x.min(x);
            c.max_x = c.max_x.max(x);
            c.max_y = c.max_y.max(y);
        }
    }
    out
}

pub fn count_components(mask: &BinaryMask) -> usize {
    components(mask).len()
}

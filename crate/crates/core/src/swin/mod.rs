//! Shifted-window index algebra: partition and merge, cyclic shifts,
//! cross-region attention masks and window connectivity.
//!
//! A shifted layout pads the map to whole windows first and then rolls the
//! padded map by `(-dy, -dx)`, so window origins and masks live in that
//! rolled frame.

mod attention;
mod shapes;

pub use attention::{attention_weights, windowed_attention, AttentionParams};
pub use shapes::{
    adaptive_avg_pool, backbone_shapes, fuse_features, pyramid_shapes, BackboneConfig,
    PyramidShapes, StageShape, DEFAULT_PPM_SCALES,
};

use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowLayout {
    pub height: usize,
    pub width: usize,
    pub window: usize,
    pub padded_h: usize,
    pub padded_w: usize,
    /// Roll applied before partitioning, as `(dy, dx)` tokens.
    pub shift: (usize, usize),
    /// Window origins in the rolled padded frame, row-major.
    pub origins: Vec<(usize, usize)>,
}

impl WindowLayout {
    pub fn new(height: usize, width: usize, window: usize, shift: (usize, usize)) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("window side must be >= 1".into()));
        }
        if height == 0 || width == 0 {
            return Err(Error::ZeroDimension);
        }
        let padded_h = height.div_ceil(window) * window;
        let padded_w = width.div_ceil(window) * window;
        let shift = (shift.0 % padded_h, shift.1 % padded_w);
        let mut origins = Vec::new();
        for oy in (0..padded_h).step_by(window) {
            for ox in (0..padded_w).step_by(window) {
                origins.push((oy, ox));
            }
        }
        Ok(WindowLayout {
            height,
            width,
            window,
            padded_h,
            padded_w,
            shift,
            origins,
        })
    }

    /// The SW-MSA layout: shift `⌊w/2⌋` on both axes.
    pub fn shifted(height: usize, width: usize, window: usize) -> Result<Self> {
        Self::new(height, width, window, (window / 2, window / 2))
    }

    pub fn window_count(&self) -> usize {
        self.origins.len()
    }

    pub fn tokens_per_window(&self) -> usize {
        self.window * self.window
    }

    /// Frame position of token `t` of window `k`.
    pub fn frame_position(&self, k: usize, t: usize) -> (usize, usize) {
        let (oy, ox) = self.origins[k];
        (oy + t / self.window, ox + t % self.window)
    }

    /// Unrolled padded-map position of a frame position.
    pub fn source_position(&self, fy: usize, fx: usize) -> (usize, usize) {
        ((fy + self.shift.0) % self.padded_h, (fx + self.shift.1) % self.padded_w)
    }

    /// Whether the padded-map position is padding.
    pub fn is_pad(&self, py: usize, px: usize) -> bool {
        py >= self.height || px >= self.width
    }

    /// Pad flags of the unrolled padded map, row-major.
    pub fn pad_mask(&self) -> Vec<bool> {
        let mut m = Vec::with_capacity(self.padded_h * self.padded_w);
        for py in 0..self.padded_h {
            for px in 0..self.padded_w {
                m.push(self.is_pad(py, px));
            }
        }
        m
    }

    /// Region label of a frame position: three slices per shifted axis,
    /// `[0, P − w)`, `[P − w, P − d)` and `[P − d, P)`, one slice otherwise.
    pub fn region_label(&self, fy: usize, fx: usize) -> u8 {
        let slice = |pos: usize, padded: usize, d: usize| -> u8 {
            if d == 0 {
                0
            } else if pos < padded - self.window {
                0
            } else if pos < padded - d {
                1
            } else {
                2
            }
        };
        3 * slice(fy, self.padded_h, self.shift.0) + slice(fx, self.padded_w, self.shift.1)
    }
}

/// `out(y, x) = in((y − dy) mod H, (x − dx) mod W)`.
pub fn cyclic_shift<T: Scalar>(tokens: &FeatureMap<T>, dy: isize, dx: isize) -> FeatureMap<T> {
    let (h, w, c) = (tokens.height(), tokens.width(), tokens.channels());
    let mut data = Vec::with_capacity(h * w * c);
    for y in 0..h {
        let sy = (y as i64 - dy as i64).rem_euclid(h as i64) as usize;
        for x in 0..w {
            let sx = (x as i64 - dx as i64).rem_euclid(w as i64) as usize;
            data.extend_from_slice(tokens.pixel(sy, sx));
        }
    }
    FeatureMap::new(h, w, c, data).expect("same shape")
}

/// Unshifted partition; see [`window_partition_shifted`].
pub fn window_partition<T: Scalar>(
    tokens: &FeatureMap<T>,
    window: usize,
) -> Result<(WindowLayout, Vec<Matrix<T>>)> {
    window_partition_shifted(tokens, window, (0, 0))
}

/// Zero-pads to whole windows, rolls by `(-dy, -dx)` and cuts the result
/// into `w²×C` matrices, windows and tokens both row-major.
pub fn window_partition_shifted<T: Scalar>(
    tokens: &FeatureMap<T>,
    window: usize,
    shift: (usize, usize),
) -> Result<(WindowLayout, Vec<Matrix<T>>)> {
    let layout = WindowLayout::new(tokens.height(), tokens.width(), window, shift)?;
    let c = tokens.channels();
    let windows = (0..layout.window_count())
        .map(|k| {
            let mut data = Vec::with_capacity(layout.tokens_per_window() * c);
            for t in 0..layout.tokens_per_window() {
                let (fy, fx) = layout.frame_position(k, t);
                let (py, px) = layout.source_position(fy, fx);
                if layout.is_pad(py, px) {
                    data.extend(std::iter::repeat_n(T::zero(), c));
                } else {
                    data.extend_from_slice(tokens.pixel(py, px));
                }
            }
            Matrix::from_vec(layout.tokens_per_window(), c, data)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((layout, windows))
}

/// Inverse of the partition; padding is dropped.
pub fn window_merge<T: Scalar>(layout: &WindowLayout, windows: &[Matrix<T>]) -> Result<FeatureMap<T>> {
    if windows.len() != layout.window_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} windows for a layout of {}",
            windows.len(),
            layout.window_count()
        )));
    }
    let c = windows.first().map_or(0, Matrix::cols);
    if windows
        .iter()
        .any(|m| m.rows() != layout.tokens_per_window() || m.cols() != c)
    {
        return Err(Error::DimensionMismatch(
            "window matrices disagree with the layout".into(),
        ));
    }
    let mut out = FeatureMap::zeros(layout.height, layout.width, c)?;
    for (k, m) in windows.iter().enumerate() {
        for t in 0..layout.tokens_per_window() {
            let (fy, fx) = layout.frame_position(k, t);
            let (py, px) = layout.source_position(fy, fx);
            if !layout.is_pad(py, px) {
                out.pixel_mut(py, px)
                    .copy_from_slice(&m.data()[t * c..(t + 1) * c]);
            }
        }
    }
    Ok(out)
}

/// Pairwise blocking inside one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionMask {
    tokens: usize,
    blocked: Vec<bool>,
}

impl AttentionMask {
    pub fn open(tokens: usize) -> Self {
        AttentionMask {
            tokens,
            blocked: vec![false; tokens * tokens],
        }
    }

    pub fn from_fn(tokens: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut blocked = Vec::with_capacity(tokens * tokens);
        for a in 0..tokens {
            for b in 0..tokens {
                blocked.push(f(a, b));
            }
        }
        AttentionMask { tokens, blocked }
    }

    pub fn tokens(&self) -> usize {
        self.tokens
    }

    pub fn is_blocked(&self, a: usize, b: usize) -> bool {
        self.blocked[a * self.tokens + b]
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|b| **b).count()
    }

    pub fn is_open(&self) -> bool {
        !self.blocked.iter().any(|b| *b)
    }

    /// Additive form: `0` where open, `-inf` where blocked.
    pub fn additive<T: Scalar>(&self) -> Vec<T> {
        self.blocked
            .iter()
            .map(|b| if *b { T::neg_infinity() } else { T::zero() })
            .collect()
    }
}

/// One mask per window: a pair is blocked when the tokens carry different
/// region labels or either one is padding (padding is blocked even against
/// itself).
pub fn layout_masks(layout: &WindowLayout) -> Vec<AttentionMask> {
    let n = layout.tokens_per_window();
    (0..layout.window_count())
        .map(|k| {
            let info: Vec<(bool, u8)> = (0..n)
                .map(|t| {
                    let (fy, fx) = layout.frame_position(k, t);
                    let (py, px) = layout.source_position(fy, fx);
                    (layout.is_pad(py, px), layout.region_label(fy, fx))
                })
                .collect();
            AttentionMask::from_fn(n, |a, b| info[a].0 || info[b].0 || info[a].1 != info[b].1)
        })
        .collect()
}

/// W-MSA (`shifted = false`) or SW-MSA masks for an `h×w` map. Maps smaller
/// than the window are padded rather than rejected.
pub fn attention_masks(
    h: usize,
    w: usize,
    window: usize,
    shifted: bool,
) -> Result<(WindowLayout, Vec<AttentionMask>)> {
    let layout = if shifted {
        WindowLayout::shifted(h, w, window)?
    } else {
        WindowLayout::new(h, w, window, (0, 0))?
    };
    let masks = layout_masks(&layout);
    Ok((layout, masks))
}

pub fn shifted_attention_mask(h: usize, w: usize, window: usize) -> Result<Vec<AttentionMask>> {
    attention_masks(h, w, window, true).map(|(_, m)| m)
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Number of connected components of the token graph whose edges are the
/// unblocked pairs of the W-MSA and the SW-MSA layouts together.
pub fn receptive_field_components(h: usize, w: usize, window: usize) -> Result<usize> {
    let mut sets = DisjointSets::new(h * w);
    for shifted in [false, true] {
        let (layout, masks) = attention_masks(h, w, window, shifted)?;
        for (k, mask) in masks.iter().enumerate() {
            let ids: Vec<Option<usize>> = (0..layout.tokens_per_window())
                .map(|t| {
                    let (fy, fx) = layout.frame_position(k, t);
                    let (py, px) = layout.source_position(fy, fx);
                    (!layout.is_pad(py, px)).then_some(py * w + px)
                })
                .collect();
            for a in 0..ids.len() {
                for b in (a + 1)..ids.len() {
                    if let (Some(ia), Some(ib)) = (ids[a], ids[b]) {
                        if !mask.is_blocked(a, b) {
                            sets.union(ia, ib);
                        }
                    }
                }
            }
        }
    }
    let roots: std::collections::BTreeSet<usize> = (0..h * w).map(|i| sets.find(i)).collect();
    Ok(roots.len())
}

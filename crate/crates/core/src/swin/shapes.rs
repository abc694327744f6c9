//! Stage and pyramid shape propagation, plus a parameter-free numeric fuse
//! path for smoke tests.

use std::fmt;

use crate::error::{Error, Result};
use crate::feature::FeatureMap;
use crate::scalar::Scalar;

pub const DEFAULT_PPM_SCALES: [usize; 4] = [1, 2, 3, 6];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackboneConfig {
    pub blocks_per_stage: [usize; 4],
    pub base_dim: usize,
    pub window: usize,
    pub patch_embed: usize,
}

impl BackboneConfig {
    /// Blocks `[2, 2, 18, 2]`, `C = 128`, window 7, 4× patch embedding.
    pub fn swin_base() -> Self {
        BackboneConfig {
            blocks_per_stage: [2, 2, 18, 2],
            base_dim: 128,
            window: 7,
            patch_embed: 4,
        }
    }

    pub fn with_dim(base_dim: usize) -> Self {
        BackboneConfig {
            base_dim,
            ..Self::swin_base()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks_per_stage.contains(&0)
            || self.base_dim == 0
            || self.window == 0
            || self.patch_embed == 0
        {
            return Err(Error::InvalidConfig(format!(
                "backbone values must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

impl Default for BackboneConfig {
    fn default() -> Self {
        Self::swin_base()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    /// Set when the resolution has dropped below one token.
    pub degenerate: bool,
}

impl StageShape {
    fn new(height: usize, width: usize, channels: usize) -> Self {
        StageShape {
            height,
            width,
            channels,
            degenerate: height == 0 || width == 0,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }
}

impl fmt::Display for StageShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)?;
        if self.degenerate {
            f.write_str(" (degenerate)")?;
        }
        Ok(())
    }
}

/// `S_i = (H / (e·2^{i−1}), W / (e·2^{i−1}), C·2^{i−1})` with floor division
/// and `e` the patch-embedding factor.
pub fn backbone_shapes(input_h: usize, input_w: usize, cfg: &BackboneConfig) -> Result<Vec<StageShape>> {
    cfg.validate()?;
    let e = cfg.patch_embed;
    if input_h == 0 || input_w == 0 || input_h % e != 0 || input_w % e != 0 {
        return Err(Error::InvalidConfig(format!(
            "input {input_h}x{input_w} is not divisible by the patch embedding {e}"
        )));
    }
    Ok((0..4)
        .map(|i| {
            let f = e << i;
            StageShape::new(input_h / f, input_w / f, cfg.base_dim << i)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PyramidShapes {
    /// `P_1..P_4`: stage resolutions at the fused channel count.
    pub levels: Vec<StageShape>,
    /// Pooled PPM maps on the last stage, one per scale.
    pub ppm: Vec<StageShape>,
    /// Fused map: `P_1` resolution, fused channels.
    pub fused: StageShape,
}

pub fn pyramid_shapes(
    stages: &[StageShape],
    fused_dim: usize,
    ppm_scales: &[usize],
) -> Result<PyramidShapes> {
    if stages.is_empty() {
        return Err(Error::InvalidConfig("no stages".into()));
    }
    if fused_dim == 0 || ppm_scales.contains(&0) {
        return Err(Error::InvalidConfig(
            "fused channels and PPM scales must be positive".into(),
        ));
    }
    let levels: Vec<StageShape> = stages
        .iter()
        .map(|s| StageShape::new(s.height, s.width, fused_dim))
        .collect();
    let last = stages.last().expect("nonempty");
    let ppm = ppm_scales
        .iter()
        .map(|&s| StageShape::new(s, s, last.channels))
        .collect();
    Ok(PyramidShapes {
        fused: levels[0],
        levels,
        ppm,
    })
}

/// Adaptive average pooling: output cell `i` averages input rows
/// `⌊i·H/h⌋ .. ⌈(i+1)·H/h⌉` (and likewise for columns).
pub fn adaptive_avg_pool<T: Scalar>(map: &FeatureMap<T>, out_h: usize, out_w: usize) -> Result<FeatureMap<T>> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::ZeroDimension);
    }
    let (h, w, c) = (map.height(), map.width(), map.channels());
    let span = |i: usize, n: usize, out: usize| ((i * n) / out, ((i + 1) * n).div_ceil(out));
    let mut data = Vec::with_capacity(out_h * out_w * c);
    for oy in 0..out_h {
        let (y0, y1) = span(oy, h, out_h);
        for ox in 0..out_w {
            let (x0, x1) = span(ox, w, out_w);
            let n = T::from_usize_lossy((y1 - y0) * (x1 - x0));
            for ch in 0..c {
                let mut acc = T::zero();
                for y in y0..y1 {
                    for x in x0..x1 {
                        acc += map.get(y, x, ch);
                    }
                }
                data.push(acc / n);
            }
        }
    }
    FeatureMap::new(out_h, out_w, c, data)
}

fn mean_of<T: Scalar>(maps: &[FeatureMap<T>]) -> Result<FeatureMap<T>> {
    let first = &maps[0];
    let n = T::from_usize_lossy(maps.len());
    let mut data = vec![T::zero(); first.data().len()];
    for m in maps {
        for (a, v) in data.iter_mut().zip(m.data()) {
            *a += *v;
        }
    }
    data.iter_mut().for_each(|a| *a /= n);
    FeatureMap::new(first.height(), first.width(), first.channels(), data)
}

/// Parameter-free stand-in for FPN + PPM: identity laterals, the last stage
/// averaged with its upsampled pooled maps, then every level bilinearly
/// upsampled to the first level's resolution and averaged per pixel. All
/// stages must share one channel count.
pub fn fuse_features<T: Scalar>(stages: &[FeatureMap<T>], ppm_scales: &[usize]) -> Result<FeatureMap<T>> {
    let first = stages
        .first()
        .ok_or_else(|| Error::InvalidConfig("no stages".into()))?;
    if stages.iter().any(|s| s.channels() != first.channels()) {
        return Err(Error::DimensionMismatch(
            "numeric fusion needs equal channel counts".into(),
        ));
    }
    let last = stages.last().expect("nonempty");
    let mut branches = vec![last.clone()];
    for &s in ppm_scales {
        let pooled = adaptive_avg_pool(last, s, s)?;
        branches.push(pooled.resize_bilinear(last.height(), last.width())?);
    }
    let top = mean_of(&branches)?;
    let mut levels: Vec<FeatureMap<T>> = stages[..stages.len() - 1]
        .iter()
        .map(|s| s.resize_bilinear(first.height(), first.width()))
        .collect::<Result<_>>()?;
    levels.push(top.resize_bilinear(first.height(), first.width())?);
    mean_of(&levels)
}

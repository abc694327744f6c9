//! End-to-end evaluation: segmenter and inpainter providers, per-sample
//! scoring over a manifest and bucketed report aggregation.

mod eval;
mod report;

pub use eval::{evaluate_run, EvalOptions};
pub use report::{parse_report_csv, RunReport, SampleFailure, CSV_COLUMNS};

use std::fmt;
use std::path::{Path, PathBuf};

use crate::cr::{cr_inpaint, CrConfig};
use crate::error::{Error, Result};
use crate::raster::{load_mask_png, to_gray, BinaryMask, Raster};

#[derive(Debug, Clone, PartialEq)]
pub enum SegmenterSpec {
    /// Ground-truth mask from the manifest.
    Oracle,
    /// Precomputed masks: a single PNG, or a directory holding `<id>.png`.
    External { source: PathBuf },
    /// Pixels whose luma lies in `[min_luma, max_luma]`.
    Threshold { min_luma: f64, max_luma: f64 },
}

impl SegmenterSpec {
    pub fn threshold_default() -> Self {
        SegmenterSpec::Threshold {
            min_luma: 0.30,
            max_luma: 0.50,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SegmenterSpec::Oracle => "oracle",
            SegmenterSpec::External { .. } => "external",
            SegmenterSpec::Threshold { .. } => "threshold-baseline",
        }
    }

    fn external_path(source: &Path, id: Option<&str>) -> PathBuf {
        match id {
            Some(id) if source.is_dir() => source.join(format!("{id}.png")),
            _ => source.to_path_buf(),
        }
    }
}

impl fmt::Display for SegmenterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmenterSpec::Oracle => f.write_str("oracle"),
            SegmenterSpec::External { source } => write!(f, "external({})", source.display()),
            SegmenterSpec::Threshold { min_luma, max_luma } => {
                write!(f, "threshold-baseline(min={min_luma},max={max_luma})")
            }
        }
    }
}

/// What a segmenter may look at besides the image.
#[derive(Debug, Clone, Copy, Default)]
pub struct SegmentContext<'a> {
    pub sample_id: Option<&'a str>,
    pub ground_truth: Option<&'a BinaryMask>,
}

/// Predicts the scaffold mask of an observed image.
pub fn segment(image: &Raster<f64>, spec: &SegmenterSpec, ctx: SegmentContext<'_>) -> Result<BinaryMask> {
    let mask = match spec {
        SegmenterSpec::Oracle => ctx
            .ground_truth
            .cloned()
            .ok_or_else(|| Error::Segmenter("the oracle needs a ground-truth mask".into()))?,
        SegmenterSpec::External { source } => {
            load_mask_png(SegmenterSpec::external_path(source, ctx.sample_id))?
        }
        SegmenterSpec::Threshold { min_luma, max_luma } => {
            if !(min_luma <= max_luma) {
                return Err(Error::InvalidConfig(format!(
                    "threshold band [{min_luma}, {max_luma}] is empty"
                )));
            }
            let gray = to_gray(image);
            BinaryMask::new(
                gray.width(),
                gray.height(),
                gray.data()
                    .iter()
                    .map(|v| (*min_luma..=*max_luma).contains(v))
                    .collect(),
            )?
        }
    };
    if !mask.matches(image) {
        return Err(Error::Segmenter(format!(
            "{} mask is {}x{}, image {}x{}",
            spec.name(),
            mask.width(),
            mask.height(),
            image.width(),
            image.height()
        )));
    }
    Ok(mask)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InpainterSpec {
    CrPatch {
        alpha: f64,
        patch: usize,
        stride: usize,
        levels: usize,
    },
    /// Jacobi iteration of the discrete Laplace equation over the hole.
    DiffusionFill { max_iters: usize, epsilon: f64 },
    /// Copies ground truth into the hole. Only for audits; never listed by
    /// default.
    DebugIdentity,
}

impl InpainterSpec {
    pub fn cr_patch_default() -> Self {
        InpainterSpec::CrPatch {
            alpha: 10.0,
            patch: 4,
            stride: 2,
            levels: 3,
        }
    }

    pub fn diffusion_default() -> Self {
        InpainterSpec::DiffusionFill {
            max_iters: 2000,
            epsilon: 1e-5,
        }
    }

    /// Providers used when none is named.
    pub fn default_providers() -> Vec<InpainterSpec> {
        vec![Self::cr_patch_default(), Self::diffusion_default()]
    }

    pub fn name(&self) -> &'static str {
        match self {
            InpainterSpec::CrPatch { .. } => "cr-patch",
            InpainterSpec::DiffusionFill { .. } => "diffusion-fill",
            InpainterSpec::DebugIdentity => "debug-identity",
        }
    }

    pub fn needs_ground_truth(&self) -> bool {
        matches!(self, InpainterSpec::DebugIdentity)
    }
}

impl fmt::Display for InpainterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InpainterSpec::CrPatch {
                alpha,
                patch,
                stride,
                levels,
            } => write!(
                f,
                "cr-patch(alpha={alpha},patch={patch},stride={stride},levels={levels})"
            ),
            InpainterSpec::DiffusionFill { max_iters, epsilon } => {
                write!(f, "diffusion-fill(max_iters={max_iters},epsilon={epsilon:e})")
            }
            InpainterSpec::DebugIdentity => f.write_str("debug-identity"),
        }
    }
}

/// Fills the masked pixels of `hole`. Unmasked samples of the result are
/// copied from `hole` bit for bit, whatever the provider.
pub fn inpaint(
    hole: &Raster<f64>,
    mask: &BinaryMask,
    spec: &InpainterSpec,
    ground_truth: Option<&Raster<f64>>,
) -> Result<Raster<f64>> {
    mask.check_matches(hole, "inpaint")?;
    if mask.is_full() {
        return Err(Error::Uninpaintable);
    }
    if mask.is_empty() {
        return Ok(hole.clone());
    }
    let filled = match spec {
        InpainterSpec::CrPatch {
            alpha,
            patch,
            stride,
            levels,
        } => {
            let cfg = CrConfig::with_geometry(*alpha, *patch, *stride);
            cr_inpaint(hole, mask, &cfg, *levels)?
        }
        InpainterSpec::DiffusionFill { max_iters, epsilon } => {
            diffusion_fill(hole, mask, *max_iters, *epsilon)?
        }
        InpainterSpec::DebugIdentity => {
            let gt = ground_truth.ok_or_else(|| {
                Error::InvalidConfig("debug-identity needs the ground-truth image".into())
            })?;
            hole.check_same_shape(gt, "debug-identity")?;
            gt.clone()
        }
    };
    Ok(keep_known(hole, mask, filled))
}

fn keep_known(hole: &Raster<f64>, mask: &BinaryMask, filled: Raster<f64>) -> Raster<f64> {
    let ch = hole.channels();
    let mut data = filled.into_data();
    for ((out, src), &m) in data
        .chunks_exact_mut(ch)
        .zip(hole.data().chunks_exact(ch))
        .zip(mask.bits())
    {
        if !m {
            out.copy_from_slice(src);
        }
    }
    Raster::from_parts_unchecked(hole.width(), hole.height(), hole.space(), data)
}

/// Harmonic fill: missing pixels start at the known mean per channel and are
/// replaced by the average of their in-bounds 4-neighbours until the largest
/// update falls below `epsilon` or `max_iters` sweeps have run.
pub fn diffusion_fill(
    hole: &Raster<f64>,
    mask: &BinaryMask,
    max_iters: usize,
    epsilon: f64,
) -> Result<Raster<f64>> {
    mask.check_matches(hole, "diffusion")?;
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon {epsilon} must be >= 0")));
    }
    if mask.is_full() {
        return Err(Error::Uninpaintable);
    }
    let (w, h, ch) = (hole.width(), hole.height(), hole.channels());
    let mut cur = hole.data().to_vec();
    let mut mean = vec![0.0; ch];
    let n_known = (w * h - mask.count()) as f64;
    for (px, &m) in hole.data().chunks_exact(ch).zip(mask.bits()) {
        if !m {
            for (a, v) in mean.iter_mut().zip(px) {
                *a += v;
            }
        }
    }
    mean.iter_mut().for_each(|a| *a /= n_known);
    let holes: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| mask.get(x, y))
        .collect();
    for &(x, y) in &holes {
        let o = (y * w + x) * ch;
        cur[o..o + ch].copy_from_slice(&mean);
    }
    let mut next = cur.clone();
    for _ in 0..max_iters {
        let mut delta = 0.0f64;
        for &(x, y) in &holes {
            let mut nb = [(0usize, 0usize); 4];
            let mut k = 0;
            if x > 0 {
                nb[k] = (x - 1, y);
                k += 1;
            }
            if x + 1 < w {
                nb[k] = (x + 1, y);
                k += 1;
            }
            if y > 0 {
                nb[k] = (x, y - 1);
                k += 1;
            }
            if y + 1 < h {
                nb[k] = (x, y + 1);
                k += 1;
            }
            let o = (y * w + x) * ch;
            for c in 0..ch {
                let s: f64 = nb[..k].iter().map(|&(nx, ny)| cur[(ny * w + nx) * ch + c]).sum();
                let v = s / k as f64;
                delta = delta.max((v - cur[o + c]).abs());
                next[o + c] = v;
            }
        }
        std::mem::swap(&mut cur, &mut next);
        if delta < epsilon {
            break;
        }
    }
    Raster::new(w, h, hole.space(), cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ColorSpace;

    #[test]
    fn providers_keep_known_pixels() {
        let gt = Raster::from_fn(16, 12, ColorSpace::Rgb, |x, y, c| ((x * 7 + y * 3 + c) % 11) as f64 / 10.0)
            .unwrap();
        let mask = BinaryMask::from_fn(16, 12, |x, y| (4..9).contains(&x) && (3..7).contains(&y)).unwrap();
        let hole = crate::synthesis::subtract(&gt, &mask, 1.0).unwrap();
        for spec in [
            InpainterSpec::cr_patch_default(),
            InpainterSpec::diffusion_default(),
            InpainterSpec::DebugIdentity,
        ] {
            let out = inpaint(&hole, &mask, &spec, Some(&gt)).unwrap();
            for (i, &m) in mask.bits().iter().enumerate() {
                if !m {
                    assert_eq!(out.data()[i * 3..i * 3 + 3], hole.data()[i * 3..i * 3 + 3], "{spec}");
                }
            }
        }
        let id = inpaint(&hole, &mask, &InpainterSpec::DebugIdentity, Some(&gt)).unwrap();
        assert_eq!(id, gt);
        assert!(inpaint(&hole, &mask, &InpainterSpec::DebugIdentity, None).is_err());
    }

    #[test]
    fn full_and_empty_masks() {
        let img = Raster::<f64>::filled(6, 6, ColorSpace::Gray, 0.4).unwrap();
        let full = BinaryMask::full(6, 6).unwrap();
        for spec in [InpainterSpec::cr_patch_default(), InpainterSpec::diffusion_default()] {
            assert!(matches!(inpaint(&img, &full, &spec, None), Err(Error::Uninpaintable)));
            let empty = BinaryMask::empty(6, 6).unwrap();
            assert_eq!(inpaint(&img, &empty, &spec, None).unwrap(), img);
        }
    }

    #[test]
    fn diffusion_on_constant_and_ramp() {
        let img = Raster::<f64>::filled(20, 20, ColorSpace::Rgb, 0.35).unwrap();
        let mask = BinaryMask::from_fn(20, 20, |x, y| (5..15).contains(&x) && (2..18).contains(&y)).unwrap();
        let hole = crate::synthesis::subtract(&img, &mask, 1.0).unwrap();
        let out = diffusion_fill(&hole, &mask, 500, 1e-12).unwrap();
        assert!(out.data().iter().all(|v| (v - 0.35).abs() < 1e-12));
        // a linear ramp is harmonic, so the fill converges to it
        let ramp = Raster::from_fn(20, 20, ColorSpace::Gray, |x, _, _| x as f64 / 19.0).unwrap();
        let hole = crate::synthesis::subtract(&ramp, &mask, 1.0).unwrap();
        let out = diffusion_fill(&hole, &mask, 20_000, 1e-13).unwrap();
        for (a, b) in out.data().iter().zip(ramp.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn threshold_and_oracle_segmenters() {
        let img = Raster::<f64>::filled(5, 4, ColorSpace::Rgb, 0.9).unwrap();
        let m = segment(&img, &SegmenterSpec::threshold_default(), SegmentContext::default()).unwrap();
        assert!(m.is_empty());
        let band = SegmenterSpec::Threshold {
            min_luma: 0.8,
            max_luma: 1.0,
        };
        assert!(segment(&img, &band, SegmentContext::default()).unwrap().is_full());
        assert!(segment(&img, &SegmenterSpec::Oracle, SegmentContext::default()).is_err());
        let gt = BinaryMask::from_fn(5, 4, |x, _| x == 2).unwrap();
        let ctx = SegmentContext {
            ground_truth: Some(&gt),
            ..Default::default()
        };
        assert_eq!(segment(&img, &SegmenterSpec::Oracle, ctx).unwrap(), gt);
        let small = BinaryMask::empty(2, 2).unwrap();
        let ctx = SegmentContext {
            ground_truth: Some(&small),
            ..Default::default()
        };
        assert!(segment(&img, &SegmenterSpec::Oracle, ctx).is_err());
    }
}

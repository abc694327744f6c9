//! Coarse-to-fine patch inpainting on a raw-pixel pyramid.

use crate::error::{Error, Result};
use crate::raster::{bilinear_resample, BinaryMask, Raster};
use crate::scalar::Scalar;

use super::{extract_patches, reconstruct_patches, similarity_matrix, CrConfig, FeatureMap};

/// Halves a level. A coarse pixel is missing only when its whole footprint
/// is missing; otherwise it is the mean of the footprint's known pixels.
fn downsample<T: Scalar>(img: &FeatureMap<T>, mask: &BinaryMask) -> (FeatureMap<T>, BinaryMask) {
    let (h, w, ch) = (img.height(), img.width(), img.channels());
    let (ch_h, ch_w) = (h.div_ceil(2), w.div_ceil(2));
    let mut out = FeatureMap::zeros(ch_h, ch_w, ch).expect("nonzero dims");
    let mut coarse_mask = BinaryMask::empty(ch_w, ch_h).expect("nonzero dims");
    for cy in 0..ch_h {
        for cx in 0..ch_w {
            let mut acc = vec![T::zero(); ch];
            let mut n = 0usize;
            for y in (2 * cy)..(2 * cy + 2).min(h) {
                for x in (2 * cx)..(2 * cx + 2).min(w) {
                    if !mask.get(x, y) {
                        for (a, v) in acc.iter_mut().zip(img.pixel(y, x)) {
                            *a += *v;
                        }
                        n += 1;
                    }
                }
            }
            if n == 0 {
                coarse_mask.set(cx, cy, true);
            } else {
                let nf = T::from_usize_lossy(n);
                for (o, a) in out.pixel_mut(cy, cx).iter_mut().zip(acc) {
                    *o = a / nf;
                }
            }
        }
    }
    (out, coarse_mask)
}

/// Missing pixels take the per-channel mean of the known ones.
fn seed_with_mean<T: Scalar>(img: &mut FeatureMap<T>, mask: &BinaryMask) {
    let ch = img.channels();
    let mut acc = vec![T::zero(); ch];
    let mut n = 0usize;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if !mask.get(x, y) {
                for (a, v) in acc.iter_mut().zip(img.pixel(y, x)) {
                    *a += *v;
                }
                n += 1;
            }
        }
    }
    if n == 0 {
        return;
    }
    let nf = T::from_usize_lossy(n);
    let mean: Vec<T> = acc.into_iter().map(|a| a / nf).collect();
    for y in 0..img.height() {
        for x in 0..img.width() {
            if mask.get(x, y) {
                img.pixel_mut(y, x).copy_from_slice(&mean);
            }
        }
    }
}

fn restore_known<T: Scalar>(dst: &mut FeatureMap<T>, src: &FeatureMap<T>, mask: &BinaryMask) {
    for y in 0..dst.height() {
        for x in 0..dst.width() {
            if !mask.get(x, y) {
                let v = src.pixel(y, x).to_vec();
                dst.pixel_mut(y, x).copy_from_slice(&v);
            }
        }
    }
}

/// One reconstruction pass. Returns the estimate unchanged when the level
/// has no complete patch to copy from.
fn cr_pass<T: Scalar>(
    estimate: &FeatureMap<T>,
    mask: &BinaryMask,
    cfg: &CrConfig<T>,
) -> Result<FeatureMap<T>> {
    let grid = extract_patches(estimate, mask, cfg)?;
    if grid.known_set().is_empty() || grid.missing_set().is_empty() {
        return Ok(estimate.clone());
    }
    let sim = similarity_matrix(&grid, cfg)?;
    let mut out = reconstruct_patches(&grid, &sim, estimate, cfg)?;
    restore_known(&mut out, estimate, mask);
    Ok(out)
}

/// Fills the `true` pixels of `mask` in `hole`.
///
/// The hole image and mask are halved up to `levels − 1` times (stopping
/// before a level would be smaller than one patch). The coarsest level is
/// seeded with the known mean and reconstructed with masked similarity;
/// each finer level upsamples the previous estimate, reinserts its known
/// pixels and is reconstructed again comparing whole patches. Known pixels
/// of the output equal those of `hole` exactly.
pub fn cr_inpaint<T: Scalar>(
    hole: &Raster<T>,
    mask: &BinaryMask,
    cfg: &CrConfig<T>,
    levels: usize,
) -> Result<Raster<T>> {
    cfg.validate()?;
    mask.check_matches(hole, "cr_inpaint")?;
    if levels == 0 {
        return Err(Error::InvalidConfig("pyramid needs at least one level".into()));
    }
    if mask.is_full() {
        return Err(Error::Uninpaintable);
    }
    if mask.is_empty() {
        return Ok(hole.clone());
    }
    let p = cfg.patch;
    if hole.width() < p || hole.height() < p {
        return Err(Error::TooSmall(format!(
            "{}x{} image is smaller than one {p}x{p} patch",
            hole.width(),
            hole.height()
        )));
    }

    let mut pyramid = vec![(FeatureMap::from_raster(hole), mask.clone())];
    while pyramid.len() < levels {
        let (img, m) = pyramid.last().expect("nonempty");
        if img.height().div_ceil(2) < p || img.width().div_ceil(2) < p {
            break;
        }
        let next = downsample(img, m);
        pyramid.push(next);
    }

    let (coarse, coarse_mask) = pyramid.last().expect("nonempty");
    let mut estimate = coarse.clone();
    seed_with_mean(&mut estimate, coarse_mask);
    estimate = cr_pass(&estimate, coarse_mask, cfg)?;

    let guided = CrConfig {
        masked_similarity: false,
        ..cfg.clone()
    };
    for (img, m) in pyramid.iter().rev().skip(1) {
        let up = bilinear_resample(&estimate.to_raster()?, img.width(), img.height())?;
        estimate = FeatureMap::from_raster(&up);
        restore_known(&mut estimate, img, m);
        estimate = cr_pass(&estimate, m, &guided)?;
    }

    let mut out = estimate.to_raster()?;
    for y in 0..hole.height() {
        for x in 0..hole.width() {
            if !mask.get(x, y) {
                for c in 0..hole.channels() {
                    out.set(x, y, c, hole.get(x, y, c));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ColorSpace;

    #[test]
    fn coarse_mask_rule() {
        let img = FeatureMap::new(2, 3, 1, vec![0.2, 0.4, 0.6, 0.8, 1.0, 0.0]).unwrap();
        let mut m = BinaryMask::empty(3, 2).unwrap();
        m.set(0, 0, true);
        m.set(1, 0, true);
        m.set(0, 1, true);
        m.set(2, 0, true);
        m.set(2, 1, true);
        let (c, cm) = downsample(&img, &m);
        assert_eq!((c.height(), c.width()), (1, 2));
        assert!(!cm.get(0, 0));
        assert_eq!(c.get(0, 0, 0), 1.0);
        assert!(cm.get(1, 0));
    }

    #[test]
    fn edge_cases() {
        let img = Raster::<f64>::filled(8, 8, ColorSpace::Rgb, 0.4).unwrap();
        let cfg = CrConfig::default();
        let empty = BinaryMask::empty(8, 8).unwrap();
        assert_eq!(cr_inpaint(&img, &empty, &cfg, 2).unwrap(), img);
        let full = BinaryMask::full(8, 8).unwrap();
        assert!(matches!(cr_inpaint(&img, &full, &cfg, 2), Err(Error::Uninpaintable)));
        let mut m = empty.clone();
        m.set(3, 3, true);
        assert!(cr_inpaint(&img, &m, &cfg, 0).is_err());
        let small = Raster::<f64>::filled(3, 3, ColorSpace::Gray, 0.4).unwrap();
        let mut sm = BinaryMask::empty(3, 3).unwrap();
        sm.set(1, 1, true);
        assert!(matches!(cr_inpaint(&small, &sm, &cfg, 1), Err(Error::TooSmall(_))));
    }

    #[test]
    fn constant_image_stays_constant() {
        let mut img = Raster::<f64>::filled(24, 20, ColorSpace::Rgb, 0.35).unwrap();
        let m = BinaryMask::from_fn(24, 20, |x, y| (x * 7 + y * 3) % 5 < 2).unwrap();
        for y in 0..20 {
            for x in 0..24 {
                if m.get(x, y) {
                    for c in 0..3 {
                        img.set(x, y, c, 1.0);
                    }
                }
            }
        }
        for levels in 1..=3 {
            let out = cr_inpaint(&img, &m, &CrConfig::default(), levels).unwrap();
            assert!(out.data().iter().all(|v| (v - 0.35).abs() < 1e-6));
        }
    }
}

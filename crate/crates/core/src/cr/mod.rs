//! Contextual reconstruction: missing patches are replaced by a
//! softmax-weighted average of known patches, weighted by cosine similarity.
//!
//! Feature maps are `H×W×C`, indexed `(y, x, c)`. A patch vector lists its
//! `p×p` positions row-major with the channels of each position adjacent.

mod inpaint;

pub use inpaint::cr_inpaint;
pub use crate::feature::FeatureMap;

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;
use crate::scalar::Scalar;

/// Added to each norm factor of the cosine.
pub const NORM_EPS: f64 = 1e-8;

/// Similarity feature transform `s(·)`. It sees a patch together with the
/// positions that may be used for comparison.
pub trait SimilarityEncoder<T: Scalar>: fmt::Debug + Send + Sync {
    /// Writes the encoding of `patch` into `out` (cleared first). `visible`
    /// has one flag per spatial position.
    fn encode_into(&self, patch: &[T], visible: &[bool], channels: usize, out: &mut Vec<T>);
}

/// Identity on visible positions, zero elsewhere, rescaled by
/// `sqrt(total / visible)` so partial patches keep a comparable norm.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaskedIdentity;

impl<T: Scalar> SimilarityEncoder<T> for MaskedIdentity {
    fn encode_into(&self, patch: &[T], visible: &[bool], channels: usize, out: &mut Vec<T>) {
        out.clear();
        let shown = visible.iter().filter(|v| **v).count();
        if shown == 0 {
            out.resize(patch.len(), T::zero());
            return;
        }
        let scale = (T::from_usize_lossy(visible.len()) / T::from_usize_lossy(shown)).sqrt();
        for (pos, chunk) in patch.chunks_exact(channels).enumerate() {
            if visible[pos] {
                out.extend(chunk.iter().map(|v| *v * scale));
            } else {
                out.extend(std::iter::repeat_n(T::zero(), channels));
            }
        }
    }
}

/// Per-patch local loss `l_i`.
pub trait PatchLoss<T: Scalar>: fmt::Debug + Send + Sync {
    fn loss(&self, reconstructed: &[T], reference: &[T]) -> T;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MeanAbsolute;

impl<T: Scalar> PatchLoss<T> for MeanAbsolute {
    fn loss(&self, reconstructed: &[T], reference: &[T]) -> T {
        let sum: T = reconstructed
            .iter()
            .zip(reference)
            .map(|(a, b)| (*a - *b).abs())
            .sum();
        sum / T::from_usize_lossy(reconstructed.len().max(1))
    }
}

#[derive(Debug, Clone)]
pub struct CrConfig<T: Scalar> {
    /// Softmax temperature.
    pub alpha: T,
    pub patch: usize,
    pub stride: usize,
    /// Compare only the positions a missing patch actually knows. When off,
    /// every position counts (used once a coarse estimate fills the hole).
    pub masked_similarity: bool,
    pub encoder: Arc<dyn SimilarityEncoder<T>>,
    pub local_loss: Arc<dyn PatchLoss<T>>,
}

impl<T: Scalar> Default for CrConfig<T> {
    fn default() -> Self {
        CrConfig {
            alpha: T::lit(10.0),
            patch: 4,
            stride: 2,
            masked_similarity: true,
            encoder: Arc::new(MaskedIdentity),
            local_loss: Arc::new(MeanAbsolute),
        }
    }
}

impl<T: Scalar> CrConfig<T> {
    pub fn with_geometry(alpha: T, patch: usize, stride: usize) -> Self {
        CrConfig {
            alpha,
            patch,
            stride,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= T::zero()) || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig(format!("alpha {} must be finite and >= 0", self.alpha)));
        }
        if self.patch == 0 {
            return Err(Error::InvalidConfig("patch side must be >= 1".into()));
        }
        if self.stride == 0 || self.stride > self.patch {
            return Err(Error::InvalidConfig(format!(
                "stride {} outside 1..={}",
                self.stride, self.patch
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch<T> {
    pub y: usize,
    pub x: usize,
    pub vector: Vec<T>,
    /// One flag per spatial position, row-major.
    pub known: Vec<bool>,
}

impl<T> Patch<T> {
    pub fn is_complete(&self) -> bool {
        self.known.iter().all(|k| *k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid<T> {
    height: usize,
    width: usize,
    channels: usize,
    patch: usize,
    stride: usize,
    patches: Vec<Patch<T>>,
    known_set: Vec<usize>,
    missing_set: Vec<usize>,
}

impl<T: Scalar> PatchGrid<T> {
    pub fn patch_side(&self) -> usize {
        self.patch
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn patches(&self) -> &[Patch<T>] {
        &self.patches
    }

    /// Indices of patches without missing pixels (`V`).
    pub fn known_set(&self) -> &[usize] {
        &self.known_set
    }

    /// Indices of patches with at least one missing pixel (`V′`).
    pub fn missing_set(&self) -> &[usize] {
        &self.missing_set
    }
}

/// Origins along one axis: every `stride` step, plus a final origin flush
/// with the far border when the steps leave a remainder.
pub fn axis_origins(len: usize, patch: usize, stride: usize) -> Vec<usize> {
    if patch > len || stride == 0 {
        return Vec::new();
    }
    let last = len - patch;
    let mut v: Vec<usize> = (0..=last).step_by(stride).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

/// `mask` is `true` on missing pixels.
pub fn extract_patches<T: Scalar>(
    feature: &FeatureMap<T>,
    mask: &BinaryMask,
    cfg: &CrConfig<T>,
) -> Result<PatchGrid<T>> {
    cfg.validate()?;
    if mask.width() != feature.width() || mask.height() != feature.height() {
        return Err(Error::DimensionMismatch(format!(
            "mask {}x{} vs feature {}x{}",
            mask.width(),
            mask.height(),
            feature.width(),
            feature.height()
        )));
    }
    let p = cfg.patch;
    if feature.height() < p || feature.width() < p {
        return Err(Error::TooSmall(format!(
            "{}x{} feature is smaller than one {p}x{p} patch",
            feature.height(),
            feature.width()
        )));
    }
    let ys = axis_origins(feature.height(), p, cfg.stride);
    let xs = axis_origins(feature.width(), p, cfg.stride);
    let mut patches = Vec::with_capacity(ys.len() * xs.len());
    let (mut known_set, mut missing_set) = (Vec::new(), Vec::new());
    for &y in &ys {
        for &x in &xs {
            let mut known = Vec::with_capacity(p * p);
            for dy in 0..p {
                for dx in 0..p {
                    known.push(!mask.get(x + dx, y + dy));
                }
            }
            let patch = Patch {
                y,
                x,
                vector: feature.patch(y, x, p),
                known,
            };
            if patch.is_complete() {
                known_set.push(patches.len());
            } else {
                missing_set.push(patches.len());
            }
            patches.push(patch);
        }
    }
    Ok(PatchGrid {
        height: feature.height(),
        width: feature.width(),
        channels: feature.channels(),
        patch: p,
        stride: cfg.stride,
        patches,
        known_set,
        missing_set,
    })
}

/// Row `r` belongs to the `r`-th missing patch, column `c` to the `c`-th
/// known patch, both in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    rows: usize,
    cols: usize,
    values: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged similarity rows".into()));
        }
        Ok(SimilarityMatrix {
            rows: rows.len(),
            cols,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.values[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }
}

fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let eps = T::lit(NORM_EPS);
    let (mut dot, mut na, mut nb) = (T::zero(), T::zero(), T::zero());
    for (x, y) in a.iter().zip(b) {
        dot += *x * *y;
        na += *x * *x;
        nb += *y * *y;
    }
    dot / ((na.sqrt() + eps) * (nb.sqrt() + eps))
}

pub fn similarity_matrix<T: Scalar>(
    grid: &PatchGrid<T>,
    cfg: &CrConfig<T>,
) -> Result<SimilarityMatrix<T>> {
    if grid.known_set.is_empty() {
        return Err(Error::Uninpaintable);
    }
    if grid.missing_set.is_empty() {
        return Err(Error::NothingToReconstruct);
    }
    let all_visible = vec![true; grid.patch * grid.patch];
    let ch = grid.channels;
    let rows: Vec<Vec<T>> = grid
        .missing_set
        .par_iter()
        .map(|&i| {
            let ui = &grid.patches[i];
            let visible = if cfg.masked_similarity {
                &ui.known
            } else {
                &all_visible
            };
            let mut ei = Vec::new();
            let mut ej = Vec::new();
            cfg.encoder.encode_into(&ui.vector, visible, ch, &mut ei);
            grid.known_set
                .iter()
                .map(|&j| {
                    cfg.encoder
                        .encode_into(&grid.patches[j].vector, visible, ch, &mut ej);
                    cosine(&ei, &ej)
                })
                .collect()
        })
        .collect();
    SimilarityMatrix::from_rows(rows)
}

/// `softmax(alpha · row)` with max subtraction.
pub fn softmax<T: Scalar>(alpha: T, row: &[T]) -> Vec<T> {
    let exps = softmax_numerators(alpha, row);
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn softmax_numerators<T: Scalar>(alpha: T, row: &[T]) -> Vec<T> {
    let scaled: Vec<T> = row.iter().map(|s| alpha * *s).collect();
    let max = scaled.iter().fold(T::neg_infinity(), |m, v| m.max(*v));
    scaled.into_iter().map(|v| (v - max).exp()).collect()
}

/// Replaces every missing patch with the softmax-weighted average of the
/// corresponding known patches of `target`. Pixels covered by several
/// missing patches take the plain mean of their reconstructions; pixels
/// covered by no missing patch keep the value from `target`.
pub fn reconstruct_patches<T: Scalar>(
    grid: &PatchGrid<T>,
    sim: &SimilarityMatrix<T>,
    target: &FeatureMap<T>,
    cfg: &CrConfig<T>,
) -> Result<FeatureMap<T>> {
    if (target.height(), target.width()) != (grid.height, grid.width) {
        return Err(Error::DimensionMismatch(format!(
            "target {}x{} vs grid {}x{}",
            target.height(), target.width(), grid.height, grid.width
        )));
    }
    if sim.rows != grid.missing_set.len() || sim.cols != grid.known_set.len() {
        return Err(Error::DimensionMismatch(format!(
            "similarity {}x{} for {} missing and {} known patches",
            sim.rows,
            sim.cols,
            grid.missing_set.len(),
            grid.known_set.len()
        )));
    }
    let p = grid.patch;
    let known_patches: Vec<Vec<T>> = grid
        .known_set
        .iter()
        .map(|&j| {
            let u = &grid.patches[j];
            target.patch(u.y, u.x, p)
        })
        .collect();

    // Weighted sum divided by the sum of weights: with equal weights this is
    // the plain mean, and a single known patch is copied exactly.
    let rebuilt: Vec<Vec<T>> = (0..sim.rows)
        .into_par_iter()
        .map(|r| {
            let num = softmax_numerators(cfg.alpha, sim.row(r));
            let total: T = num.iter().copied().sum();
            let mut acc = vec![T::zero(); known_patches[0].len()];
            for (w, f) in num.iter().zip(&known_patches) {
                for (a, v) in acc.iter_mut().zip(f) {
                    *a += *w * *v;
                }
            }
            acc.iter_mut().for_each(|a| *a /= total);
            acc
        })
        .collect();

    let mut out = target.clone();
    let ch = target.channels();
    let mut sum = vec![T::zero(); target.data().len()];
    let mut count = vec![0usize; target.height() * target.width()];
    for (&i, vals) in grid.missing_set.iter().zip(&rebuilt) {
        let u = &grid.patches[i];
        for dy in 0..p {
            for dx in 0..p {
                let (y, x) = (u.y + dy, u.x + dx);
                let o = target.offset(y, x);
                let src = (dy * p + dx) * ch;
                for c in 0..ch {
                    sum[o + c] += vals[src + c];
                }
                count[y * target.width() + x] += 1;
            }
        }
    }
    for (pix, &n) in count.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let o = pix * ch;
        let nf = T::from_usize_lossy(n);
        for c in 0..ch {
            out.data_mut()[o + c] = if n == 1 { sum[o + c] } else { sum[o + c] / nf };
        }
    }
    Ok(out)
}

/// Sum over missing patches of the local loss between the reconstructed
/// and reference patch at the same location.
pub fn cr_loss<T: Scalar>(
    reconstructed: &FeatureMap<T>,
    reference: &FeatureMap<T>,
    grid: &PatchGrid<T>,
    cfg: &CrConfig<T>,
) -> Result<T> {
    reconstructed.same_shape(reference, "cr_loss")?;
    if (reference.height(), reference.width()) != (grid.height, grid.width) {
        return Err(Error::DimensionMismatch("cr_loss: grid does not match maps".into()));
    }
    let p = grid.patch;
    Ok(grid
        .missing_set
        .iter()
        .map(|&i| {
            let u = &grid.patches[i];
            cfg.local_loss
                .loss(&reconstructed.patch(u.y, u.x, p), &reference.patch(u.y, u.x, p))
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map4(vals: [f64; 16]) -> FeatureMap<f64> {
        FeatureMap::new(4, 4, 1, vals.to_vec()).unwrap()
    }

    fn mask_at(w: usize, h: usize, missing: &[(usize, usize)]) -> BinaryMask {
        let mut m = BinaryMask::empty(w, h).unwrap();
        for &(x, y) in missing {
            m.set(x, y, true);
        }
        m
    }

    #[test]
    fn origins_cover_the_border() {
        assert_eq!(axis_origins(4, 2, 2), vec![0, 2]);
        assert_eq!(axis_origins(5, 2, 2), vec![0, 2, 3]);
        assert_eq!(axis_origins(7, 3, 1), vec![0, 1, 2, 3, 4]);
        assert_eq!(axis_origins(3, 3, 2), vec![0]);
        assert!(axis_origins(2, 3, 1).is_empty());
    }

    #[test]
    fn hand_partition() {
        let cfg = CrConfig::with_geometry(1.0, 2, 2);
        let f = map4([0.0; 16]);
        let g = extract_patches(&f, &mask_at(4, 4, &[(0, 0)]), &cfg).unwrap();
        assert_eq!(g.missing_set(), &[0]);
        assert_eq!(g.known_set(), &[1, 2, 3]);
        assert_eq!(g.patches()[0].known, vec![false, true, true, true]);

        let none = extract_patches(&f, &BinaryMask::empty(4, 4).unwrap(), &cfg).unwrap();
        assert_eq!(none.known_set().len(), 4);
        assert!(none.missing_set().is_empty());
        let all = extract_patches(&f, &BinaryMask::full(4, 4).unwrap(), &cfg).unwrap();
        assert!(all.known_set().is_empty());
        assert_eq!(all.missing_set().len(), 4);

        assert!(matches!(
            similarity_matrix(&none, &cfg),
            Err(Error::NothingToReconstruct)
        ));
        assert!(matches!(similarity_matrix(&all, &cfg), Err(Error::Uninpaintable)));
    }

    #[test]
    fn config_bounds() {
        assert!(CrConfig::<f64>::with_geometry(-1.0, 2, 2).validate().is_err());
        assert!(CrConfig::<f64>::with_geometry(1.0, 0, 1).validate().is_err());
        assert!(CrConfig::<f64>::with_geometry(1.0, 2, 3).validate().is_err());
        assert!(CrConfig::<f64>::with_geometry(1.0, 2, 0).validate().is_err());
        assert!(CrConfig::<f64>::with_geometry(0.0, 1, 1).validate().is_ok());
        let f = FeatureMap::<f64>::zeros(3, 3, 1).unwrap();
        let cfg = CrConfig::with_geometry(1.0, 4, 2);
        assert!(matches!(
            extract_patches(&f, &BinaryMask::empty(3, 3).unwrap(), &cfg),
            Err(Error::TooSmall(_))
        ));
    }

    #[test]
    fn cosine_extremes() {
        let a = [0.3f64, -0.2, 0.9];
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-6);
        assert!((cosine(&a, &neg) + 1.0).abs() < 1e-6);
        assert!(cosine(&[1.0f64, 0.0], &[0.0, 2.0]).abs() < 1e-6);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn masked_encoder_zero_fills() {
        let mut out = Vec::new();
        let patch = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        SimilarityEncoder::<f64>::encode_into(
            &MaskedIdentity,
            &patch,
            &[true, false, false, true],
            2,
            &mut out,
        );
        let s = 2f64.sqrt();
        assert_eq!(out, vec![0.1 * s, 0.2 * s, 0.0, 0.0, 0.0, 0.0, 0.7 * s, 0.8 * s]);
    }

    #[test]
    fn softmax_rows() {
        let w = softmax(0.0, &[0.3, -0.1, 0.9]);
        assert!(w.iter().all(|v| *v == 1.0 / 3.0));
        let w = softmax(1e6, &[0.2, 0.9, 0.1]);
        assert_eq!(w[1], 1.0);
        let w = softmax(1.0, &[0.5, 0.25]);
        let e = (0.5f64.exp(), 0.25f64.exp());
        assert!((w[0] - e.0 / (e.0 + e.1)).abs() < 1e-15);
    }

    #[test]
    fn loss_sums_patches() {
        let cfg = CrConfig::with_geometry(1.0, 2, 2);
        let reference = map4([0.5; 16]);
        let mut rec = reference.clone();
        let mask = mask_at(4, 4, &[(0, 0), (3, 3)]);
        let grid = extract_patches(&reference, &mask, &cfg).unwrap();
        assert_eq!(cr_loss(&rec, &reference, &grid, &cfg).unwrap(), 0.0);
        for (y, x) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            rec.set(y, x, 0, 0.7);
        }
        assert!((cr_loss(&rec, &reference, &grid, &cfg).unwrap() - 0.2).abs() < 1e-12);
        rec.set(3, 3, 0, 0.9);
        // second patch: one pixel off by 0.4 over four pixels
        assert!((cr_loss(&rec, &reference, &grid, &cfg).unwrap() - 0.3).abs() < 1e-12);
        // known patches do not contribute
        rec.set(0, 3, 0, 0.0);
        assert!((cr_loss(&rec, &reference, &grid, &cfg).unwrap() - 0.3).abs() < 1e-12);
    }
}

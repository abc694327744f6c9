//! Segmentation and restoration quality metrics: MIoU, MAE, PSNR, SSIM and
//! the Fréchet distance between Gaussian fits of embedding sets.

mod frechet;
mod ssim;

pub use frechet::{
    fit_gaussian, frechet_distance, pixel_embedding, EmbeddingSet, Gaussian, ImageEmbedding,
    PixelEmbedding,
};
pub use ssim::{ssim, SSIM_WINDOW};

use std::fmt;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Raster};
use crate::scalar::Scalar;
use crate::synthesis::ProportionBucket;

/// Prediction and ground truth over the two classes scaffold (`true`) and
/// background (`false`).
#[derive(Debug, Clone)]
pub struct SegmentationPair {
    prediction: BinaryMask,
    ground_truth: BinaryMask,
}

impl SegmentationPair {
    pub fn new(prediction: BinaryMask, ground_truth: BinaryMask) -> Result<Self> {
        if prediction.width() != ground_truth.width()
            || prediction.height() != ground_truth.height()
        {
            return Err(Error::DimensionMismatch(format!(
                "segmentation pair {}x{} vs {}x{}",
                prediction.width(),
                prediction.height(),
                ground_truth.width(),
                ground_truth.height()
            )));
        }
        Ok(SegmentationPair {
            prediction,
            ground_truth,
        })
    }

    pub fn prediction(&self) -> &BinaryMask {
        &self.prediction
    }

    pub fn ground_truth(&self) -> &BinaryMask {
        &self.ground_truth
    }

    /// Mean IoU over the two classes. A class absent from both masks counts
    /// as IoU 1.
    pub fn miou(&self) -> f64 {
        let (mut tp, mut fp, mut fnn, mut tn) = (0usize, 0usize, 0usize, 0usize);
        for (&p, &g) in self.prediction.bits().iter().zip(self.ground_truth.bits()) {
            match (p, g) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fnn += 1,
                (false, false) => tn += 1,
            }
        }
        let iou = |inter: usize, union: usize| {
            if union == 0 {
                1.0
            } else {
                inter as f64 / union as f64
            }
        };
        let scaffold = iou(tp, tp + fp + fnn);
        let background = iou(tn, tn + fp + fnn);
        (scaffold + background) / 2.0
    }
}

pub fn miou(prediction: &BinaryMask, ground_truth: &BinaryMask) -> Result<f64> {
    Ok(SegmentationPair::new(prediction.clone(), ground_truth.clone())?.miou())
}

/// Mean absolute sample difference.
pub fn mae<T: Scalar>(restored: &Raster<T>, gt: &Raster<T>) -> Result<T> {
    restored.check_same_shape(gt, "mae")?;
    let sum: T = restored
        .data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| (*a - *b).abs())
        .sum();
    Ok(sum / T::from_usize_lossy(restored.data().len()))
}

pub fn mse<T: Scalar>(restored: &Raster<T>, gt: &Raster<T>) -> Result<T> {
    restored.check_same_shape(gt, "mse")?;
    let sum: T = restored
        .data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .sum();
    Ok(sum / T::from_usize_lossy(restored.data().len()))
}

/// PSNR in dB for dynamic range 1. Identical inputs give `+inf`.
pub fn psnr<T: Scalar>(restored: &Raster<T>, gt: &Raster<T>) -> Result<T> {
    let mse = mse(restored, gt)?;
    if mse == T::zero() {
        return Ok(T::infinity());
    }
    Ok(T::lit(10.0) * (T::one() / mse).log10())
}

/// Row label of a metrics table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowKey {
    Bucket(ProportionBucket),
    Total,
}

impl RowKey {
    pub fn parse(s: &str) -> Option<Self> {
        if s.eq_ignore_ascii_case("total") {
            Some(RowKey::Total)
        } else {
            ProportionBucket::from_label(s).map(RowKey::Bucket)
        }
    }
}

impl fmt::Display for RowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowKey::Bucket(b) => write!(f, "{b}"),
            RowKey::Total => f.write_str("Total"),
        }
    }
}

/// Averages for one missing-rate bucket (or the total). `psnr` may be
/// `+inf`; `frechet` is `None` when fewer than two samples exist.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub key: RowKey,
    pub n: usize,
    pub mae: f64,
    pub ssim: f64,
    pub psnr: f64,
    pub frechet: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub rows: Vec<MetricsRow>,
}

impl MetricsReport {
    pub fn total(&self) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.key == RowKey::Total)
    }

    pub fn bucket(&self, b: ProportionBucket) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.key == RowKey::Bucket(b))
    }

    /// Bucket counts must add up to the total's count.
    pub fn check_partition(&self) -> Result<()> {
        let total = self.total().map_or(0, |r| r.n);
        let sum: usize = self
            .rows
            .iter()
            .filter(|r| r.key != RowKey::Total)
            .map(|r| r.n)
            .sum();
        if sum == total {
            Ok(())
        } else {
            Err(Error::Report(format!(
                "bucket rows hold {sum} samples, total row {total}"
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ColorSpace;

    fn mask(bits: &[u8], w: usize) -> BinaryMask {
        BinaryMask::new(w, bits.len() / w, bits.iter().map(|b| *b == 1).collect()).unwrap()
    }

    #[test]
    fn miou_hand_cases() {
        let gt = mask(&[1, 1, 0, 0], 2);
        assert_eq!(miou(&gt, &gt).unwrap(), 1.0);
        let bg = mask(&[0, 0, 0, 0], 2);
        // scaffold 0/2, background 2/4
        assert_eq!(miou(&bg, &gt).unwrap(), 0.25);
        assert_eq!(miou(&gt.complement(), &gt).unwrap(), 0.0);
        // vacuous scaffold class
        assert_eq!(miou(&bg, &bg).unwrap(), 1.0);
        assert!(miou(&mask(&[0, 0], 2), &gt).is_err());
    }

    #[test]
    fn pixel_errors() {
        let a = Raster::<f64>::filled(4, 3, ColorSpace::Rgb, 0.3).unwrap();
        let b = Raster::<f64>::filled(4, 3, ColorSpace::Rgb, 0.4).unwrap();
        assert_eq!(mae(&a, &a).unwrap(), 0.0);
        assert!((mae(&a, &b).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
        let zero = Raster::<f64>::filled(4, 3, ColorSpace::Rgb, 0.0).unwrap();
        let one = Raster::<f64>::filled(4, 3, ColorSpace::Rgb, 1.0).unwrap();
        assert!(psnr(&zero, &one).unwrap().abs() < 1e-9);
        let g = Raster::<f64>::filled(4, 3, ColorSpace::Gray, 0.3).unwrap();
        assert!(mae(&a, &g).is_err());
        assert!(psnr(&a, &g).is_err());
    }

    #[test]
    fn f32_psnr() {
        let a = Raster::<f32>::filled(2, 2, ColorSpace::Gray, 0.5).unwrap();
        let b = Raster::<f32>::filled(2, 2, ColorSpace::Gray, 0.6).unwrap();
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-4);
        assert!(psnr(&a, &a).unwrap().is_infinite());
    }

    #[test]
    fn row_keys_parse() {
        assert_eq!(RowKey::parse("Total"), Some(RowKey::Total));
        assert_eq!(
            RowKey::parse("(0.2, 0.4]"),
            Some(RowKey::Bucket(ProportionBucket::UpTo04))
        );
        assert_eq!(RowKey::parse("nope"), None);
    }
}

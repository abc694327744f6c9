//! Fréchet distance between Gaussian fits of two embedding sets. With an
//! Inception embedding this is FID; here the embedding is pluggable and the
//! default is a downsampled luma vector.

use crate::error::{Error, Result};
use crate::linalg::{spectral_map, symmetric_eigen, Matrix};
use crate::raster::{bilinear_resample, to_gray, Raster};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T> {
    dim: usize,
    vectors: Vec<Vec<T>>,
}

impl<T: Scalar> EmbeddingSet<T> {
    pub fn new(vectors: Vec<Vec<T>>) -> Result<Self> {
        let dim = vectors
            .first()
            .map(Vec::len)
            .ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
        if dim == 0 {
            return Err(Error::DimensionMismatch("zero-dimensional embedding".into()));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "embedding of length {} in a set of dimension {dim}",
                v.len()
            )));
        }
        Ok(EmbeddingSet { dim, vectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian<T> {
    pub mean: Vec<T>,
    pub cov: Matrix<T>,
}

/// Sample mean and unbiased (n − 1) covariance. The covariance is built from
/// its upper triangle, so it is exactly symmetric.
pub fn fit_gaussian<T: Scalar>(set: &EmbeddingSet<T>) -> Result<Gaussian<T>> {
    let n = set.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let d = set.dim();
    let nf = T::from_usize_lossy(n);
    let mut mean = vec![T::zero(); d];
    for v in set.vectors() {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += *x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= nf);

    let mut cov = Matrix::zeros(d, d);
    for v in set.vectors() {
        let centered: Vec<T> = v.iter().zip(&mean).map(|(x, m)| *x - *m).collect();
        for r in 0..d {
            let cr = centered[r];
            for c in r..d {
                cov[(r, c)] += cr * centered[c];
            }
        }
    }
    let denom = T::from_usize_lossy(n - 1);
    for r in 0..d {
        for c in r..d {
            let v = cov[(r, c)] / denom;
            cov[(r, c)] = v;
            cov[(c, r)] = v;
        }
    }
    Ok(Gaussian { mean, cov })
}

fn check_covariance<T: Scalar>(cov: &Matrix<T>, what: &str) -> Result<()> {
    let scale = cov
        .data()
        .iter()
        .fold(T::one(), |acc, v| acc.max(v.abs()));
    if cov.max_asymmetry() > T::lit(1e-6) * scale {
        return Err(Error::DimensionMismatch(format!("{what} covariance is not symmetric")));
    }
    let eig = symmetric_eigen(cov)?;
    let min = eig.values.iter().fold(T::infinity(), |a, b| a.min(*b));
    if min < -T::lit(1e-8) * scale {
        return Err(Error::NotPsd(min.as_f64()));
    }
    Ok(())
}

/// `‖μ₁ − μ₂‖² + tr(Σ₁ + Σ₂ − 2 (Σ₁Σ₂)^{1/2})`.
///
/// The trace of the product root is taken from the symmetric matrix
/// `Σ₁^{1/2} Σ₂ Σ₁^{1/2}`, which has the same spectrum as `Σ₁Σ₂`; negative
/// round-off eigenvalues are clamped to zero and so is the result. Equal
/// Gaussians short-circuit to exactly zero.
pub fn frechet_distance<T: Scalar>(a: &Gaussian<T>, b: &Gaussian<T>) -> Result<T> {
    let d = a.mean.len();
    if b.mean.len() != d || a.cov.rows() != d || b.cov.rows() != d || !a.cov.is_square() || !b.cov.is_square()
    {
        return Err(Error::DimensionMismatch(format!(
            "frechet: dimensions {d} and {}",
            b.mean.len()
        )));
    }
    check_covariance(&a.cov, "first")?;
    check_covariance(&b.cov, "second")?;
    if a == b {
        return Ok(T::zero());
    }

    let mean_term: T = a
        .mean
        .iter()
        .zip(&b.mean)
        .map(|(x, y)| (*x - *y) * (*x - *y))
        .sum();
    let root_a = spectral_map(&symmetric_eigen(&a.cov)?, |l| l.max(T::zero()).sqrt());
    let inner = root_a.matmul(&b.cov)?.matmul(&root_a)?.symmetrized();
    let tr_root: T = symmetric_eigen(&inner)?
        .values
        .into_iter()
        .map(|l| if l > T::zero() { l.sqrt() } else { T::zero() })
        .sum();
    let dist = mean_term + a.cov.trace() + b.cov.trace() - T::lit(2.0) * tr_root;
    Ok(dist.max(T::zero()))
}

/// Image → vector map used for the distributional column of a report.
pub trait ImageEmbedding<T: Scalar>: Send + Sync {
    fn label(&self) -> String;
    fn embed(&self, img: &Raster<T>) -> Result<Vec<T>>;
}

/// Luma resampled to `side`×`side` and flattened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelEmbedding {
    pub side: usize,
}

impl Default for PixelEmbedding {
    fn default() -> Self {
        PixelEmbedding { side: 8 }
    }
}

impl<T: Scalar> ImageEmbedding<T> for PixelEmbedding {
    fn label(&self) -> String {
        format!("pixel-luma-{}x{}", self.side, self.side)
    }

    fn embed(&self, img: &Raster<T>) -> Result<Vec<T>> {
        pixel_embedding(img, self.side)
    }
}

pub fn pixel_embedding<T: Scalar>(img: &Raster<T>, side: usize) -> Result<Vec<T>> {
    let small = bilinear_resample(&to_gray(img), side, side)?;
    Ok(small.into_data())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ColorSpace;

    fn scalar_gaussian(mu: f64, var: f64) -> Gaussian<f64> {
        Gaussian {
            mean: vec![mu],
            cov: Matrix::from_vec(1, 1, vec![var]).unwrap(),
        }
    }

    #[test]
    fn fit_small_sets() {
        let same = EmbeddingSet::new(vec![vec![0.3, 0.1]; 5]).unwrap();
        let g = fit_gaussian(&same).unwrap();
        assert!(g.cov.data().iter().all(|v| *v == 0.0));

        let two = EmbeddingSet::new(vec![vec![0.0], vec![2.0]]).unwrap();
        let g = fit_gaussian(&two).unwrap();
        assert_eq!(g.mean, vec![1.0]);
        assert_eq!(g.cov[(0, 0)], 2.0);

        assert!(matches!(
            fit_gaussian(&EmbeddingSet::new(vec![vec![1.0]]).unwrap()),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        ));
        assert!(EmbeddingSet::<f64>::new(vec![]).is_err());
        assert!(EmbeddingSet::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn fit_matches_direct_recomputation_on_duplicated_data() {
        let base: Vec<Vec<f64>> = (0..6)
            .map(|i| vec![i as f64 * 0.3, ((i * i) % 5) as f64, (i % 2) as f64])
            .collect();
        let doubled: Vec<Vec<f64>> = base.iter().flat_map(|v| [v.clone(), v.clone()]).collect();
        let g1 = fit_gaussian(&EmbeddingSet::new(base.clone()).unwrap()).unwrap();
        let g2 = fit_gaussian(&EmbeddingSet::new(doubled.clone()).unwrap()).unwrap();
        for (a, b) in g1.mean.iter().zip(&g2.mean) {
            assert!((a - b).abs() < 1e-12);
        }
        // direct two-pass recomputation of the doubled covariance
        let n = doubled.len() as f64;
        for r in 0..3 {
            for c in 0..3 {
                let mr = doubled.iter().map(|v| v[r]).sum::<f64>() / n;
                let mc = doubled.iter().map(|v| v[c]).sum::<f64>() / n;
                let direct =
                    doubled.iter().map(|v| (v[r] - mr) * (v[c] - mc)).sum::<f64>() / (n - 1.0);
                assert!((g2.cov[(r, c)] - direct).abs() < 1e-12);
                // n−1 divisor: doubling scales the covariance by 2(n−1)/(2n−1)
                let scaled = g1.cov[(r, c)] * 2.0 * 5.0 / 11.0;
                assert!((g2.cov[(r, c)] - scaled).abs() < 1e-12);
            }
        }
        assert_eq!(g2.cov.max_asymmetry(), 0.0);
    }

    #[test]
    fn scalar_closed_forms() {
        let d = frechet_distance(&scalar_gaussian(0.0, 1.0), &scalar_gaussian(1.0, 1.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let d = frechet_distance(&scalar_gaussian(0.5, 1.0), &scalar_gaussian(0.5, 4.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let g = scalar_gaussian(0.3, 0.7);
        assert!(frechet_distance(&g, &g).unwrap() < 1e-8);
    }

    #[test]
    fn two_dimensional_closed_form() {
        // tr sqrt(P) for a 2x2 P with nonnegative spectrum is sqrt(tr P + 2 sqrt(det P))
        let a: Gaussian<f64> = Gaussian {
            mean: vec![0.1, -0.4],
            cov: Matrix::from_vec(2, 2, vec![2.0, 0.6, 0.6, 1.0]).unwrap(),
        };
        let b: Gaussian<f64> = Gaussian {
            mean: vec![0.5, 0.2],
            cov: Matrix::from_vec(2, 2, vec![0.5, -0.2, -0.2, 1.5]).unwrap(),
        };
        let p = a.cov.matmul(&b.cov).unwrap();
        let det: f64 = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)];
        let tr_root = (p.trace() + 2.0 * det.sqrt()).sqrt();
        let expected = 0.16 + 0.36 + a.cov.trace() + b.cov.trace() - 2.0 * tr_root;
        let got = frechet_distance(&a, &b).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
        let back = frechet_distance(&b, &a).unwrap();
        assert!((got - back).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g1 = scalar_gaussian(0.0, 1.0);
        let g2 = Gaussian {
            mean: vec![0.0, 0.0],
            cov: Matrix::identity(2),
        };
        assert!(frechet_distance(&g1, &g2).is_err());
        let neg = scalar_gaussian(0.0, -1.0);
        assert!(matches!(frechet_distance(&g1, &neg), Err(Error::NotPsd(_))));
    }

    #[test]
    fn pixel_embedding_values() {
        let k = Raster::<f64>::filled(9, 7, ColorSpace::Rgb, 0.5).unwrap();
        let e = pixel_embedding(&k, 2).unwrap();
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(|v| (v - 0.5).abs() < 1e-12));
        let ramp = Raster::<f64>::from_fn(9, 9, ColorSpace::Gray, |x, y, _| {
            (x + y) as f64 / 16.0
        })
        .unwrap();
        let mean = ramp.data().iter().sum::<f64>() / 81.0;
        let e = pixel_embedding(&ramp, 1).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0] - mean).abs() < 1e-12);
        assert_eq!(pixel_embedding(&ramp, 3).unwrap(), pixel_embedding(&ramp, 3).unwrap());
        assert!(pixel_embedding(&ramp, 0).is_err());
    }
}

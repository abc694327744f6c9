//! Mean structural similarity over an 11×11 Gaussian window (σ = 1.5) with
//! the usual stabilizers `C1 = (0.01 L)²`, `C2 = (0.03 L)²` and `L = 1`.
//! Only window positions fully inside the image are scored.

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;

pub const SSIM_WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn gaussian_taps<T: Scalar>() -> Vec<T> {
    let half = (SSIM_WINDOW / 2) as f64;
    let raw: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| {
            let d = i as f64 - half;
            (-(d * d) / (2.0 * SIGMA * SIGMA)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| T::lit(v / sum)).collect()
}

/// Valid-mode separable filter of a `w`×`h` plane.
fn filter_valid<T: Scalar>(plane: &[T], w: usize, h: usize, taps: &[T]) -> Vec<T> {
    let k = taps.len();
    let (ow, oh) = (w - k + 1, h - k + 1);
    let mut horiz = vec![T::zero(); ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            horiz[y * ow + x] = taps
                .iter()
                .zip(&row[x..x + k])
                .map(|(t, v)| *t * *v)
                .sum();
        }
    }
    let mut out = vec![T::zero(); ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(i, t)| *t * horiz[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM and mean contrast-structure term for one plane.
fn plane_ssim<T: Scalar>(a: &[T], b: &[T], w: usize, h: usize, taps: &[T]) -> (T, T) {
    let c1 = T::lit(K1 * K1);
    let c2 = T::lit(K2 * K2);
    let two = T::lit(2.0);
    let aa: Vec<T> = a.iter().map(|v| *v * *v).collect();
    let bb: Vec<T> = b.iter().map(|v| *v * *v).collect();
    let ab: Vec<T> = a.iter().zip(b).map(|(x, y)| *x * *y).collect();
    let mu_a = filter_valid(a, w, h, taps);
    let mu_b = filter_valid(b, w, h, taps);
    let e_aa = filter_valid(&aa, w, h, taps);
    let e_bb = filter_valid(&bb, w, h, taps);
    let e_ab = filter_valid(&ab, w, h, taps);
    let n = mu_a.len();
    let (mut ssim_sum, mut cs_sum) = (T::zero(), T::zero());
    for i in 0..n {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - ma * ma;
        let var_b = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        let cs = (two * cov + c2) / (var_a + var_b + c2);
        ssim_sum += ((two * ma * mb + c1) * (two * cov + c2))
            / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        cs_sum += cs;
    }
    let count = T::from_usize_lossy(n);
    (ssim_sum / count, cs_sum / count)
}

/// Returns `(ssim, cs)` averaged over channels.
pub(crate) fn ssim_with_cs<T: Scalar>(restored: &Raster<T>, gt: &Raster<T>) -> Result<(T, T)> {
    restored.check_same_shape(gt, "ssim")?;
    let (w, h) = (restored.width(), restored.height());
    if w.min(h) < SSIM_WINDOW {
        return Err(Error::TooSmall(format!(
            "ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let taps = gaussian_taps::<T>();
    let ch = restored.channels();
    let (mut s, mut cs) = (T::zero(), T::zero());
    for c in 0..ch {
        let a = restored.channel(c);
        let b = gt.channel(c);
        let (ps, pcs) = plane_ssim(a.data(), b.data(), w, h, &taps);
        s += ps;
        cs += pcs;
    }
    let chf = T::from_usize_lossy(ch);
    Ok((s / chf, cs / chf))
}

/// Per-channel mean SSIM, averaged over channels.
pub fn ssim<T: Scalar>(restored: &Raster<T>, gt: &Raster<T>) -> Result<T> {
    ssim_with_cs(restored, gt).map(|(s, _)| s)
}

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{ColorSpace, Raster};

// BT.601 luma weights.
const LUMA_R: f64 = 0.299;
const LUMA_G: f64 = 0.587;
const LUMA_B: f64 = 0.114;

/// Luma conversion; gray input is returned unchanged and alpha is ignored.
pub fn to_gray<T: Scalar>(img: &Raster<T>) -> Raster<T> {
    if img.space() == ColorSpace::Gray {
        return img.clone();
    }
    let (wr, wg, wb) = (T::lit(LUMA_R), T::lit(LUMA_G), T::lit(LUMA_B));
    let data = img
        .data()
        .chunks_exact(img.channels())
        .map(|p| (wr * p[0] + wg * p[1] + wb * p[2]).unit_clamp())
        .collect();
    Raster::from_parts_unchecked(img.width(), img.height(), ColorSpace::Gray, data)
}

#[inline]
fn lerp<T: Scalar>(a: T, b: T, t: T) -> T {
    // a + (b - a) t keeps constants exact and returns `a` at t = 0.
    a + (b - a) * t
}

/// Bilinear read at a fractional position; indices clamp to the border.
#[inline]
pub(crate) fn sample_bilinear<T: Scalar>(img: &Raster<T>, sx: T, sy: T, c: usize) -> T {
    let max_x = img.width() - 1;
    let max_y = img.height() - 1;
    let fx0 = sx.floor().max(T::zero());
    let fy0 = sy.floor().max(T::zero());
    let x0 = fx0.to_usize().unwrap_or(0).min(max_x);
    let y0 = fy0.to_usize().unwrap_or(0).min(max_y);
    let x1 = (x0 + 1).min(max_x);
    let y1 = (y0 + 1).min(max_y);
    let tx = (sx - T::from_usize_lossy(x0)).max(T::zero()).min(T::one());
    let ty = (sy - T::from_usize_lossy(y0)).max(T::zero()).min(T::one());
    let top = lerp(img.get(x0, y0, c), img.get(x1, y0, c), tx);
    let bottom = lerp(img.get(x0, y1, c), img.get(x1, y1, c), tx);
    lerp(top, bottom, ty)
}

/// Source coordinate for output index `i` under the align-corners mapping.
/// A single output sample reads the source center.
#[inline]
fn align_corners<T: Scalar>(i: usize, src: usize, dst: usize) -> T {
    if dst == 1 {
        T::from_usize_lossy(src - 1) / T::lit(2.0)
    } else {
        T::from_usize_lossy(i * (src - 1)) / T::from_usize_lossy(dst - 1)
    }
}

/// Align-corners bilinear resampling with edge clamping. Every channel,
/// alpha included, is interpolated independently.
pub fn bilinear_resample<T: Scalar>(
    img: &Raster<T>,
    new_w: usize,
    new_h: usize,
) -> Result<Raster<T>> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::ZeroDimension);
    }
    if new_w == img.width() && new_h == img.height() {
        return Ok(img.clone());
    }
    let ch = img.channels();
    let xs: Vec<T> = (0..new_w)
        .map(|x| align_corners(x, img.width(), new_w))
        .collect();
    let mut data = Vec::with_capacity(new_w * new_h * ch);
    for y in 0..new_h {
        let sy = align_corners::<T>(y, img.height(), new_h);
        for &sx in &xs {
            for c in 0..ch {
                data.push(sample_bilinear(img, sx, sy, c).unit_clamp());
            }
        }
    }
    Ok(Raster::from_parts_unchecked(new_w, new_h, img.space(), data))
}

/// Exact (cos, sin) for right angles, otherwise the trigonometric values.
fn rotation_terms(angle_deg: f64) -> (f64, f64) {
    let a = angle_deg.rem_euclid(360.0);
    if a == 0.0 {
        (1.0, 0.0)
    } else if a == 90.0 {
        (0.0, 1.0)
    } else if a == 180.0 {
        (-1.0, 0.0)
    } else if a == 270.0 {
        (0.0, -1.0)
    } else {
        let r = a.to_radians();
        (r.cos(), r.sin())
    }
}

/// Rotates about the image center on an unchanged canvas. With `angle = 90`
/// the source pixel `(x, y)` lands on `(y, W - 1 - x)` for square images.
/// Output pixels whose preimage falls outside the source take `fill` in
/// every channel.
pub fn rotate<T: Scalar>(img: &Raster<T>, angle_deg: f64, fill: T) -> Raster<T> {
    let (cos, sin) = rotation_terms(angle_deg);
    if cos == 1.0 {
        return img.clone();
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let eps = 1e-9;
    let max_x = (w - 1) as f64;
    let max_y = (h - 1) as f64;
    let fill = fill.unit_clamp();
    let mut data = Vec::with_capacity(w * h * ch);
    for y in 0..h {
        let oy = y as f64 - cy;
        for x in 0..w {
            let ox = x as f64 - cx;
            let sx = cx + cos * ox - sin * oy;
            let sy = cy + sin * ox + cos * oy;
            if sx < -eps || sy < -eps || sx > max_x + eps || sy > max_y + eps {
                data.extend(std::iter::repeat(fill).take(ch));
                continue;
            }
            let (sx, sy) = (T::lit(sx.clamp(0.0, max_x)), T::lit(sy.clamp(0.0, max_y)));
            for c in 0..ch {
                data.push(sample_bilinear(img, sx, sy, c).unit_clamp());
            }
        }
    }
    Raster::from_parts_unchecked(w, h, img.space(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gray(w: usize, h: usize, data: Vec<f64>) -> Raster<f64> {
        Raster::new(w, h, ColorSpace::Gray, data).unwrap()
    }

    #[test]
    fn gray_weights() {
        let img = Raster::<f64>::new(
            3,
            1,
            ColorSpace::Rgb,
            vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        )
        .unwrap();
        let g = to_gray(&img);
        assert!((g.data()[0] - 1.0).abs() < 1e-12);
        assert_eq!(g.data()[1], 0.0);
        assert!((g.data()[2] - 0.299).abs() < 1e-12);
        // gray passes through
        assert_eq!(to_gray(&g), g);
    }

    #[test]
    fn resample_two_to_three() {
        let img = gray(2, 1, vec![0.0, 1.0]);
        let out = bilinear_resample(&img, 3, 1).unwrap();
        assert_eq!(out.data(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn resample_identity_and_constant() {
        let img = Raster::<f64>::from_fn(7, 5, ColorSpace::Rgb, |x, y, c| {
            ((x * 31 + y * 17 + c * 7) % 97) as f64 / 96.0
        })
        .unwrap();
        assert_eq!(bilinear_resample(&img, 7, 5).unwrap(), img);
        let k = Raster::<f64>::filled(9, 4, ColorSpace::Rgba, 0.3).unwrap();
        for (w, h) in [(1, 1), (3, 11), (17, 2), (40, 40)] {
            let r = bilinear_resample(&k, w, h).unwrap();
            assert!(r.data().iter().all(|v| *v == 0.3));
        }
        assert!(matches!(
            bilinear_resample(&k, 0, 3),
            Err(Error::ZeroDimension)
        ));
    }

    #[test]
    fn single_sample_reads_center() {
        // a linear ramp's center equals its mean
        for w in [2usize, 5, 8] {
            let img = Raster::<f64>::from_fn(w, w, ColorSpace::Gray, |x, _, _| {
                x as f64 / (w - 1) as f64
            })
            .unwrap();
            let r = bilinear_resample(&img, 1, 1).unwrap();
            assert!((r.data()[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rotate_zero_and_full_turn() {
        let img = Raster::<f64>::from_fn(6, 4, ColorSpace::Rgba, |x, y, c| {
            ((x + 2 * y + c) % 5) as f64 / 4.0
        })
        .unwrap();
        assert_eq!(rotate(&img, 0.0, 0.0), img);
        let full = rotate(&img, 360.0, 0.0);
        for (a, b) in full.data().iter().zip(img.data()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn rotate_quarter_turn_on_labeled_grid() {
        // brute-force coordinate check: value at (x, y) is its own label
        let n = 5;
        let label = |x: usize, y: usize| (y * n + x) as f64 / (n * n - 1) as f64;
        let img = Raster::<f64>::from_fn(n, n, ColorSpace::Gray, |x, y, _| label(x, y)).unwrap();
        let r = rotate(&img, 90.0, 0.0);
        for y in 0..n {
            for x in 0..n {
                assert!((r.get(y, n - 1 - x, 0) - label(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rotate_fills_corners() {
        let img = Raster::<f64>::filled(9, 9, ColorSpace::Rgba, 1.0).unwrap();
        let r = rotate(&img, 45.0, 0.0);
        assert_eq!(r.pixel(0, 0), &[0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.pixel(4, 4), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn right_angle_rotation_preserves_alpha_mass() {
        let img = Raster::<f64>::from_fn(8, 8, ColorSpace::Rgba, |x, y, c| {
            if c == 3 {
                ((x * 3 + y * 5) % 7) as f64 / 6.0
            } else {
                0.5
            }
        })
        .unwrap();
        let mass = |r: &Raster<f64>| r.channel(3).data().iter().sum::<f64>();
        for angle in [90.0, 180.0, 270.0, -90.0] {
            let r = rotate(&img, angle, 0.0);
            assert!((mass(&r) - mass(&img)).abs() < 1e-6, "angle {angle}");
        }
    }
}

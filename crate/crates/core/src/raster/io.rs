use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageReader};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{BinaryMask, ColorSpace, Raster};

fn codec(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Codec {
        path: path.to_path_buf(),
        source,
    }
}

fn scaled<T: Scalar, P: Copy + Into<f64>>(raw: &[P], max: f64) -> Vec<T> {
    raw.iter().map(|&v| T::lit(v.into() / max)).collect()
}

/// Reads an 8- or 16-bit PNG with 1, 3 or 4 channels. Integer samples are
/// divided by the bit-depth maximum.
pub fn load_png<T: Scalar>(path: impl AsRef<Path>) -> Result<Raster<T>> {
    let path = path.as_ref();
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(codec(path))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (space, data) = match &img {
        DynamicImage::ImageLuma8(b) => (ColorSpace::Gray, scaled(b.as_raw(), 255.0)),
        DynamicImage::ImageRgb8(b) => (ColorSpace::Rgb, scaled(b.as_raw(), 255.0)),
        DynamicImage::ImageRgba8(b) => (ColorSpace::Rgba, scaled(b.as_raw(), 255.0)),
        DynamicImage::ImageLuma16(b) => (ColorSpace::Gray, scaled(b.as_raw(), 65535.0)),
        DynamicImage::ImageRgb16(b) => (ColorSpace::Rgb, scaled(b.as_raw(), 65535.0)),
        DynamicImage::ImageRgba16(b) => (ColorSpace::Rgba, scaled(b.as_raw(), 65535.0)),
        other => {
            return Err(Error::UnsupportedChannels(format!(
                "{}: {:?}",
                path.display(),
                other.color()
            )))
        }
    };
    Raster::new(w, h, space, data)
}

/// Round-half-up quantization to a byte.
#[inline]
pub(crate) fn quantize<T: Scalar>(v: T) -> u8 {
    let q = (v.unit_clamp().as_f64() * 255.0 + 0.5).floor();
    q.clamp(0.0, 255.0) as u8
}

/// Rounds every sample to the nearest 8-bit level, as a PNG round trip
/// would.
pub fn requantize<T: Scalar>(img: &Raster<T>) -> Raster<T> {
    let data = img
        .data()
        .iter()
        .map(|&v| T::lit(f64::from(quantize(v)) / 255.0))
        .collect();
    Raster::from_parts_unchecked(img.width(), img.height(), img.space(), data)
}

fn write(path: &Path, bytes: &[u8], w: usize, h: usize, color: ExtendedColorType) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    image::save_buffer_with_format(
        path,
        bytes,
        w as u32,
        h as u32,
        color,
        image::ImageFormat::Png,
    )
    .map_err(codec(path))
}

/// Writes an 8-bit PNG with the raster's channel layout.
pub fn save_png<T: Scalar>(img: &Raster<T>, path: impl AsRef<Path>) -> Result<()> {
    let color = match img.space() {
        ColorSpace::Gray => ExtendedColorType::L8,
        ColorSpace::Rgb => ExtendedColorType::Rgb8,
        ColorSpace::Rgba => ExtendedColorType::Rgba8,
    };
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    write(path.as_ref(), &bytes, img.width(), img.height(), color)
}

/// Writes a one-channel PNG: `true` as 255, `false` as 0.
pub fn save_mask_png(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let bytes: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    write(
        path.as_ref(),
        &bytes,
        mask.width(),
        mask.height(),
        ExtendedColorType::L8,
    )
}

/// Reads a mask PNG. Color inputs are reduced to luma; a pixel is set when
/// its value is at least one half.
pub fn load_mask_png(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let img: Raster<f64> = load_png(path)?;
    let gray = super::to_gray(&img);
    BinaryMask::new(
        gray.width(),
        gray.height(),
        gray.data().iter().map(|&v| v >= 0.5).collect(),
    )
}

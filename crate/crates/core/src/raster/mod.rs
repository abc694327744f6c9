//! Dense images with samples normalized to `[0, 1]`, boolean masks, and the
//! resampling/rotation primitives the rest of the toolkit builds on.

mod io;
mod ops;

pub use io::{load_mask_png, load_png, requantize, save_mask_png, save_png};
pub use ops::{bilinear_resample, rotate, to_gray};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Color layout of a [`Raster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColorSpace {
    Gray,
    Rgb,
    Rgba,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            ColorSpace::Rgb => 3,
            ColorSpace::Rgba => 4,
        }
    }

    pub fn from_channels(channels: usize) -> Result<Self> {
        match channels {
            1 => Ok(ColorSpace::Gray),
            3 => Ok(ColorSpace::Rgb),
            4 => Ok(ColorSpace::Rgba),
            n => Err(Error::UnsupportedChannels(format!("{n} channels"))),
        }
    }
}

/// Row-major, pixel-interleaved image. Every sample lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    space: ColorSpace,
    data: Vec<T>,
}

impl<T: Scalar> Raster<T> {
    pub fn new(width: usize, height: usize, space: ColorSpace, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        let expected = width * height * space.channels();
        if data.len() != expected {
            return Err(Error::InvalidRaster(format!(
                "expected {expected} samples for {width}x{height}x{}, got {}",
                space.channels(),
                data.len()
            )));
        }
        if let Some(bad) = data
            .iter()
            .find(|v| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(Error::InvalidRaster(format!("sample {bad} outside [0, 1]")));
        }
        Ok(Raster {
            width,
            height,
            space,
            data,
        })
    }

    /// Constant image; `value` is clamped into `[0, 1]`.
    pub fn filled(width: usize, height: usize, space: ColorSpace, value: T) -> Result<Self> {
        let n = width * height * space.channels();
        Self::new(width, height, space, vec![value.unit_clamp(); n])
    }

    /// Builds an image from `f(x, y, channel)`; outputs are clamped.
    pub fn from_fn(
        width: usize,
        height: usize,
        space: ColorSpace,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let ch = space.channels();
        let mut data = Vec::with_capacity(width * height * ch);
        for y in 0..height {
            for x in 0..width {
                for c in 0..ch {
                    data.push(f(x, y, c).unit_clamp());
                }
            }
        }
        Self::new(width, height, space, data)
    }

    /// Internal constructor for data already known to be valid.
    pub(crate) fn from_parts_unchecked(
        width: usize,
        height: usize,
        space: ColorSpace,
        data: Vec<T>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * space.channels());
        Raster {
            width,
            height,
            space,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.space.channels()
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels() + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> T {
        self.data[self.index(x, y, c)]
    }

    /// Sets one sample, clamping into `[0, 1]`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: T) {
        let i = self.index(x, y, c);
        self.data[i] = v.unit_clamp();
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[T] {
        let i = self.index(x, y, 0);
        &self.data[i..i + self.channels()]
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.space == other.space
    }

    pub(crate) fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width,
                self.height,
                self.channels(),
                other.width,
                other.height,
                other.channels()
            )))
        }
    }

    /// Extracts one channel as a gray image.
    pub fn channel(&self, c: usize) -> Raster<T> {
        let ch = self.channels();
        let data = self.data.iter().skip(c).step_by(ch).copied().collect();
        Raster::from_parts_unchecked(self.width, self.height, ColorSpace::Gray, data)
    }

    /// Converts to three-channel RGB: gray is replicated, alpha dropped.
    pub fn to_rgb(&self) -> Raster<T> {
        match self.space {
            ColorSpace::Rgb => self.clone(),
            ColorSpace::Gray => {
                let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
                Raster::from_parts_unchecked(self.width, self.height, ColorSpace::Rgb, data)
            }
            ColorSpace::Rgba => {
                let data = self
                    .data
                    .chunks_exact(4)
                    .flat_map(|p| [p[0], p[1], p[2]])
                    .collect();
                Raster::from_parts_unchecked(self.width, self.height, ColorSpace::Rgb, data)
            }
        }
    }

    /// Changes the sample type.
    pub fn cast<U: Scalar>(&self) -> Raster<U> {
        let data = self
            .data
            .iter()
            .map(|v| U::lit(v.as_f64()).unit_clamp())
            .collect();
        Raster::from_parts_unchecked(self.width, self.height, self.space, data)
    }
}

/// Boolean map; `true` marks scaffold / missing pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if bits.len() != width * height {
            return Err(Error::InvalidRaster(format!(
                "mask expects {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Fraction of `true` bits.
    pub fn coverage(&self) -> f64 {
        self.count() as f64 / (self.width * self.height) as f64
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|b| *b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn matches<T: Scalar>(&self, img: &Raster<T>) -> bool {
        self.width == img.width() && self.height == img.height()
    }

    pub(crate) fn check_matches<T: Scalar>(&self, img: &Raster<T>, what: &str) -> Result<()> {
        if self.matches(img) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: mask {}x{} vs image {}x{}",
                self.width,
                self.height,
                img.width(),
                img.height()
            )))
        }
    }
}

//! Dense `H×W×C` arrays of arbitrary channel count, indexed `(y, x, c)`.

use crate::error::{Error, Result};
use crate::raster::{ColorSpace, Raster};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMap<T> {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.len() != height * width * channels {
            return Err(Error::DimensionMismatch(format!(
                "{height}x{width}x{channels} feature map from {} values",
                data.len()
            )));
        }
        Ok(FeatureMap {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Self::new(height, width, channels, vec![T::zero(); height * width * channels])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(y, x, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn from_raster(img: &Raster<T>) -> Self {
        FeatureMap {
            height: img.height(),
            width: img.width(),
            channels: img.channels(),
            data: img.data().to_vec(),
        }
    }

    /// Samples are clamped into `[0, 1]`.
    pub fn to_raster(&self) -> Result<Raster<T>> {
        let space = ColorSpace::from_channels(self.channels)?;
        let data = self.data.iter().map(|v| v.unit_clamp()).collect();
        Raster::new(self.width, self.height, space, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn offset(&self, y: usize, x: usize) -> usize {
        (y * self.width + x) * self.channels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> T {
        self.data[self.offset(y, x) + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: T) {
        let o = self.offset(y, x) + c;
        self.data[o] = v;
    }

    pub fn pixel(&self, y: usize, x: usize) -> &[T] {
        let o = self.offset(y, x);
        &self.data[o..o + self.channels]
    }

    pub fn pixel_mut(&mut self, y: usize, x: usize) -> &mut [T] {
        let o = self.offset(y, x);
        let c = self.channels;
        &mut self.data[o..o + c]
    }

    /// The `p×p` patch with top-left corner `(y, x)` as a flat vector.
    pub fn patch(&self, y: usize, x: usize, p: usize) -> Vec<T> {
        let mut v = Vec::with_capacity(p * p * self.channels);
        for dy in 0..p {
            let o = self.offset(y + dy, x);
            v.extend_from_slice(&self.data[o..o + p * self.channels]);
        }
        v
    }

    /// Align-corners bilinear resize; a single output row or column samples
    /// the source center.
    pub fn resize_bilinear(&self, new_h: usize, new_w: usize) -> Result<Self> {
        if new_h == 0 || new_w == 0 {
            return Err(Error::ZeroDimension);
        }
        if (new_h, new_w) == (self.height, self.width) {
            return Ok(self.clone());
        }
        let coord = |i: usize, src: usize, dst: usize| -> T {
            if dst == 1 {
                T::from_usize_lossy(src - 1) / T::lit(2.0)
            } else {
                T::from_usize_lossy(i * (src - 1)) / T::from_usize_lossy(dst - 1)
            }
        };
        let ch = self.channels;
        let mut data = Vec::with_capacity(new_h * new_w * ch);
        for y in 0..new_h {
            let sy = coord(y, self.height, new_h);
            let y0 = sy.floor().to_usize().unwrap_or(0).min(self.height - 1);
            let y1 = (y0 + 1).min(self.height - 1);
            let ty = sy - T::from_usize_lossy(y0);
            for x in 0..new_w {
                let sx = coord(x, self.width, new_w);
                let x0 = sx.floor().to_usize().unwrap_or(0).min(self.width - 1);
                let x1 = (x0 + 1).min(self.width - 1);
                let tx = sx - T::from_usize_lossy(x0);
                for c in 0..ch {
                    let lerp = |a: T, b: T, t: T| a + (b - a) * t;
                    let top = lerp(self.get(y0, x0, c), self.get(y0, x1, c), tx);
                    let bot = lerp(self.get(y1, x0, c), self.get(y1, x1, c), tx);
                    data.push(lerp(top, bot, ty));
                }
            }
        }
        Self::new(new_h, new_w, ch, data)
    }

    pub(crate) fn same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if (self.height, self.width, self.channels) != (other.height, other.width, other.channels)
        {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.height, self.width, self.channels, other.height, other.width, other.channels
            )));
        }
        Ok(())
    }
}

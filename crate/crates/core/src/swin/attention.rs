//! Single-head windowed self-attention forward with caller-supplied
//! projections.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::AttentionMask;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionParams<T> {
    /// `C×d` query projection.
    pub q: Matrix<T>,
    /// `C×d` key projection.
    pub k: Matrix<T>,
    /// `C×d_v` value projection.
    pub v: Matrix<T>,
    pub scale: T,
}

impl<T: Scalar> AttentionParams<T> {
    /// Identity projections with scale `1/√C`.
    pub fn identity(channels: usize) -> Self {
        AttentionParams {
            q: Matrix::identity(channels),
            k: Matrix::identity(channels),
            v: Matrix::identity(channels),
            scale: T::one() / T::from_usize_lossy(channels.max(1)).sqrt(),
        }
    }

    fn check(&self, channels: usize) -> Result<()> {
        if self.q.rows() != channels || self.k.rows() != channels || self.v.rows() != channels {
            return Err(Error::DimensionMismatch(format!(
                "projections expect {}/{}/{} input channels, tokens have {channels}",
                self.q.rows(),
                self.k.rows(),
                self.v.rows()
            )));
        }
        if self.q.cols() != self.k.cols() {
            return Err(Error::DimensionMismatch(format!(
                "query width {} vs key width {}",
                self.q.cols(),
                self.k.cols()
            )));
        }
        Ok(())
    }
}

/// Row-stochastic `n×n` attention matrix of one window. Blocked pairs get
/// exactly zero; a row with every pair blocked is all zero.
pub fn attention_weights<T: Scalar>(
    window: &Matrix<T>,
    mask: &AttentionMask,
    params: &AttentionParams<T>,
) -> Result<Matrix<T>> {
    params.check(window.cols())?;
    let n = window.rows();
    if mask.tokens() != n {
        return Err(Error::DimensionMismatch(format!(
            "mask for {} tokens on a window of {n}",
            mask.tokens()
        )));
    }
    let q = window.matmul(&params.q)?;
    let k = window.matmul(&params.k)?;
    let d = q.cols();
    let mut out = Matrix::zeros(n, n);
    for a in 0..n {
        let logits: Vec<Option<T>> = (0..n)
            .map(|b| {
                (!mask.is_blocked(a, b)).then(|| {
                    let dot: T = (0..d).map(|i| q[(a, i)] * k[(b, i)]).sum();
                    params.scale * dot
                })
            })
            .collect();
        let max = logits
            .iter()
            .flatten()
            .fold(T::neg_infinity(), |m, v| m.max(*v));
        if max == T::neg_infinity() {
            continue;
        }
        let exps: Vec<T> = logits
            .iter()
            .map(|l| l.map_or(T::zero(), |v| (v - max).exp()))
            .collect();
        let total: T = exps.iter().copied().sum();
        for (b, e) in exps.into_iter().enumerate() {
            out[(a, b)] = e / total;
        }
    }
    Ok(out)
}

/// `softmax(scale · QKᵀ + mask) · V` for every window.
pub fn windowed_attention<T: Scalar>(
    windows: &[Matrix<T>],
    masks: &[AttentionMask],
    params: &AttentionParams<T>,
) -> Result<Vec<Matrix<T>>> {
    if windows.len() != masks.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} windows with {} masks",
            windows.len(),
            masks.len()
        )));
    }
    windows
        .par_iter()
        .zip(masks.par_iter())
        .map(|(win, mask)| {
            let w = attention_weights(win, mask, params)?;
            w.matmul(&win.matmul(&params.v)?)
        })
        .collect()
}

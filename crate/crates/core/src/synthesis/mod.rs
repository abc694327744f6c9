//! Labeled occlusion data from unlabeled sources: matted scaffold cutouts are
//! rotated, binarized and composited over construction-activity images, and
//! every (cutout, background) pair yields an overlay image, a mask, a hole
//! image and the ground truth.

mod config;
mod dataset;
mod manifest;

pub use config::SynthesisConfig;
pub use dataset::{
    list_pngs, pair_angle, render_mask, synthesize_dataset, synthesize_sample, SynthesizedSample,
};
pub use manifest::{manifest_counts, CountRow, CountTable, DatasetManifest, SampleRecord};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, ColorSpace, Raster};
use crate::scalar::Scalar;

/// Scaffold-proportion intervals, half-open as in the dataset statistics
/// table. Proportions 0 and 1 fall outside every bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProportionBucket {
    #[serde(rename = "(0,0.2]")]
    UpTo02,
    #[serde(rename = "(0.2,0.4]")]
    UpTo04,
    #[serde(rename = "(0.4,0.6]")]
    UpTo06,
    #[serde(rename = "(0.6,0.8]")]
    UpTo08,
    #[serde(rename = "(0.8,1.0)")]
    Below10,
}

impl ProportionBucket {
    pub const ALL: [ProportionBucket; 5] = [
        ProportionBucket::UpTo02,
        ProportionBucket::UpTo04,
        ProportionBucket::UpTo06,
        ProportionBucket::UpTo08,
        ProportionBucket::Below10,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            ProportionBucket::UpTo02 => "(0, 0.2]",
            ProportionBucket::UpTo04 => "(0.2, 0.4]",
            ProportionBucket::UpTo06 => "(0.4, 0.6]",
            ProportionBucket::UpTo08 => "(0.6, 0.8]",
            ProportionBucket::Below10 => "(0.8, 1.0)",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        let squeeze: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Self::ALL
            .into_iter()
            .find(|b| b.label().replace(' ', "") == squeeze)
    }
}

impl fmt::Display for ProportionBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
    ExtTest,
}

impl Split {
    pub const ALL: [Split; 4] = [Split::Train, Split::Val, Split::Test, Split::ExtTest];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::ExtTest => "ext_test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mask bit is set iff the cutout's alpha strictly exceeds `alpha_threshold`.
pub fn binarize<T: Scalar>(cutout: &Raster<T>, alpha_threshold: T) -> Result<BinaryMask> {
    if cutout.space() != ColorSpace::Rgba {
        return Err(Error::UnsupportedChannels(
            "binarize expects an RGBA cutout".into(),
        ));
    }
    let bits = cutout
        .data()
        .chunks_exact(4)
        .map(|p| p[3] > alpha_threshold)
        .collect();
    BinaryMask::new(cutout.width(), cutout.height(), bits)
}

/// Source-over compositing of an RGBA cutout onto an RGB background.
pub fn overlay<T: Scalar>(activity: &Raster<T>, cutout: &Raster<T>) -> Result<Raster<T>> {
    if activity.space() != ColorSpace::Rgb {
        return Err(Error::UnsupportedChannels(
            "overlay expects an RGB background".into(),
        ));
    }
    if cutout.space() != ColorSpace::Rgba {
        return Err(Error::UnsupportedChannels(
            "overlay expects an RGBA cutout".into(),
        ));
    }
    if activity.width() != cutout.width() || activity.height() != cutout.height() {
        return Err(Error::DimensionMismatch(format!(
            "overlay: background {}x{} vs cutout {}x{}",
            activity.width(),
            activity.height(),
            cutout.width(),
            cutout.height()
        )));
    }
    let data = activity
        .data()
        .chunks_exact(3)
        .zip(cutout.data().chunks_exact(4))
        .flat_map(|(bg, fg)| {
            let a = fg[3];
            let keep = T::one() - a;
            [
                (a * fg[0] + keep * bg[0]).unit_clamp(),
                (a * fg[1] + keep * bg[1]).unit_clamp(),
                (a * fg[2] + keep * bg[2]).unit_clamp(),
            ]
        })
        .collect();
    Raster::new(activity.width(), activity.height(), ColorSpace::Rgb, data)
}

/// Punches the mask out of `activity`: masked pixels become `hole_fill` in
/// every channel.
pub fn subtract<T: Scalar>(
    activity: &Raster<T>,
    mask: &BinaryMask,
    hole_fill: T,
) -> Result<Raster<T>> {
    mask.check_matches(activity, "subtract")?;
    let ch = activity.channels();
    let fill = hole_fill.unit_clamp();
    let mut data = activity.data().to_vec();
    for (px, &hole) in data.chunks_exact_mut(ch).zip(mask.bits()) {
        if hole {
            px.fill(fill);
        }
    }
    Raster::new(activity.width(), activity.height(), activity.space(), data)
}

pub fn scaffold_proportion(mask: &BinaryMask) -> f64 {
    mask.coverage()
}

/// Bucket containing `proportion`; `None` flags the degenerate endpoints 0
/// and 1.
pub fn classify_bucket(proportion: f64) -> Result<Option<ProportionBucket>> {
    if !(0.0..=1.0).contains(&proportion) {
        return Err(Error::ProportionOutOfRange(proportion));
    }
    let b = if proportion == 0.0 || proportion == 1.0 {
        None
    } else if proportion <= 0.2 {
        Some(ProportionBucket::UpTo02)
    } else if proportion <= 0.4 {
        Some(ProportionBucket::UpTo04)
    } else if proportion <= 0.6 {
        Some(ProportionBucket::UpTo06)
    } else if proportion <= 0.8 {
        Some(ProportionBucket::UpTo08)
    } else {
        Some(ProportionBucket::Below10)
    };
    Ok(b)
}

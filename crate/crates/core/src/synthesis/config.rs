use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    /// Matted RGBA scaffold cutouts (M files).
    pub scaffold_dir: PathBuf,
    /// Construction-activity backgrounds (N files).
    pub activity_dir: PathBuf,
    pub output_dir: PathBuf,
    pub target_w: usize,
    pub target_h: usize,
    pub alpha_threshold: f64,
    /// Rotation angles are drawn uniformly from `[lo, hi)` degrees.
    pub rotation_range: [f64; 2],
    pub seed: u64,
    /// (train, val, test); ignored when `external_test` is set.
    pub split_fractions: [f64; 3],
    pub hole_fill: f64,
    /// Label every record `ext_test` instead of splitting.
    pub external_test: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            scaffold_dir: PathBuf::from("scaffolds"),
            activity_dir: PathBuf::from("activities"),
            output_dir: PathBuf::from("out"),
            target_w: 512,
            target_h: 512,
            alpha_threshold: 0.5,
            rotation_range: [0.0, 360.0],
            seed: 0,
            split_fractions: [0.9, 0.05, 0.05],
            hole_fill: 1.0,
            external_test: false,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.target_w == 0 || self.target_h == 0 {
            return bad("target size must be positive".into());
        }
        if !(self.alpha_threshold > 0.0 && self.alpha_threshold < 1.0) {
            return bad(format!(
                "alpha_threshold {} not in (0, 1)",
                self.alpha_threshold
            ));
        }
        let [lo, hi] = self.rotation_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad(format!("rotation range [{lo}, {hi}) is invalid"));
        }
        if self.split_fractions.iter().any(|f| !(*f >= 0.0)) {
            return bad("split fractions must be nonnegative".into());
        }
        let sum: f64 = self.split_fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("split fractions sum to {sum}, expected 1"));
        }
        if !(0.0..=1.0).contains(&self.hole_fill) {
            return bad(format!("hole_fill {} not in [0, 1]", self.hole_fill));
        }
        Ok(())
    }

    /// Split sizes for `n` records: train and val are rounded, test takes
    /// the remainder.
    pub fn split_sizes(&self, n: usize) -> [usize; 3] {
        let round = |f: f64| ((f * n as f64) + 0.5).floor() as usize;
        let train = round(self.split_fractions[0]).min(n);
        let val = round(self.split_fractions[1]).min(n - train);
        [train, val, n - train - val]
    }
}

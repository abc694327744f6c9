//! Procedural stand-ins for the photographic sources: lattice scaffold
//! cutouts of graded density and textured construction scenes, plus small
//! fixed fixtures used across test suites.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::raster::{save_png, BinaryMask, ColorSpace, Raster};
use crate::synthesis::{subtract, SynthesisConfig};

/// RGBA lattice of horizontal and vertical bars. `density` is the intended
/// alpha coverage in `[0, 1)`; the bar width is rounded to whole pixels.
pub fn scaffold_cutout(side: usize, density: f64, seed: u64) -> Result<Raster<f64>> {
    if side == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(0.0..1.0).contains(&density) {
        return Err(Error::InvalidConfig(format!("density {density} not in [0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let period = (side / 6).max(4);
    // coverage of a two-way lattice is 1 − (1 − t/P)²
    let frac = 1.0 - (1.0 - density).sqrt();
    let thick = if density == 0.0 {
        0
    } else {
        ((frac * period as f64).round() as usize).clamp(1, period)
    };
    let (px, py) = (rng.gen_range(0..period), rng.gen_range(0..period));
    let tint: [f64; 3] = [
        rng.gen_range(0.45..0.75),
        rng.gen_range(0.25..0.45),
        rng.gen_range(0.10..0.30),
    ];
    Raster::from_fn(side, side, ColorSpace::Rgba, |x, y, c| {
        let bar = (x + px) % period < thick || (y + py) % period < thick;
        match (c, bar) {
            (3, b) => f64::from(u8::from(b)),
            (_, true) => tint[c] * (0.85 + 0.15 * (((x * 3 + y * 5) % 7) as f64 / 6.0)),
            (_, false) => 0.0,
        }
    })
}

/// RGB scene with a vertical gradient, a periodic brick texture and a few
/// flat blocks. Every sample lies in `[0.05, 0.95]`.
pub fn activity_scene(width: usize, height: usize, seed: u64) -> Result<Raster<f64>> {
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.3..0.8));
    let bottom: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.2..0.7));
    let brick_w = rng.gen_range(6..14usize);
    let brick_h = rng.gen_range(3..7usize);
    let amp = rng.gen_range(0.05..0.15);
    let blocks: Vec<(usize, usize, usize, usize, [f64; 3])> = (0..rng.gen_range(2..5))
        .map(|_| {
            let bw = rng.gen_range(width / 8..=width / 3).max(1);
            let bh = rng.gen_range(height / 8..=height / 3).max(1);
            let bx = rng.gen_range(0..width);
            let by = rng.gen_range(0..height);
            let col = std::array::from_fn(|_| rng.gen_range(0.1..0.9));
            (bx, by, bw, bh, col)
        })
        .collect();
    Raster::from_fn(width, height, ColorSpace::Rgb, |x, y, c| {
        if let Some(b) = blocks
            .iter()
            .rev()
            .find(|(bx, by, bw, bh, _)| (*bx..bx + bw).contains(&x) && (*by..by + bh).contains(&y))
        {
            return b.4[c].clamp(0.05, 0.95);
        }
        let t = y as f64 / (height.max(2) - 1) as f64;
        let base = top[c] + (bottom[c] - top[c]) * t;
        let row = y / brick_h;
        let shift = if row % 2 == 0 { 0 } else { brick_w / 2 };
        let mortar = y % brick_h == 0 || (x + shift) % brick_w == 0;
        let v = if mortar { base - amp } else { base + amp * 0.3 };
        v.clamp(0.05, 0.95)
    })
}

#[derive(Debug, Clone)]
pub struct DeskSources {
    pub scaffold_dir: PathBuf,
    pub activity_dir: PathBuf,
}

/// Writes `cutouts` lattice PNGs with densities spread over `[0.06, 0.85]`
/// and `activities` scene PNGs under `root`.
pub fn write_desk_sources(
    root: &Path,
    cutouts: usize,
    activities: usize,
    side: usize,
    seed: u64,
) -> Result<DeskSources> {
    let scaffold_dir = root.join("scaffolds");
    let activity_dir = root.join("activities");
    for d in [&scaffold_dir, &activity_dir] {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    for k in 0..cutouts {
        let density = if cutouts == 1 {
            0.3
        } else {
            0.06 + 0.79 * k as f64 / (cutouts - 1) as f64
        };
        let img = scaffold_cutout(side, density, seed ^ (k as u64).wrapping_mul(0x9E37))?;
        save_png(&img, scaffold_dir.join(format!("scaffold_{k:04}.png")))?;
    }
    for k in 0..activities {
        let img = activity_scene(side, side, seed.wrapping_add(1_000_003 * (k as u64 + 1)))?;
        save_png(&img, activity_dir.join(format!("activity_{k:04}.png")))?;
    }
    Ok(DeskSources {
        scaffold_dir,
        activity_dir,
    })
}

/// Synthesis configuration over desk sources.
pub fn desk_config(
    sources: &DeskSources,
    output_dir: &Path,
    target: usize,
    seed: u64,
) -> SynthesisConfig {
    SynthesisConfig {
        scaffold_dir: sources.scaffold_dir.clone(),
        activity_dir: sources.activity_dir.clone(),
        output_dir: output_dir.to_path_buf(),
        target_w: target,
        target_h: target,
        seed,
        ..SynthesisConfig::default()
    }
}

/// 32×32 gray horizontal stripes of period 8 with one 4×4 patch (origin
/// `(12, 12)`) missing its left two columns.
#[derive(Debug, Clone)]
pub struct StripeFixture {
    pub gt: Raster<f64>,
    pub mask: BinaryMask,
    pub hole: Raster<f64>,
}

pub fn stripe_fixture() -> StripeFixture {
    let gt = Raster::from_fn(32, 32, ColorSpace::Gray, |_, y, _| {
        if ((y + 2) / 4) % 2 == 0 {
            0.8
        } else {
            0.2
        }
    })
    .expect("valid fixture");
    let mask = BinaryMask::from_fn(32, 32, |x, y| (12..14).contains(&x) && (12..16).contains(&y))
        .expect("valid fixture");
    let hole = subtract(&gt, &mask, 1.0).expect("valid fixture");
    StripeFixture { gt, mask, hole }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutout_density_tracks_request() {
        for d in [0.1, 0.3, 0.5, 0.7] {
            let c = scaffold_cutout(96, d, 5).unwrap();
            let cov = c.data().chunks_exact(4).filter(|p| p[3] > 0.5).count() as f64 / (96.0 * 96.0);
            assert!((cov - d).abs() < 0.12, "{d} -> {cov}");
        }
        let empty = scaffold_cutout(16, 0.0, 1).unwrap();
        assert!(empty.data().chunks_exact(4).all(|p| p[3] == 0.0));
        assert!(scaffold_cutout(16, 1.0, 1).is_err());
    }

    #[test]
    fn scenes_avoid_extremes() {
        for seed in 0..5 {
            let s = activity_scene(40, 30, seed).unwrap();
            assert!(s.data().iter().all(|v| (0.05..=0.95).contains(v)));
        }
        assert_eq!(activity_scene(20, 20, 9).unwrap(), activity_scene(20, 20, 9).unwrap());
    }

    #[test]
    fn stripe_fixture_shape() {
        let fx = stripe_fixture();
        assert_eq!(fx.mask.count(), 8);
        assert_eq!(fx.hole.get(12, 12, 0), 1.0);
        assert_eq!(fx.gt.get(0, 14, 0), 0.8);
        assert_eq!(fx.gt.get(0, 10, 0), 0.2);
    }
}

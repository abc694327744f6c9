use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{
    bilinear_resample, load_png, rotate, save_mask_png, save_png, BinaryMask, ColorSpace, Raster,
};

use super::{
    binarize, classify_bucket, overlay, scaffold_proportion, subtract, DatasetManifest,
    ProportionBucket, SampleRecord, Split, SynthesisConfig,
};

// Stream id reserved for the split shuffle; pair streams use the pair index.
const SPLIT_STREAM: u64 = u64::MAX;

/// One rendered quadruple.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedSample {
    pub overlay: Raster<f64>,
    pub mask: BinaryMask,
    pub hole: Raster<f64>,
    pub gt: Raster<f64>,
    pub proportion: f64,
    pub bucket: Option<ProportionBucket>,
}

/// PNG files directly inside `dir`, sorted by file name.
pub fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png && path.is_file() {
            files.push(path);
        }
    }
    if files.is_empty() {
        return Err(Error::EmptySource(dir.to_path_buf()));
    }
    files.sort();
    Ok(files)
}

/// Rotation angle for a pair, drawn from its own ChaCha stream so the value
/// depends only on `(seed, pair_index)`.
pub fn pair_angle(seed: u64, pair_index: u64, range: [f64; 2]) -> f64 {
    let [lo, hi] = range;
    if hi <= lo {
        return lo;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pair_index);
    lo + (hi - lo) * rng.gen::<f64>()
}

fn prepare_cutout(cutout: &Raster<f64>, cfg: &SynthesisConfig) -> Result<Raster<f64>> {
    if cutout.space() != ColorSpace::Rgba {
        return Err(Error::UnsupportedChannels(
            "scaffold cutouts must be RGBA".into(),
        ));
    }
    bilinear_resample(cutout, cfg.target_w, cfg.target_h)
}

fn prepare_activity(activity: &Raster<f64>, cfg: &SynthesisConfig) -> Result<Raster<f64>> {
    bilinear_resample(&activity.to_rgb(), cfg.target_w, cfg.target_h)
}

fn compose(
    cutout: &Raster<f64>,
    gt: Raster<f64>,
    angle: f64,
    cfg: &SynthesisConfig,
) -> Result<SynthesizedSample> {
    let rotated = rotate(cutout, angle, 0.0);
    let mask = binarize(&rotated, cfg.alpha_threshold)?;
    let overlay = overlay(&gt, &rotated)?;
    let hole = subtract(&gt, &mask, cfg.hole_fill)?;
    let proportion = scaffold_proportion(&mask);
    Ok(SynthesizedSample {
        overlay,
        mask,
        hole,
        gt,
        proportion,
        bucket: classify_bucket(proportion)?,
    })
}

/// Resample cutout → rotate → binarize → overlay → subtract. The ground
/// truth is the background resampled to the target frame.
pub fn synthesize_sample(
    scaffold: &Raster<f64>,
    activity: &Raster<f64>,
    angle: f64,
    cfg: &SynthesisConfig,
) -> Result<SynthesizedSample> {
    cfg.validate()?;
    let cutout = prepare_cutout(scaffold, cfg)?;
    let gt = prepare_activity(activity, cfg)?;
    compose(&cutout, gt, angle, cfg)
}

/// The mask `synthesize_sample` would produce, computed from the resampled
/// cutout's alpha plane alone.
pub fn render_mask(alpha: &Raster<f64>, angle: f64, alpha_threshold: f64) -> BinaryMask {
    let rotated = rotate(alpha, angle, 0.0);
    let bits = rotated.data().iter().map(|&a| a > alpha_threshold).collect();
    BinaryMask::new(rotated.width(), rotated.height(), bits).expect("same dimensions")
}

fn sample_id(i: usize, j: usize) -> String {
    format!("s{i:05}_a{j:05}")
}

fn assign_splits(records: &mut [SampleRecord], cfg: &SynthesisConfig) {
    if cfg.external_test {
        records.iter_mut().for_each(|r| r.split = Split::ExtTest);
        return;
    }
    let [train, val, _] = cfg.split_sizes(records.len());
    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SPLIT_STREAM);
    order.shuffle(&mut rng);
    for (rank, &idx) in order.iter().enumerate() {
        records[idx].split = if rank < train {
            Split::Train
        } else if rank < train + val {
            Split::Val
        } else {
            Split::Test
        };
    }
}

struct Pair<'a> {
    index: usize,
    i: usize,
    j: usize,
    scaffold: &'a Path,
    activity: &'a Path,
}

fn base_record(pair: &Pair<'_>, angle: f64, proportion: f64) -> Result<SampleRecord> {
    Ok(SampleRecord {
        id: sample_id(pair.i, pair.j),
        scaffold_src: pair.scaffold.to_path_buf(),
        activity_src: pair.activity.to_path_buf(),
        angle,
        proportion,
        bucket: classify_bucket(proportion)?,
        split: Split::Train,
        overlay_path: None,
        mask_path: None,
        hole_path: None,
        gt_path: None,
    })
}

/// Every (scaffold, activity) pair exactly once, ordered by pair index
/// `i * N + j`. With `manifest_only`, masks are rendered in memory to get
/// proportions but no image is written.
pub fn synthesize_dataset(cfg: &SynthesisConfig, manifest_only: bool) -> Result<DatasetManifest> {
    cfg.validate()?;
    let scaffolds = list_pngs(&cfg.scaffold_dir)?;
    let activities = list_pngs(&cfg.activity_dir)?;
    let n = activities.len();

    let pairs: Vec<Pair<'_>> = (0..scaffolds.len())
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| Pair {
            index: i * n + j,
            i,
            j,
            scaffold: &scaffolds[i],
            activity: &activities[j],
        })
        .collect();

    let mut records = if manifest_only {
        let alphas: Vec<Raster<f64>> = scaffolds
            .par_iter()
            .map(|p| Ok(prepare_cutout(&load_png(p)?, cfg)?.channel(3)))
            .collect::<Result<_>>()?;
        pairs
            .par_iter()
            .map(|pair| {
                let angle = pair_angle(cfg.seed, pair.index as u64, cfg.rotation_range);
                let mask = render_mask(&alphas[pair.i], angle, cfg.alpha_threshold);
                base_record(pair, angle, scaffold_proportion(&mask))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        render_all(cfg, &scaffolds, &activities, &pairs)?
    };

    assign_splits(&mut records, cfg);
    Ok(DatasetManifest::new(cfg.clone(), records))
}

fn render_all(
    cfg: &SynthesisConfig,
    scaffolds: &[PathBuf],
    activities: &[PathBuf],
    pairs: &[Pair<'_>],
) -> Result<Vec<SampleRecord>> {
    let out = &cfg.output_dir;
    for sub in ["overlay", "mask", "hole", "gt"] {
        let dir = out.join(sub);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let cutouts: Vec<Raster<f64>> = scaffolds
        .par_iter()
        .map(|p| prepare_cutout(&load_png(p)?, cfg))
        .collect::<Result<_>>()?;
    let n = activities.len();

    // Parallel over backgrounds so each one is decoded once.
    let per_activity: Vec<Vec<SampleRecord>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let gt = prepare_activity(&load_png(&activities[j])?, cfg)?;
            pairs
                .iter()
                .filter(|p| p.j == j)
                .map(|pair| {
                    let angle = pair_angle(cfg.seed, pair.index as u64, cfg.rotation_range);
                    let s = compose(&cutouts[pair.i], gt.clone(), angle, cfg)?;
                    let mut rec = base_record(pair, angle, s.proportion)?;
                    let file = format!("{}.png", rec.id);
                    let rel = |sub: &str| PathBuf::from(sub).join(&file);
                    save_png(&s.overlay, out.join(rel("overlay")))?;
                    save_mask_png(&s.mask, out.join(rel("mask")))?;
                    save_png(&s.hole, out.join(rel("hole")))?;
                    save_png(&s.gt, out.join(rel("gt")))?;
                    rec.overlay_path = Some(rel("overlay"));
                    rec.mask_path = Some(rel("mask"));
                    rec.hole_path = Some(rel("hole"));
                    rec.gt_path = Some(rel("gt"));
                    Ok(rec)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut slots: Vec<Option<SampleRecord>> = vec![None; pairs.len()];
    for (j, recs) in per_activity.into_iter().enumerate() {
        for (i, rec) in recs.into_iter().enumerate() {
            slots[i * n + j] = Some(rec);
        }
    }
    Ok(slots.into_iter().map(|r| r.expect("every pair rendered")).collect())
}

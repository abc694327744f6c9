use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{
    fit_gaussian, frechet_distance, mae, miou, psnr, ssim, EmbeddingSet, Gaussian, ImageEmbedding,
    MetricsReport, MetricsRow, PixelEmbedding, RowKey,
};
use crate::raster::{load_mask_png, load_png, requantize, save_png, Raster};
use crate::synthesis::{subtract, DatasetManifest, ProportionBucket, SampleRecord, Split};

use super::report::{RunReport, SampleFailure};
use super::{inpaint, segment, InpainterSpec, SegmentContext, SegmenterSpec};

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Records to score; `None` takes every split.
    pub split: Option<Split>,
    pub embedding: PixelEmbedding,
    /// Echoed into the report.
    pub seed: u64,
    /// Where restored images are written as `<id>.png`, if anywhere.
    pub restored_dir: Option<PathBuf>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            split: Some(Split::Test),
            embedding: PixelEmbedding::default(),
            seed: 0,
            restored_dir: None,
        }
    }
}

struct Scored {
    bucket: ProportionBucket,
    mae: f64,
    ssim: f64,
    psnr: f64,
    miou: f64,
    restored_embedding: Vec<f64>,
    gt_embedding: Vec<f64>,
}

fn image_path(root: &Path, rec: &SampleRecord, p: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    p.as_ref().map(|p| root.join(p)).ok_or_else(|| {
        Error::Manifest(format!(
            "record {} has no {what} image; synthesize without --manifest-only",
            rec.id
        ))
    })
}

fn score(
    rec: &SampleRecord,
    bucket: ProportionBucket,
    root: &Path,
    hole_fill: f64,
    seg: &SegmenterSpec,
    inp: &InpainterSpec,
    opts: &EvalOptions,
) -> Result<Scored> {
    let overlay: Raster<f64> = load_png(image_path(root, rec, &rec.overlay_path, "overlay")?)?;
    let gt_mask = load_mask_png(image_path(root, rec, &rec.mask_path, "mask")?)?;
    let hole: Raster<f64> = load_png(image_path(root, rec, &rec.hole_path, "hole")?)?;
    let gt: Raster<f64> = load_png(image_path(root, rec, &rec.gt_path, "gt")?)?;

    let ctx = SegmentContext {
        sample_id: Some(&rec.id),
        ground_truth: Some(&gt_mask),
    };
    let pred = segment(&overlay, seg, ctx)?;
    let input = subtract(&hole, &pred, hole_fill)?;
    let restored = requantize(&inpaint(&input, &pred, inp, Some(&gt))?);
    if let Some(dir) = &opts.restored_dir {
        save_png(&restored, dir.join(format!("{}.png", rec.id)))?;
    }
    Ok(Scored {
        bucket,
        mae: mae(&restored, &gt)?,
        ssim: ssim(&restored, &gt)?,
        psnr: psnr(&restored, &gt)?,
        miou: miou(&pred, &gt_mask)?,
        restored_embedding: opts.embedding.embed(&restored)?,
        gt_embedding: opts.embedding.embed(&gt)?,
    })
}

fn aggregate(key: RowKey, scored: &[&Scored]) -> Result<(MetricsRow, f64)> {
    let n = scored.len();
    let mean = |f: fn(&Scored) -> f64| scored.iter().map(|s| f(s)).sum::<f64>() / n as f64;
    let fit = |pick: fn(&Scored) -> &Vec<f64>| -> Result<Gaussian<f64>> {
        let vectors: Vec<Vec<f64>> = scored.iter().map(|s| pick(s).clone()).collect();
        if n == 1 {
            // point mass: the distance reduces to the squared embedding gap
            let d = vectors[0].len();
            return Ok(Gaussian {
                mean: vectors[0].clone(),
                cov: Matrix::zeros(d, d),
            });
        }
        fit_gaussian(&EmbeddingSet::new(vectors)?)
    };
    let frechet = Some(frechet_distance(
        &fit(|s| &s.restored_embedding)?,
        &fit(|s| &s.gt_embedding)?,
    )?);
    let row = MetricsRow {
        key,
        n,
        mae: mean(|s| s.mae),
        ssim: mean(|s| s.ssim),
        psnr: mean(|s| s.psnr),
        frechet,
    };
    Ok((row, mean(|s| s.miou)))
}

/// Segments, inpaints and scores every non-degenerate record of the chosen
/// split. Per-image MAE, SSIM, PSNR and MIoU are averaged per bucket and over
/// all samples; the Fréchet column compares the embedding distributions of
/// restored and ground-truth images within each row. Samples that fail are
/// left out and listed in the report. Samples run in parallel but every
/// reduction follows manifest order, so reruns give identical reports.
pub fn evaluate_run(
    manifest: &DatasetManifest,
    manifest_dir: &Path,
    seg: &SegmenterSpec,
    inp: &InpainterSpec,
    opts: &EvalOptions,
) -> Result<RunReport> {
    let selected: Vec<&SampleRecord> = manifest
        .records
        .iter()
        .filter(|r| opts.split.is_none_or(|s| r.split == s))
        .collect();
    let degenerate = selected.iter().filter(|r| r.is_degenerate()).count();
    let work: Vec<(&SampleRecord, ProportionBucket)> = selected
        .iter()
        .filter_map(|r| r.bucket.map(|b| (*r, b)))
        .collect();
    if work.is_empty() {
        return Err(Error::Report(format!(
            "no non-degenerate samples in split {}",
            opts.split.map_or("all", Split::name)
        )));
    }
    if let Some(dir) = &opts.restored_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let hole_fill = manifest.config.hole_fill;
    let outcomes: Vec<Result<Scored>> = work
        .par_iter()
        .map(|(rec, b)| score(rec, *b, manifest_dir, hole_fill, seg, inp, opts))
        .collect();

    let mut scored = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for ((rec, _), out) in work.iter().zip(outcomes) {
        match out {
            Ok(s) => scored.push(s),
            Err(e) => failures.push(SampleFailure {
                id: rec.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    if scored.is_empty() {
        return Err(Error::Report(format!(
            "all {} samples failed; first: {}: {}",
            failures.len(),
            failures[0].id,
            failures[0].message
        )));
    }

    let mut rows = Vec::new();
    let mut row_miou = Vec::new();
    for b in ProportionBucket::ALL {
        let members: Vec<&Scored> = scored.iter().filter(|s| s.bucket == b).collect();
        if !members.is_empty() {
            let (row, m) = aggregate(RowKey::Bucket(b), &members)?;
            rows.push(row);
            row_miou.push((RowKey::Bucket(b), m));
        }
    }
    let all: Vec<&Scored> = scored.iter().collect();
    let (total, m) = aggregate(RowKey::Total, &all)?;
    rows.push(total);
    row_miou.push((RowKey::Total, m));

    let provenance = vec![
        ("seed".to_string(), opts.seed.to_string()),
        ("manifest_digest".to_string(), manifest.digest()?),
        ("segmenter".to_string(), seg.to_string()),
        ("inpainter".to_string(), inp.to_string()),
        (
            "embedding".to_string(),
            ImageEmbedding::<f64>::label(&opts.embedding),
        ),
        (
            "aggregation".to_string(),
            "per-image mean of mae/ssim/psnr; frechet between per-row embedding gaussians".to_string(),
        ),
        ("evaluated".to_string(), scored.len().to_string()),
        ("degenerate_skipped".to_string(), degenerate.to_string()),
        ("failed".to_string(), failures.len().to_string()),
    ];
    let report = RunReport {
        dataset: opts.split.map_or("all", Split::name).to_string(),
        rows: MetricsReport { rows },
        miou: row_miou,
        provenance,
        failures,
    };
    report.rows.check_partition()?;
    Ok(report)
}

mod common;

use std::path::{Path, PathBuf};

use common::cr_oracle;
use scafrest_core::metrics::RowKey;
use scafrest_core::pipeline::{
    evaluate_run, inpaint, parse_report_csv, segment, EvalOptions, InpainterSpec, SegmentContext,
    SegmenterSpec,
};
use scafrest_core::procedural::{desk_config, stripe_fixture, write_desk_sources};
use scafrest_core::raster::{load_mask_png, load_png, save_mask_png, BinaryMask, Raster};
use scafrest_core::synthesis::{manifest_counts, synthesize_dataset, DatasetManifest, ProportionBucket};
use scafrest_core::Error;

struct Desk {
    _dir: tempfile::TempDir,
    root: PathBuf,
    manifest: DatasetManifest,
}

fn desk(cutouts: usize, activities: usize, side: usize) -> Desk {
    let dir = tempfile::tempdir().unwrap();
    let src = write_desk_sources(&dir.path().join("src"), cutouts, activities, 2 * side, 5).unwrap();
    let root = dir.path().join("data");
    let manifest = synthesize_dataset(&desk_config(&src, &root, side, 5), false).unwrap();
    manifest.write(root.join("manifest.jsonl")).unwrap();
    Desk {
        _dir: dir,
        root,
        manifest,
    }
}

fn all_splits() -> EvalOptions {
    EvalOptions {
        split: None,
        ..EvalOptions::default()
    }
}

#[test]
fn identity_audit_reads_perfect_scores() {
    let d = desk(4, 5, 48);
    let r = evaluate_run(&d.manifest, &d.root, &SegmenterSpec::Oracle, &InpainterSpec::DebugIdentity, &all_splits())
        .unwrap();
    assert!(r.failures.is_empty());
    for row in &r.rows.rows {
        assert_eq!(row.mae, 0.0);
        assert!((row.ssim - 1.0).abs() < 1e-12);
        assert_eq!(row.psnr, f64::INFINITY);
        assert_eq!(row.frechet, Some(0.0));
    }
    assert!(r.miou.iter().all(|(_, m)| *m == 1.0));
    assert_eq!(r.rows.total().unwrap().n, 20);
    let csv = r.to_csv().unwrap();
    assert!(csv.contains(",0.000000,1.000000,inf,"));
}

#[test]
fn rows_partition_the_manifest_counts() {
    let d = desk(4, 5, 48);
    let opts = EvalOptions::default();
    let r = evaluate_run(&d.manifest, &d.root, &SegmenterSpec::Oracle, &InpainterSpec::diffusion_default(), &opts);
    let counts = manifest_counts(&d.manifest.records);
    let test = counts.row(scafrest_core::synthesis::Split::Test);
    match r {
        Ok(r) => {
            for b in ProportionBucket::ALL {
                assert_eq!(r.rows.bucket(b).map_or(0, |row| row.n), test.buckets[b.index()]);
            }
            let populated = test.buckets.iter().filter(|n| **n > 0).count();
            assert_eq!(r.rows.rows.len(), populated + 1);
            assert_eq!(r.dataset, "test");
        }
        Err(e) => assert_eq!(test.total() - test.degenerate, 0, "{e}"),
    }
}

fn restored_bytes(dir: &Path, id: &str) -> Vec<u8> {
    let img: Raster<f64> = load_png(dir.join(format!("{id}.png"))).unwrap();
    img.data().iter().map(|v| (v * 255.0).round() as u8).collect()
}

#[test]
fn every_provider_preserves_known_bytes_and_is_deterministic() {
    let d = desk(3, 4, 40);
    for (k, inp) in [
        InpainterSpec::cr_patch_default(),
        InpainterSpec::diffusion_default(),
        InpainterSpec::DebugIdentity,
    ]
    .into_iter()
    .enumerate()
    {
        let out = d.root.join(format!("restored_{k}"));
        let opts = EvalOptions {
            restored_dir: Some(out.clone()),
            seed: 11,
            ..all_splits()
        };
        let a = evaluate_run(&d.manifest, &d.root, &SegmenterSpec::Oracle, &inp, &opts).unwrap();
        let b = evaluate_run(&d.manifest, &d.root, &SegmenterSpec::Oracle, &inp, &opts).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.provenance_value("seed"), Some("11"));
        for rec in &d.manifest.records {
            let hole: Raster<f64> = load_png(d.root.join(rec.hole_path.as_ref().unwrap())).unwrap();
            let mask = load_mask_png(d.root.join(rec.mask_path.as_ref().unwrap())).unwrap();
            let hole_bytes: Vec<u8> = hole.data().iter().map(|v| (v * 255.0).round() as u8).collect();
            let got = restored_bytes(&out, &rec.id);
            let ch = hole.channels();
            for (i, &m) in mask.bits().iter().enumerate() {
                if !m {
                    assert_eq!(got[i * ch..(i + 1) * ch], hole_bytes[i * ch..(i + 1) * ch], "{inp} {}", rec.id);
                }
            }
        }
    }
}

#[test]
fn csv_round_trips_through_parser() {
    let d = desk(3, 4, 40);
    let r = evaluate_run(&d.manifest, &d.root, &SegmenterSpec::Oracle, &InpainterSpec::diffusion_default(), &all_splits())
        .unwrap();
    let text = r.to_csv().unwrap();
    let back = parse_report_csv(&text).unwrap();
    assert_eq!(back.to_csv().unwrap(), text);
    assert_eq!(back.rows.rows.len(), r.rows.rows.len());
    assert_eq!(back.provenance_value("manifest_digest"), Some(d.manifest.digest().unwrap().as_str()));
}

#[test]
fn failures_are_quarantined() {
    let d = desk(3, 4, 40);
    let mut manifest = d.manifest.clone();
    let victim = manifest.records.iter().position(|r| r.bucket.is_some()).unwrap();
    manifest.records[victim].gt_path = Some("gt/missing.png".into());
    let r = evaluate_run(&manifest, &d.root, &SegmenterSpec::Oracle, &InpainterSpec::diffusion_default(), &all_splits())
        .unwrap();
    assert_eq!(r.failures.len(), 1);
    assert_eq!(r.failures[0].id, manifest.records[victim].id);
    let evaluated = manifest.records.iter().filter(|r| r.bucket.is_some()).count() - 1;
    assert_eq!(r.rows.total().unwrap().n, evaluated);
    assert_eq!(r.provenance_value("failed"), Some("1"));
}

#[test]
fn external_and_threshold_segmenters() {
    let d = desk(2, 3, 40);
    let masks = d.root.join("external");
    std::fs::create_dir_all(&masks).unwrap();
    for rec in &d.manifest.records {
        let gt = load_mask_png(d.root.join(rec.mask_path.as_ref().unwrap())).unwrap();
        save_mask_png(&gt.complement(), masks.join(format!("{}.png", rec.id))).unwrap();
    }
    let rec = &d.manifest.records[0];
    let overlay: Raster<f64> = load_png(d.root.join(rec.overlay_path.as_ref().unwrap())).unwrap();
    let spec = SegmenterSpec::External { source: masks.clone() };
    let ctx = SegmentContext {
        sample_id: Some(&rec.id),
        ground_truth: None,
    };
    let got = segment(&overlay, &spec, ctx).unwrap();
    assert_eq!(got, load_mask_png(masks.join(format!("{}.png", rec.id))).unwrap());

    let wrong = d.root.join("wrong.png");
    save_mask_png(&BinaryMask::empty(3, 3).unwrap(), &wrong).unwrap();
    let spec = SegmenterSpec::External { source: wrong };
    assert!(matches!(segment(&overlay, &spec, ctx), Err(Error::Segmenter(_))));

    let r = evaluate_run(
        &d.manifest,
        &d.root,
        &SegmenterSpec::threshold_default(),
        &InpainterSpec::diffusion_default(),
        &all_splits(),
    )
    .unwrap();
    let miou = r.row_miou(RowKey::Total).unwrap();
    assert!((0.0..1.0).contains(&miou));
}

#[test]
fn cr_patch_matches_oracle_on_stripe_fixture() {
    let fx = stripe_fixture();
    let spec = InpainterSpec::CrPatch {
        alpha: 10.0,
        patch: 4,
        stride: 4,
        levels: 1,
    };
    let out = inpaint(&fx.hole, &fx.mask, &spec, None).unwrap();
    let mut expect = cr_oracle(fx.hole.data(), 32, 32, 1, fx.mask.bits(), 4, 4, 10.0).unwrap();
    for (i, &m) in fx.mask.bits().iter().enumerate() {
        if !m {
            expect[i] = fx.hole.data()[i];
        }
    }
    for (a, b) in out.data().iter().zip(&expect) {
        assert!((a - b).abs() < 1e-9);
    }
    let full = BinaryMask::full(32, 32).unwrap();
    assert!(matches!(inpaint(&fx.hole, &full, &spec, None), Err(Error::Uninpaintable)));
}

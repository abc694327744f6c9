//! `scafrest` command line: dataset synthesis, segmentation and inpainting
//! providers, evaluation reports and shifted-window inspection.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use scafrest_core::metrics::PixelEmbedding;
use scafrest_core::pipeline::{
    evaluate_run, inpaint, segment, EvalOptions, InpainterSpec, RunReport, SegmentContext,
    SegmenterSpec,
};
use scafrest_core::raster::{load_mask_png, load_png, save_mask_png, save_png, BinaryMask, ColorSpace, Raster};
use scafrest_core::swin::{
    attention_masks, backbone_shapes, pyramid_shapes, receptive_field_components, BackboneConfig,
    DEFAULT_PPM_SCALES,
};
use scafrest_core::synthesis::{subtract, synthesize_dataset, DatasetManifest, Split, SynthesisConfig};

use config::ConfigFile;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<scafrest_core::Error> for CliError {
    fn from(e: scafrest_core::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "scafrest", version, about = "Scaffold occlusion synthesis, inpainting and evaluation")]
struct Cli {
    /// Flat key = value file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice; echoed into outputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a labeled dataset from cutouts and backgrounds.
    Synth(SynthArgs),
    /// Predict a scaffold mask for one image.
    Segment(SegmentArgs),
    /// Remove the scaffold from one real image (no metrics).
    Inpaint(InpaintArgs),
    /// Segment, inpaint and score a rendered dataset.
    Eval(EvalArgs),
    /// Re-render a saved CSV report.
    Report(ReportArgs),
    /// Print backbone shapes and shifted-window masks.
    InspectSwin(SwinArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    scaffold_dir: Option<PathBuf>,
    #[arg(long)]
    activity_dir: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Manifest path; defaults to `<output-dir>/manifest.jsonl`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Square target size; `--width`/`--height` take precedence.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    alpha_threshold: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rotation_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rotation_max: Option<f64>,
    /// Train, val and test fractions, e.g. `0.9,0.05,0.05`.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    hole_fill: Option<f64>,
    /// Label every record as an external test set.
    #[arg(long)]
    external_test: bool,
    /// Compute proportions and splits without writing images.
    #[arg(long)]
    manifest_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SegmenterKind {
    Oracle,
    External,
    #[value(name = "threshold-baseline", alias = "threshold")]
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InpainterKind {
    CrPatch,
    DiffusionFill,
    DebugIdentity,
}

#[derive(Debug, Args)]
struct SegmenterArgs {
    #[arg(long, value_enum)]
    segmenter: Option<SegmenterKind>,
    /// Mask PNG, or a directory of `<id>.png` masks, for the external segmenter.
    #[arg(long)]
    external_masks: Option<PathBuf>,
    #[arg(long)]
    min_luma: Option<f64>,
    #[arg(long)]
    max_luma: Option<f64>,
}

#[derive(Debug, Args)]
struct InpainterArgs {
    #[arg(long, value_enum)]
    inpainter: Option<InpainterKind>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    patch: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    seg: SegmenterArgs,
    /// Manifest holding the ground-truth mask (oracle only).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Record id within `--manifest` (oracle only).
    #[arg(long)]
    id: Option<String>,
}

#[derive(Debug, Args)]
struct InpaintArgs {
    /// Observed image containing the scaffold.
    #[arg(long)]
    input: PathBuf,
    /// Scaffold mask PNG; without it the segmenter options decide.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[command(flatten)]
    seg: SegmenterArgs,
    #[command(flatten)]
    inp: InpainterArgs,
    #[arg(long)]
    output: PathBuf,
    /// Side-by-side input | mask | restored image.
    #[arg(long)]
    composite: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    seg: SegmenterArgs,
    #[command(flatten)]
    inp: InpainterArgs,
    /// train, val, test, ext_test or all.
    #[arg(long)]
    split: Option<String>,
    /// Write the CSV report here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Save restored images as `<id>.png` here.
    #[arg(long)]
    restored_dir: Option<PathBuf>,
    /// Side of the luma embedding used for the Fréchet column.
    #[arg(long)]
    embedding_side: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Csv,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// CSV written by `eval --csv`.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct SwinArgs {
    #[arg(long, default_value_t = 512)]
    height: usize,
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, default_value_t = 512)]
    fused_dim: usize,
    #[arg(long, default_value_t = 7)]
    window: usize,
    /// Token map side used for the mask dump.
    #[arg(long, default_value_t = 14)]
    mask_size: usize,
    /// Print every window's full blocked/open matrix.
    #[arg(long)]
    dump_masks: bool,
}

/// Runs the command line with the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Same as [`run`] with explicit output streams. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = match &e {
                CliError::Usage(m) => writeln!(err, "usage error: {m}"),
                CliError::Runtime(r) => writeln!(err, "error: {r:#}"),
            };
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> CliResult {
    let file = ConfigFile::load(cli.config.as_deref())?;
    let seed = file.pick(cli.seed, "seed", 0u64)?;
    match cli.command {
        Command::Synth(a) => synth(a, &file, seed, out),
        Command::Segment(a) => segment_cmd(a, &file, seed, out),
        Command::Inpaint(a) => inpaint_cmd(a, &file, seed, out),
        Command::Eval(a) => eval_cmd(a, &file, seed, out),
        Command::Report(a) => report_cmd(a, out),
        Command::InspectSwin(a) => inspect_swin(a, out),
    }
}

fn parse_fractions(s: &str) -> CliResult<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("bad split fractions {s:?}")))?;
    <[f64; 3]>::try_from(parts).map_err(|_| CliError::usage(format!("need three split fractions, got {s:?}")))
}

fn synthesis_config(a: &SynthArgs, file: &ConfigFile, seed: u64) -> CliResult<SynthesisConfig> {
    let d = SynthesisConfig::default();
    let size = a.size;
    let split = match a.split.clone().or_else(|| file.raw("split_fractions").map(str::to_string)) {
        Some(s) => parse_fractions(&s)?,
        None => d.split_fractions,
    };
    let cfg = SynthesisConfig {
        scaffold_dir: file.pick(a.scaffold_dir.clone(), "scaffold_dir", d.scaffold_dir)?,
        activity_dir: file.pick(a.activity_dir.clone(), "activity_dir", d.activity_dir)?,
        output_dir: file.pick(a.output_dir.clone(), "output_dir", d.output_dir)?,
        target_w: file.pick(a.width.or(size), "target_w", d.target_w)?,
        target_h: file.pick(a.height.or(size), "target_h", d.target_h)?,
        alpha_threshold: file.pick(a.alpha_threshold, "alpha_threshold", d.alpha_threshold)?,
        rotation_range: [
            file.pick(a.rotation_min, "rotation_min", d.rotation_range[0])?,
            file.pick(a.rotation_max, "rotation_max", d.rotation_range[1])?,
        ],
        seed,
        split_fractions: split,
        hole_fill: file.pick(a.hole_fill, "hole_fill", d.hole_fill)?,
        external_test: a.external_test || file.get("external_test")?.unwrap_or(false),
    };
    cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(cfg)
}

fn synth(a: SynthArgs, file: &ConfigFile, seed: u64, out: &mut dyn Write) -> CliResult {
    let cfg = synthesis_config(&a, file, seed)?;
    let manifest_path = file.pick(a.manifest.clone(), "manifest", cfg.output_dir.join("manifest.jsonl"))?;
    let manifest = synthesize_dataset(&cfg, a.manifest_only)?;
    manifest.write(&manifest_path)?;
    let per = |s: Split| manifest.records.iter().filter(|r| r.split == s).count();
    let mut text = manifest.counts.render("split");
    let _ = writeln!(text, "records {}", manifest.records.len());
    let _ = writeln!(
        text,
        "totals train={} val={} test={} ext_test={}",
        per(Split::Train),
        per(Split::Val),
        per(Split::Test),
        per(Split::ExtTest)
    );
    let _ = writeln!(text, "seed {seed}");
    let _ = writeln!(text, "manifest {}", manifest_path.display());
    let _ = writeln!(text, "digest {}", manifest.digest()?);
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn segmenter_spec(a: &SegmenterArgs, file: &ConfigFile, default: SegmenterKind) -> CliResult<SegmenterSpec> {
    let kind = match a.segmenter {
        Some(k) => k,
        None => match file.raw("segmenter") {
            Some(s) => SegmenterKind::from_str(s, true).map_err(|_| CliError::usage(format!("unknown segmenter {s:?}")))?,
            None => default,
        },
    };
    Ok(match kind {
        SegmenterKind::Oracle => SegmenterSpec::Oracle,
        SegmenterKind::External => SegmenterSpec::External {
            source: file
                .pick_opt(a.external_masks.clone(), "external_masks")?
                .ok_or_else(|| CliError::usage("the external segmenter needs --external-masks"))?,
        },
        SegmenterKind::Threshold => {
            let SegmenterSpec::Threshold { min_luma, max_luma } = SegmenterSpec::threshold_default() else {
                unreachable!()
            };
            let lo = file.pick(a.min_luma, "min_luma", min_luma)?;
            let hi = file.pick(a.max_luma, "max_luma", max_luma)?;
            if !(lo <= hi) {
                return Err(CliError::usage(format!("luma band [{lo}, {hi}] is empty")));
            }
            SegmenterSpec::Threshold {
                min_luma: lo,
                max_luma: hi,
            }
        }
    })
}

fn inpainter_spec(a: &InpainterArgs, file: &ConfigFile) -> CliResult<InpainterSpec> {
    let kind = match a.inpainter {
        Some(k) => k,
        None => match file.raw("inpainter") {
            Some(s) => InpainterKind::from_str(s, true).map_err(|_| CliError::usage(format!("unknown inpainter {s:?}")))?,
            None => InpainterKind::CrPatch,
        },
    };
    let spec = match kind {
        InpainterKind::CrPatch => {
            let InpainterSpec::CrPatch {
                alpha,
                patch,
                stride,
                levels,
            } = InpainterSpec::cr_patch_default()
            else {
                unreachable!()
            };
            let spec = InpainterSpec::CrPatch {
                alpha: file.pick(a.alpha, "alpha", alpha)?,
                patch: file.pick(a.patch, "patch", patch)?,
                stride: file.pick(a.stride, "stride", stride)?,
                levels: file.pick(a.levels, "levels", levels)?,
            };
            if let InpainterSpec::CrPatch {
                alpha,
                patch,
                stride,
                levels,
            } = spec
            {
                scafrest_core::cr::CrConfig::with_geometry(alpha, patch, stride)
                    .validate()
                    .map_err(|e| CliError::usage(e.to_string()))?;
                if levels == 0 {
                    return Err(CliError::usage("levels must be at least 1"));
                }
            }
            spec
        }
        InpainterKind::DiffusionFill => {
            let InpainterSpec::DiffusionFill { max_iters, epsilon } = InpainterSpec::diffusion_default() else {
                unreachable!()
            };
            let epsilon = file.pick(a.epsilon, "epsilon", epsilon)?;
            if !(epsilon >= 0.0) {
                return Err(CliError::usage(format!("epsilon {epsilon} must be >= 0")));
            }
            InpainterSpec::DiffusionFill {
                max_iters: file.pick(a.max_iters, "max_iters", max_iters)?,
                epsilon,
            }
        }
        InpainterKind::DebugIdentity => InpainterSpec::DebugIdentity,
    };
    Ok(spec)
}

fn oracle_mask(manifest: &Path, id: &str) -> anyhow::Result<BinaryMask> {
    let m = DatasetManifest::read(manifest)?;
    let rec = m
        .records
        .iter()
        .find(|r| r.id == id)
        .ok_or_else(|| anyhow!("no record {id:?} in {}", manifest.display()))?;
    let rel = rec
        .mask_path
        .as_ref()
        .ok_or_else(|| anyhow!("record {id} has no rendered mask"))?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    Ok(load_mask_png(dir.join(rel))?)
}

fn segment_cmd(a: SegmentArgs, file: &ConfigFile, seed: u64, out: &mut dyn Write) -> CliResult {
    let spec = segmenter_spec(&a.seg, file, SegmenterKind::Threshold)?;
    let image: Raster<f64> = load_png(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let gt = match (&spec, &a.manifest, &a.id) {
        (SegmenterSpec::Oracle, Some(m), Some(id)) => Some(oracle_mask(m, id)?),
        (SegmenterSpec::Oracle, _, _) => {
            return Err(CliError::usage("the oracle segmenter needs --manifest and --id"))
        }
        _ => None,
    };
    let stem = a.input.file_stem().map(|s| s.to_string_lossy().into_owned());
    let ctx = SegmentContext {
        sample_id: a.id.as_deref().or(stem.as_deref()),
        ground_truth: gt.as_ref(),
    };
    let mask = segment(&image, &spec, ctx)?;
    save_mask_png(&mask, &a.output)?;
    writeln!(out, "segmenter {spec}")?;
    writeln!(out, "coverage {:.6}", mask.coverage())?;
    writeln!(out, "seed {seed}")?;
    writeln!(out, "mask {}", a.output.display())?;
    Ok(())
}

/// `input | mask | restored` on one RGB canvas.
fn composite(input: &Raster<f64>, mask: &BinaryMask, restored: &Raster<f64>) -> scafrest_core::Result<Raster<f64>> {
    let (w, h) = (input.width(), input.height());
    let (a, b) = (input.to_rgb(), restored.to_rgb());
    Raster::from_fn(3 * w, h, ColorSpace::Rgb, |x, y, c| match x / w {
        0 => a.get(x, y, c),
        1 => f64::from(u8::from(mask.get(x - w, y))),
        _ => b.get(x - 2 * w, y, c),
    })
}

fn inpaint_cmd(a: InpaintArgs, file: &ConfigFile, seed: u64, out: &mut dyn Write) -> CliResult {
    let spec = inpainter_spec(&a.inp, file)?;
    if spec.needs_ground_truth() {
        return Err(CliError::usage("debug-identity needs ground truth and only runs under eval"));
    }
    let image: Raster<f64> = load_png(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let (mask, source) = match &a.mask {
        Some(p) => (load_mask_png(p)?, format!("file {}", p.display())),
        None => {
            let seg = segmenter_spec(&a.seg, file, SegmenterKind::Threshold)?;
            if seg == SegmenterSpec::Oracle {
                return Err(CliError::usage("real images have no oracle mask; pass --mask"));
            }
            let stem = a.input.file_stem().map(|s| s.to_string_lossy().into_owned());
            let ctx = SegmentContext {
                sample_id: stem.as_deref(),
                ground_truth: None,
            };
            (segment(&image, &seg, ctx)?, seg.to_string())
        }
    };
    if !mask.matches(&image) {
        return Err(CliError::Runtime(anyhow!(
            "mask is {}x{}, image {}x{}",
            mask.width(),
            mask.height(),
            image.width(),
            image.height()
        )));
    }
    let hole = subtract(&image, &mask, 1.0)?;
    let restored = inpaint(&hole, &mask, &spec, None)?;
    save_png(&restored, &a.output)?;
    writeln!(out, "inpainter {spec}")?;
    writeln!(out, "mask {source} coverage {:.6}", mask.coverage())?;
    writeln!(out, "seed {seed}")?;
    writeln!(out, "restored {}", a.output.display())?;
    if let Some(p) = &a.composite {
        save_png(&composite(&image, &mask, &restored)?, p)?;
        writeln!(out, "composite {}", p.display())?;
    }
    Ok(())
}

fn eval_cmd(a: EvalArgs, file: &ConfigFile, seed: u64, out: &mut dyn Write) -> CliResult {
    let manifest_path = file
        .pick_opt(a.manifest.clone(), "manifest")?
        .ok_or_else(|| CliError::usage("eval needs --manifest"))?;
    let seg = segmenter_spec(&a.seg, file, SegmenterKind::Oracle)?;
    let inp = inpainter_spec(&a.inp, file)?;
    let split_name = file.pick(a.split.clone(), "eval_split", "test".to_string())?;
    let split = match split_name.as_str() {
        "all" => None,
        s => Some(Split::parse(s).ok_or_else(|| CliError::usage(format!("unknown split {s:?}")))?),
    };
    let side = file.pick(a.embedding_side, "embedding_side", PixelEmbedding::default().side)?;
    if side == 0 {
        return Err(CliError::usage("embedding side must be positive"));
    }
    let opts = EvalOptions {
        split,
        embedding: PixelEmbedding { side },
        seed,
        restored_dir: file.pick_opt(a.restored_dir.clone(), "restored_dir")?,
    };
    let manifest = DatasetManifest::read(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let root = manifest_path.parent().unwrap_or(Path::new("."));
    let report = evaluate_run(&manifest, root, &seg, &inp, &opts)?;
    out.write_all(report.render_table().as_bytes())?;
    if let Some(csv) = file.pick_opt(a.csv.clone(), "csv")? {
        report.write_csv(&csv)?;
        writeln!(out, "csv {}", csv.display())?;
    }
    Ok(())
}

fn report_cmd(a: ReportArgs, out: &mut dyn Write) -> CliResult {
    let report = RunReport::read_csv(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let text = match a.format {
        ReportFormat::Table => report.render_table(),
        ReportFormat::Csv => report.to_csv()?,
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn inspect_swin(a: SwinArgs, out: &mut dyn Write) -> CliResult {
    let cfg = BackboneConfig {
        base_dim: a.dim,
        window: a.window,
        ..BackboneConfig::swin_base()
    };
    let stages = backbone_shapes(a.height, a.width, &cfg)?;
    let pyramid = pyramid_shapes(&stages, a.fused_dim, &DEFAULT_PPM_SCALES)?;
    let mut text = String::new();
    let _ = writeln!(text, "input {}x{}x3", a.height, a.width);
    for (i, (s, blocks)) in stages.iter().zip(cfg.blocks_per_stage).enumerate() {
        let _ = writeln!(text, "stage {} {s} blocks {blocks}", i + 1);
    }
    for (i, l) in pyramid.levels.iter().enumerate() {
        let _ = writeln!(text, "pyramid P{} {l}", i + 1);
    }
    for (s, p) in DEFAULT_PPM_SCALES.iter().zip(&pyramid.ppm) {
        let _ = writeln!(text, "ppm scale {s} {p}");
    }
    let _ = writeln!(text, "fused {}", pyramid.fused);

    let n = a.mask_size;
    let (layout, masks) = attention_masks(n, n, a.window, true)?;
    let _ = writeln!(
        text,
        "\nshifted windows on {n}x{n}, window {}, shift {:?}, padded {}x{}",
        a.window, layout.shift, layout.padded_h, layout.padded_w
    );
    let _ = writeln!(text, "region labels (padding shown as .):");
    for fy in 0..layout.padded_h {
        let row: String = (0..layout.padded_w)
            .map(|fx| {
                let (sy, sx) = layout.source_position(fy, fx);
                if sy >= layout.height || sx >= layout.width {
                    '.'
                } else {
                    char::from(b'0' + layout.region_label(fy, fx))
                }
            })
            .collect();
        let _ = writeln!(text, "  {row}");
    }
    for (k, m) in masks.iter().enumerate() {
        let _ = writeln!(text, "window {k} blocked pairs {}/{}", m.blocked_count(), m.tokens() * m.tokens());
        if a.dump_masks {
            for r in 0..m.tokens() {
                let row: String = (0..m.tokens()).map(|c| if m.is_blocked(r, c) { '#' } else { '.' }).collect();
                let _ = writeln!(text, "  {row}");
            }
        }
    }
    let _ = writeln!(
        text,
        "receptive-field components after W-MSA + SW-MSA: {}",
        receptive_field_components(n, n, a.window)?
    );
    out.write_all(text.as_bytes())?;
    Ok(())
}

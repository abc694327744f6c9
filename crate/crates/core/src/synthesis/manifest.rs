use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::{ProportionBucket, Split, SynthesisConfig};

pub const MANIFEST_FORMAT: &str = "scafrest-manifest";
pub const MANIFEST_VERSION: u32 = 1;

/// Provenance of one synthesized quadruple. Image paths are relative to the
/// manifest's directory and absent for manifest-only runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub scaffold_src: PathBuf,
    pub activity_src: PathBuf,
    pub angle: f64,
    pub proportion: f64,
    /// `None` marks a degenerate record (proportion 0 or 1).
    pub bucket: Option<ProportionBucket>,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overlay_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_path: Option<PathBuf>,
}

impl SampleRecord {
    pub fn is_degenerate(&self) -> bool {
        self.bucket.is_none()
    }

    pub fn is_rendered(&self) -> bool {
        self.overlay_path.is_some()
            && self.mask_path.is_some()
            && self.hole_path.is_some()
            && self.gt_path.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub split: Split,
    /// Indexed by [`ProportionBucket::index`].
    pub buckets: [usize; 5],
    pub degenerate: usize,
}

impl CountRow {
    pub fn total(&self) -> usize {
        self.buckets.iter().sum::<usize>() + self.degenerate
    }
}

/// Per-(split, bucket) tallies; one row per split, always in
/// train/val/test/ext_test order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub rows: Vec<CountRow>,
}

impl CountTable {
    pub fn row(&self, split: Split) -> &CountRow {
        self.rows
            .iter()
            .find(|r| r.split == split)
            .expect("every split has a row")
    }

    pub fn total(&self) -> usize {
        self.rows.iter().map(CountRow::total).sum()
    }

    /// Plain-text table with bucket columns in interval order.
    pub fn render(&self, title: &str) -> String {
        let mut out = String::new();
        let _ = write!(out, "{title:<10}");
        for b in ProportionBucket::ALL {
            let _ = write!(out, " {:>11}", b.label());
        }
        let _ = writeln!(out, " {:>11} {:>9}", "degenerate", "Total");
        for row in &self.rows {
            if row.split == Split::ExtTest && row.total() == 0 {
                continue;
            }
            let _ = write!(out, "{:<10}", row.split.name());
            for n in row.buckets {
                let _ = write!(out, " {n:>11}");
            }
            let _ = writeln!(out, " {:>11} {:>9}", row.degenerate, row.total());
        }
        let _ = writeln!(out, "{:<10} {:>9}", "records", self.total());
        out
    }
}

pub fn manifest_counts(records: &[SampleRecord]) -> CountTable {
    let mut rows: Vec<CountRow> = Split::ALL
        .into_iter()
        .map(|split| CountRow {
            split,
            buckets: [0; 5],
            degenerate: 0,
        })
        .collect();
    for r in records {
        let row = &mut rows[r.split as usize];
        match r.bucket {
            Some(b) => row.buckets[b.index()] += 1,
            None => row.degenerate += 1,
        }
    }
    CountTable { rows }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    config: SynthesisConfig,
    counts: CountTable,
}

/// Ordered sample records plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub records: Vec<SampleRecord>,
    pub config: SynthesisConfig,
    pub counts: CountTable,
}

impl DatasetManifest {
    pub fn new(config: SynthesisConfig, records: Vec<SampleRecord>) -> Self {
        let counts = manifest_counts(&records);
        DatasetManifest {
            records,
            config,
            counts,
        }
    }

    /// Checks that the stored tallies agree with the records.
    pub fn verify_counts(&self) -> Result<()> {
        let fresh = manifest_counts(&self.records);
        if fresh == self.counts {
            Ok(())
        } else {
            Err(Error::Manifest(
                "stored counts disagree with records".into(),
            ))
        }
    }

    fn header_line(&self) -> Result<String> {
        let header = Header {
            format: MANIFEST_FORMAT.into(),
            version: MANIFEST_VERSION,
            config: self.config.clone(),
            counts: self.counts.clone(),
        };
        serde_json::to_string(&header).map_err(|e| Error::Manifest(e.to_string()))
    }

    fn write_to(&self, mut w: impl Write) -> Result<()> {
        let io = |e| Error::Manifest(format!("write failed: {e}"));
        writeln!(w, "{}", self.header_line()?).map_err(io)?;
        for r in &self.records {
            let line = serde_json::to_string(r).map_err(|e| Error::Manifest(e.to_string()))?;
            writeln!(w, "{line}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// One JSON object per line: a header with format, version, config and
    /// counts, then one record per line.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Manifest("empty manifest".into()))?
            .map_err(|e| Error::io(path, e))?;
        let header: Header = serde_json::from_str(&first)
            .map_err(|e| Error::Manifest(format!("bad header: {e}")))?;
        if header.format != MANIFEST_FORMAT || header.version != MANIFEST_VERSION {
            return Err(Error::Manifest(format!(
                "unsupported manifest {} v{}",
                header.format, header.version
            )));
        }
        let mut records = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let r: SampleRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Manifest(format!("record {}: {e}", n + 1)))?;
            records.push(r);
        }
        let manifest = DatasetManifest {
            records,
            config: header.config,
            counts: header.counts,
        };
        manifest.verify_counts()?;
        Ok(manifest)
    }

    /// SHA-256 of the canonical serialization.
    pub fn digest(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(hex::encode(Sha256::digest(&buf)))
    }
}

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::{MetricsReport, MetricsRow, RowKey};

pub const CSV_COLUMNS: [&str; 7] = ["dataset", "bucket", "n", "mae", "ssim", "psnr", "frechet_pixel"];

const MIOU_PREFIX: &str = "miou.";
const FAILURE_PREFIX: &str = "failure.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleFailure {
    pub id: String,
    pub message: String,
}

/// Bucketed evaluation result with the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Value of the `dataset` column.
    pub dataset: String,
    pub rows: MetricsReport,
    /// Mean segmentation MIoU per row.
    pub miou: Vec<(RowKey, f64)>,
    /// Ordered `key=value` pairs written as `#` lines above the table.
    pub provenance: Vec<(String, String)>,
    pub failures: Vec<SampleFailure>,
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.6}")
    }
}

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

impl RunReport {
    pub fn provenance_value(&self, key: &str) -> Option<&str> {
        self.provenance
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn row_miou(&self, key: RowKey) -> Option<f64> {
        self.miou.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    /// CSV text: `#` provenance lines, the header, one line per row.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("# scafrest evaluation report\n");
        for (k, v) in &self.provenance {
            let _ = writeln!(out, "# {k}={}", one_line(v));
        }
        for f in &self.failures {
            let _ = writeln!(out, "# {FAILURE_PREFIX}{}={}", f.id, one_line(&f.message));
        }
        for (k, v) in &self.miou {
            let _ = writeln!(out, "# {MIOU_PREFIX}{k}={}", num(*v));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Report(e.to_string());
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for r in &self.rows.rows {
            w.write_record([
                self.dataset.clone(),
                r.key.to_string(),
                r.n.to_string(),
                num(r.mae),
                num(r.ssim),
                num(r.psnr),
                r.frechet.map_or_else(String::new, num),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))?);
        Ok(out)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_report_csv(&text)
    }

    /// Fixed-width table for terminals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.provenance {
            let _ = writeln!(out, "{k:<20} {v}");
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<10} {:<12} {:>6} {:>9} {:>9} {:>9} {:>12} {:>8}",
            "dataset", "bucket", "n", "MAE", "SSIM", "PSNR", "Frechet", "MIoU"
        );
        for r in &self.rows.rows {
            let fr = r.frechet.map_or_else(|| "-".to_string(), num);
            let mi = self.row_miou(r.key).map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
            let psnr = if r.psnr.is_finite() {
                format!("{:.3}", r.psnr)
            } else {
                num(r.psnr)
            };
            let _ = writeln!(
                out,
                "{:<10} {:<12} {:>6} {:>9.5} {:>9.5} {:>9} {:>12} {:>8}",
                self.dataset,
                r.key.to_string(),
                r.n,
                r.mae,
                r.ssim,
                psnr,
                fr,
                mi
            );
        }
        if !self.failures.is_empty() {
            let _ = writeln!(out, "\n{} sample(s) failed:", self.failures.len());
            for f in &self.failures {
                let _ = writeln!(out, "  {}: {}", f.id, f.message);
            }
        }
        out
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Report(format!("bad {what} value {s:?}")))
}

/// Inverse of [`RunReport::to_csv`].
pub fn parse_report_csv(text: &str) -> Result<RunReport> {
    let mut provenance = Vec::new();
    let mut failures = Vec::new();
    let mut miou = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        let Some(comment) = line.strip_prefix('#') else {
            body.push_str(line);
            body.push('\n');
            continue;
        };
        let Some((k, v)) = comment.trim_start().split_once('=') else {
            continue;
        };
        if let Some(id) = k.strip_prefix(FAILURE_PREFIX) {
            failures.push(SampleFailure {
                id: id.to_string(),
                message: v.to_string(),
            });
        } else if let Some(key) = k.strip_prefix(MIOU_PREFIX) {
            let key = RowKey::parse(key).ok_or_else(|| Error::Report(format!("bad row label {key:?}")))?;
            miou.push((key, parse_num(v, "miou")?));
        } else {
            provenance.push((k.to_string(), v.to_string()));
        }
    }
    let mut rd = csv::Reader::from_reader(body.as_bytes());
    let header = rd.headers().map_err(|e| Error::Report(e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Report(format!("unexpected columns {header:?}")));
    }
    let mut dataset = None;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Report(e.to_string()))?;
        let key = RowKey::parse(&rec[1]).ok_or_else(|| Error::Report(format!("bad row label {:?}", &rec[1])))?;
        dataset.get_or_insert_with(|| rec[0].to_string());
        rows.push(MetricsRow {
            key,
            n: rec[2]
                .parse()
                .map_err(|_| Error::Report(format!("bad n {:?}", &rec[2])))?,
            mae: parse_num(&rec[3], "mae")?,
            ssim: parse_num(&rec[4], "ssim")?,
            psnr: parse_num(&rec[5], "psnr")?,
            frechet: if rec[6].is_empty() {
                None
            } else {
                Some(parse_num(&rec[6], "frechet")?)
            },
        });
    }
    let dataset = dataset.ok_or_else(|| Error::Report("report has no rows".into()))?;
    Ok(RunReport {
        dataset,
        rows: MetricsReport { rows },
        miou,
        provenance,
        failures,
    })
}

//! Report structures and their serialized forms.
//!
//! Every command that measures something emits two files: a tab-separated
//! table for eyeballing and diffing, and a JSON document carrying the
//! same data plus a `report_version` for tooling. Float formatting is
//! fixed-precision in the TSV and shortest-round-trip in the JSON, so
//! identical inputs produce byte-identical files.

use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::metrics::MetricReport;
use crate::stats::UTestResult;

/// Current report schema version.
pub const REPORT_VERSION: u32 = 1;

/// Full-reference quality of one image against its ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct MetricRow {
    pub name: String,
    pub psnr: f64,
    pub ssim: f64,
    pub gmsd: f64,
    /// `psnr + ssim - gmsd`, the single ranking column.
    pub combined: f64,
}

impl MetricRow {
    pub fn new(name: impl Into<String>, m: &MetricReport) -> Self {
        Self {
            name: name.into(),
            psnr: m.psnr,
            ssim: m.ssim,
            gmsd: m.gmsd,
            combined: m.combined_total(),
        }
    }
}

/// Rank-sum comparison of one metric between two candidate sets.
#[derive(Debug, Clone, Serialize)]
pub struct UTestRow {
    pub metric: String,
    pub u: f64,
    pub p: f64,
}

impl UTestRow {
    pub fn new(metric: impl Into<String>, r: &UTestResult) -> Self {
        Self {
            metric: metric.into(),
            u: r.u_statistic,
            p: r.p_value,
        }
    }
}

/// Output of `evaluate`: per-image rows, their mean, an optional
/// rank-sum table against a second candidate set, and per-item failures.
#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub report_version: u32,
    pub rows: Vec<MetricRow>,
    pub mean: Option<MetricRow>,
    pub utest: Vec<UTestRow>,
    /// Names of items that could not be evaluated, with reasons.
    pub failures: Vec<String>,
}

impl EvaluationReport {
    pub fn new(
        rows: Vec<MetricRow>,
        utest: Vec<UTestRow>,
        failures: Vec<String>,
    ) -> EvaluationReport {
        let mean = if rows.is_empty() {
            None
        } else {
            let n = rows.len() as f64;
            let (mut p, mut s, mut g) = (0.0, 0.0, 0.0);
            for r in &rows {
                p += r.psnr;
                s += r.ssim;
                g += r.gmsd;
            }
            Some(MetricRow {
                name: "mean".to_string(),
                psnr: p / n,
                ssim: s / n,
                gmsd: g / n,
                combined: p / n + s / n - g / n,
            })
        };
        EvaluationReport {
            report_version: REPORT_VERSION,
            rows,
            mean,
            utest,
            failures,
        }
    }

    /// The tab-separated form: a header, one row per image, a trailing
    /// `mean` row, and (when present) a rank-sum table after a blank
    /// line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("name\tpsnr\tssim\tgmsd\tcombined\n");
        for row in self.rows.iter().chain(&self.mean) {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
                row.name, row.psnr, row.ssim, row.gmsd, row.combined
            ));
        }
        if !self.utest.is_empty() {
            out.push_str("\nmetric\tu\tp\n");
            for row in &self.utest {
                out.push_str(&format!("{}\t{:.1}\t{:.6}\n", row.metric, row.u, row.p));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `report.tsv` and `report.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("report.tsv"), self.to_tsv())?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        Ok(())
    }
}

/// Output of `purify` when ground truth is known: input vs output
/// quality per image.
#[derive(Debug, Clone, Serialize)]
pub struct PurifyReport {
    pub report_version: u32,
    pub rows: Vec<PurifyRow>,
    pub mean: Option<PurifyRow>,
    pub failures: Vec<String>,
}

/// Before/after metrics for one purified image.
#[derive(Debug, Clone, Serialize)]
pub struct PurifyRow {
    pub name: String,
    pub psnr_in: f64,
    pub psnr_out: f64,
    pub ssim_in: f64,
    pub ssim_out: f64,
    pub gmsd_in: f64,
    pub gmsd_out: f64,
}

impl PurifyRow {
    pub fn new(name: impl Into<String>, input: &MetricReport, output: &MetricReport) -> Self {
        Self {
            name: name.into(),
            psnr_in: input.psnr,
            psnr_out: output.psnr,
            ssim_in: input.ssim,
            ssim_out: output.ssim,
            gmsd_in: input.gmsd,
            gmsd_out: output.gmsd,
        }
    }
}

impl PurifyReport {
    pub fn new(rows: Vec<PurifyRow>, failures: Vec<String>) -> PurifyReport {
        let mean = if rows.is_empty() {
            None
        } else {
            let n = rows.len() as f64;
            let mut m = PurifyRow {
                name: "mean".to_string(),
                psnr_in: 0.0,
                psnr_out: 0.0,
                ssim_in: 0.0,
                ssim_out: 0.0,
                gmsd_in: 0.0,
                gmsd_out: 0.0,
            };
            for r in &rows {
                m.psnr_in += r.psnr_in;
                m.psnr_out += r.psnr_out;
                m.ssim_in += r.ssim_in;
                m.ssim_out += r.ssim_out;
                m.gmsd_in += r.gmsd_in;
                m.gmsd_out += r.gmsd_out;
            }
            m.psnr_in /= n;
            m.psnr_out /= n;
            m.ssim_in /= n;
            m.ssim_out /= n;
            m.gmsd_in /= n;
            m.gmsd_out /= n;
            Some(m)
        };
        PurifyReport {
            report_version: REPORT_VERSION,
            rows,
            mean,
            failures,
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out =
            String::from("name\tpsnr_in\tpsnr_out\tssim_in\tssim_out\tgmsd_in\tgmsd_out\n");
        for r in self.rows.iter().chain(&self.mean) {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
                r.name, r.psnr_in, r.psnr_out, r.ssim_in, r.ssim_out, r.gmsd_in, r.gmsd_out
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write_files(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("report.tsv"), self.to_tsv())?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        Ok(())
    }
}

//! Result records and their persistence.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::stats::MeanAccumulator;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    /// Distinguishes records of one experiment (probe, `s`, `N`, ...).
    pub label: String,
    pub config: ExperimentConfig,
    pub estimate: f64,
    /// `None` for deterministic quantities.
    pub std_error: Option<f64>,
    pub reference: Option<f64>,
    /// Predicted interval, when the check is against a band.
    pub band: Option<[f64; 2]>,
    /// The estimate is an upper bound only (event never observed).
    pub one_sided: bool,
    pub samples: u64,
    pub wall_clock_ms: f64,
    pub pass: bool,
    /// Identity-level check; a failure makes the suite fail.
    pub hard: bool,
    pub note: String,
}

impl ResultRecord {
    pub fn new(experiment: &str, label: impl Into<String>, config: &ExperimentConfig) -> Self {
        Self {
            experiment: experiment.to_string(),
            label: label.into(),
            config: config.clone(),
            estimate: 0.0,
            std_error: None,
            reference: None,
            band: None,
            one_sided: false,
            samples: 0,
            wall_clock_ms: 0.0,
            pass: true,
            hard: false,
            note: String::new(),
        }
    }

    /// Fills estimate, error and count from an accumulator.
    pub fn with_mean(mut self, acc: &MeanAccumulator) -> Self {
        self.estimate = acc.mean();
        self.samples = acc.count();
        self.std_error = (acc.count() > 1).then(|| acc.std_error());
        self
    }

    /// Pass iff the estimate is within `k` standard errors of `reference`; an exact match is
    /// required when the error is zero.
    pub fn check_against(mut self, reference: f64, k: f64) -> Self {
        self.reference = Some(reference);
        let se = self.std_error.unwrap_or(0.0);
        let gap = (self.estimate - reference).abs();
        self.pass = if se > 0.0 { gap <= k * se } else { gap <= 1e-12 * reference.abs().max(1.0) };
        self.hard = true;
        self
    }

    /// Copy with the timing removed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_clock_ms: 0.0, ..self.clone() }
    }

    /// One summary line.
    pub fn summary(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let se = self.std_error.map_or(String::from("-"), |s| format!("{s:.3e}"));
        let reference = self.reference.map_or(String::from("-"), |r| format!("{r:.6}"));
        let bound = if self.one_sided { " (upper bound)" } else { "" };
        format!(
            "{status} {} [{}] estimate {:.6}{bound} se {se} reference {reference} n {} {}",
            self.experiment, self.label, self.estimate, self.samples, self.note
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Jsonl,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format '{s}' (expected jsonl or csv)")),
        }
    }
}

const CSV_HEADER: [&str; 14] = [
    "experiment",
    "label",
    "estimate",
    "std_error",
    "reference",
    "band_low",
    "band_high",
    "one_sided",
    "samples",
    "wall_clock_ms",
    "pass",
    "hard",
    "note",
    "config",
];

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn write_records<W: Write>(records: &[ResultRecord], format: Format, out: W) -> Result<()> {
    match format {
        Format::Jsonl => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(CSV_HEADER).map_err(io)?;
            for r in records {
                w.write_record([
                    r.experiment.clone(),
                    r.label.clone(),
                    r.estimate.to_string(),
                    opt(r.std_error),
                    opt(r.reference),
                    opt(r.band.map(|b| b[0])),
                    opt(r.band.map(|b| b[1])),
                    r.one_sided.to_string(),
                    r.samples.to_string(),
                    r.wall_clock_ms.to_string(),
                    r.pass.to_string(),
                    r.hard.to_string(),
                    r.note.clone(),
                    serde_json::to_string(&r.config)?,
                ])
                .map_err(io)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn save_records(records: &[ResultRecord], format: Format, path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_records(records, format, f)
}

/// Reads line-delimited JSON records.
pub fn read_records(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("record line {}: {e}", i + 1))))
        .collect()
}

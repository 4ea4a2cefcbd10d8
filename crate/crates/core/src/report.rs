//! On-disk formats: JSON-lines logs, the per-robot CSV report, the JSON
//! summary and the timing file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::Error;
use crate::pipeline::{summarize_rows, ReportRow, RunReport, RunSummary, TimingSummary};
use crate::simworld::TruthFrame;
use crate::tracklets::FrameInput;
use crate::wire::BroadcastDelivery;

pub const REPORT_COLUMNS: [&str; 11] = [
    "frame",
    "robot_id",
    "tracklet_id",
    "est_x",
    "est_y",
    "true_x",
    "true_y",
    "visible",
    "label_correct",
    "frame_correct",
    "counted",
];

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, items: impl IntoIterator<Item = &'a T>) -> Result<(), Error> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads one JSON value per non-blank line; errors carry the 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, Error> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Record {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

fn check_increasing<T>(path: &Path, items: &[(usize, T)], frame: impl Fn(&T) -> u64) -> Result<(), Error> {
    for w in items.windows(2) {
        let (prev, next) = (frame(&w[0].1), frame(&w[1].1));
        if next <= prev {
            return Err(Error::Record {
                path: path.display().to_string(),
                line: w[1].0,
                message: format!("frame {next} does not follow frame {prev}"),
            });
        }
    }
    Ok(())
}

pub fn read_detections(path: &Path) -> Result<Vec<FrameInput>, Error> {
    let items = read_jsonl::<FrameInput>(path)?;
    check_increasing(path, &items, |f| f.frame)?;
    Ok(items.into_iter().map(|(_, f)| f).collect())
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthFrame>, Error> {
    let items = read_jsonl::<TruthFrame>(path)?;
    check_increasing(path, &items, |f| f.frame)?;
    Ok(items.into_iter().map(|(_, f)| f).collect())
}

/// Broadcast deliveries, sorted into arrival order (stable for equal times).
pub fn read_broadcasts(path: &Path) -> Result<Vec<BroadcastDelivery>, Error> {
    let mut out: Vec<BroadcastDelivery> = read_jsonl(path)?.into_iter().map(|(_, d)| d).collect();
    out.sort_by_key(|d| d.rx_us);
    Ok(out)
}

pub fn write_report_csv(path: &Path, report: &RunReport) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in report.rows() {
        w.serialize(row)?;
    }
    if report.rows().next().is_none() {
        w.write_record(REPORT_COLUMNS)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SummaryFile {
    pub config: PipelineConfig,
    pub summary: RunSummary,
}

pub fn write_summary(path: &Path, report: &RunReport) -> Result<(), Error> {
    let mut w = create(path)?;
    let file = SummaryFile { config: report.config.clone(), summary: report.summary.clone() };
    serde_json::to_writer_pretty(&mut w, &file)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct TimingRow {
    frame: u64,
    latency_us: u64,
}

/// Wall-clock timings live apart from the report so the report stays reproducible.
pub fn write_timing(path: &Path, report: &RunReport) -> Result<(), Error> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in &report.records {
        w.serialize(TimingRow { frame: r.frame, latency_us: r.latency_us })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_timing(path: &Path) -> Result<Vec<u64>, Error> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<TimingRow>().map(|row| Ok(row?.latency_us)).collect()
}

/// Writes report.csv, summary.json and timing.csv into `dir`.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<(), Error> {
    write_report_csv(&dir.join("report.csv"), report)?;
    write_summary(&dir.join("summary.json"), report)?;
    write_timing(&dir.join("timing.csv"), report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub frames: u64,
    pub counted_frames: u64,
    pub correct_frames: u64,
    pub identification_accuracy_pct: Option<f64>,
    pub position_rmse_m: Option<f64>,
    pub latency: Option<TimingSummary>,
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>, Error> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let headers = r.headers()?.clone();
    for col in REPORT_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingColumn { path: path.display().to_string(), column: col.to_string() });
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<ReportRow>().enumerate() {
        rows.push(rec.map_err(|e| Error::Record {
            path: path.display().to_string(),
            line: i + 2,
            message: e.to_string(),
        })?);
    }
    Ok(rows)
}

/// Scores a written report. Picks up timing.csv from the same directory when present.
pub fn evaluate_report(path: &Path) -> Result<EvalSummary, Error> {
    let rows = read_report(path)?;
    let (counted, correct, accuracy, rmse) = summarize_rows(&rows);
    let mut frames: Vec<u64> = rows.iter().map(|r| r.frame).collect();
    frames.sort_unstable();
    frames.dedup();
    let timing_path = path.with_file_name("timing.csv");
    let latency = if timing_path.exists() {
        TimingSummary::from_samples(&read_timing(&timing_path)?)
    } else {
        None
    };
    Ok(EvalSummary {
        frames: frames.len() as u64,
        counted_frames: counted,
        correct_frames: correct,
        identification_accuracy_pct: accuracy,
        position_rmse_m: rmse,
        latency,
    })
}

impl std::fmt::Display for EvalSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let opt = |v: Option<f64>, prec: usize| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.prec$}"));
        writeln!(f, "frames with rows:        {}", self.frames)?;
        writeln!(f, "counted frames:          {}", self.counted_frames)?;
        writeln!(f, "correct frames:          {}", self.correct_frames)?;
        writeln!(f, "identification accuracy: {} %", opt(self.identification_accuracy_pct, 2))?;
        write!(f, "position rmse:           {} m", opt(self.position_rmse_m, 3))?;
        if let Some(t) = self.latency {
            write!(f, "\nlatency mean/p95/max:    {:.0} / {} / {} us", t.mean_us, t.p95_us, t.max_us)?;
        }
        Ok(())
    }
}

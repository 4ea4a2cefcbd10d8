//! Command-line front end: `simulate`, `replay` and `eval`.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 runtime error,
//! 3 accuracy below the requested threshold.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::{info, warn};

use crate::config::PipelineConfig;
use crate::error::Error;
use crate::pipeline::{run_pipeline, RunReport};
use crate::report::{self, evaluate_report, EvalSummary};
use crate::simworld::{Scenario, Simulator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "homotrack", version, about = "Track and identify look-alike robots from one camera")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario, run the tracker on it and write logs plus a report.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Pipeline config; defaults are derived from the scenario camera.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Exit with code 3 if identification accuracy is below this percentage.
        #[arg(long)]
        min_accuracy: Option<f64>,
    },
    /// Re-run the pipeline on recorded detection and broadcast logs.
    Replay {
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        broadcasts: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Ground truth; `truth.jsonl` next to the detections is used if present.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "replay")]
        out: PathBuf,
        #[arg(long)]
        min_accuracy: Option<f64>,
    },
    /// Score a report.csv.
    Eval {
        #[arg(long)]
        report: PathBuf,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        min_accuracy: Option<f64>,
    },
}

fn ensure_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json_pretty<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Simulates, tracks and writes config.json, scenario.json, the three logs and
/// the report files into `out`.
pub fn simulate(scenario: &Path, out: &Path, seed: Option<u64>, config: Option<&Path>) -> Result<RunReport, Error> {
    let mut scenario = Scenario::load(scenario)?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let config = match config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::for_camera(scenario.camera, scenario.fps),
    };
    ensure_dir(out)?;
    info!("simulating {} frames, seed {}", scenario.duration_frames, scenario.seed);
    let run = Simulator::run(scenario.clone());
    write_json_pretty(&out.join("config.json"), &config)?;
    write_json_pretty(&out.join("scenario.json"), &scenario)?;
    report::write_jsonl(&out.join("detections.jsonl"), &run.frames)?;
    report::write_jsonl(&out.join("broadcasts.jsonl"), &run.deliveries)?;
    report::write_jsonl(&out.join("truth.jsonl"), &run.truth)?;
    let report = run_pipeline(&config, &run.frames, &run.deliveries, Some(&run.truth))?;
    report::write_run(out, &report)?;
    Ok(report)
}

pub fn replay(
    detections: &Path,
    broadcasts: &Path,
    config: &Path,
    truth: Option<&Path>,
    out: &Path,
) -> Result<RunReport, Error> {
    let config = PipelineConfig::load(config)?;
    let frames = report::read_detections(detections)?;
    let deliveries = report::read_broadcasts(broadcasts)?;
    let sibling = detections.with_file_name("truth.jsonl");
    let truth_path = truth.map(Path::to_path_buf).or_else(|| sibling.exists().then_some(sibling));
    let truth = match &truth_path {
        Some(p) => {
            info!("scoring against {}", p.display());
            Some(report::read_truth(p)?)
        }
        None => {
            warn!("no ground truth; report will carry no correctness columns");
            None
        }
    };
    ensure_dir(out)?;
    let report = run_pipeline(&config, &frames, &deliveries, truth.as_deref())?;
    report::write_run(out, &report)?;
    Ok(report)
}

pub fn eval(report_path: &Path, json: bool) -> Result<EvalSummary, Error> {
    let summary = evaluate_report(report_path)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!("{summary}");
    }
    if let Some(dir) = report_path.parent() {
        write_json_pretty(&dir.join("eval.json"), &summary)?;
    }
    Ok(summary)
}

fn threshold_code(accuracy: Option<f64>, min: Option<f64>) -> i32 {
    match min {
        Some(min) if accuracy.is_none_or(|a| a < min) => {
            eprintln!("identification accuracy {accuracy:?} below required {min}%");
            EXIT_THRESHOLD
        }
        _ => EXIT_OK,
    }
}

fn print_run(report: &RunReport) {
    let s = &report.summary;
    match s.identification_accuracy_pct {
        Some(a) => println!("{} frames, accuracy {a:.2}% over {} counted frames", s.frames, s.counted_frames),
        None => println!("{} frames, no ground truth", s.frames),
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate { scenario, out, seed, config, min_accuracy } => {
            simulate(&scenario, &out, seed, config.as_deref()).map(|r| {
                print_run(&r);
                threshold_code(r.summary.identification_accuracy_pct, min_accuracy)
            })
        }
        Command::Replay { detections, broadcasts, config, truth, out, min_accuracy } => {
            replay(&detections, &broadcasts, &config, truth.as_deref(), &out).map(|r| {
                print_run(&r);
                threshold_code(r.summary.identification_accuracy_pct, min_accuracy)
            })
        }
        Command::Eval { report, json, min_accuracy } => {
            eval(&report, json).map(|s| threshold_code(s.identification_accuracy_pct, min_accuracy))
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

//! Frame-synchronous driver: feeds deliveries and detections through the
//! tracker and identifier, and scores the labels against ground truth.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::TrackerError;
use crate::geometry::{GroundPoint, ImagePoint};
use crate::identify::{FrameIdentity, Identifier};
use crate::simworld::{frame_time_us, Scenario, Simulator, TruthFrame};
use crate::tracklets::{FrameInput, TrackEvent, Tracker};
use crate::wire::BroadcastDelivery;

/// One robot in one frame: what the pipeline said and what was true.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub frame: u64,
    pub robot_id: u32,
    pub tracklet_id: Option<u64>,
    pub est_x: Option<f64>,
    pub est_y: Option<f64>,
    pub true_x: Option<f64>,
    pub true_y: Option<f64>,
    pub visible: Option<bool>,
    pub label_correct: Option<bool>,
    pub frame_correct: Option<bool>,
    /// The frame has at least one visible robot and enters the accuracy.
    pub counted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame: u64,
    pub rows: Vec<ReportRow>,
    pub frame_correct: Option<bool>,
    pub counted: bool,
    pub identity: FrameIdentity,
    /// Wall-clock time of the tracker and identifier step, microseconds.
    pub latency_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub frames: u64,
    pub counted_frames: u64,
    pub correct_frames: u64,
    /// `correct_frames / counted_frames`, in percent.
    pub identification_accuracy_pct: Option<f64>,
    /// Over visible, correctly labelled robots with a position estimate.
    pub position_rmse_m: Option<f64>,
    pub tracklets_created: u64,
    pub tracklets_deleted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub mean_us: f64,
    pub p95_us: u64,
    pub max_us: u64,
}

impl TimingSummary {
    pub fn from_samples(samples: &[u64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_unstable();
        let idx = ((sorted.len() as f64 * 0.95).ceil() as usize).clamp(1, sorted.len()) - 1;
        Some(TimingSummary {
            mean_us: sorted.iter().sum::<u64>() as f64 / sorted.len() as f64,
            p95_us: sorted[idx],
            max_us: *sorted.last().expect("non-empty"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub records: Vec<FrameRecord>,
    pub summary: RunSummary,
}

impl RunReport {
    pub fn rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.records.iter().flat_map(|r| r.rows.iter())
    }

    pub fn latencies_us(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.latency_us).collect()
    }

    pub fn timing(&self) -> Option<TimingSummary> {
        TimingSummary::from_samples(&self.latencies_us())
    }

    /// Accuracy over counted frames with index `>= from_frame`, in percent.
    pub fn accuracy_from(&self, from_frame: u64) -> Option<f64> {
        let counted: Vec<_> = self.records.iter().filter(|r| r.counted && r.frame >= from_frame).collect();
        if counted.is_empty() {
            return None;
        }
        let correct = counted.iter().filter(|r| r.frame_correct == Some(true)).count();
        Some(100.0 * correct as f64 / counted.len() as f64)
    }
}

/// Accuracy and position error from flat rows; shared by the live summary and
/// by offline evaluation of a written report.
pub fn summarize_rows<'a>(rows: impl IntoIterator<Item = &'a ReportRow>) -> (u64, u64, Option<f64>, Option<f64>) {
    let mut frames: BTreeMap<u64, (bool, bool)> = BTreeMap::new();
    let mut sq = 0.0;
    let mut n = 0usize;
    for r in rows {
        let e = frames.entry(r.frame).or_insert((false, true));
        e.0 |= r.counted;
        e.1 &= r.frame_correct == Some(true);
        if let (Some(true), Some(true), Some(ex), Some(ey), Some(tx), Some(ty)) =
            (r.visible, r.label_correct, r.est_x, r.est_y, r.true_x, r.true_y)
        {
            sq += (ex - tx).powi(2) + (ey - ty).powi(2);
            n += 1;
        }
    }
    let counted = frames.values().filter(|(c, _)| *c).count() as u64;
    let correct = frames.values().filter(|(c, ok)| *c && *ok).count() as u64;
    let accuracy = (counted > 0).then(|| 100.0 * correct as f64 / counted as f64);
    let rmse = (n > 0).then(|| (sq / n as f64).sqrt());
    (counted, correct, accuracy, rmse)
}

/// Nearest visible robot whose true box centre lies within `gate` of `p`.
fn follows(p: ImagePoint, truth: &TruthFrame, gate: f64) -> Option<u32> {
    truth
        .robots
        .iter()
        .filter(|r| r.visible)
        .filter_map(|r| r.image_center.map(|c| (r.robot_id, c.distance(&p))))
        .filter(|&(_, d)| d <= gate)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(id, _)| id)
}

pub struct Pipeline {
    config: PipelineConfig,
    tracker: Tracker,
    identifier: Identifier,
    created: u64,
    deleted: u64,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        let tracker = Tracker::new(config.tracker, config.camera);
        let identifier = Identifier::new(config.identity);
        Pipeline { config, tracker, identifier, created: 0, deleted: 0 }
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn identifier(&self) -> &Identifier {
        &self.identifier
    }

    /// Processes one frame. `deliveries` are the broadcasts that arrived since
    /// the previous frame, in arrival order.
    pub fn step(
        &mut self,
        input: &FrameInput,
        deliveries: &[BroadcastDelivery],
        truth: Option<&TruthFrame>,
    ) -> Result<FrameRecord, TrackerError> {
        let mailbox = self.identifier.mailbox();
        for d in deliveries {
            mailbox.post(*d);
        }
        let now_us = frame_time_us(input.frame, self.config.fps);
        let start = Instant::now();
        let step = self.tracker.step(input)?;
        let identity = self.identifier.process_frame(input.frame, now_us, &self.tracker);
        let latency_us = start.elapsed().as_micros() as u64;
        for e in &step.events {
            match e {
                TrackEvent::Created { .. } => self.created += 1,
                TrackEvent::Deleted { .. } => self.deleted += 1,
                TrackEvent::Confirmed { .. } => {}
            }
        }
        Ok(self.score(input.frame, identity, truth, latency_us))
    }

    fn score(&self, frame: u64, identity: FrameIdentity, truth: Option<&TruthFrame>, latency_us: u64) -> FrameRecord {
        let gate = self.config.evaluation.match_gate_px;
        let mut ids: Vec<u32> = identity.estimates.iter().map(|e| e.robot_id).collect();
        if let Some(t) = truth {
            ids.extend(t.robots.iter().map(|r| r.robot_id));
        }
        ids.sort_unstable();
        ids.dedup();

        let counted = truth.is_some_and(TruthFrame::any_visible);
        let mut rows = Vec::with_capacity(ids.len());
        for id in ids {
            let est = identity.estimates.iter().find(|e| e.robot_id == id);
            let tracklet_id = est.and_then(|e| e.tracklet_id);
            let position: Option<GroundPoint> = est.and_then(|e| e.position);
            let tr = truth.and_then(|t| t.robots.iter().find(|r| r.robot_id == id));
            let label_correct = truth.map(|t| {
                let followed = tracklet_id.and_then(|tid| self.tracker.get(tid)).and_then(|tk| follows(tk.position(), t, gate));
                let visible = tr.is_some_and(|r| r.visible);
                if visible {
                    followed == Some(id)
                } else {
                    followed.is_none()
                }
            });
            rows.push(ReportRow {
                frame,
                robot_id: id,
                tracklet_id,
                est_x: position.map(|p| p.x),
                est_y: position.map(|p| p.y),
                true_x: tr.map(|r| r.position.x),
                true_y: tr.map(|r| r.position.y),
                visible: tr.map(|r| r.visible),
                label_correct,
                frame_correct: None,
                counted,
            });
        }
        let frame_correct = truth.map(|_| rows.iter().all(|r| r.label_correct == Some(true)));
        for r in &mut rows {
            r.frame_correct = frame_correct;
        }
        FrameRecord { frame, rows, frame_correct, counted, identity, latency_us }
    }

    fn summary(&self, records: &[FrameRecord]) -> RunSummary {
        let (counted, correct, accuracy, rmse) = summarize_rows(records.iter().flat_map(|r| r.rows.iter()));
        RunSummary {
            frames: records.len() as u64,
            counted_frames: counted,
            correct_frames: correct,
            identification_accuracy_pct: accuracy,
            position_rmse_m: rmse,
            tracklets_created: self.created,
            tracklets_deleted: self.deleted,
        }
    }
}

/// Runs the whole pipeline over recorded inputs. Deliveries must be sorted by
/// arrival time; each is handed over before the first frame whose timestamp
/// is not earlier than its arrival.
pub fn run_pipeline(
    config: &PipelineConfig,
    frames: &[FrameInput],
    deliveries: &[BroadcastDelivery],
    truth: Option<&[TruthFrame]>,
) -> Result<RunReport, TrackerError> {
    let truth_by_frame: BTreeMap<u64, &TruthFrame> =
        truth.into_iter().flatten().map(|t| (t.frame, t)).collect();
    let mut pipeline = Pipeline::new(config.clone());
    let mut records = Vec::with_capacity(frames.len());
    let mut next = 0usize;
    for input in frames {
        let now_us = frame_time_us(input.frame, config.fps);
        let start = next;
        while next < deliveries.len() && deliveries[next].rx_us <= now_us {
            next += 1;
        }
        let t = if truth.is_some() { truth_by_frame.get(&input.frame).copied() } else { None };
        records.push(pipeline.step(input, &deliveries[start..next], t)?);
    }
    let summary = pipeline.summary(&records);
    Ok(RunReport { config: config.clone(), records, summary })
}

/// Simulates `scenario` and runs the pipeline over the result.
pub fn simulate_and_track(scenario: &Scenario, config: &PipelineConfig) -> Result<RunReport, TrackerError> {
    let run = Simulator::run(scenario.clone());
    run_pipeline(config, &run.frames, &run.deliveries, Some(&run.truth))
}

/// Independent runs of `scenario` under each seed, executed in parallel.
pub fn run_seeds(scenario: &Scenario, config: &PipelineConfig, seeds: &[u64]) -> Result<Vec<RunReport>, TrackerError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let sc = Scenario { seed, ..scenario.clone() };
            simulate_and_track(&sc, config)
        })
        .collect()
}

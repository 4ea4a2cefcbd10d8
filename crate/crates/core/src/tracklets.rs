//! Low-level tracklets: per-frame predict, associate, update, with greedy or
//! lazy initialisation and lazy deletion.

use serde::{Deserialize, Serialize};

use crate::assignment::{build_association_cost, gated_pairs, hungarian_solve};
use crate::buffer::{HistoryBuffer, Stamped};
use crate::error::TrackerError;
use crate::geometry::{relative_to_absolute_heading, Angle, BoundingBox, CameraModel, HeadingClass, ImagePoint};
use crate::kalman::{KalmanParams, KalmanState, KalmanTuning};

/// One detector output for a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub center: ImagePoint,
    pub foot: ImagePoint,
    pub heading_class: HeadingClass,
    pub heading_confidence: f64,
}

impl Detection {
    pub fn new(bbox: BoundingBox, foot: ImagePoint, heading_class: HeadingClass, heading_confidence: f64) -> Self {
        Detection { center: bbox.center(), bbox, foot, heading_class, heading_confidence }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameInput {
    pub frame: u64,
    pub observer_heading: Angle,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// Association gate, px.
    pub d_max: f64,
    /// New detections closer than this to an existing prediction start tentative, px.
    pub vicinity_radius: f64,
    /// Consecutive matches that promote a tentative tracklet.
    pub confirm_hits: u32,
    /// A tracklet is removed once its consecutive misses exceed this.
    pub delete_after: u32,
    pub buffer_capacity: usize,
    /// Nominal time between frames, seconds.
    pub frame_dt: f64,
    pub kalman: KalmanTuning,
    pub image_width: u32,
    pub image_height: u32,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            d_max: 100.0,
            vicinity_radius: 40.0,
            confirm_hits: 3,
            delete_after: 30,
            buffer_capacity: 60,
            frame_dt: 0.05,
            kalman: KalmanTuning::default(),
            image_width: 640,
            image_height: 480,
        }
    }
}

impl TrackerConfig {
    pub fn image_diagonal(&self) -> f64 {
        (self.image_width as f64).hypot(self.image_height as f64)
    }

    pub fn kalman_params(&self) -> KalmanParams {
        KalmanParams::from_tuning(self.frame_dt, &self.kalman)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tracklet {
    pub id: u64,
    pub kf: KalmanState,
    /// Observed box centres, newest first, stamped with their frame.
    pub t_pos: HistoryBuffer<Stamped<ImagePoint>>,
    /// Observed absolute headings, newest first, stamped with their frame.
    pub t_rot: HistoryBuffer<Stamped<Angle>>,
    pub misses: u32,
    pub hits: u32,
    pub status: TrackStatus,
    /// Most recent detection associated with this tracklet.
    pub last_detection: Detection,
}

impl Tracklet {
    pub fn position(&self) -> ImagePoint {
        self.kf.position()
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackEvent {
    Created { id: u64, status: TrackStatus },
    Confirmed { id: u64 },
    Deleted { id: u64 },
}

/// Result of one [`Tracker::step`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub events: Vec<TrackEvent>,
    /// `(tracklet id, detection index)` for every association made this frame.
    pub associations: Vec<(u64, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackletSnapshot {
    pub id: u64,
    pub status: TrackStatus,
    pub position: ImagePoint,
    pub last_pos: Option<ImagePoint>,
    pub last_rot: Option<Angle>,
    pub misses: u32,
}

#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    camera: CameraModel,
    params: KalmanParams,
    tracklets: Vec<Tracklet>,
    next_id: u64,
    last_frame: Option<u64>,
}

impl Tracker {
    pub fn new(config: TrackerConfig, camera: CameraModel) -> Self {
        let params = config.kalman_params();
        Tracker { config, camera, params, tracklets: Vec::new(), next_id: 1, last_frame: None }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    /// Live tracklets, ordered by id.
    pub fn tracklets(&self) -> &[Tracklet] {
        &self.tracklets
    }

    pub fn confirmed(&self) -> impl Iterator<Item = &Tracklet> {
        self.tracklets.iter().filter(|t| t.is_confirmed())
    }

    pub fn get(&self, id: u64) -> Option<&Tracklet> {
        self.tracklets.iter().find(|t| t.id == id)
    }

    pub fn snapshot(&self) -> Vec<TrackletSnapshot> {
        self.tracklets
            .iter()
            .map(|t| TrackletSnapshot {
                id: t.id,
                status: t.status,
                position: t.position(),
                last_pos: t.t_pos.latest().map(|s| s.value),
                last_rot: t.t_rot.latest().map(|s| s.value),
                misses: t.misses,
            })
            .collect()
    }

    /// Absolute heading implied by a detection's class, seen from an observer
    /// with the given heading.
    pub fn absolute_heading(&self, det: &Detection, observer_heading: Angle) -> Angle {
        relative_to_absolute_heading(det.heading_class.center(), observer_heading, self.camera.bearing(det.foot))
    }

    pub fn step(&mut self, input: &FrameInput) -> Result<StepReport, TrackerError> {
        if let Some(prev) = self.last_frame {
            if input.frame <= prev {
                return Err(TrackerError::NonMonotonicFrame { previous: prev, got: input.frame });
            }
        }
        self.last_frame = Some(input.frame);
        let cfg = self.config;
        let diag = cfg.image_diagonal();
        let mut report = StepReport::default();

        for t in &mut self.tracklets {
            t.kf = t.kf.predict(&self.params);
        }
        let predictions: Vec<ImagePoint> = self.tracklets.iter().map(Tracklet::position).collect();
        let centers: Vec<ImagePoint> = input.detections.iter().map(|d| d.center).collect();
        let cost = build_association_cost(&predictions, &centers, cfg.d_max, diag);
        let gated = gated_pairs(&hungarian_solve(&cost), &cost, diag);

        for &(row, col) in &gated.matched {
            let det = input.detections[col];
            let heading = self.absolute_heading(&det, input.observer_heading);
            let t = &mut self.tracklets[row];
            t.kf = t.kf.update(det.center, &self.params)?;
            t.t_pos.push(Stamped { frame: input.frame, value: det.center });
            t.t_rot.push(Stamped { frame: input.frame, value: heading });
            t.last_detection = det;
            t.misses = 0;
            t.hits += 1;
            if t.status == TrackStatus::Tentative && t.hits >= cfg.confirm_hits {
                t.status = TrackStatus::Confirmed;
                report.events.push(TrackEvent::Confirmed { id: t.id });
            }
            report.associations.push((t.id, col));
        }
        for &row in &gated.unmatched_rows {
            let t = &mut self.tracklets[row];
            t.misses += 1;
            t.hits = 0;
        }

        let mut anchors = predictions;
        for &col in &gated.unmatched_cols {
            let det = input.detections[col];
            let crowded = anchors.iter().any(|p| p.distance(&det.center) <= cfg.vicinity_radius);
            let status = if crowded { TrackStatus::Tentative } else { TrackStatus::Confirmed };
            let heading = self.absolute_heading(&det, input.observer_heading);
            let id = self.next_id;
            self.next_id += 1;
            let mut t_pos = HistoryBuffer::new(cfg.buffer_capacity);
            t_pos.push(Stamped { frame: input.frame, value: det.center });
            let mut t_rot = HistoryBuffer::new(cfg.buffer_capacity);
            t_rot.push(Stamped { frame: input.frame, value: heading });
            self.tracklets.push(Tracklet {
                id,
                kf: KalmanState::init(det.center, &self.params),
                t_pos,
                t_rot,
                misses: 0,
                hits: 1,
                status,
                last_detection: det,
            });
            anchors.push(det.center);
            report.events.push(TrackEvent::Created { id, status });
        }

        let delete_after = cfg.delete_after;
        self.tracklets.retain(|t| {
            let keep = t.misses <= delete_after;
            if !keep {
                report.events.push(TrackEvent::Deleted { id: t.id });
            }
            keep
        });
        Ok(report)
    }
}

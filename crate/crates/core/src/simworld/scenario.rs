use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::{CameraModel, GroundPoint};

/// Complete description of a simulated run. Every random draw derives from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub duration_frames: u64,
    pub fps: f64,
    pub camera: CameraModel,
    /// Absolute heading of the (stationary) observer, radians.
    #[serde(default)]
    pub observer_heading_rad: f64,
    #[serde(default)]
    pub field: FieldBounds,
    #[serde(default)]
    pub robot_body: RobotBody,
    pub robots: Vec<RobotSpec>,
    #[serde(default)]
    pub detector: DetectorNoise,
    /// Std-dev of the visual heading error before quantisation, radians.
    #[serde(default)]
    pub heading_noise_rad: f64,
    #[serde(default)]
    pub channel: ChannelModel,
}

/// Walkable area in the observer's egocentric frame, metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for FieldBounds {
    fn default() -> Self {
        FieldBounds { x_min: 0.0, x_max: 9.0, y_min: -3.0, y_max: 3.0 }
    }
}

impl FieldBounds {
    pub fn contains(&self, p: GroundPoint) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Physical size used to project a robot's bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotBody {
    pub height_m: f64,
    pub width_m: f64,
}

impl Default for RobotBody {
    fn default() -> Self {
        RobotBody { height_m: 0.9, width_m: 0.4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub id: u32,
    pub start: GroundPoint,
    /// Absolute heading at frame 0, radians.
    pub start_heading_rad: f64,
    #[serde(default)]
    pub waypoints: Vec<Waypoint>,
    #[serde(default = "default_walk_speed")]
    pub walk_speed: f64,
    #[serde(default = "default_turn_rate")]
    pub turn_rate: f64,
    /// Restart from the first waypoint after the last one.
    #[serde(default = "default_true")]
    pub loop_waypoints: bool,
    #[serde(default)]
    pub falls: Vec<FallEvent>,
}

fn default_walk_speed() -> f64 {
    0.25
}

fn default_turn_rate() -> f64 {
    0.8
}

fn default_true() -> bool {
    true
}

impl RobotSpec {
    pub fn standing(id: u32, start: GroundPoint, heading_rad: f64) -> Self {
        RobotSpec {
            id,
            start,
            start_heading_rad: heading_rad,
            waypoints: Vec::new(),
            walk_speed: default_walk_speed(),
            turn_rate: default_turn_rate(),
            loop_waypoints: true,
            falls: Vec::new(),
        }
    }
}

/// Walk to `position`, turn to `heading_rad`, then wait `dwell_frames`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub position: GroundPoint,
    pub heading_rad: f64,
    #[serde(default)]
    pub dwell_frames: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FallEvent {
    pub frame: u64,
    pub duration: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorNoise {
    /// Std-dev of the box-centre error on each axis, px.
    pub center_jitter_px: f64,
    pub miss_rate: f64,
    /// Expected false detections per frame.
    pub false_positive_rate: f64,
    pub occlusion: bool,
    /// Fraction of the box height lost at the bottom (feet cut off by suppression).
    #[serde(default)]
    pub bottom_crop: f64,
}

impl Default for DetectorNoise {
    fn default() -> Self {
        DetectorNoise { center_jitter_px: 3.0, miss_rate: 0.0, false_positive_rate: 0.0, occlusion: true, bottom_crop: 0.08 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    pub delay_mean_ms: f64,
    pub delay_std_ms: f64,
    pub drop_probability: f64,
    #[serde(default)]
    pub outages: Vec<Outage>,
    /// Std-dev of the broadcast heading error, radians.
    #[serde(default)]
    pub magnetometer_noise_rad: f64,
    /// Each robot broadcasts every this many frames.
    #[serde(default = "default_period")]
    pub period_frames: u32,
}

fn default_period() -> u32 {
    1
}

impl Default for ChannelModel {
    fn default() -> Self {
        ChannelModel {
            delay_mean_ms: 50.0,
            delay_std_ms: 30.0,
            drop_probability: 0.0,
            outages: Vec::new(),
            magnetometer_noise_rad: 2f64.to_radians(),
            period_frames: 1,
        }
    }
}

impl ChannelModel {
    pub fn lossless() -> Self {
        ChannelModel {
            delay_mean_ms: 0.0,
            delay_std_ms: 0.0,
            drop_probability: 0.0,
            outages: Vec::new(),
            magnetometer_noise_rad: 0.0,
            period_frames: 1,
        }
    }

    pub fn in_outage(&self, frame: u64) -> bool {
        self.outages.iter().any(|o| frame >= o.start_frame && frame < o.start_frame + o.length_frames)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outage {
    pub start_frame: u64,
    pub length_frames: u64,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scenario: Scenario = serde_json::from_str(&text)
            .map_err(|e| Error::Config { path: path.display().to_string(), message: e.to_string() })?;
        scenario.validate().map_err(|message| Error::Config { path: path.display().to_string(), message })?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.camera.validate().map_err(|e| format!("camera: {e}"))?;
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err("fps: must be positive".into());
        }
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(format!("{name}: probability {p} outside [0, 1]"))
            }
        };
        prob("detector.miss_rate", self.detector.miss_rate)?;
        prob("channel.drop_probability", self.channel.drop_probability)?;
        prob("detector.bottom_crop", self.detector.bottom_crop)?;
        if self.detector.false_positive_rate < 0.0 || self.detector.center_jitter_px < 0.0 {
            return Err("detector: rates and jitter must be non-negative".into());
        }
        if self.heading_noise_rad < 0.0 || self.channel.magnetometer_noise_rad < 0.0 {
            return Err("noise std-devs must be non-negative".into());
        }
        if self.channel.delay_std_ms < 0.0 || self.channel.period_frames == 0 {
            return Err("channel: delay_std_ms must be >= 0 and period_frames > 0".into());
        }
        let mut ids = std::collections::BTreeSet::new();
        for (i, r) in self.robots.iter().enumerate() {
            if !ids.insert(r.id) {
                return Err(format!("robots[{i}].id: duplicate id {}", r.id));
            }
            if r.walk_speed < 0.0 || r.turn_rate < 0.0 {
                return Err(format!("robots[{i}]: speeds must be non-negative"));
            }
            if !self.field.contains(r.start) {
                return Err(format!("robots[{i}].start: outside field bounds"));
            }
            for (k, w) in r.waypoints.iter().enumerate() {
                if !self.field.contains(w.position) {
                    return Err(format!("robots[{i}].waypoints[{k}]: outside field bounds"));
                }
            }
        }
        Ok(())
    }

    /// Microsecond timestamp of frame `k`.
    pub fn frame_time_us(&self, frame: u64) -> u64 {
        frame_time_us(frame, self.fps)
    }
}

pub fn frame_time_us(frame: u64, fps: f64) -> u64 {
    (frame as f64 * 1e6 / fps).round() as u64
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::CameraModel;
use crate::identify::IdentityConfig;
use crate::tracklets::TrackerConfig;

/// The checked-in defaults file.
pub const DEFAULTS_JSON: &str = include_str!("../config/defaults.json");

/// Everything the tracking pipeline needs besides its inputs. Runs embed the
/// resolved value in their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub fps: f64,
    pub camera: CameraModel,
    pub tracker: TrackerConfig,
    pub identity: IdentityConfig,
    pub evaluation: EvaluationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    /// A tracklet counts as following a robot when it is the nearest visible
    /// robot's box centre within this distance, px.
    pub match_gate_px: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        serde_json::from_str(DEFAULTS_JSON).expect("defaults.json is valid")
    }
}

impl PipelineConfig {
    /// Defaults adapted to a camera and frame rate: pixel thresholds scale with
    /// the image diagonal, the filter step follows the frame rate.
    pub fn for_camera(camera: CameraModel, fps: f64) -> Self {
        let mut cfg = PipelineConfig::default();
        let scale = camera.image_diagonal() / cfg.camera.image_diagonal();
        cfg.tracker.d_max *= scale;
        cfg.tracker.vicinity_radius *= scale;
        cfg.evaluation.match_gate_px *= scale;
        cfg.tracker.image_width = camera.image_width;
        cfg.tracker.image_height = camera.image_height;
        cfg.tracker.frame_dt = 1.0 / fps;
        cfg.camera = camera;
        cfg.fps = fps;
        cfg
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config { path: path.display().to_string(), message: e.to_string() })?;
        cfg.validate().map_err(|message| Error::Config { path: path.display().to_string(), message })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.camera.validate().map_err(|e| format!("camera: {e}"))?;
        let t = &self.tracker;
        if !(self.fps > 0.0 && t.frame_dt > 0.0) {
            return Err("fps and tracker.frame_dt must be positive".into());
        }
        if !(t.d_max > 0.0 && t.vicinity_radius > 0.0 && t.vicinity_radius <= t.d_max) {
            return Err("tracker: need 0 < vicinity_radius <= d_max".into());
        }
        if t.d_max >= t.image_diagonal() {
            return Err("tracker.d_max must be below the image diagonal".into());
        }
        if t.confirm_hits == 0 || t.buffer_capacity == 0 {
            return Err("tracker: confirm_hits and buffer_capacity must be positive".into());
        }
        let id = &self.identity;
        if id.tau == 0 || id.buffer_capacity == 0 {
            return Err("identity: tau and buffer_capacity must be positive".into());
        }
        if !(id.lowpass_alpha > 0.0 && id.lowpass_alpha <= 1.0) {
            return Err("identity.lowpass_alpha must lie in (0, 1]".into());
        }
        if id.staleness_timeout_s < 0.0 {
            return Err("identity.staleness_timeout_s must be non-negative".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_and_validate() {
        let cfg = PipelineConfig::default();
        assert_eq!(cfg.version, 1);
        assert_eq!(cfg.tracker, TrackerConfig::default());
        assert_eq!(cfg.identity, IdentityConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn thresholds_scale_with_diagonal() {
        let mut cam = PipelineConfig::default().camera;
        cam.image_width = 1280;
        cam.image_height = 960;
        let cfg = PipelineConfig::for_camera(cam, 30.0);
        assert!((cfg.tracker.d_max - 200.0).abs() < 1e-9);
        assert!((cfg.tracker.frame_dt - 1.0 / 30.0).abs() < 1e-15);
        assert_eq!(cfg.tracker.image_width, 1280);
    }
}

use serde::{Deserialize, Serialize};

use super::{Angle, GroundPoint, ImagePoint};
use crate::error::GeometryError;

/// Rays whose vertical component is above this (in unit-direction terms) are
/// treated as parallel to or above the horizon.
const HORIZON_EPS: f64 = 1e-12;

/// Ideal pinhole camera mounted at `height` metres above a flat ground plane,
/// pitched down by `pitch` and yawed by `yaw` relative to the observer's body.
///
/// The egocentric ground frame has `x` forward, `y` left, `z` up. The image
/// frame has its origin at the top-left pixel, `h` to the right and `v` down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Metres above the ground plane.
    pub height: f64,
    /// Downward tilt of the optical axis, radians.
    pub pitch: f64,
    /// Rotation of the optical axis to the left of body-forward, radians.
    pub yaw: f64,
    pub image_width: u32,
    pub image_height: u32,
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.height, self.pitch, self.yaw]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(GeometryError::InvalidCamera("focal lengths must be positive and finite".into()));
        }
        if self.height <= 0.0 {
            return Err(GeometryError::InvalidCamera("camera height must be positive".into()));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(GeometryError::InvalidCamera("image dimensions must be non-zero".into()));
        }
        Ok(())
    }

    /// Length of the image diagonal in pixels.
    pub fn image_diagonal(&self) -> f64 {
        (self.image_width as f64).hypot(self.image_height as f64)
    }

    pub fn contains(&self, p: ImagePoint) -> bool {
        p.h >= 0.0 && p.v >= 0.0 && p.h < self.image_width as f64 && p.v < self.image_height as f64
    }

    /// Direction of the back-projected ray through `p`, in the egocentric frame.
    pub fn ray_direction(&self, p: ImagePoint) -> [f64; 3] {
        // optical frame: x right, y down, z forward
        let ox = (p.h - self.cx) / self.fx;
        let oy = (p.v - self.cy) / self.fy;
        // level camera looking along body x
        let (x0, y0, z0) = (1.0, -ox, -oy);
        let (sp, cp) = self.pitch.sin_cos();
        let x1 = x0 * cp + z0 * sp;
        let z1 = -x0 * sp + z0 * cp;
        let (sy, cy) = self.yaw.sin_cos();
        let x2 = x1 * cy - y0 * sy;
        let y2 = x1 * sy + y0 * cy;
        let n = (x2 * x2 + y2 * y2 + z1 * z1).sqrt();
        [x2 / n, y2 / n, z1 / n]
    }

    /// Azimuth of the ray through `p` in the egocentric frame. For pixels below
    /// the horizon this equals the bearing of their ground intersection.
    pub fn bearing(&self, p: ImagePoint) -> Angle {
        let [dx, dy, _] = self.ray_direction(p);
        Angle::from_radians(dy.atan2(dx))
    }

    /// Projects an egocentric 3-D point into the image. Returns `None` for points
    /// at or behind the camera plane.
    pub fn world_to_image(&self, x: f64, y: f64, z: f64) -> Option<ImagePoint> {
        let (dx, dy, dz) = (x, y, z - self.height);
        let (sy, cy) = self.yaw.sin_cos();
        let x1 = dx * cy + dy * sy;
        let y1 = -dx * sy + dy * cy;
        let (sp, cp) = self.pitch.sin_cos();
        let x0 = x1 * cp - dz * sp;
        let z0 = x1 * sp + dz * cp;
        let (ox, oy, oz) = (-y1, -z0, x0);
        if oz <= 1e-9 {
            return None;
        }
        Some(ImagePoint::new(self.cx + self.fx * ox / oz, self.cy + self.fy * oy / oz))
    }

    pub fn ground_to_image(&self, g: GroundPoint) -> Option<ImagePoint> {
        self.world_to_image(g.x, g.y, 0.0)
    }
}

/// Intersects the back-projected ray through `p` with the ground plane `z = 0`.
pub fn project_to_ground(p: ImagePoint, cam: &CameraModel) -> Result<GroundPoint, GeometryError> {
    let [dx, dy, dz] = cam.ray_direction(p);
    if dz.is_nan() || dz >= -HORIZON_EPS {
        return Err(GeometryError::Horizon { h: p.h, v: p.v });
    }
    let t = cam.height / -dz;
    Ok(GroundPoint::new(t * dx, t * dy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn cam(pitch: f64) -> CameraModel {
        CameraModel {
            fx: 500.0,
            fy: 500.0,
            cx: 320.0,
            cy: 240.0,
            height: 1.0,
            pitch,
            yaw: 0.0,
            image_width: 640,
            image_height: 480,
        }
    }

    #[test]
    fn principal_point_at_45_degrees() {
        let g = project_to_ground(ImagePoint::new(320.0, 240.0), &cam(FRAC_PI_4)).unwrap();
        assert!((g.x - 1.0).abs() < 1e-12);
        assert!(g.y.abs() < 1e-12);
    }

    #[test]
    fn principal_point_at_30_degrees() {
        let g = project_to_ground(ImagePoint::new(320.0, 240.0), &cam(30f64.to_radians())).unwrap();
        assert!((g.x - 1.0 / 30f64.to_radians().tan()).abs() < 1e-12);
    }

    #[test]
    fn horizon_row_is_rejected() {
        let c = cam(0.3);
        let v = c.cy - c.fy * c.pitch.tan();
        let err = project_to_ground(ImagePoint::new(320.0, v), &c).unwrap_err();
        assert!(matches!(err, GeometryError::Horizon { .. }));
        assert!(project_to_ground(ImagePoint::new(100.0, v - 20.0), &c).is_err());
    }

    #[test]
    fn left_of_center_projects_to_positive_y() {
        let g = project_to_ground(ImagePoint::new(100.0, 400.0), &cam(0.4)).unwrap();
        assert!(g.y > 0.0);
        let b = cam(0.4).bearing(ImagePoint::new(100.0, 400.0));
        assert!((b.radians() - g.y.atan2(g.x)).abs() < 1e-12);
    }

    #[test]
    fn yaw_rotates_ground_point() {
        let mut c = cam(FRAC_PI_4);
        c.yaw = std::f64::consts::FRAC_PI_2;
        let g = project_to_ground(ImagePoint::new(320.0, 240.0), &c).unwrap();
        assert!(g.x.abs() < 1e-12);
        assert!((g.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_camera() {
        let mut c = cam(0.3);
        c.fx = 0.0;
        assert!(c.validate().is_err());
        c = cam(0.3);
        c.height = -1.0;
        assert!(c.validate().is_err());
        assert!(cam(0.3).validate().is_ok());
    }
}

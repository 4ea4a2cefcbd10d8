//! Angles and heading classes, image/ground points, the pinhole ground
//! projection, and scanline foot-point refinement.

mod angle;
mod camera;
mod foot;

use serde::{Deserialize, Serialize};

pub use angle::{
    absolute_to_relative_heading, circ_diff, class_center, quantize_heading, relative_to_absolute_heading, Angle,
    HeadingClass, CLASS_WIDTH, HEADING_CLASSES,
};
pub use camera::{project_to_ground, CameraModel};
pub use foot::{refine_foot_point, BinaryMask};

use crate::error::GeometryError;

/// Pixel coordinates; `h` grows to the right, `v` grows downwards.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImagePoint {
    pub h: f64,
    pub v: f64,
}

impl ImagePoint {
    pub const fn new(h: f64, v: f64) -> Self {
        ImagePoint { h, v }
    }

    pub fn distance(&self, other: &ImagePoint) -> f64 {
        (self.h - other.h).hypot(self.v - other.v)
    }
}

/// Egocentric ground coordinates in metres: `x` forward, `y` left.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundPoint {
    pub x: f64,
    pub y: f64,
}

impl GroundPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        GroundPoint { x, y }
    }

    pub fn distance(&self, other: &GroundPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn range(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn bearing(&self) -> Angle {
        Angle::from_radians(self.y.atan2(self.x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn new(left: f64, top: f64, width: f64, height: f64) -> Result<Self, GeometryError> {
        if !(width > 0.0 && height > 0.0) || !left.is_finite() || !top.is_finite() {
            return Err(GeometryError::InvalidBox { width, height });
        }
        Ok(BoundingBox { left, top, width, height })
    }

    /// Box with the given centre and size.
    pub fn centered(center: ImagePoint, width: f64, height: f64) -> Result<Self, GeometryError> {
        Self::new(center.h - width / 2.0, center.v - height / 2.0, width, height)
    }

    pub fn center(&self) -> ImagePoint {
        ImagePoint::new(self.left + self.width / 2.0, self.top + self.height / 2.0)
    }

    pub fn bottom_center(&self) -> ImagePoint {
        ImagePoint::new(self.left + self.width / 2.0, self.top + self.height)
    }

    pub fn right(&self) -> f64 {
        self.left + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.top + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn intersection_area(&self, other: &BoundingBox) -> f64 {
        let w = self.right().min(other.right()) - self.left.max(other.left);
        let h = self.bottom().min(other.bottom()) - self.top.max(other.top);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }
}

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;

/// Number of discrete heading classes produced by the visual heading estimator.
pub const HEADING_CLASSES: u8 = 10;

/// Angular width of one heading class, in radians (36 degrees).
pub const CLASS_WIDTH: f64 = TAU / HEADING_CLASSES as f64;

/// An angle in radians, always wrapped into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(into = "f64", from = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn from_radians(rad: f64) -> Self {
        Angle(wrap_two_pi(rad))
    }

    pub fn from_degrees(deg: f64) -> Self {
        Self::from_radians(deg.to_radians())
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Signed shortest rotation from `self` to `other`, in `(-π, π]`.
    pub fn signed_delta_to(self, other: Angle) -> f64 {
        let d = other.0 - self.0;
        if d > PI {
            d - TAU
        } else if d <= -PI {
            d + TAU
        } else {
            d
        }
    }
}

impl From<f64> for Angle {
    fn from(rad: f64) -> Self {
        Angle::from_radians(rad)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle::from_radians(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle::from_radians(self.0 - rhs.0)
    }
}

impl Neg for Angle {
    type Output = Angle;
    fn neg(self) -> Angle {
        Angle::from_radians(-self.0)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}°", self.degrees())
    }
}

fn wrap_two_pi(rad: f64) -> f64 {
    let w = rad.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circ_diff(a: Angle, b: Angle) -> f64 {
    let d = (a.0 - b.0).abs();
    d.min(TAU - d)
}

/// One of the ten 36° heading classes; class `k` is centred on `k·36°`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct HeadingClass(u8);

impl HeadingClass {
    pub fn new(index: u8) -> Result<Self, GeometryError> {
        if index < HEADING_CLASSES {
            Ok(HeadingClass(index))
        } else {
            Err(GeometryError::ClassOutOfRange(index))
        }
    }

    #[inline]
    pub fn index(self) -> u8 {
        self.0
    }

    pub fn center(self) -> Angle {
        class_center(self)
    }
}

impl TryFrom<u8> for HeadingClass {
    type Error = GeometryError;
    fn try_from(v: u8) -> Result<Self, Self::Error> {
        HeadingClass::new(v)
    }
}

impl From<HeadingClass> for u8 {
    fn from(c: HeadingClass) -> u8 {
        c.0
    }
}

/// Maps an angle to the class whose `[k·36° − 18°, k·36° + 18°)` interval contains it.
pub fn quantize_heading(a: Angle) -> HeadingClass {
    let shifted = (a.radians() + CLASS_WIDTH / 2.0) / CLASS_WIDTH;
    let k = (shifted.floor() as i64).rem_euclid(HEADING_CLASSES as i64);
    HeadingClass(k as u8)
}

pub fn class_center(k: HeadingClass) -> Angle {
    Angle::from_radians(k.0 as f64 * CLASS_WIDTH)
}

/// Composes a heading seen relative to the line of sight into the absolute frame:
/// observer heading, plus bearing of the target in the observer frame, plus the
/// relative estimate.
pub fn relative_to_absolute_heading(rel: Angle, observer_heading: Angle, bearing_to_target: Angle) -> Angle {
    observer_heading + bearing_to_target + rel
}

/// Inverse of [`relative_to_absolute_heading`].
pub fn absolute_to_relative_heading(abs: Angle, observer_heading: Angle, bearing_to_target: Angle) -> Angle {
    abs - observer_heading - bearing_to_target
}

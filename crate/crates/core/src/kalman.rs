//! Constant-acceleration Kalman filter over image coordinates.
//!
//! State layout is `[h, v, ḣ, v̇, ḧ, v̈]`: position, velocity and acceleration of
//! the box centre, interleaved by axis. Only the position is measured.

use nalgebra::{Matrix2, Matrix2x6, Matrix6, Matrix6x2, Vector2, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::KalmanError;
use crate::geometry::ImagePoint;

/// A measured box centre.
pub type Measurement = ImagePoint;

/// Scalar knobs from which [`KalmanParams`] are built; this is the form stored in
/// configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KalmanTuning {
    /// Std-dev of the per-step acceleration increment, px/s².
    pub accel_sigma: f64,
    /// Std-dev of the measured centre on each axis, px.
    pub measurement_sigma: f64,
    /// Initial position variance, px².
    pub initial_position_var: f64,
    /// Initial variance on velocity and acceleration entries.
    pub initial_derivative_var: f64,
}

impl Default for KalmanTuning {
    fn default() -> Self {
        KalmanTuning {
            accel_sigma: 50.0,
            measurement_sigma: 5.0,
            initial_position_var: 100.0,
            initial_derivative_var: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanParams {
    pub dt: f64,
    pub q: Matrix6<f64>,
    pub r: Matrix2<f64>,
    pub sigma0: Matrix6<f64>,
}

impl KalmanParams {
    pub fn new(dt: f64, q: Matrix6<f64>, r: Matrix2<f64>, sigma0: Matrix6<f64>) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        KalmanParams { dt, q, r, sigma0 }
    }

    /// Builds parameters with process noise from a piecewise-constant jerk
    /// model: each step the acceleration receives an independent increment of
    /// std-dev `accel_sigma`, propagated through `[½dt², dt, 1]` per axis.
    pub fn from_tuning(dt: f64, tuning: &KalmanTuning) -> Self {
        let g = [0.5 * dt * dt, dt, 1.0];
        let s2 = tuning.accel_sigma * tuning.accel_sigma;
        let mut q = Matrix6::zeros();
        for axis in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    q[(2 * a + axis, 2 * b + axis)] = s2 * g[a] * g[b];
                }
            }
        }
        let m2 = tuning.measurement_sigma * tuning.measurement_sigma;
        let r = Matrix2::from_diagonal(&Vector2::new(m2, m2));
        let d = tuning.initial_derivative_var;
        let p = tuning.initial_position_var;
        let sigma0 = Matrix6::from_diagonal(&Vector6::new(p, p, d, d, d, d));
        Self::new(dt, q, r, sigma0)
    }

    /// State transition matrix of the constant-acceleration model.
    pub fn transition(&self) -> Matrix6<f64> {
        let dt = self.dt;
        let half = 0.5 * dt * dt;
        let mut phi = Matrix6::identity();
        phi[(0, 2)] = dt;
        phi[(1, 3)] = dt;
        phi[(0, 4)] = half;
        phi[(1, 5)] = half;
        phi[(2, 4)] = dt;
        phi[(3, 5)] = dt;
        phi
    }
}

pub fn measurement_matrix() -> Matrix2x6<f64> {
    let mut h = Matrix2x6::zeros();
    h[(0, 0)] = 1.0;
    h[(1, 1)] = 1.0;
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub x: Vector6<f64>,
    pub sigma: Matrix6<f64>,
}

impl KalmanState {
    /// Position from the measurement, zero velocity and acceleration, covariance `sigma0`.
    pub fn init(z0: Measurement, params: &KalmanParams) -> Self {
        KalmanState { x: Vector6::new(z0.h, z0.v, 0.0, 0.0, 0.0, 0.0), sigma: params.sigma0 }
    }

    pub fn predict(&self, params: &KalmanParams) -> Self {
        let phi = params.transition();
        let sigma = phi * self.sigma * phi.transpose() + params.q;
        KalmanState { x: phi * self.x, sigma: symmetrize(&sigma) }
    }

    /// Innovation `z − Hx` and its covariance `HΣHᵀ + R`.
    pub fn innovation(&self, z: Measurement, params: &KalmanParams) -> (Vector2<f64>, Matrix2<f64>) {
        let h = measurement_matrix();
        let y = Vector2::new(z.h, z.v) - h * self.x;
        let s = h * self.sigma * h.transpose() + params.r;
        (y, s)
    }

    /// Normalised innovation squared of `z` against this (predicted) state.
    pub fn nis(&self, z: Measurement, params: &KalmanParams) -> Result<f64, KalmanError> {
        let (y, s) = self.innovation(z, params);
        let s_inv = invert_innovation(&s)?;
        Ok((y.transpose() * s_inv * y)[(0, 0)])
    }

    pub fn update(&self, z: Measurement, params: &KalmanParams) -> Result<Self, KalmanError> {
        let h = measurement_matrix();
        let (y, s) = self.innovation(z, params);
        let s_inv = invert_innovation(&s)?;
        let k: Matrix6x2<f64> = self.sigma * h.transpose() * s_inv;
        let x = self.x + k * y;
        // Joseph form; equal to (I − KH)Σ for the optimal gain
        let i_kh = Matrix6::identity() - k * h;
        let sigma = i_kh * self.sigma * i_kh.transpose() + k * params.r * k.transpose();
        Ok(KalmanState { x, sigma: symmetrize(&sigma) })
    }

    pub fn position(&self) -> ImagePoint {
        ImagePoint::new(self.x[0], self.x[1])
    }

    pub fn velocity(&self) -> (f64, f64) {
        (self.x[2], self.x[3])
    }
}

fn invert_innovation(s: &Matrix2<f64>) -> Result<Matrix2<f64>, KalmanError> {
    let det = s.determinant();
    let scale = s[(0, 0)].abs().max(s[(1, 1)].abs());
    if !det.is_finite() || det <= f64::EPSILON * scale * scale || scale == 0.0 {
        return Err(KalmanError::GainSingular);
    }
    s.try_inverse().ok_or(KalmanError::GainSingular)
}

fn symmetrize(m: &Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

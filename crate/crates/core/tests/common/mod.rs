//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use homotrack::assignment::CostMatrix;
use homotrack::buffer::{HistoryBuffer, Stamped};
use homotrack::geometry::{Angle, BoundingBox, HeadingClass, ImagePoint};
use homotrack::identify::RobotChannel;
use homotrack::kalman::{KalmanParams, KalmanState, KalmanTuning};
use homotrack::tracklets::{Detection, TrackStatus, Tracklet};
use rand::Rng;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

/// Circular difference straight from the definition, in radians.
pub fn oracle_circ_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % std::f64::consts::TAU;
    d.min(std::f64::consts::TAU - d)
}

/// Every injective row-to-column map, scored by summing entries in row order.
/// Returns the minimum cost and the lexicographically smallest optimal pairing.
pub fn brute_force_assignment(c: &CostMatrix) -> (f64, Vec<(usize, usize)>) {
    let (n, m) = (c.rows(), c.cols());
    let k = n.min(m);
    let mut best = (f64::INFINITY, Vec::new());
    // choose which rows are matched when n > m, then permute columns
    let mut rows_sets = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            rows_sets.push((0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>());
        }
    }
    for rows in rows_sets {
        let mut cols: Vec<usize> = Vec::new();
        let mut used = vec![false; m];
        permute(c, &rows, &mut cols, &mut used, &mut best);
    }
    best
}

fn permute(c: &CostMatrix, rows: &[usize], cols: &mut Vec<usize>, used: &mut [bool], best: &mut (f64, Vec<(usize, usize)>)) {
    if cols.len() == rows.len() {
        let pairs: Vec<(usize, usize)> = rows.iter().copied().zip(cols.iter().copied()).collect();
        let cost: f64 = pairs.iter().map(|&(i, j)| c.get(i, j)).sum();
        if cost < best.0 || (cost == best.0 && pairs < best.1) {
            *best = (cost, pairs);
        }
        return;
    }
    for j in 0..used.len() {
        if !used[j] {
            used[j] = true;
            cols.push(j);
            permute(c, rows, cols, used, best);
            cols.pop();
            used[j] = false;
        }
    }
}

fn random_frames<R: Rng>(rng: &mut R) -> Vec<u64> {
    let span = rng.random_range(1..50u64);
    let keep = rng.random_range(0.2..1.0);
    (0..span).filter(|_| rng.random_bool(keep)).collect()
}

pub fn tracklet_at(id: u64, pos: ImagePoint) -> Tracklet {
    let params = KalmanParams::from_tuning(0.05, &KalmanTuning::default());
    let bbox = BoundingBox::centered(pos, 30.0, 60.0).unwrap();
    Tracklet {
        id,
        kf: KalmanState::init(pos, &params),
        t_pos: HistoryBuffer::new(60),
        t_rot: HistoryBuffer::new(60),
        misses: 0,
        hits: 0,
        status: TrackStatus::Confirmed,
        last_detection: Detection::new(bbox, bbox.bottom_center(), HeadingClass::new(0).unwrap(), 1.0),
    }
}

/// Tracklet with randomly gapped, frame-stamped heading and position histories.
pub fn random_tracklet<R: Rng>(rng: &mut R, id: u64) -> Tracklet {
    let mut t = tracklet_at(id, ImagePoint::new(rng.random_range(0.0..640.0), rng.random_range(0.0..480.0)));
    for f in random_frames(rng) {
        t.t_rot.push(Stamped { frame: f, value: Angle::from_radians(rng.random_range(-10.0..10.0)) });
        t.t_pos.push(Stamped {
            frame: f,
            value: ImagePoint::new(rng.random_range(-200.0..900.0), rng.random_range(-200.0..700.0)),
        });
    }
    t
}

/// Channel with random heading history; sometimes stale or without positions.
pub fn random_channel<R: Rng>(rng: &mut R, robot_id: u32) -> RobotChannel {
    let mut ch = RobotChannel::new(robot_id, 60);
    for f in random_frames(rng) {
        ch.r_rot.push(Stamped { frame: f, value: Angle::from_radians(rng.random_range(0.0..std::f64::consts::TAU)) });
    }
    if rng.random_bool(0.7) {
        for f in random_frames(rng) {
            ch.r_pos.push(Stamped {
                frame: f,
                value: ImagePoint::new(rng.random_range(-200.0..900.0), rng.random_range(-200.0..700.0)),
            });
        }
    }
    ch.stale = rng.random_bool(0.15);
    ch
}

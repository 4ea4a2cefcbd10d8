//! Robot identification: matches confirmed tracklets to broadcasting robots by
//! comparing observed heading histories with reported headings, blended with
//! pixel-position continuity, then emits low-pass filtered ground positions.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::assignment::{hungarian_solve, CostMatrix};
use crate::buffer::{HistoryBuffer, Stamped};
use crate::geometry::{circ_diff, project_to_ground, Angle, CameraModel, GroundPoint, ImagePoint};
use crate::tracklets::{Tracker, Tracklet};
use crate::wire::{BroadcastDelivery, BroadcastPacket};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityConfig {
    /// Minimum number of aligned heading samples before a pair is scored.
    pub tau: usize,
    /// Interpolation weight used when fewer than two robots are broadcasting.
    pub gamma_single: f64,
    /// Cost of a pair that cannot be scored yet; such pairs are never emitted.
    pub unassigned_cost: f64,
    /// Weight of the newest ground position in the output filter, in (0, 1].
    pub lowpass_alpha: f64,
    /// A channel silent for longer than this is stale, seconds.
    pub staleness_timeout_s: f64,
    pub buffer_capacity: usize,
    /// Frames a robot may stay unassigned before its output filter restarts.
    pub reset_after_frames: u32,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig {
            tau: 10,
            gamma_single: 0.5,
            unassigned_cost: 2.0,
            lowpass_alpha: 0.2,
            staleness_timeout_s: 2.0,
            buffer_capacity: 60,
            reset_after_frames: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Retained {
    heading: Angle,
    stamp_us: u64,
}

/// Receiver-side state for one broadcasting robot.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotChannel {
    pub robot_id: u32,
    retained: Option<Retained>,
    /// Reported headings pushed once per processed frame, newest first.
    pub r_rot: HistoryBuffer<Stamped<Angle>>,
    /// Pixel positions of the tracklets this robot was assigned to, newest first.
    pub r_pos: HistoryBuffer<Stamped<ImagePoint>>,
    pub last_rx_us: Option<u64>,
    pub stale: bool,
    /// Packets discarded because they were not newer than the retained one.
    pub dropped: u64,
}

impl RobotChannel {
    pub fn new(robot_id: u32, capacity: usize) -> Self {
        RobotChannel {
            robot_id,
            retained: None,
            r_rot: HistoryBuffer::new(capacity),
            r_pos: HistoryBuffer::new(capacity),
            last_rx_us: None,
            stale: true,
            dropped: 0,
        }
    }

    /// Accepts a report if it is newer than the retained one.
    pub fn receive(&mut self, heading: Angle, stamp_us: u64, rx_us: u64) -> bool {
        if matches!(self.retained, Some(r) if stamp_us <= r.stamp_us) {
            self.dropped += 1;
            return false;
        }
        self.retained = Some(Retained { heading, stamp_us });
        self.last_rx_us = Some(self.last_rx_us.map_or(rx_us, |t| t.max(rx_us)));
        true
    }

    pub fn retained_heading(&self) -> Option<Angle> {
        self.retained.map(|r| r.heading)
    }

    /// Per-frame bookkeeping: recompute staleness and, while fresh, push the
    /// retained heading (held over lost packets) into `r_rot`.
    pub fn tick(&mut self, frame: u64, now_us: u64, timeout_us: u64) {
        self.stale = match self.last_rx_us {
            Some(t) => now_us.saturating_sub(t) > timeout_us,
            None => true,
        };
        if let (false, Some(r)) = (self.stale, self.retained) {
            self.r_rot.push(Stamped { frame, value: r.heading });
        }
    }

    pub fn is_active(&self) -> bool {
        !self.stale && !self.r_rot.is_empty()
    }
}

/// Blend factor between heading and position evidence: the smallest pairwise
/// separation of the newest reported headings, scaled by `r / 2π` and clamped
/// to `[0, 1]`. With fewer than two active channels it is `gamma_single`.
pub fn compute_gamma(channels: &[&RobotChannel], gamma_single: f64) -> f64 {
    let latest: Vec<Angle> =
        channels.iter().filter(|c| c.is_active()).filter_map(|c| c.r_rot.latest().map(|s| s.value)).collect();
    let r = latest.len();
    if r < 2 {
        return gamma_single;
    }
    let mut min_sep = f64::INFINITY;
    for a in 0..r {
        for b in a + 1..r {
            min_sep = min_sep.min(circ_diff(latest[a], latest[b]));
        }
    }
    (r as f64 / TAU * min_sep).clamp(0.0, 1.0)
}

/// Sum of circular differences over frames present in both histories, and the
/// number of such frames. Both buffers are newest first with strictly
/// decreasing frame stamps.
pub fn aligned_heading_error(t_rot: &HistoryBuffer<Stamped<Angle>>, r_rot: &HistoryBuffer<Stamped<Angle>>) -> (f64, usize) {
    let mut ti = t_rot.iter().peekable();
    let mut ri = r_rot.iter().peekable();
    let mut sum = 0.0;
    let mut count = 0;
    while let (Some(t), Some(r)) = (ti.peek(), ri.peek()) {
        match t.frame.cmp(&r.frame) {
            std::cmp::Ordering::Equal => {
                sum += circ_diff(t.value, r.value);
                count += 1;
                ti.next();
                ri.next();
            }
            std::cmp::Ordering::Greater => {
                ti.next();
            }
            std::cmp::Ordering::Less => {
                ri.next();
            }
        }
    }
    (sum, count)
}

/// Tracklet-by-robot cost. With `D` aligned heading samples and `D ≥ tau`:
/// `γ/(πD)·Σ circ_diff + (1−γ)/image_diag·‖T_pos[newest] − R_pos[newest]‖`,
/// the position distance capped at `image_diag` and taken as zero while the
/// robot has no position history. Otherwise `unassigned_cost`.
pub fn build_identity_cost(
    tracklets: &[&Tracklet],
    channels: &[&RobotChannel],
    gamma: f64,
    cfg: &IdentityConfig,
    image_diag: f64,
) -> CostMatrix {
    CostMatrix::from_fn(tracklets.len(), channels.len(), |i, j| {
        let t = tracklets[i];
        let ch = channels[j];
        let (sum, d) = aligned_heading_error(&t.t_rot, &ch.r_rot);
        if d < cfg.tau.max(1) {
            return cfg.unassigned_cost;
        }
        let angular = gamma / (PI * d as f64) * sum;
        let position = match (t.t_pos.latest(), ch.r_pos.latest()) {
            (Some(tp), Some(rp)) => (1.0 - gamma) / image_diag * tp.value.distance(&rp.value).min(image_diag),
            _ => 0.0,
        };
        angular + position
    })
    .expect("identity costs are finite and non-negative")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityPair {
    pub tracklet_id: u64,
    pub robot_id: u32,
    pub cost: f64,
}

/// Optimal tracklet-to-robot labelling for one frame. Pairs that cost
/// `unassigned_cost` are dropped. `channels` should be the active ones.
pub fn identify(tracklets: &[&Tracklet], channels: &[&RobotChannel], cfg: &IdentityConfig, image_diag: f64) -> Vec<IdentityPair> {
    let gamma = compute_gamma(channels, cfg.gamma_single);
    let g = build_identity_cost(tracklets, channels, gamma, cfg, image_diag);
    hungarian_solve(&g)
        .pairs()
        .iter()
        .filter(|&&(i, j)| g.get(i, j) < cfg.unassigned_cost)
        .map(|&(i, j)| IdentityPair { tracklet_id: tracklets[i].id, robot_id: channels[j].robot_id, cost: g.get(i, j) })
        .collect()
}

/// Exponential moving average over ground positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundFilter {
    alpha: f64,
    value: Option<GroundPoint>,
    idle_frames: u32,
}

impl GroundFilter {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
        GroundFilter { alpha, value: None, idle_frames: 0 }
    }

    /// Seeds the filter with `initial` as if it had already converged there.
    pub fn with_value(alpha: f64, initial: GroundPoint) -> Self {
        GroundFilter { value: Some(initial), ..Self::new(alpha) }
    }

    pub fn update(&mut self, raw: GroundPoint) -> GroundPoint {
        let a = self.alpha;
        let next = match self.value {
            Some(p) => GroundPoint::new(a * raw.x + (1.0 - a) * p.x, a * raw.y + (1.0 - a) * p.y),
            None => raw,
        };
        self.value = Some(next);
        self.idle_frames = 0;
        next
    }

    /// Records a frame without a measurement; forgets the state after more
    /// than `reset_after` such frames in a row.
    pub fn idle(&mut self, reset_after: u32) {
        self.idle_frames += 1;
        if self.idle_frames > reset_after {
            self.value = None;
        }
    }

    pub fn value(&self) -> Option<GroundPoint> {
        self.value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotEstimate {
    pub robot_id: u32,
    pub tracklet_id: Option<u64>,
    /// Filtered egocentric position; `None` when unassigned or not projectable.
    pub position: Option<GroundPoint>,
    /// Newest reported absolute heading.
    pub heading: Option<Angle>,
    pub confidence: f64,
}

/// Shared inbox for broadcast deliveries. Clones post into the same queue; the
/// frame step drains it in arrival order.
#[derive(Debug, Clone, Default)]
pub struct Mailbox {
    inner: Arc<Mutex<Vec<BroadcastDelivery>>>,
}

impl Mailbox {
    pub fn post(&self, delivery: BroadcastDelivery) {
        self.inner.lock().expect("mailbox poisoned").push(delivery);
    }

    pub fn drain(&self) -> Vec<BroadcastDelivery> {
        std::mem::take(&mut *self.inner.lock().expect("mailbox poisoned"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameIdentity {
    pub pairs: Vec<IdentityPair>,
    pub estimates: Vec<RobotEstimate>,
    pub gamma: f64,
}

/// Per-observer identification state: one channel and output filter per robot.
#[derive(Debug)]
pub struct Identifier {
    cfg: IdentityConfig,
    channels: BTreeMap<u32, RobotChannel>,
    filters: BTreeMap<u32, GroundFilter>,
    mailbox: Mailbox,
}

impl Identifier {
    pub fn new(cfg: IdentityConfig) -> Self {
        Identifier { cfg, channels: BTreeMap::new(), filters: BTreeMap::new(), mailbox: Mailbox::default() }
    }

    pub fn config(&self) -> &IdentityConfig {
        &self.cfg
    }

    /// Handle for posting deliveries from another thread of control.
    pub fn mailbox(&self) -> Mailbox {
        self.mailbox.clone()
    }

    pub fn channel(&self, robot_id: u32) -> Option<&RobotChannel> {
        self.channels.get(&robot_id)
    }

    pub fn channels(&self) -> impl Iterator<Item = &RobotChannel> {
        self.channels.values()
    }

    /// Applies one datagram directly, creating the channel on first contact.
    pub fn receive_broadcast(&mut self, packet: &BroadcastPacket, rx_us: u64) -> bool {
        let capacity = self.cfg.buffer_capacity;
        let ch = self.channels.entry(packet.robot_id).or_insert_with(|| RobotChannel::new(packet.robot_id, capacity));
        ch.receive(Angle::from_radians(packet.heading_rad), packet.stamp_us, rx_us)
    }

    /// Drains the mailbox, advances every channel to `frame`, labels the
    /// tracker's confirmed tracklets and emits one estimate per known robot.
    pub fn process_frame(&mut self, frame: u64, now_us: u64, tracker: &Tracker) -> FrameIdentity {
        for d in self.mailbox.drain() {
            self.receive_broadcast(&d.packet(), d.rx_us);
        }
        let timeout_us = (self.cfg.staleness_timeout_s * 1e6).round() as u64;
        for ch in self.channels.values_mut() {
            ch.tick(frame, now_us, timeout_us);
        }

        let confirmed: Vec<&Tracklet> = tracker.confirmed().collect();
        let active: Vec<&RobotChannel> = self.channels.values().filter(|c| c.is_active()).collect();
        let gamma = compute_gamma(&active, self.cfg.gamma_single);
        let diag = tracker.config().image_diagonal();
        let pairs = identify(&confirmed, &active, &self.cfg, diag);
        let estimates = self.emit_estimates(frame, &pairs, tracker);
        FrameIdentity { pairs, estimates, gamma }
    }

    /// Projects the newest foot point of each assigned tracklet, low-pass
    /// filters it per robot, and records the tracklet's pixel position as the
    /// robot's latest position.
    pub fn emit_estimates(&mut self, frame: u64, pairs: &[IdentityPair], tracker: &Tracker) -> Vec<RobotEstimate> {
        let cam: &CameraModel = tracker.camera();
        let mut out = Vec::with_capacity(self.channels.len());
        for ch in self.channels.values_mut() {
            let filter = self.filters.entry(ch.robot_id).or_insert_with(|| GroundFilter::new(self.cfg.lowpass_alpha));
            let pair = pairs.iter().find(|p| p.robot_id == ch.robot_id);
            let tracklet = pair.and_then(|p| tracker.get(p.tracklet_id));
            let mut est = RobotEstimate {
                robot_id: ch.robot_id,
                tracklet_id: None,
                position: None,
                heading: ch.retained_heading(),
                confidence: 0.0,
            };
            match (pair, tracklet) {
                (Some(p), Some(t)) => {
                    est.tracklet_id = Some(t.id);
                    est.confidence = (1.0 - p.cost).clamp(0.0, 1.0);
                    match project_to_ground(t.last_detection.foot, cam) {
                        Ok(g) => est.position = Some(filter.update(g)),
                        Err(e) => log::debug!("robot {} estimate invalid this frame: {e}", ch.robot_id),
                    }
                    ch.r_pos.push(Stamped { frame, value: t.position() });
                }
                _ => filter.idle(self.cfg.reset_after_frames),
            }
            out.push(est);
        }
        out
    }
}

//! Deterministic scenario simulator: robot motion, camera-projected detections
//! with calibrated noise, occlusion, and a lossy delayed broadcast channel.

mod motion;
mod scenario;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};

pub use motion::RobotState;
pub use scenario::{
    frame_time_us, ChannelModel, DetectorNoise, FallEvent, FieldBounds, Outage, RobotBody, RobotSpec, Scenario, Waypoint,
};

use crate::geometry::{
    absolute_to_relative_heading, quantize_heading, refine_foot_point, Angle, BinaryMask, BoundingBox, GroundPoint,
    HeadingClass, ImagePoint,
};
use crate::tracklets::{Detection, FrameInput};
use crate::wire::{BroadcastDelivery, BroadcastPacket};

/// Boxes more covered than this by nearer robots produce no detection.
pub const FULL_OCCLUSION: f64 = 0.6;
/// Largest horizontal centre shift caused by partial occlusion, in box widths.
pub const OCCLUSION_BIAS: f64 = 0.25;
/// Boxes smaller than this many pixels tall are not detected.
const MIN_BOX_HEIGHT: f64 = 8.0;

const STREAM_DETECTOR: u64 = 1;
const STREAM_HEADING: u64 = 2;
const STREAM_CLUTTER: u64 = 3;
const STREAM_CHANNEL: u64 = 4;

/// Noise parameters derived from the published detector and heading rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedNoise {
    pub miss_rate: f64,
    pub false_positive_rate: f64,
    pub heading_sigma_rad: f64,
}

/// 88% detection success, 7 false positives in 1000 frames, and a zero-mean
/// Gaussian heading error falling within ±18° (half a class) 74% of the time.
pub fn calibrated_noise_from_table1() -> CalibratedNoise {
    let within = 0.74;
    let half_class = 18f64.to_radians();
    let z = NormalDist::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + within / 2.0);
    CalibratedNoise { miss_rate: 1.0 - 0.88, false_positive_rate: 7.0 / 1000.0, heading_sigma_rad: half_class / z }
}

impl Scenario {
    /// Applies [`calibrated_noise_from_table1`] to the detector and heading model.
    pub fn with_table1_noise(mut self) -> Self {
        let n = calibrated_noise_from_table1();
        self.detector.miss_rate = n.miss_rate;
        self.detector.false_positive_rate = n.false_positive_rate;
        self.heading_noise_rad = n.heading_sigma_rad;
        self
    }

    /// Turns off every noise source, occlusion aside.
    pub fn noise_free(mut self) -> Self {
        self.detector = DetectorNoise { occlusion: self.detector.occlusion, ..DetectorNoise::default() };
        self.detector.center_jitter_px = 0.0;
        self.detector.bottom_crop = 0.0;
        self.heading_noise_rad = 0.0;
        self.channel = ChannelModel { outages: Vec::new(), ..ChannelModel::lossless() };
        self
    }
}

/// Ground truth for one robot in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub robot_id: u32,
    pub position: GroundPoint,
    pub heading_rad: f64,
    /// Detectable this frame: in view, upright and not fully occluded.
    pub visible: bool,
    /// Centre of the projected box, when the robot is in view.
    pub image_center: Option<ImagePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFrame {
    pub frame: u64,
    pub robots: Vec<TruthRecord>,
}

impl TruthFrame {
    pub fn any_visible(&self) -> bool {
        self.robots.iter().any(|r| r.visible)
    }
}

/// Everything generated for one frame.
#[derive(Debug, Clone)]
pub struct SimFrame {
    pub input: FrameInput,
    /// Broadcasts sent this frame that survive the channel, with their arrival times.
    pub deliveries: Vec<BroadcastDelivery>,
    pub truth: TruthFrame,
}

/// A full run, with deliveries sorted into arrival order.
#[derive(Debug, Clone, Default)]
pub struct SimRun {
    pub frames: Vec<FrameInput>,
    pub deliveries: Vec<BroadcastDelivery>,
    pub truth: Vec<TruthFrame>,
}

#[derive(Debug, Clone, Copy)]
struct Projection {
    bbox: BoundingBox,
    range: f64,
}

pub struct Simulator {
    scenario: Scenario,
    robots: Vec<RobotState>,
    next_frame: u64,
    detector_rng: ChaCha8Rng,
    heading_rng: ChaCha8Rng,
    clutter_rng: ChaCha8Rng,
    channel_rng: ChaCha8Rng,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Zero-mean Gaussian sample; zero when `sigma` is zero.
pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

impl Simulator {
    pub fn new(scenario: Scenario) -> Self {
        let seed = scenario.seed;
        let robots = scenario.robots.iter().map(RobotState::new).collect();
        Simulator {
            scenario,
            robots,
            next_frame: 0,
            detector_rng: stream(seed, STREAM_DETECTOR),
            heading_rng: stream(seed, STREAM_HEADING),
            clutter_rng: stream(seed, STREAM_CLUTTER),
            channel_rng: stream(seed, STREAM_CHANNEL),
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn run(scenario: Scenario) -> SimRun {
        let mut sim = Simulator::new(scenario);
        let mut run = SimRun::default();
        while let Some(f) = sim.next_frame() {
            run.frames.push(f.input);
            run.deliveries.extend(f.deliveries);
            run.truth.push(f.truth);
        }
        // stable: equal arrival times keep send order
        run.deliveries.sort_by_key(|d| d.rx_us);
        run
    }

    pub fn next_frame(&mut self) -> Option<SimFrame> {
        if self.next_frame >= self.scenario.duration_frames {
            return None;
        }
        Some(self.simulate_frame(self.next_frame))
    }

    fn fallen(spec: &RobotSpec, frame: u64) -> bool {
        spec.falls.iter().any(|f| frame >= f.frame && frame < f.frame + f.duration)
    }

    /// Generates frame `frame`; frames must be requested in order from 0.
    pub fn simulate_frame(&mut self, frame: u64) -> SimFrame {
        assert_eq!(frame, self.next_frame, "frames must be simulated in order");
        self.next_frame += 1;
        let sc = &self.scenario;
        let dt = 1.0 / sc.fps;
        let observer = Angle::from_radians(sc.observer_heading_rad);
        if frame > 0 {
            for (state, spec) in self.robots.iter_mut().zip(&sc.robots) {
                if !Self::fallen(spec, frame) {
                    state.advance(spec, dt, observer);
                }
            }
        }

        let cam = &sc.camera;
        let body = sc.robot_body;
        let projections: Vec<Option<Projection>> = self
            .robots
            .iter()
            .zip(&sc.robots)
            .map(|(s, spec)| {
                if Self::fallen(spec, frame) {
                    return None;
                }
                let foot = cam.world_to_image(s.position.x, s.position.y, 0.0)?;
                let head = cam.world_to_image(s.position.x, s.position.y, body.height_m)?;
                let height = foot.v - head.v;
                if height < MIN_BOX_HEIGHT {
                    return None;
                }
                let width = height * body.width_m / body.height_m;
                let bbox = BoundingBox::new(foot.h - width / 2.0, head.v, width, height).ok()?;
                cam.contains(bbox.center()).then_some(Projection { bbox, range: s.position.range() })
            })
            .collect();

        // occlusion by nearer robots: coverage fraction and horizontal push
        let n = self.robots.len();
        let mut covered = vec![0.0f64; n];
        let mut push = vec![0.0f64; n];
        if sc.detector.occlusion {
            for i in 0..n {
                let Some(pi) = projections[i] else { continue };
                let mut strongest = 0.0;
                for (j, pj) in projections.iter().enumerate() {
                    let Some(pj) = pj else { continue };
                    if j == i || pj.range >= pi.range {
                        continue;
                    }
                    let frac = pi.bbox.intersection_area(&pj.bbox) / pi.bbox.area();
                    covered[i] += frac;
                    if frac > strongest {
                        strongest = frac;
                        push[i] = (pi.bbox.center().h - pj.bbox.center().h).signum();
                    }
                }
                covered[i] = covered[i].min(1.0);
            }
        }

        let mut mask = BinaryMask::new(cam.image_width as usize, cam.image_height as usize);
        for p in projections.iter().flatten() {
            // torso and legs occupy the middle of the box
            let inset = p.bbox.width * 0.2;
            mask.fill_rect(p.bbox.left + inset, p.bbox.top, p.bbox.right() - inset, p.bbox.bottom());
        }

        let mut truth = Vec::with_capacity(n);
        let mut detections = Vec::new();
        let noise = sc.detector;
        for (i, state) in self.robots.iter().enumerate() {
            let visible = projections[i].is_some() && covered[i] <= FULL_OCCLUSION;
            truth.push(TruthRecord {
                robot_id: state.id,
                position: state.position,
                heading_rad: state.heading.radians(),
                visible,
                image_center: projections[i].map(|p| p.bbox.center()),
            });
            // draw every variate for every robot so streams stay aligned
            let miss = self.detector_rng.random::<f64>() < noise.miss_rate;
            let jh = gaussian(&mut self.detector_rng, noise.center_jitter_px);
            let jv = gaussian(&mut self.detector_rng, noise.center_jitter_px);
            let heading_err = gaussian(&mut self.heading_rng, sc.heading_noise_rad);
            if !visible || miss {
                continue;
            }
            let truth_box = projections[i].expect("visible implies projected").bbox;
            let bias = OCCLUSION_BIAS * truth_box.width * (covered[i] / FULL_OCCLUSION).min(1.0) * push[i];
            let crop = truth_box.height * noise.bottom_crop;
            let Ok(bbox) = BoundingBox::new(truth_box.left + bias + jh, truth_box.top + jv, truth_box.width, truth_box.height - crop)
            else {
                continue;
            };
            let foot = refine_foot_point(&mask, &bbox, 0.2 * bbox.height, 2);
            let rel = absolute_to_relative_heading(state.heading, observer, state.position.bearing());
            let class = quantize_heading(Angle::from_radians(rel.radians() + heading_err));
            detections.push(Detection::new(bbox, foot, class, 1.0));
        }

        if noise.false_positive_rate > 0.0 {
            let count: f64 = Poisson::new(noise.false_positive_rate).expect("positive rate").sample(&mut self.clutter_rng);
            for _ in 0..count as u64 {
                let h = self.clutter_rng.random_range(30.0..120.0);
                let w = h * body.width_m / body.height_m;
                let c = ImagePoint::new(
                    self.clutter_rng.random_range(0.0..cam.image_width as f64),
                    self.clutter_rng.random_range(0.0..cam.image_height as f64),
                );
                let class = HeadingClass::new(self.clutter_rng.random_range(0..10u8)).expect("in range");
                let bbox = BoundingBox::centered(c, w, h).expect("positive size");
                detections.push(Detection::new(bbox, refine_foot_point(&mask, &bbox, 0.2 * h, 2), class, 1.0));
            }
        }

        let deliveries = self.broadcasts(frame);
        SimFrame {
            input: FrameInput { frame, observer_heading: observer, detections },
            deliveries,
            truth: TruthFrame { frame, robots: truth },
        }
    }

    fn broadcasts(&mut self, frame: u64) -> Vec<BroadcastDelivery> {
        let ch = &self.scenario.channel;
        let mut out = Vec::new();
        if !frame.is_multiple_of(ch.period_frames as u64) {
            return out;
        }
        let sent_us = self.scenario.frame_time_us(frame);
        let outage = ch.in_outage(frame);
        for state in &self.robots {
            let dropped = self.channel_rng.random::<f64>() < ch.drop_probability;
            let heading = state.heading.radians() + gaussian(&mut self.channel_rng, ch.magnetometer_noise_rad);
            let delay_ms = truncated_delay(&mut self.channel_rng, ch.delay_mean_ms, ch.delay_std_ms);
            if outage || dropped {
                continue;
            }
            let packet = BroadcastPacket { robot_id: state.id, heading_rad: heading, stamp_us: sent_us };
            out.push(BroadcastDelivery::new(sent_us + (delay_ms * 1000.0).round() as u64, packet));
        }
        out
    }
}

/// Gaussian delay restricted to non-negative values by resampling.
fn truncated_delay<R: Rng + ?Sized>(rng: &mut R, mean: f64, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return mean.max(0.0);
    }
    for _ in 0..64 {
        let d = mean + gaussian(rng, sigma);
        if d >= 0.0 {
            return d;
        }
    }
    0.0
}

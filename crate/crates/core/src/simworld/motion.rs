use crate::geometry::{circ_diff, Angle, GroundPoint};

use super::scenario::RobotSpec;

/// Heading error below which a robot walks while still turning.
const WALK_ALIGNMENT: f64 = std::f64::consts::FRAC_PI_4;
const ARRIVAL_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Travel,
    Align,
    Dwell(u32),
    Done,
}

/// Kinematic state of one simulated robot.
#[derive(Debug, Clone)]
pub struct RobotState {
    pub id: u32,
    pub position: GroundPoint,
    /// Absolute heading.
    pub heading: Angle,
    waypoint: usize,
    phase: Phase,
}

impl RobotState {
    pub fn new(spec: &RobotSpec) -> Self {
        RobotState {
            id: spec.id,
            position: spec.start,
            heading: Angle::from_radians(spec.start_heading_rad),
            waypoint: 0,
            phase: if spec.waypoints.is_empty() { Phase::Done } else { Phase::Travel },
        }
    }

    /// Advances by `dt` seconds. `observer_heading` converts egocentric
    /// directions to absolute headings.
    pub fn advance(&mut self, spec: &RobotSpec, dt: f64, observer_heading: Angle) {
        let max_turn = spec.turn_rate * dt;
        match self.phase {
            Phase::Done => {}
            Phase::Travel => {
                let target = spec.waypoints[self.waypoint].position;
                let (dx, dy) = (target.x - self.position.x, target.y - self.position.y);
                let dist = dx.hypot(dy);
                if dist <= ARRIVAL_EPS {
                    self.phase = Phase::Align;
                    return self.advance(spec, dt, observer_heading);
                }
                let desired = observer_heading + Angle::from_radians(dy.atan2(dx));
                self.turn_towards(desired, max_turn);
                if circ_diff(self.heading, desired) < WALK_ALIGNMENT {
                    let step = (spec.walk_speed * dt).min(dist);
                    self.position = GroundPoint::new(self.position.x + dx / dist * step, self.position.y + dy / dist * step);
                    if step >= dist {
                        self.phase = Phase::Align;
                    }
                }
            }
            Phase::Align => {
                let wp = spec.waypoints[self.waypoint];
                let desired = Angle::from_radians(wp.heading_rad);
                self.turn_towards(desired, max_turn);
                if self.heading == desired {
                    self.phase = Phase::Dwell(wp.dwell_frames);
                }
            }
            Phase::Dwell(0) => self.next_waypoint(spec),
            Phase::Dwell(n) => self.phase = Phase::Dwell(n - 1),
        }
    }

    fn turn_towards(&mut self, desired: Angle, max_turn: f64) {
        let delta = self.heading.signed_delta_to(desired);
        if delta.abs() <= max_turn {
            self.heading = desired;
        } else {
            self.heading = Angle::from_radians(self.heading.radians() + max_turn.copysign(delta));
        }
    }

    fn next_waypoint(&mut self, spec: &RobotSpec) {
        if self.waypoint + 1 < spec.waypoints.len() {
            self.waypoint += 1;
            self.phase = Phase::Travel;
        } else if spec.loop_waypoints {
            self.waypoint = 0;
            self.phase = Phase::Travel;
        } else {
            self.phase = Phase::Done;
        }
    }
}

// Two identical robots cross in front of the camera. Vision alone cannot tell
// them apart; matching observed headings against broadcast ones can.
//
// cargo run --example heading_identification

use std::collections::BTreeMap;

use homotrack::config::PipelineConfig;
use homotrack::geometry::GroundPoint;
use homotrack::identify::Identifier;
use homotrack::simworld::{frame_time_us, RobotSpec, Scenario, Simulator, Waypoint};
use homotrack::tracklets::Tracker;

fn crossing_scenario() -> Scenario {
    let cfg = PipelineConfig::default();
    let walker = |id, from: (f64, f64), to: (f64, f64), heading: f64| RobotSpec {
        start: GroundPoint::new(from.0, from.1),
        waypoints: vec![Waypoint { position: GroundPoint::new(to.0, to.1), heading_rad: heading, dwell_frames: 0 }],
        loop_waypoints: false,
        walk_speed: 0.3,
        ..RobotSpec::standing(id, GroundPoint::new(from.0, from.1), heading)
    };
    Scenario {
        seed: 4,
        duration_frames: 240,
        fps: cfg.fps,
        camera: cfg.camera,
        observer_heading_rad: 0.0,
        field: Default::default(),
        robot_body: Default::default(),
        robots: vec![
            walker(1, (3.0, 1.5), (3.4, -1.5), -1.44),
            walker(2, (3.4, -1.5), (3.0, 1.5), 1.70),
        ],
        detector: Default::default(),
        heading_noise_rad: 0.0,
        channel: Default::default(),
    }
    .with_table1_noise()
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = crossing_scenario();
    let cfg = PipelineConfig::for_camera(scenario.camera, scenario.fps);
    let run = Simulator::run(scenario);

    let mut tracker = Tracker::new(cfg.tracker, cfg.camera);
    let mut identifier = Identifier::new(cfg.identity);
    let mailbox = identifier.mailbox();
    let mut pending = run.deliveries.iter().peekable();
    let mut correct = 0;
    let mut scored = 0;
    let mut labels: BTreeMap<u32, Option<u64>> = BTreeMap::new();

    for (input, truth) in run.frames.iter().zip(&run.truth) {
        let now = frame_time_us(input.frame, cfg.fps);
        while let Some(d) = pending.next_if(|d| d.rx_us <= now) {
            mailbox.post(*d);
        }
        tracker.step(input)?;
        let out = identifier.process_frame(input.frame, now, &tracker);

        for est in &out.estimates {
            if labels.get(&est.robot_id) != Some(&est.tracklet_id) {
                println!("frame {:3}: robot {} -> tracklet {:?} (gamma {:.2})", input.frame, est.robot_id, est.tracklet_id, out.gamma);
                labels.insert(est.robot_id, est.tracklet_id);
            }
        }
        // after warm-up, check each label points at the tracklet nearest its robot
        if input.frame >= cfg.identity.tau as u64 {
            for est in &out.estimates {
                let (Some(pos), Some(t)) = (est.position, truth.robots.iter().find(|r| r.robot_id == est.robot_id)) else {
                    continue;
                };
                scored += 1;
                if pos.distance(&t.position) < 0.5 {
                    correct += 1;
                }
            }
        }
    }
    let pct = 100.0 * correct as f64 / scored.max(1) as f64;
    println!("{correct}/{scored} labelled estimates within 0.5 m of the right robot ({pct:.1}%)");
    assert!(pct > 80.0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}

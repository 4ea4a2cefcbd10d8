// How packet loss, delay and a radio outage affect identification.
//
// cargo run --release --example lossy_channel

use homotrack::config::PipelineConfig;
use homotrack::pipeline::run_seeds;
use homotrack::simworld::{ChannelModel, Outage, Scenario};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/table1_two_robots.json");
    let base = Scenario::load(path)?;
    let cfg = PipelineConfig::for_camera(base.camera, base.fps);
    let seeds: Vec<u64> = (10..16).collect();

    let variants = [
        ("lossless", ChannelModel { magnetometer_noise_rad: base.channel.magnetometer_noise_rad, ..ChannelModel::lossless() }),
        ("30% drop", ChannelModel { drop_probability: 0.3, ..base.channel.clone() }),
        ("60% drop", ChannelModel { drop_probability: 0.6, ..base.channel.clone() }),
        ("5 s outage", ChannelModel { outages: vec![Outage { start_frame: 300, length_frames: 100 }], ..base.channel.clone() }),
    ];
    for (name, channel) in variants {
        let scenario = Scenario { channel, ..base.clone() };
        let reports = run_seeds(&scenario, &cfg, &seeds)?;
        let acc: Vec<f64> = reports.iter().filter_map(|r| r.summary.identification_accuracy_pct).collect();
        let mean = acc.iter().sum::<f64>() / acc.len() as f64;
        let worst = acc.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("{name:>10}: mean {mean:6.2}%  worst {worst:6.2}%");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}

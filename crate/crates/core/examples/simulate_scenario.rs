// Run the checked-in two-robot scenario under several seeds in parallel.
//
// cargo run --release --example simulate_scenario

use homotrack::config::PipelineConfig;
use homotrack::pipeline::run_seeds;
use homotrack::simworld::Scenario;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/table1_two_robots.json");
    let scenario = Scenario::load(path)?;
    let cfg = PipelineConfig::for_camera(scenario.camera, scenario.fps);
    let seeds: Vec<u64> = (1..=4).collect();
    let reports = run_seeds(&scenario, &cfg, &seeds)?;
    for (seed, r) in seeds.iter().zip(&reports) {
        let s = &r.summary;
        println!(
            "seed {seed}: accuracy {:.2}%, rmse {:.3} m, {} tracklets created",
            s.identification_accuracy_pct.unwrap_or(f64::NAN),
            s.position_rmse_m.unwrap_or(f64::NAN),
            s.tracklets_created
        );
    }
    let mean = reports.iter().filter_map(|r| r.summary.identification_accuracy_pct).sum::<f64>() / reports.len() as f64;
    println!("mean accuracy {mean:.2}%");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}

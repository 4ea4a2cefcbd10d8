// Simulate to disk, replay the logs, and score the report offline.
//
// cargo run --example replay_logs

use homotrack::cli;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let sim_out = dir.path().join("sim");
    let replay_out = dir.path().join("replay");
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/outage.json");

    let live = cli::simulate(scenario.as_ref(), &sim_out, Some(21), None)?;
    let replayed = cli::replay(
        &sim_out.join("detections.jsonl"),
        &sim_out.join("broadcasts.jsonl"),
        &sim_out.join("config.json"),
        None,
        &replay_out,
    )?;
    println!("live {:?}% / replay {:?}%", live.summary.identification_accuracy_pct, replayed.summary.identification_accuracy_pct);

    let a = std::fs::read(sim_out.join("report.csv"))?;
    let b = std::fs::read(replay_out.join("report.csv"))?;
    println!("reports identical: {}", a == b);
    assert_eq!(a, b);

    let eval = cli::eval(&replay_out.join("report.csv"), false)?;
    assert_eq!(eval.identification_accuracy_pct, replayed.summary.identification_accuracy_pct);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}

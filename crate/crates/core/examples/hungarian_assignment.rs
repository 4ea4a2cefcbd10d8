// Solve a rectangular assignment and gate the result the way the tracker does.
//
// cargo run --example hungarian_assignment

use homotrack::assignment::{build_association_cost, gated_pairs, hungarian_solve, CostMatrix};
use homotrack::geometry::ImagePoint;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let c = CostMatrix::from_rows(&[[4.0, 1.0, 3.0], [2.0, 0.0, 5.0], [3.0, 2.0, 2.0]])?;
    let a = hungarian_solve(&c);
    println!("pairs {:?}, total cost {}", a.pairs(), a.total_cost(&c));
    assert_eq!(a.total_cost(&c), 5.0);

    // two predicted tracklets, three detections, one of them far away
    let preds = [ImagePoint::new(100.0, 100.0), ImagePoint::new(300.0, 120.0)];
    let dets = [ImagePoint::new(305.0, 118.0), ImagePoint::new(98.0, 103.0), ImagePoint::new(600.0, 400.0)];
    let diag = 800.0;
    let cost = build_association_cost(&preds, &dets, 100.0, diag);
    let gated = gated_pairs(&hungarian_solve(&cost), &cost, diag);
    println!("matched {:?}", gated.matched);
    println!("unmatched tracklets {:?}, new detections {:?}", gated.unmatched_rows, gated.unmatched_cols);
    assert_eq!(gated.unmatched_cols, vec![2]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}

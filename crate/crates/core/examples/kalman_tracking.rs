// Track a point moving with constant acceleration through noisy measurements.
//
// cargo run --example kalman_tracking

use homotrack::geometry::ImagePoint;
use homotrack::kalman::{KalmanParams, KalmanState, KalmanTuning};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dt = 0.05;
    let params = KalmanParams::from_tuning(dt, &KalmanTuning::default());
    let noise = Normal::new(0.0, 3.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let truth = |t: f64| ImagePoint::new(100.0 + 40.0 * t + 5.0 * t * t, 200.0 - 10.0 * t);
    let mut state = KalmanState::init(truth(0.0), &params);
    let mut raw_err = 0.0;
    let mut filt_err = 0.0;
    let steps = 200;
    for k in 1..=steps {
        let t = k as f64 * dt;
        let p = truth(t);
        let z = ImagePoint::new(p.h + noise.sample(&mut rng), p.v + noise.sample(&mut rng));
        state = state.predict(&params).update(z, &params)?;
        if k > 20 {
            raw_err += z.distance(&p).powi(2);
            filt_err += state.position().distance(&p).powi(2);
        }
    }
    let n = (steps - 20) as f64;
    let (vh, vv) = state.velocity();
    println!("measurement rmse {:.2} px, filtered rmse {:.2} px", (raw_err / n).sqrt(), (filt_err / n).sqrt());
    println!("final velocity ({vh:.1}, {vv:.1}) px/s, truth ({:.1}, -10.0)", 40.0 + 10.0 * steps as f64 * dt);
    assert!(filt_err < raw_err);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}

//! Regenerates `data/clock_calibration.json`.
//!
//! `cargo run --release -p monitored-qubit --example calibrate [n] [dt]`

use monitored_qubit::distributions::calibration::{calibrate_clock, CalibrationSetting, ClockCalibration};
use monitored_qubit::distributions::DistributionCase;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: Option<usize> = args.get(1).map(|s| s.parse().expect("n"));
    let dt: Option<f64> = args.get(2).map(|s| s.parse().expect("dt"));
    let mut cal = ClockCalibration { entries: Vec::new() };
    for case in DistributionCase::ALL {
        let mut s = CalibrationSetting::standard(case);
        if let Some(n) = n {
            s.n = n;
        }
        if let Some(dt) = dt {
            s.dt = dt;
        }
        let t0 = std::time::Instant::now();
        let e = calibrate_clock(&s).expect("calibration");
        eprintln!("{case}: kappa {} {:?} ({:.1?})", e.kappa, e.candidates, t0.elapsed());
        cal.upsert(e);
    }
    println!("{}", serde_json::to_string_pretty(&cal).expect("serialise"));
}

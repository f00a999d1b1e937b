//! Quick probe of branch tracing behavior at various resolutions.
//!
//! cargo run --release -p bore --example trace_probe -- depr 4 1 161 21 16

use bore::continuation::{classify_limit, contact_angle_estimate, trace_branch, ClassifyThresholds, Direction, StepPolicy};
use bore::params::{FluidPair, FrontConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let dir = if args.get(1).map(|s| s.as_str()) == Some("elev") {
        Direction::Elev
    } else {
        Direction::Depr
    };
    let rho1: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4.0);
    let rho2: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let nq: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(161);
    let np: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(21);
    let l: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(16.0);
    let fluids = if rho1 == rho2 {
        FluidPair::boussinesq(rho1).unwrap()
    } else {
        FluidPair::new(rho1, rho2).unwrap()
    };
    let cfg = FrontConfig::new(&fluids, 0.5, l, nq, np, np).unwrap();
    let policy = StepPolicy::default();
    let t0 = std::time::Instant::now();
    let branch = trace_branch(dir, &fluids, &cfg, &policy).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!("records: {}, termination: {:?}, {:.1}s", branch.records.len(), branch.termination, dt);
    for (k, r) in branch.records.iter().enumerate() {
        if k % 5 == 0 || k + 1 == branch.records.len() {
            println!(
                "  k={k:3} lambda={:.5} max_slope={:.4} gap_up={:.4} gap_lo={:.4} stag={:.4} uspeed={:.4}",
                r.lambda, r.max_slope, r.wall_gap_upper, r.wall_gap_lower, r.stagnation_indicator, r.upper_interface_speed
            );
        }
    }
    let (class, rates) = classify_limit(&branch, &ClassifyThresholds::default());
    println!("classify: {class:?}, rates: {rates:?}");
    match contact_angle_estimate(&branch, 0.12) {
        Ok(angle) => println!("contact angle: {angle:.2} deg"),
        Err(e) => println!("contact angle: {e}"),
    }
}

//! Cold-start solves at given lambdas, to separate branch-existence questions
//! from continuation artifacts.

use bore::continuation::monitors;
use bore::djsolver::{newton_solve, BoreState};
use bore::params::{FluidPair, FrontConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let nq: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(161);
    let np: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(21);
    let l: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(16.0);
    let fluids = FluidPair::new(4.0, 1.0).unwrap();
    for &lambda in &[0.40, 0.36, 0.345, 0.335, 0.334, 0.3335, 0.333, 0.3325, 0.33, 0.325, 0.32, 0.30, 0.25, 0.20] {
        let mut cfg = FrontConfig::new(&fluids, lambda, l, nq, np, np).unwrap();
        cfg.max_newton_iters = 60;
        let seed = BoreState::seeded(&fluids, &cfg, 1.5);
        match newton_solve(&seed, &cfg, &fluids) {
            Ok((s, rep)) => {
                let m = monitors(&s);
                println!(
                    "lambda {lambda:.4}: converged iters {} slope {:.4} front_pos {:.3}",
                    rep.iters, m.max_slope, s.front_position()
                );
            }
            Err(e) => println!("lambda {lambda:.4}: {e}"),
        }
    }
}

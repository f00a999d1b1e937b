//! Measure the clamp-locked front position against domain half-length.

use bore::continuation::monitors;
use bore::djsolver::{newton_solve, BoreState};
use bore::params::{conjugate_downstream, FluidPair, FrontConfig};

fn main() {
    let fluids = FluidPair::new(4.0, 1.0).unwrap();
    let hstar = conjugate_downstream(&fluids);
    for &(l, nq) in &[(8.0, 81usize), (12.0, 121), (16.0, 161), (24.0, 241), (32.0, 321)] {
        let mut lambda = hstar - 0.02;
        let mut cfg = FrontConfig::new(&fluids, lambda, l, nq, 21, 21).unwrap();
        let seed = BoreState::seeded(&fluids, &cfg, 2.5);
        let (mut state, _) = match newton_solve(&seed, &cfg, &fluids) {
            Ok(x) => x,
            Err(e) => {
                println!("L={l}: seed failed: {e}");
                continue;
            }
        };
        let mut step = 0.01;
        let targets = [0.6, 0.55, 0.5, 0.45, 0.4, 0.36];
        let mut ti = 0;
        while ti < targets.len() && step > 1e-8 {
            let next = (lambda - step).max(targets[ti]);
            let cfg_next = FrontConfig { lambda: next, h2: 1.0 - next, ..cfg };
            let pred = state.remap_lambda(&cfg_next);
            match newton_solve(&pred, &cfg_next, &fluids) {
                Ok((s, _)) => {
                    state = s;
                    cfg = cfg_next;
                    lambda = next;
                    step = (step * 1.3).min(0.01);
                    if lambda == targets[ti] {
                        let m = monitors(&state);
                        println!(
                            "L={l:5} lambda={lambda:.3} front_pos={:+.3} slope={:.4} eta(+L)-target={:+.2e}",
                            state.front_position(),
                            m.max_slope,
                            state.eta(cfg.nq - 1) - (hstar - lambda)
                        );
                        ti += 1;
                    }
                }
                Err(_) => step *= 0.5,
            }
        }
        if step <= 1e-8 {
            println!("L={l}: stalled at lambda {lambda:.4}");
        }
    }
}

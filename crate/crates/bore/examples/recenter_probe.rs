//! Verify the recentering path: march down in lambda, print front drift and
//! test translate + repolish behavior explicitly.

use bore::continuation::monitors;
use bore::djsolver::{newton_solve, BoreState};
use bore::params::{conjugate_downstream, FluidPair, FrontConfig};

fn main() {
    let fluids = FluidPair::new(4.0, 1.0).unwrap();
    let (nq, np, l) = (161, 21, 16.0);
    let hstar = conjugate_downstream(&fluids);
    let mut lambda = hstar - 0.02;
    let mut cfg = FrontConfig::new(&fluids, lambda, l, nq, np, np).unwrap();
    let dq = 2.0 * l / (nq - 1) as f64;
    let seed = BoreState::seeded(&fluids, &cfg, 2.5);
    let (mut state, _) = newton_solve(&seed, &cfg, &fluids).unwrap();
    let mut step = 0.01;
    let mut count = 0;
    while lambda > 0.33 && step > 1e-8 {
        let next = lambda - step;
        let cfg_next = FrontConfig { lambda: next, h2: 1.0 - next, ..cfg };
        let pred = state.remap_lambda(&cfg_next);
        match newton_solve(&pred, &cfg_next, &fluids) {
            Ok((s, rep)) => {
                let pos = s.front_position();
                count += 1;
                if count % 10 == 0 || pos.abs() > 2.0 * dq {
                    println!(
                        "lambda {:.5} iters {:2} slope {:.4} front_pos {:+.3}",
                        next,
                        rep.iters,
                        monitors(&s).max_slope,
                        pos
                    );
                }
                state = s;
                cfg = cfg_next;
                lambda = next;
                step = (step * 1.3).min(0.01);
                // Manual recenter test when drift exceeds two cells.
                if pos.abs() > 2.0 * dq {
                    let cells = (-pos / dq).round() as i64;
                    let shifted = state.translate_cells(cells);
                    match newton_solve(&shifted, &cfg, &fluids) {
                        Ok((s2, rep2)) => {
                            println!(
                                "  recenter by {cells} cells: repolish iters {} front_pos {:+.3}",
                                rep2.iters,
                                s2.front_position()
                            );
                            state = s2;
                        }
                        Err(e) => println!("  recenter by {cells} cells FAILED: {e}"),
                    }
                }
            }
            Err(_) => {
                step *= 0.5;
            }
        }
    }
    println!("end lambda {lambda:.5} step {step:.2e}");
}

//! Inspect Newton behavior near a continuation stall.

use bore::continuation::{monitors, sign_checks, Direction};
use bore::djsolver::{assemble_residual, newton_solve, BoreState};
use bore::params::{conjugate_downstream, FluidPair, FrontConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let nq: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(161);
    let np: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(21);
    let l: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(16.0);
    let target: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.30);
    let fluids = FluidPair::new(4.0, 1.0).unwrap();
    let hstar = conjugate_downstream(&fluids);

    // Walk down in lambda with fixed small steps, reporting Newton stats.
    let mut lambda = hstar - 0.02;
    let mut cfg = FrontConfig::new(&fluids, lambda, l, nq, np, np).unwrap();
    let seed = BoreState::seeded(&fluids, &cfg, 2.5);
    let (mut state, _) = newton_solve(&seed, &cfg, &fluids).unwrap();
    let mut step = 0.01;
    while lambda > target {
        let next = lambda - step;
        let cfg_next = FrontConfig { lambda: next, h2: 1.0 - next, ..cfg };
        let pred = state.remap_lambda(&cfg_next);
        let r0 = assemble_residual(&pred, &cfg_next, &fluids)
            .map(|r| r.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
        match newton_solve(&pred, &cfg_next, &fluids) {
            Ok((s, rep)) => {
                let m = monitors(&s);
                let sc = sign_checks(&s, Direction::Elev).is_ok();
                println!(
                    "lambda {:.5} step {:.1e} pred_res {:.2e} iters {} slope {:.4} eta_mid {:.4} signs_ok {}",
                    next,
                    step,
                    r0.unwrap_or(f64::NAN),
                    rep.iters,
                    m.max_slope,
                    s.eta(cfg.nq / 2),
                    sc
                );
                state = s;
                cfg = cfg_next;
                lambda = next;
                step = (step * 1.3).min(0.01);
            }
            Err(e) => {
                println!("lambda {next:.5} step {step:.1e} FAILED: {e}");
                step *= 0.5;
                if step < 1e-7 {
                    println!("stall at lambda {lambda:.6}");
                    break;
                }
            }
        }
    }
    // Where is the front? Print the eta trace coarsely.
    let eta = state.eta_trace();
    let n = eta.len();
    print!("eta: ");
    for k in 0..=16 {
        print!("{:.3} ", eta[k * (n - 1) / 16]);
    }
    println!();
}

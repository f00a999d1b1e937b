//! Damped Newton iteration with a block-tridiagonal direct solve.
//!
//! The Jacobian is assembled analytically (see `residual.rs`); the linear
//! sub-solves are exact up to round-off via dense LU factorization of the
//! pivot blocks (block Thomas elimination). Assembly and elimination are
//! serial with a fixed order, so results are bitwise reproducible.

use nalgebra::{DMatrix, DVector};

use crate::djsolver::{assemble_jacobian, assemble_residual, BoreState, Layout, SolveError};
use crate::params::{FluidPair, FrontConfig};

/// Convergence summary of a Newton solve.
#[derive(Debug, Clone, Copy)]
pub struct NewtonReport {
    pub iters: usize,
    pub residual_norm: f64,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Solve the block-tridiagonal system in place; rhs blocks of size m.
fn block_thomas(
    sub: Vec<DMatrix<f64>>,
    mut diag: Vec<DMatrix<f64>>,
    sup: Vec<DMatrix<f64>>,
    rhs: &[f64],
) -> Result<Vec<f64>, SolveError> {
    let n = diag.len();
    let m = diag[0].nrows();
    let mut g: Vec<DVector<f64>> =
        (0..n).map(|i| DVector::from_column_slice(&rhs[i * m..(i + 1) * m])).collect();
    let mut w: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    // Forward elimination: D_i <- D_i - C_i * D_{i-1}^{-1} * B_{i-1}.
    let mut lu = diag[0].clone().lu();
    for i in 1..n {
        let x = lu
            .solve(&sup[i - 1])
            .ok_or_else(|| SolveError::WallRows("singular pivot block in Jacobian".into()))?;
        let gi = lu.solve(&g[i - 1]).expect("pivot already factored");
        let di = &diag[i] - &sub[i] * &x;
        let ri = &g[i] - &sub[i] * &gi;
        diag[i] = di;
        g[i] = ri;
        w.push(x);
        lu = diag[i].clone().lu();
    }
    // Back substitution.
    let mut x = vec![DVector::zeros(m); n];
    x[n - 1] = lu
        .solve(&g[n - 1])
        .ok_or_else(|| SolveError::WallRows("singular final pivot block".into()))?;
    for i in (0..n - 1).rev() {
        let lu_i = diag[i].clone().lu();
        let gi = lu_i
            .solve(&g[i])
            .ok_or_else(|| SolveError::WallRows("singular pivot block".into()))?;
        x[i] = gi - &w[i] * &x[i + 1];
    }
    let mut flat = vec![0.0; n * m];
    for i in 0..n {
        flat[i * m..(i + 1) * m].copy_from_slice(x[i].as_slice());
    }
    Ok(flat)
}

/// Damped Newton with residual line search.
///
/// Returns the converged state (max-norm residual at or below
/// `cfg.newton_tol`) or a non-convergence error carrying the final residual
/// norm and last iterate so continuation can shrink its step.
pub fn newton_solve(
    initial: &BoreState,
    cfg: &FrontConfig,
    fluids: &FluidPair,
) -> Result<(BoreState, NewtonReport), SolveError> {
    let layout = Layout::of(cfg);
    let mut state = initial.clone();
    let mut r = assemble_residual(&state, cfg, fluids)?;
    let mut norm = max_abs(&r);
    if norm <= cfg.newton_tol {
        return Ok((state, NewtonReport { iters: 0, residual_norm: norm }));
    }
    for iter in 1..=cfg.max_newton_iters {
        let (sub, diag, sup) = assemble_jacobian(&state, cfg, fluids)?;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = block_thomas(sub, diag, sup, &neg_r)?;
        let x = layout.pack(&state);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let xt: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + alpha * d).collect();
            let mut trial = state.clone();
            layout.unpack_into(&xt, &mut trial);
            match assemble_residual(&trial, cfg, fluids) {
                Ok(rt) => {
                    let nt = max_abs(&rt);
                    if nt <= (1.0 - 1e-4 * alpha) * norm {
                        state = trial;
                        r = rt;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                }
                Err(SolveError::Degenerate { .. }) => {
                    // Step left the graph regime; damp harder.
                }
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(SolveError::NonConvergence {
                residual_norm: norm,
                iters: iter,
                last: Box::new(state),
            });
        }
        if norm <= cfg.newton_tol {
            return Ok((state, NewtonReport { iters: iter, residual_norm: norm }));
        }
    }
    Err(SolveError::NonConvergence {
        residual_norm: norm,
        iters: cfg.max_newton_iters,
        last: Box::new(state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::conjugate_downstream;

    #[test]
    fn trivial_state_converges_immediately() {
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let lambda = conjugate_downstream(&fluids);
        let cfg = FrontConfig::new(&fluids, lambda, 10.0, 17, 7, 7).unwrap();
        let state = BoreState::laminar(&fluids, &cfg);
        let (out, rep) = newton_solve(&state, &cfg, &fluids).unwrap();
        assert!(rep.iters <= 1);
        assert_eq!(out, state);
    }

    #[test]
    fn small_amplitude_bore_from_perturbed_trivial() {
        // Regression: the first converged small bores have gentle slopes.
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        for sign in [-1.0, 1.0] {
            let lambda = conjugate_downstream(&fluids) + 0.02 * sign;
            let cfg = FrontConfig::new(&fluids, lambda, 14.0, 49, 11, 11).unwrap();
            let seed = BoreState::seeded(&fluids, &cfg, 2.5);
            let (bore, rep) = newton_solve(&seed, &cfg, &fluids).unwrap();
            assert!(rep.residual_norm <= cfg.newton_tol);
            let slope = bore.max_interface_slope();
            assert!(slope < 0.2, "sign {sign}: max slope {slope}");
            assert!(slope > 1e-4, "sign {sign}: bore collapsed to laminar");
        }
    }

    #[test]
    fn cold_start_far_from_trivial_errors_cleanly() {
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let cfg = FrontConfig {
            max_newton_iters: 8,
            ..FrontConfig::new(&fluids, 0.15, 10.0, 31, 9, 9).unwrap()
        };
        let seed = BoreState::seeded(&fluids, &cfg, 2.0);
        match newton_solve(&seed, &cfg, &fluids) {
            Err(SolveError::NonConvergence { residual_norm, last, .. }) => {
                assert!(residual_norm.is_finite());
                assert_eq!(last.cfg.nq, cfg.nq);
            }
            Ok((_, rep)) => panic!("unexpected convergence in {} iters", rep.iters),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn block_thomas_solves_reference_system() {
        // Assemble a small random-ish block tridiagonal system and verify
        // against a dense solve.
        let n = 5;
        let m = 3;
        let mut sub = vec![DMatrix::zeros(m, m); n];
        let mut diag = vec![DMatrix::zeros(m, m); n];
        let mut sup = vec![DMatrix::zeros(m, m); n];
        let mut dense = DMatrix::zeros(n * m, n * m);
        let mut val = 0.37f64;
        let mut next = || {
            val = (val * 31.0 + 1.7).rem_euclid(2.0) - 1.0;
            val
        };
        for i in 0..n {
            for r in 0..m {
                for c in 0..m {
                    let d = next() + if r == c { 6.0 } else { 0.0 };
                    diag[i][(r, c)] = d;
                    dense[(i * m + r, i * m + c)] = d;
                    if i > 0 {
                        let s = next();
                        sub[i][(r, c)] = s;
                        dense[(i * m + r, (i - 1) * m + c)] = s;
                    }
                    if i + 1 < n {
                        let s = next();
                        sup[i][(r, c)] = s;
                        dense[(i * m + r, (i + 1) * m + c)] = s;
                    }
                }
            }
        }
        let rhs: Vec<f64> = (0..n * m).map(|k| (k as f64 * 0.3).sin()).collect();
        let x = block_thomas(sub, diag, sup, &rhs).unwrap();
        let xd = dense.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        for k in 0..n * m {
            assert!((x[k] - xd[k]).abs() < 1e-10, "k={k}: {} vs {}", x[k], xd[k]);
        }
    }
}

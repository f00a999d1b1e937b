//! Residual and analytic Jacobian of the discrete front system.

use nalgebra::DMatrix;

use crate::djsolver::{BoreState, Grid, Layout, SolveError, HP_DEGENERACY_FLOOR};
use crate::params::{FluidPair, FrontConfig, LaminarProfile, Layer};

/// Classification of residual rows, for tests and error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    UpstreamClamp,
    DownstreamClamp,
    Interface,
    InteriorLower,
    InteriorUpper,
}

/// Kind of the residual row at flat index `row`.
pub fn row_kind(layout: &Layout, row: usize) -> RowKind {
    let m = layout.block();
    let i = row / m;
    let s = row % m;
    if i == 0 {
        return RowKind::UpstreamClamp;
    }
    if i == layout.nq - 1 {
        return RowKind::DownstreamClamp;
    }
    if s == 0 {
        RowKind::Interface
    } else if s <= layout.np1 - 2 {
        RowKind::InteriorLower
    } else {
        RowKind::InteriorUpper
    }
}

struct LayerView<'a> {
    field: &'a [f64],
    np: usize,
}

impl LayerView<'_> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.field[i * self.np + j]
    }
}

/// Interior quasilinear operator at node (i, j) of one layer, plus the
/// stencil derivatives when requested.
#[inline]
fn interior_eq(
    v: &LayerView<'_>,
    i: usize,
    j: usize,
    dq: f64,
    dp: f64,
) -> (f64, [[f64; 3]; 3]) {
    let c = v.at(i, j);
    let e = v.at(i + 1, j);
    let w = v.at(i - 1, j);
    let n = v.at(i, j + 1);
    let s = v.at(i, j - 1);
    let ne = v.at(i + 1, j + 1);
    let nw = v.at(i - 1, j + 1);
    let se = v.at(i + 1, j - 1);
    let sw = v.at(i - 1, j - 1);
    let a = (e - w) / (2.0 * dq);
    let b = (n - s) / (2.0 * dp);
    let hqq = (e - 2.0 * c + w) / (dq * dq);
    let hpp = (n - 2.0 * c + s) / (dp * dp);
    let hqp = (ne - se - nw + sw) / (4.0 * dq * dp);
    let f = (1.0 + a * a) * hpp - 2.0 * a * b * hqp + b * b * hqq;

    // Chain rule through (a, b, hqq, hpp, hqp). Stencil layout d[di][dj]
    // with di, dj in {-1, 0, +1} mapped to indices {0, 1, 2}.
    let df_da = 2.0 * a * hpp - 2.0 * b * hqp;
    let df_db = -2.0 * a * hqp + 2.0 * b * hqq;
    let df_dhqq = b * b;
    let df_dhpp = 1.0 + a * a;
    let df_dhqp = -2.0 * a * b;
    let mut d = [[0.0f64; 3]; 3];
    // a: (e - w) / 2dq
    d[2][1] += df_da / (2.0 * dq);
    d[0][1] -= df_da / (2.0 * dq);
    // b: (n - s) / 2dp
    d[1][2] += df_db / (2.0 * dp);
    d[1][0] -= df_db / (2.0 * dp);
    // hqq
    d[2][1] += df_dhqq / (dq * dq);
    d[1][1] -= 2.0 * df_dhqq / (dq * dq);
    d[0][1] += df_dhqq / (dq * dq);
    // hpp
    d[1][2] += df_dhpp / (dp * dp);
    d[1][1] -= 2.0 * df_dhpp / (dp * dp);
    d[1][0] += df_dhpp / (dp * dp);
    // hqp
    let k = df_dhqp / (4.0 * dq * dp);
    d[2][2] += k;
    d[0][0] += k;
    d[2][0] -= k;
    d[0][2] -= k;
    (f, d)
}

/// One-sided interface derivatives of both layers at column i, second order.
#[inline]
fn interface_slopes(
    state: &BoreState,
    i: usize,
    dp1: f64,
    dp2: f64,
) -> (f64, f64) {
    let np2 = state.cfg.np2;
    let eta = state.eta(i);
    // Lower layer: p increases into the layer from the interface at j = 0.
    let b1 = (-3.0 * eta + 4.0 * state.h1_at(i, 1) - state.h1_at(i, 2)) / (2.0 * dp1);
    // Upper layer: interface is the last node.
    let b2 = (3.0 * eta - 4.0 * state.h2_at(i, np2 - 2) + state.h2_at(i, np2 - 3)) / (2.0 * dp2);
    (b1, b2)
}

fn degeneracy_scan(state: &BoreState, grid: &Grid) -> Result<(), SolveError> {
    let cfg = &state.cfg;
    let (dp1, dp2) = (grid.dp1(), grid.dp2());
    for i in 0..cfg.nq {
        let (b1, b2) = interface_slopes(state, i, dp1, dp2);
        if b1.abs() < HP_DEGENERACY_FLOOR {
            return Err(SolveError::Degenerate { layer: Layer::Lower, i, j: 0, value: b1 });
        }
        if b2.abs() < HP_DEGENERACY_FLOOR {
            return Err(SolveError::Degenerate {
                layer: Layer::Upper,
                i,
                j: cfg.np2 - 1,
                value: b2,
            });
        }
        for j in 1..cfg.np1 - 1 {
            let hp = (state.h1_at(i, j + 1) - state.h1_at(i, j - 1)) / (2.0 * dp1);
            if hp.abs() < HP_DEGENERACY_FLOOR {
                return Err(SolveError::Degenerate { layer: Layer::Lower, i, j, value: hp });
            }
        }
        for j in 1..cfg.np2 - 1 {
            let hp = (state.h2_at(i, j + 1) - state.h2_at(i, j - 1)) / (2.0 * dp2);
            if hp.abs() < HP_DEGENERACY_FLOOR {
                return Err(SolveError::Degenerate { layer: Layer::Upper, i, j, value: hp });
            }
        }
    }
    Ok(())
}

/// Dynamic-condition coefficients: the residual is
/// `(1 + eta_q^2)(B2^-2 - B1^-2) + lin * eta - rhs`.
#[inline]
fn dynamic_coeffs(fluids: &FluidPair, cfg: &FrontConfig) -> (f64, f64) {
    if fluids.boussinesq {
        (-8.0 * fluids.rho1, 0.0)
    } else {
        let drho = fluids.rho2 - fluids.rho1;
        (2.0 * drho / cfg.froude_sq, drho)
    }
}

/// Residual vector of the discrete front system, one entry per unknown.
///
/// Interior rows hold the quasilinear height equation per layer; interface
/// rows hold the dynamic condition written with `|grad psi_i|^2 =
/// (1 + eta_q^2) / H_{i,p}^2`; far-field rows clamp the first and last
/// columns to the upstream and downstream conjugate profiles.
pub fn assemble_residual(
    state: &BoreState,
    cfg: &FrontConfig,
    fluids: &FluidPair,
) -> Result<Vec<f64>, SolveError> {
    debug_assert_eq!(cfg, &state.cfg);
    state.wall_rows_exact()?;
    let grid = Grid::new(fluids, cfg);
    degeneracy_scan(state, &grid)?;
    let layout = Layout::of(cfg);
    let m = layout.block();
    let (dq, dp1, dp2) = (grid.dq(), grid.dp1(), grid.dp2());
    let (lin, rhs) = dynamic_coeffs(fluids, cfg);
    let mut r = vec![0.0; layout.total()];

    let up = LaminarProfile::upstream(fluids, cfg.lambda);
    let down = LaminarProfile::downstream(fluids, cfg.lambda);
    for (i, prof) in [(0usize, &up), (cfg.nq - 1, &down)] {
        let base = i * m;
        r[base] = state.eta(i) - prof.y_interface;
        for j in 1..=cfg.np1 - 2 {
            r[base + layout.slot_h1(j)] =
                state.h1_at(i, j) - (prof.y_interface + grid.p1[j] / prof.slope1);
        }
        for j in 1..=cfg.np2 - 2 {
            r[base + layout.slot_h2(j)] =
                state.h2_at(i, j) - (prof.y_interface + grid.p2[j] / prof.slope2);
        }
    }

    let v1 = LayerView { field: &state.h1, np: cfg.np1 };
    let v2 = LayerView { field: &state.h2, np: cfg.np2 };
    for i in 1..cfg.nq - 1 {
        let base = i * m;
        let eta_q = (state.eta(i + 1) - state.eta(i - 1)) / (2.0 * dq);
        let (b1, b2) = interface_slopes(state, i, dp1, dp2);
        r[base] = (1.0 + eta_q * eta_q) * (1.0 / (b2 * b2) - 1.0 / (b1 * b1))
            + lin * state.eta(i)
            - rhs;
        for j in 1..=cfg.np1 - 2 {
            r[base + layout.slot_h1(j)] = interior_eq(&v1, i, j, dq, dp1).0;
        }
        for j in 1..=cfg.np2 - 2 {
            r[base + layout.slot_h2(j)] = interior_eq(&v2, i, j, dq, dp2).0;
        }
    }
    Ok(r)
}

/// Block-tridiagonal Jacobian: `(sub, diag, sup)` dense blocks per column.
/// Assembled analytically from the same stencils as the residual.
pub fn assemble_jacobian(
    state: &BoreState,
    cfg: &FrontConfig,
    fluids: &FluidPair,
) -> Result<(Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>), SolveError> {
    let grid = Grid::new(fluids, cfg);
    let layout = Layout::of(cfg);
    let m = layout.block();
    let (dq, dp1, dp2) = (grid.dq(), grid.dp1(), grid.dp2());
    let (lin, _) = dynamic_coeffs(fluids, cfg);
    let mut sub = vec![DMatrix::zeros(m, m); cfg.nq];
    let mut diag = vec![DMatrix::zeros(m, m); cfg.nq];
    let mut sup = vec![DMatrix::zeros(m, m); cfg.nq];

    // Far-field clamps: identity rows.
    for i in [0, cfg.nq - 1] {
        diag[i] = DMatrix::identity(m, m);
    }

    // Slot of a lower-layer stencil node at p index j, or eta (j = 0), or
    // None when the node is a wall constant.
    let slot1 = |j: usize| -> Option<usize> {
        if j == 0 {
            Some(layout.slot_eta())
        } else if j <= cfg.np1 - 2 {
            Some(layout.slot_h1(j))
        } else {
            None
        }
    };
    let slot2 = |j: usize| -> Option<usize> {
        if j == cfg.np2 - 1 {
            Some(layout.slot_eta())
        } else if j >= 1 && j <= cfg.np2 - 2 {
            Some(layout.slot_h2(j))
        } else {
            None
        }
    };

    let v1 = LayerView { field: &state.h1, np: cfg.np1 };
    let v2 = LayerView { field: &state.h2, np: cfg.np2 };
    for i in 1..cfg.nq - 1 {
        // Interface row.
        let eta_q = (state.eta(i + 1) - state.eta(i - 1)) / (2.0 * dq);
        let (b1, b2) = interface_slopes(state, i, dp1, dp2);
        let opp = 1.0 / (b2 * b2) - 1.0 / (b1 * b1);
        let one_plus = 1.0 + eta_q * eta_q;
        let row = layout.slot_eta();
        // d/d eta_q
        let d_etaq = 2.0 * eta_q * opp / (2.0 * dq);
        sup[i][(row, layout.slot_eta())] += d_etaq;
        sub[i][(row, layout.slot_eta())] -= d_etaq;
        // d/d b2 = -2 (1+eta_q^2) / b2^3 ; b2 stencil: eta (+3/2dp2), h2[np2-2] (-4/2dp2), h2[np2-3] (+1/2dp2)
        let db2 = -2.0 * one_plus / (b2 * b2 * b2);
        diag[i][(row, layout.slot_eta())] += db2 * 3.0 / (2.0 * dp2);
        if let Some(s) = slot2(cfg.np2 - 2) {
            diag[i][(row, s)] += db2 * (-4.0) / (2.0 * dp2);
        }
        if let Some(s) = slot2(cfg.np2 - 3) {
            diag[i][(row, s)] += db2 * 1.0 / (2.0 * dp2);
        }
        // d/d b1 = +2 (1+eta_q^2) / b1^3 ; b1 stencil: eta (-3/2dp1), h1[1] (+4/2dp1), h1[2] (-1/2dp1)
        let db1 = 2.0 * one_plus / (b1 * b1 * b1);
        diag[i][(row, layout.slot_eta())] += db1 * (-3.0) / (2.0 * dp1);
        if let Some(s) = slot1(1) {
            diag[i][(row, s)] += db1 * 4.0 / (2.0 * dp1);
        }
        if let Some(s) = slot1(2) {
            diag[i][(row, s)] += db1 * (-1.0) / (2.0 * dp1);
        }
        // linear eta term
        diag[i][(row, layout.slot_eta())] += lin;

        // Lower-layer interior rows.
        for j in 1..=cfg.np1 - 2 {
            let row = layout.slot_h1(j);
            let (_, d) = interior_eq(&v1, i, j, dq, dp1);
            for (di, blocks) in [(0usize, &mut sub), (1, &mut diag), (2, &mut sup)] {
                for dj in 0..3usize {
                    let coeff = d[di][dj];
                    if coeff == 0.0 {
                        continue;
                    }
                    if let Some(s) = slot1(j + dj - 1) {
                        blocks[i][(row, s)] += coeff;
                    }
                }
            }
        }
        // Upper-layer interior rows.
        for j in 1..=cfg.np2 - 2 {
            let row = layout.slot_h2(j);
            let (_, d) = interior_eq(&v2, i, j, dq, dp2);
            for (di, blocks) in [(0usize, &mut sub), (1, &mut diag), (2, &mut sup)] {
                for dj in 0..3usize {
                    let coeff = d[di][dj];
                    if coeff == 0.0 {
                        continue;
                    }
                    if let Some(s) = slot2(j + dj - 1) {
                        blocks[i][(row, s)] += coeff;
                    }
                }
            }
        }
    }
    Ok((sub, diag, sup))
}

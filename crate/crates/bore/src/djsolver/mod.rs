//! Internal-front solver in Dubreil-Jacotin (streamfunction) coordinates.
//!
//! Each layer's unknown is the height function `y = H_i(q, p)` on a fixed
//! rectangular strip: `q = x` runs over the truncated domain `[-L, L]` and
//! `p = psi` over the layer's streamfunction range. The interface is the
//! shared coordinate line `p = 0`, rigid walls are the outer `p` lines, and
//! harmonicity of psi becomes the quasilinear interior equation
//! `(1 + H_q^2) H_pp - 2 H_q H_p H_qp + H_p^2 H_qq = 0`.

mod newton;
mod physical;
mod residual;

pub use newton::{newton_solve, NewtonReport};
pub use physical::PhysicalField;
pub use residual::{assemble_jacobian, assemble_residual, row_kind, RowKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{conjugate_downstream, FluidPair, FrontConfig, LaminarProfile};

/// Serialized state schema version.
pub const STATE_SCHEMA_VERSION: u32 = 1;

/// Floor below which `|H_p|` counts as a loss of the graph structure. A state
/// this degenerate would corrupt the stagnation diagnostics, so the solver
/// aborts instead of regularizing.
pub const HP_DEGENERACY_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("state does not satisfy wall rows: {0}")]
    WallRows(String),
    #[error("H_p degenerate ({value:e}) in {layer:?} at node (q index {i}, p index {j})")]
    Degenerate { layer: crate::params::Layer, i: usize, j: usize, value: f64 },
    #[error("Newton did not converge: residual {residual_norm:e} after {iters} iterations")]
    NonConvergence { residual_norm: f64, iters: usize, last: Box<BoreState> },
    #[error("point ({x}, {y}) outside the channel")]
    OutsideChannel { x: f64, y: f64 },
    #[error("state file error: {0}")]
    StateFile(String),
    #[error(transparent)]
    Param(#[from] crate::params::ParamError),
}

/// Coordinate grid for one front problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// nq uniform horizontal nodes on [-L, L].
    pub q: Vec<f64>,
    /// np1 nodes on [0, lambda sqrt(rho1)]; index 0 is the interface, the
    /// last index the bed.
    pub p1: Vec<f64>,
    /// np2 nodes on [-h2 sqrt(rho2), 0]; index 0 is the lid, the last index
    /// the interface.
    pub p2: Vec<f64>,
}

impl Grid {
    pub fn new(fluids: &FluidPair, cfg: &FrontConfig) -> Self {
        let pbed = cfg.lambda * fluids.rho1.sqrt();
        let plid = -cfg.h2 * fluids.rho2.sqrt();
        let q = (0..cfg.nq)
            .map(|i| -cfg.l + 2.0 * cfg.l * i as f64 / (cfg.nq - 1) as f64)
            .collect();
        let p1 = (0..cfg.np1).map(|j| pbed * j as f64 / (cfg.np1 - 1) as f64).collect();
        let p2 = (0..cfg.np2)
            .map(|j| plid * (1.0 - j as f64 / (cfg.np2 - 1) as f64))
            .collect();
        Grid { q, p1, p2 }
    }

    pub fn dq(&self) -> f64 {
        self.q[1] - self.q[0]
    }

    pub fn dp1(&self) -> f64 {
        self.p1[1] - self.p1[0]
    }

    pub fn dp2(&self) -> f64 {
        self.p2[1] - self.p2[0]
    }
}

/// Discrete bore state: height fields of both layers, walls included.
///
/// `h1` is row-major over `(q, p1)`, `h2` over `(q, p2)`. The interface trace
/// is stored redundantly in both layers (`h1[i, 0] == h2[i, np2-1]`); the
/// solver treats it as a single unknown per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoreState {
    pub version: u32,
    pub fluids: FluidPair,
    pub cfg: FrontConfig,
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

impl BoreState {
    #[inline]
    pub fn eta(&self, i: usize) -> f64 {
        self.h1[i * self.cfg.np1]
    }

    #[inline]
    pub fn h1_at(&self, i: usize, j: usize) -> f64 {
        self.h1[i * self.cfg.np1 + j]
    }

    #[inline]
    pub fn h2_at(&self, i: usize, j: usize) -> f64 {
        self.h2[i * self.cfg.np2 + j]
    }

    pub fn eta_trace(&self) -> Vec<f64> {
        (0..self.cfg.nq).map(|i| self.eta(i)).collect()
    }

    /// The trivial laminar state: both layers linear in p, interface flat at 0.
    pub fn laminar(fluids: &FluidPair, cfg: &FrontConfig) -> Self {
        let grid = Grid::new(fluids, cfg);
        let s1 = fluids.rho1.sqrt();
        let s2 = fluids.rho2.sqrt();
        let mut h1 = vec![0.0; cfg.nq * cfg.np1];
        let mut h2 = vec![0.0; cfg.nq * cfg.np2];
        for i in 0..cfg.nq {
            for (j, &p) in grid.p1.iter().enumerate() {
                h1[i * cfg.np1 + j] = -p / s1;
            }
            for (j, &p) in grid.p2.iter().enumerate() {
                h2[i * cfg.np2 + j] = -p / s2;
            }
        }
        BoreState { version: STATE_SCHEMA_VERSION, fluids: *fluids, cfg: *cfg, h1, h2 }
    }

    /// Laminar state with a tanh-shaped interface perturbation toward the
    /// conjugate downstream level, the standard continuation seed. Each
    /// column is linear in p between the perturbed interface and the walls.
    pub fn seeded(fluids: &FluidPair, cfg: &FrontConfig, width: f64) -> Self {
        let grid = Grid::new(fluids, cfg);
        let jump = conjugate_downstream(fluids) - cfg.lambda;
        let mut state = BoreState::laminar(fluids, cfg);
        for i in 0..cfg.nq {
            let eta = jump * 0.5 * (1.0 + (grid.q[i] / width).tanh());
            state.set_column_linear(&grid, i, eta);
        }
        state
    }

    /// Overwrite column `i` with a linear-in-p profile at interface height `eta`.
    pub fn set_column_linear(&mut self, grid: &Grid, i: usize, eta: f64) {
        let np1 = self.cfg.np1;
        let np2 = self.cfg.np2;
        let pbed = grid.p1[np1 - 1];
        let plid = grid.p2[0];
        for (j, &p) in grid.p1.iter().enumerate() {
            self.h1[i * np1 + j] = eta + (-self.cfg.lambda - eta) * (p / pbed);
        }
        for (j, &p) in grid.p2.iter().enumerate() {
            self.h2[i * np2 + j] = eta + (self.cfg.h2 - eta) * (p / plid);
        }
    }

    /// Overwrite column `i` with a laminar profile of lower thickness
    /// `profile.y_interface + lambda` (used for far-field clamps).
    pub fn set_column_profile(&mut self, grid: &Grid, i: usize, profile: &LaminarProfile) {
        // psi = slope * (y - y_if)  =>  y = y_if + p / slope
        let np1 = self.cfg.np1;
        let np2 = self.cfg.np2;
        for (j, &p) in grid.p1.iter().enumerate() {
            self.h1[i * np1 + j] = profile.y_interface + p / profile.slope1;
        }
        for (j, &p) in grid.p2.iter().enumerate() {
            self.h2[i * np2 + j] = profile.y_interface + p / profile.slope2;
        }
    }

    /// Exact wall rows: bed height in layer 1, lid height in layer 2.
    pub fn wall_rows_exact(&self) -> Result<(), SolveError> {
        let np1 = self.cfg.np1;
        let np2 = self.cfg.np2;
        for i in 0..self.cfg.nq {
            let bed = self.h1[i * np1 + np1 - 1];
            if (bed + self.cfg.lambda).abs() > 1e-13 {
                return Err(SolveError::WallRows(format!(
                    "bed row at column {i}: H1 = {bed}, expected {}",
                    -self.cfg.lambda
                )));
            }
            let lid = self.h2[i * np2];
            if (lid - self.cfg.h2).abs() > 1e-13 {
                return Err(SolveError::WallRows(format!(
                    "lid row at column {i}: H2 = {lid}, expected {}",
                    self.cfg.h2
                )));
            }
            let e1 = self.h1[i * np1];
            let e2 = self.h2[i * np2 + np2 - 1];
            if (e1 - e2).abs() > 1e-12 {
                return Err(SolveError::WallRows(format!(
                    "interface trace mismatch at column {i}: {e1} vs {e2}"
                )));
            }
        }
        Ok(())
    }

    /// Map this state onto a config with a different lambda: interface values
    /// carried over, wall offsets absorbed linearly in p, far-field columns
    /// re-clamped. The continuation predictor.
    pub fn remap_lambda(&self, new_cfg: &FrontConfig) -> BoreState {
        let fluids = self.fluids;
        let grid = Grid::new(&fluids, new_cfg);
        assert_eq!(new_cfg.nq, self.cfg.nq);
        assert_eq!(new_cfg.np1, self.cfg.np1);
        assert_eq!(new_cfg.np2, self.cfg.np2);
        let (np1, np2, nq) = (new_cfg.np1, new_cfg.np2, new_cfg.nq);
        let dl_bed = self.cfg.lambda - new_cfg.lambda;
        let dl_lid = new_cfg.h2 - self.cfg.h2;
        let mut out =
            BoreState { version: self.version, fluids, cfg: *new_cfg, h1: self.h1.clone(), h2: self.h2.clone() };
        for i in 0..nq {
            for j in 0..np1 {
                let t = j as f64 / (np1 - 1) as f64;
                out.h1[i * np1 + j] = self.h1[i * np1 + j] + dl_bed * t;
            }
            for j in 0..np2 {
                let t = 1.0 - j as f64 / (np2 - 1) as f64;
                out.h2[i * np2 + j] = self.h2[i * np2 + j] + dl_lid * t;
            }
        }
        out.set_column_profile(&grid, 0, &LaminarProfile::upstream(&fluids, new_cfg.lambda));
        out.set_column_profile(&grid, nq - 1, &LaminarProfile::downstream(&fluids, new_cfg.lambda));
        out
    }

    /// x-position where the interface crosses half the conjugate jump, by
    /// linear interpolation of the trace. Returns 0 when there is no
    /// crossing. This is the phase of the front; continuation keeps it pinned
    /// near the domain center.
    pub fn front_position(&self) -> f64 {
        let grid = Grid::new(&self.fluids, &self.cfg);
        let target = 0.5 * (conjugate_downstream(&self.fluids) - self.cfg.lambda);
        let eta = self.eta_trace();
        for i in 0..self.cfg.nq - 1 {
            let (a, b) = (eta[i] - target, eta[i + 1] - target);
            if a == 0.0 {
                return grid.q[i];
            }
            if a * b < 0.0 {
                let t = a / (a - b);
                return grid.q[i] + t * grid.dq();
            }
        }
        0.0
    }

    /// Horizontal translation by an integer number of cells (positive moves
    /// the field right). Vacated columns are filled from the corresponding
    /// far-field profile and both end columns are re-clamped exactly.
    pub fn translate_cells(&self, shift: i64) -> BoreState {
        let mut out = self.clone();
        let grid = Grid::new(&self.fluids, &self.cfg);
        let nq = self.cfg.nq as i64;
        let up = LaminarProfile::upstream(&self.fluids, self.cfg.lambda);
        let down = LaminarProfile::downstream(&self.fluids, self.cfg.lambda);
        for i in 0..nq {
            let src = i - shift;
            if src < 0 {
                out.set_column_profile(&grid, i as usize, &up);
            } else if src >= nq {
                out.set_column_profile(&grid, i as usize, &down);
            } else {
                let (i, src) = (i as usize, src as usize);
                for j in 0..self.cfg.np1 {
                    out.h1[i * self.cfg.np1 + j] = self.h1[src * self.cfg.np1 + j];
                }
                for j in 0..self.cfg.np2 {
                    out.h2[i * self.cfg.np2 + j] = self.h2[src * self.cfg.np2 + j];
                }
            }
        }
        out.set_column_profile(&grid, 0, &up);
        out.set_column_profile(&grid, (nq - 1) as usize, &down);
        out
    }

    /// Interpolate onto a refined grid (same L and lambda), bilinear in
    /// `(q, relative p)`. Used for grid-convergence studies.
    pub fn refine_to(&self, new_cfg: &FrontConfig) -> BoreState {
        assert_eq!(new_cfg.lambda, self.cfg.lambda);
        let fluids = self.fluids;
        let interp = |field: &[f64], np_old: usize, np_new: usize, nq_new: usize| -> Vec<f64> {
            let nq_old = self.cfg.nq;
            let mut out = vec![0.0; nq_new * np_new];
            for i in 0..nq_new {
                let fq = i as f64 * (nq_old - 1) as f64 / (nq_new - 1) as f64;
                let i0 = (fq as usize).min(nq_old - 2);
                let a = fq - i0 as f64;
                for j in 0..np_new {
                    let fp = j as f64 * (np_old - 1) as f64 / (np_new - 1) as f64;
                    let j0 = (fp as usize).min(np_old - 2);
                    let b = fp - j0 as f64;
                    let v00 = field[i0 * np_old + j0];
                    let v10 = field[(i0 + 1) * np_old + j0];
                    let v01 = field[i0 * np_old + j0 + 1];
                    let v11 = field[(i0 + 1) * np_old + j0 + 1];
                    out[i * np_new + j] = v00 * (1.0 - a) * (1.0 - b)
                        + v10 * a * (1.0 - b)
                        + v01 * (1.0 - a) * b
                        + v11 * a * b;
                }
            }
            out
        };
        let mut out = BoreState {
            version: self.version,
            fluids,
            cfg: *new_cfg,
            h1: interp(&self.h1, self.cfg.np1, new_cfg.np1, new_cfg.nq),
            h2: interp(&self.h2, self.cfg.np2, new_cfg.np2, new_cfg.nq),
        };
        // Re-pin the exact wall and far-field rows.
        let grid = Grid::new(&fluids, new_cfg);
        for i in 0..new_cfg.nq {
            out.h1[i * new_cfg.np1 + new_cfg.np1 - 1] = -new_cfg.lambda;
            out.h2[i * new_cfg.np2] = new_cfg.h2;
            let e = out.h1[i * new_cfg.np1];
            out.h2[i * new_cfg.np2 + new_cfg.np2 - 1] = e;
        }
        out.set_column_profile(&grid, 0, &LaminarProfile::upstream(&fluids, new_cfg.lambda));
        out.set_column_profile(
            &grid,
            new_cfg.nq - 1,
            &LaminarProfile::downstream(&fluids, new_cfg.lambda),
        );
        out
    }

    /// Versioned JSON document (grid spec + row-major field arrays).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, SolveError> {
        let state: BoreState =
            serde_json::from_str(text).map_err(|e| SolveError::StateFile(e.to_string()))?;
        if state.version != STATE_SCHEMA_VERSION {
            return Err(SolveError::StateFile(format!(
                "unsupported state schema version {}",
                state.version
            )));
        }
        state.cfg.validate()?;
        state.fluids.validate()?;
        if state.h1.len() != state.cfg.nq * state.cfg.np1
            || state.h2.len() != state.cfg.nq * state.cfg.np2
        {
            return Err(SolveError::StateFile("field array sizes do not match grid".into()));
        }
        Ok(state)
    }

    /// Max-norm of the interface slope, by one-sided differences.
    pub fn max_interface_slope(&self) -> f64 {
        let grid = Grid::new(&self.fluids, &self.cfg);
        let dq = grid.dq();
        let eta = self.eta_trace();
        eta.windows(2).map(|w| ((w[1] - w[0]) / dq).abs()).fold(0.0, f64::max)
    }
}

/// Unknown-vector layout: one block per column, `[eta, H1 interior, H2 interior]`.
#[derive(Debug, Clone, Copy)]
pub struct Layout {
    pub nq: usize,
    pub np1: usize,
    pub np2: usize,
}

impl Layout {
    pub fn of(cfg: &FrontConfig) -> Self {
        Layout { nq: cfg.nq, np1: cfg.np1, np2: cfg.np2 }
    }

    /// Unknowns per column.
    #[inline]
    pub fn block(&self) -> usize {
        self.np1 + self.np2 - 3
    }

    pub fn total(&self) -> usize {
        self.nq * self.block()
    }

    /// Slot of eta within a column block.
    #[inline]
    pub fn slot_eta(&self) -> usize {
        0
    }

    /// Slot of H1 interior node j (1..=np1-2).
    #[inline]
    pub fn slot_h1(&self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.np1 - 2);
        j
    }

    /// Slot of H2 interior node j (1..=np2-2).
    #[inline]
    pub fn slot_h2(&self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.np2 - 2);
        self.np1 - 2 + j
    }

    /// Pack the unknowns of a state into a flat vector.
    pub fn pack(&self, state: &BoreState) -> Vec<f64> {
        let m = self.block();
        let mut x = vec![0.0; self.total()];
        for i in 0..self.nq {
            x[i * m] = state.eta(i);
            for j in 1..=self.np1 - 2 {
                x[i * m + self.slot_h1(j)] = state.h1_at(i, j);
            }
            for j in 1..=self.np2 - 2 {
                x[i * m + self.slot_h2(j)] = state.h2_at(i, j);
            }
        }
        x
    }

    /// Write a flat unknown vector back into a state (walls untouched).
    pub fn unpack_into(&self, x: &[f64], state: &mut BoreState) {
        let m = self.block();
        for i in 0..self.nq {
            let eta = x[i * m];
            state.h1[i * self.np1] = eta;
            state.h2[i * self.np2 + self.np2 - 1] = eta;
            for j in 1..=self.np1 - 2 {
                state.h1[i * self.np1 + j] = x[i * m + self.slot_h1(j)];
            }
            for j in 1..=self.np2 - 2 {
                state.h2[i * self.np2 + j] = x[i * m + self.slot_h2(j)];
            }
        }
    }
}

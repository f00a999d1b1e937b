//! Physical-space reconstruction of a solved state.
//!
//! The height fields are interpolated by tensor Catmull-Rom cubics in
//! `(q, p)`; evaluating psi at a physical point inverts `y = H(x, p)` in p by
//! bisection-Newton on the monotone column cubic. Gradients come from the DJ
//! identities `psi_x = -H_q / H_p`, `psi_y = 1 / H_p`.

use std::sync::Arc;

use crate::diagnostics::{DiskDomain, FieldSample, Phase, SampledField};
use crate::djsolver::{BoreState, Grid, SolveError};
use crate::params::{FlowSlice, Layer};

/// Uniform-grid Catmull-Rom value and derivative at fractional index `f`
/// (in units of the grid spacing), with quadratic ghost extrapolation at the
/// ends. `xs` must have length >= 3.
fn catmull(xs: &[f64], f: f64) -> (f64, f64) {
    let n = xs.len();
    let k = (f.floor() as isize).clamp(0, n as isize - 2) as usize;
    let t = f - k as f64;
    let ghost_lo = 3.0 * xs[0] - 3.0 * xs[1] + xs[2];
    let ghost_hi = 3.0 * xs[n - 1] - 3.0 * xs[n - 2] + xs[n - 3];
    let x0 = if k == 0 { ghost_lo } else { xs[k - 1] };
    let x1 = xs[k];
    let x2 = xs[k + 1];
    let x3 = if k + 2 >= n { ghost_hi } else { xs[k + 2] };
    let a = 2.0 * x1;
    let b = x2 - x0;
    let c = 2.0 * x0 - 5.0 * x1 + 4.0 * x2 - x3;
    let d = -x0 + 3.0 * x1 - 3.0 * x2 + x3;
    let v = 0.5 * (a + b * t + c * t * t + d * t * t * t);
    let dv = 0.5 * (b + 2.0 * c * t + 3.0 * d * t * t);
    (v, dv)
}

/// Reconstructed field over the physical channel.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    state: BoreState,
    grid: Grid,
}

impl PhysicalField {
    pub fn new(state: BoreState) -> Self {
        let grid = Grid::new(&state.fluids, &state.cfg);
        PhysicalField { state, grid }
    }

    pub fn state(&self) -> &BoreState {
        &self.state
    }

    fn q_fraction(&self, x: f64) -> f64 {
        (x - self.grid.q[0]) / self.grid.dq()
    }

    /// Interface height at x.
    pub fn eta_at(&self, x: f64) -> f64 {
        let eta = self.state.eta_trace();
        catmull(&eta, self.q_fraction(x)).0
    }

    /// Interface slope at x.
    pub fn eta_slope_at(&self, x: f64) -> f64 {
        let eta = self.state.eta_trace();
        catmull(&eta, self.q_fraction(x)).1 / self.grid.dq()
    }

    /// Column of one layer at horizontal position x: heights `H(x, p_j)` and
    /// their q-derivatives, for every p node.
    fn column(&self, layer: Layer, x: f64) -> (Vec<f64>, Vec<f64>) {
        let f = self.q_fraction(x);
        let (np, field) = match layer {
            Layer::Lower => (self.state.cfg.np1, &self.state.h1),
            Layer::Upper => (self.state.cfg.np2, &self.state.h2),
        };
        let nq = self.state.cfg.nq;
        let dq = self.grid.dq();
        let mut hs = Vec::with_capacity(np);
        let mut hqs = Vec::with_capacity(np);
        let mut tmp = vec![0.0; nq];
        for j in 0..np {
            for i in 0..nq {
                tmp[i] = field[i * np + j];
            }
            let (v, dv) = catmull(&tmp, f);
            hs.push(v);
            hqs.push(dv / dq);
        }
        (hs, hqs)
    }

    fn check_inside(&self, x: f64, y: f64) -> Result<(), SolveError> {
        let cfg = &self.state.cfg;
        let tol = 1e-12;
        if x < -cfg.l - tol || x > cfg.l + tol || y < -cfg.lambda - tol || y > cfg.h2 + tol {
            return Err(SolveError::OutsideChannel { x, y });
        }
        Ok(())
    }

    /// Phase label of a physical point: which fluid layer it lies in.
    pub fn layer_at(&self, x: f64, y: f64) -> Layer {
        if y > self.eta_at(x) {
            Layer::Upper
        } else {
            Layer::Lower
        }
    }

    /// psi and grad psi at a physical point.
    pub fn eval(&self, x: f64, y: f64) -> Result<(f64, [f64; 2]), SolveError> {
        self.check_inside(x, y)?;
        let layer = self.layer_at(x, y);
        self.eval_in_layer(layer, x, y)
    }

    /// psi and grad psi evaluated from one layer's height field (one-sided at
    /// the interface).
    pub fn eval_in_layer(&self, layer: Layer, x: f64, y: f64) -> Result<(f64, [f64; 2]), SolveError> {
        let (hs, hqs) = self.column(layer, x);
        let (pgrid, dp) = match layer {
            Layer::Lower => (&self.grid.p1, self.grid.dp1()),
            Layer::Upper => (&self.grid.p2, self.grid.dp2()),
        };
        let np = hs.len();
        // H is strictly decreasing in p. Clamp y into the column range.
        let (top, bot) = (hs[0].max(hs[np - 1]), hs[0].min(hs[np - 1]));
        let yc = y.clamp(bot, top);
        // Bracket the p cell by bisection on the nodes.
        let (mut lo, mut hi) = (0usize, np - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if (hs[mid] - yc) * (hs[lo] - yc) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // Newton-bisection for the fractional index f in [lo, lo+1].
        let (mut a, mut b) = (lo as f64, lo as f64 + 1.0);
        let mut f = 0.5 * (a + b);
        for _ in 0..80 {
            let (v, dv) = catmull(&hs, f);
            let err = v - yc;
            if err.abs() < 1e-14 {
                break;
            }
            if (catmull(&hs, a).0 - yc) * err <= 0.0 {
                b = f;
            } else {
                a = f;
            }
            let step = err / dv;
            let fn_next = f - step;
            f = if fn_next > a && fn_next < b { fn_next } else { 0.5 * (a + b) };
            if b - a < 1e-15 {
                break;
            }
        }
        let p = pgrid[0] + f * dp;
        let (_, dh_df) = catmull(&hs, f);
        let h_p = dh_df / dp;
        let (h_q, _) = catmull(&hqs, f);
        if h_p.abs() < crate::djsolver::HP_DEGENERACY_FLOOR {
            return Err(SolveError::Degenerate {
                layer,
                i: f.round() as usize,
                j: 0,
                value: h_p,
            });
        }
        Ok((p, [-h_q / h_p, 1.0 / h_p]))
    }

    /// One-sided interface gradients of both layers at x:
    /// `(grad psi_1, grad psi_2)`.
    pub fn interface_gradients(&self, x: f64) -> Result<([f64; 2], [f64; 2]), SolveError> {
        let eta = self.eta_at(x);
        let (_, g1) = self.eval_in_layer(Layer::Lower, x, eta)?;
        let (_, g2) = self.eval_in_layer(Layer::Upper, x, eta)?;
        Ok((g1, g2))
    }

    /// Vertical slice through DJ column `i`, for flow-force quadrature. The
    /// interface sits exactly on a node; gradients use second-order one-sided
    /// stencils at layer edges and domain ends.
    pub fn column_slice(&self, i: usize) -> FlowSlice {
        let cfg = &self.state.cfg;
        let (np1, np2, nq) = (cfg.np1, cfg.np2, cfg.nq);
        let (dp1, dp2, dq) = (self.grid.dp1(), self.grid.dp2(), self.grid.dq());
        let state = &self.state;
        let h_q = |field: &dyn Fn(usize) -> f64, i: usize| -> f64 {
            if i == 0 {
                (-3.0 * field(0) + 4.0 * field(1) - field(2)) / (2.0 * dq)
            } else if i == nq - 1 {
                (3.0 * field(nq - 1) - 4.0 * field(nq - 2) + field(nq - 3)) / (2.0 * dq)
            } else {
                (field(i + 1) - field(i - 1)) / (2.0 * dq)
            }
        };
        let mut y = Vec::new();
        let mut psi_x = Vec::new();
        let mut psi_y = Vec::new();
        let mut label = Vec::new();
        // Lower layer: from bed (j = np1-1) up to the interface (j = 0).
        for j in (0..np1).rev() {
            let h_p = if j == 0 {
                (-3.0 * state.h1_at(i, 0) + 4.0 * state.h1_at(i, 1) - state.h1_at(i, 2))
                    / (2.0 * dp1)
            } else if j == np1 - 1 {
                (3.0 * state.h1_at(i, np1 - 1) - 4.0 * state.h1_at(i, np1 - 2)
                    + state.h1_at(i, np1 - 3))
                    / (2.0 * dp1)
            } else {
                (state.h1_at(i, j + 1) - state.h1_at(i, j - 1)) / (2.0 * dp1)
            };
            let hq = h_q(&|ii| state.h1_at(ii, j), i);
            y.push(state.h1_at(i, j));
            psi_x.push(-hq / h_p);
            psi_y.push(1.0 / h_p);
            label.push(Layer::Lower);
        }
        // Upper layer, starting from its own one-sided interface node: the
        // duplicate y carries the upper one-sided state so the trapezoid sees
        // the interfacial jump.
        for j in (0..np2).rev() {
            let h_p = if j == 0 {
                (-3.0 * state.h2_at(i, 0) + 4.0 * state.h2_at(i, 1) - state.h2_at(i, 2))
                    / (2.0 * dp2)
            } else if j == np2 - 1 {
                (3.0 * state.h2_at(i, np2 - 1) - 4.0 * state.h2_at(i, np2 - 2)
                    + state.h2_at(i, np2 - 3))
                    / (2.0 * dp2)
            } else {
                (state.h2_at(i, j + 1) - state.h2_at(i, j - 1)) / (2.0 * dp2)
            };
            let hq = h_q(&|ii| state.h2_at(ii, j), i);
            y.push(state.h2_at(i, j));
            psi_x.push(-hq / h_p);
            psi_y.push(1.0 / h_p);
            label.push(Layer::Upper);
        }
        FlowSlice { y, psi_x, psi_y, label }
    }

    /// Densities of the model free-boundary problem this bore solves, as
    /// `(rho_plus, rho_minus)`, and the critical height of its dynamic
    /// condition.
    pub fn model_densities(&self) -> (f64, f64, f64) {
        let fl = &self.state.fluids;
        if fl.boussinesq {
            (0.0, 8.0 * fl.rho1, 0.0)
        } else {
            let f2 = self.state.cfg.froude_sq;
            (2.0 * fl.rho2 / f2, 2.0 * fl.rho1 / f2, 0.5 * f2)
        }
    }

    /// Sample `u = -psi` on a disk about a physical center point, as the
    /// model-problem field: `Plus` phase above the interface, densities
    /// `2 rho_i / F^2` (or `(0, 8 rho1)` in the Boussinesq case), and the
    /// potential weight measured from the critical height.
    pub fn model_field(
        self: &Arc<Self>,
        center: [f64; 2],
        radius: f64,
        domain: DiskDomain,
    ) -> Result<SampledField, SolveError> {
        self.check_inside(center[0] - radius, center[1])?;
        self.check_inside(center[0] + radius, center[1])?;
        let (rho_plus, rho_minus, y_crit) = self.model_densities();
        let me = Arc::clone(self);
        let field = SampledField::from_fn(radius, domain, rho_plus, rho_minus, move |x, y| {
            let (gx, gy) = (center[0] + x, center[1] + y);
            let layer = me.layer_at(gx, gy);
            let (p, g) = me
                .eval_in_layer(layer, gx, gy)
                .unwrap_or((0.0, [0.0, 0.0]));
            FieldSample {
                u: -p,
                grad: [-g[0], -g[1]],
                phase: match layer {
                    Layer::Upper => Phase::Plus,
                    Layer::Lower => Phase::Minus,
                },
            }
        });
        Ok(field.with_weight_offset(center[1] - y_crit))
    }

    /// The positive/negative parts of `u = -psi` about an interface point,
    /// extended by zero: the disjointly supported subharmonic pair fed to the
    /// ACF functional.
    pub fn acf_pair(
        self: &Arc<Self>,
        center: [f64; 2],
        radius: f64,
    ) -> Result<(SampledField, SampledField), SolveError> {
        let base = self.model_field(center, radius, DiskDomain::Full)?;
        let me1 = Arc::clone(self);
        let me2 = Arc::clone(self);
        let part = |me: Arc<PhysicalField>, sign: f64| {
            move |x: f64, y: f64| {
                let (gx, gy) = (center[0] + x, center[1] + y);
                let layer = me.layer_at(gx, gy);
                let (p, g) = me.eval_in_layer(layer, gx, gy).unwrap_or((0.0, [0.0, 0.0]));
                let u = sign * -p;
                if u > 0.0 {
                    FieldSample {
                        u,
                        grad: [sign * -g[0], sign * -g[1]],
                        phase: Phase::Plus,
                    }
                } else {
                    FieldSample { u: 0.0, grad: [0.0, 0.0], phase: Phase::Minus }
                }
            }
        };
        let (rp, rm) = (base.rho_plus, base.rho_minus);
        let u1 = SampledField::from_fn(radius, DiskDomain::Full, rp, rm, part(me1, 1.0));
        let u2 = SampledField::from_fn(radius, DiskDomain::Full, rp, rm, part(me2, -1.0));
        Ok((u1, u2))
    }
}

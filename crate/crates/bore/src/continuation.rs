//! Branch tracing in lambda with monitors and limit classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::djsolver::{newton_solve, BoreState, Grid, PhysicalField, SolveError};
use crate::params::{conjugate_downstream, FluidPair, FrontConfig};
use crate::util::fmt_f64;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("initial seed did not converge: {0}")]
    Setup(String),
    #[error("contact angle estimate inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Which family is being traced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// lambda decreasing from the trivial value; interface rises downstream.
    Elev,
    /// lambda increasing toward 1; interface falls downstream.
    Depr,
}

/// Scalar monitors of one accepted state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub lambda: f64,
    /// sup |eta_q| over the grid.
    pub max_slope: f64,
    /// inf of the signed interface slope.
    pub min_slope_signed: f64,
    /// min over x of (h2 - eta): distance of the interface to the upper wall.
    pub wall_gap_upper: f64,
    /// min over x of (eta + lambda): distance to the bed.
    pub wall_gap_lower: f64,
    /// inf over the interface of |grad psi_1| + |grad psi_2|.
    pub stagnation_indicator: f64,
    /// inf over the interface of |d psi_2 / dy| (the nonnegative magnitude;
    /// the theorem's sup of the signed quantity is its negation).
    pub upper_interface_speed: f64,
}

/// Why a trace stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    StepUnderflow,
    Degeneracy { detail: String },
    WallGapFloor,
    LambdaBound,
    MaxSteps,
    SignCheckFailure { detail: String },
}

/// Stepping controls for a branch trace.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepPolicy {
    /// Offset of the first solve from the trivial lambda.
    pub initial_offset: f64,
    /// First continuation step in lambda.
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Step growth factor after consecutive successes.
    pub growth: f64,
    pub max_steps: usize,
    /// Terminate when the approached wall gap falls below this.
    pub wall_gap_floor: f64,
    /// Store a full state every k-th accepted step.
    pub checkpoint_every: usize,
    /// Width of the tanh seed for the first solve.
    pub seed_width: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            initial_offset: 0.02,
            initial_step: 0.01,
            max_step: 0.02,
            min_step: 1e-6,
            growth: 1.4,
            max_steps: 200,
            wall_gap_floor: 0.02,
            checkpoint_every: 5,
            seed_width: 2.5,
        }
    }
}

/// A traced branch: ordered monitor records plus checkpointed states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Branch {
    pub direction: Direction,
    pub records: Vec<MonitorRecord>,
    /// (record index, state) pairs stored every k-th accepted step and at the
    /// final accepted step.
    pub checkpoints: Vec<(usize, BoreState)>,
    pub termination: Termination,
}

/// Verdict of [`classify_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitClass {
    OverturningTrend,
    GravityCurrentTrend,
    DoubleStagnationTrend,
    Inconclusive,
}

/// Thresholds for [`classify_limit`]; desk-scale proxies for the limiting
/// alternatives, overridable from configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    pub overturn_slope: f64,
    pub gc_wall_gap: f64,
    pub stagnation_floor: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds { overturn_slope: 2.0, gc_wall_gap: 0.05, stagnation_floor: 0.05 }
    }
}

/// Fitted log-scale rates over the final third of a branch.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrendRates {
    pub max_slope_rate: f64,
    pub wall_gap_rate: f64,
    pub stagnation_rate: f64,
}

/// Monitors of a converged state.
pub fn monitors(state: &BoreState) -> MonitorRecord {
    let cfg = &state.cfg;
    let grid = Grid::new(&state.fluids, cfg);
    let (dq, dp1, dp2) = (grid.dq(), grid.dp1(), grid.dp2());
    let eta = state.eta_trace();
    let mut max_slope = 0.0f64;
    let mut min_slope = f64::INFINITY;
    for w in eta.windows(2) {
        let s = (w[1] - w[0]) / dq;
        max_slope = max_slope.max(s.abs());
        min_slope = min_slope.min(s);
    }
    let mut gap_up = f64::INFINITY;
    let mut gap_lo = f64::INFINITY;
    let mut stag = f64::INFINITY;
    let mut upper_speed = f64::INFINITY;
    for i in 0..cfg.nq {
        gap_up = gap_up.min(cfg.h2 - eta[i]);
        gap_lo = gap_lo.min(eta[i] + cfg.lambda);
        let eta_q = if i == 0 {
            (eta[1] - eta[0]) / dq
        } else if i == cfg.nq - 1 {
            (eta[i] - eta[i - 1]) / dq
        } else {
            (eta[i + 1] - eta[i - 1]) / (2.0 * dq)
        };
        let b1 = (-3.0 * eta[i] + 4.0 * state.h1_at(i, 1) - state.h1_at(i, 2)) / (2.0 * dp1);
        let b2 = (3.0 * eta[i] - 4.0 * state.h2_at(i, cfg.np2 - 2) + state.h2_at(i, cfg.np2 - 3))
            / (2.0 * dp2);
        let gmag = |b: f64| ((1.0 + eta_q * eta_q).sqrt()) / b.abs();
        stag = stag.min(gmag(b1) + gmag(b2));
        upper_speed = upper_speed.min(1.0 / b2.abs());
    }
    MonitorRecord {
        lambda: cfg.lambda,
        max_slope,
        min_slope_signed: min_slope,
        wall_gap_upper: gap_up,
        wall_gap_lower: gap_lo,
        stagnation_indicator: stag,
        upper_interface_speed: upper_speed,
    }
}

/// Strict-monotonicity sign checks on a converged state. `tol` absorbs
/// round-off near the far-field clamps.
pub fn sign_checks(state: &BoreState, direction: Direction) -> Result<(), String> {
    let cfg = &state.cfg;
    let tol = 1e-10;
    let grid = Grid::new(&state.fluids, cfg);
    let dq = grid.dq();
    // eta_q >= 0 on elevation branches, <= 0 on depression branches.
    let want = match direction {
        Direction::Elev => 1.0,
        Direction::Depr => -1.0,
    };
    let eta = state.eta_trace();
    for (i, w) in eta.windows(2).enumerate() {
        let s = (w[1] - w[0]) / dq;
        if want * s < -tol {
            return Err(format!("eta slope sign violated at column {i}: {s:e}"));
        }
    }
    // psi_y < 0 everywhere (H_p < 0) and psi_x carries the branch sign
    // (H_q has the eta_q sign in both layers).
    let scan = |np: usize, field: &[f64], name: &str| -> Result<(), String> {
        for i in 0..cfg.nq {
            for j in 0..np {
                if i + 1 < cfg.nq {
                    let hq = field[(i + 1) * np + j] - field[i * np + j];
                    if want * hq / dq < -tol {
                        return Err(format!(
                            "{name} H_q sign violated at (i={i}, j={j}): {:e}",
                            hq / dq
                        ));
                    }
                }
                if j + 1 < np {
                    let hp = field[i * np + j + 1] - field[i * np + j];
                    if hp >= 0.0 {
                        return Err(format!("{name} H_p >= 0 at (i={i}, j={j})"));
                    }
                }
            }
        }
        Ok(())
    };
    scan(cfg.np1, &state.h1, "lower")?;
    scan(cfg.np2, &state.h2, "upper")?;
    Ok(())
}

/// Trace one branch by natural continuation in lambda with adaptive step
/// halving on Newton failure.
pub fn trace_branch(
    direction: Direction,
    fluids: &FluidPair,
    base_cfg: &FrontConfig,
    policy: &StepPolicy,
) -> Result<Branch, TraceError> {
    let hstar = conjugate_downstream(fluids);
    let sign = match direction {
        Direction::Elev => -1.0,
        Direction::Depr => 1.0,
    };
    let lambda0 = hstar + sign * policy.initial_offset;
    let mut cfg = FrontConfig { lambda: lambda0, h2: 1.0 - lambda0, ..*base_cfg };
    cfg.validate().map_err(|e| TraceError::Setup(e.to_string()))?;
    let seed = BoreState::seeded(fluids, &cfg, policy.seed_width);
    let (mut state, _) = match newton_solve(&seed, &cfg, fluids) {
        Ok(ok) => ok,
        Err(e) => return Err(TraceError::Setup(e.to_string())),
    };
    state = recenter(state, fluids);
    sign_checks(&state, direction).map_err(TraceError::Setup)?;

    let mut records = vec![monitors(&state)];
    let mut checkpoints = vec![(0usize, state.clone())];
    let mut step = policy.initial_step;
    let termination;
    loop {
        if records.len() >= policy.max_steps {
            termination = Termination::MaxSteps;
            break;
        }
        let gap = match direction {
            Direction::Depr => records.last().unwrap().wall_gap_upper,
            Direction::Elev => {
                if fluids.boussinesq {
                    records.last().unwrap().wall_gap_lower
                } else {
                    f64::INFINITY
                }
            }
        };
        if gap < policy.wall_gap_floor {
            termination = Termination::WallGapFloor;
            break;
        }
        if step < policy.min_step {
            termination = Termination::StepUnderflow;
            break;
        }
        let lambda_next = cfg.lambda + sign * step;
        if lambda_next <= 0.005 || lambda_next >= 0.995 {
            termination = Termination::LambdaBound;
            break;
        }
        let cfg_next = FrontConfig { lambda: lambda_next, h2: 1.0 - lambda_next, ..cfg };
        let predictor = state.remap_lambda(&cfg_next);
        match newton_solve(&predictor, &cfg_next, fluids) {
            Ok((next, _)) => {
                let next = recenter(next, fluids);
                if let Err(detail) = sign_checks(&next, direction) {
                    if step * 0.5 >= policy.min_step {
                        step *= 0.5;
                        continue;
                    }
                    termination = Termination::SignCheckFailure { detail };
                    break;
                }
                state = next;
                cfg = cfg_next;
                records.push(monitors(&state));
                let idx = records.len() - 1;
                if idx % policy.checkpoint_every == 0 {
                    checkpoints.push((idx, state.clone()));
                }
                step = (step * policy.growth).min(policy.max_step);
            }
            Err(SolveError::NonConvergence { .. }) => {
                step *= 0.5;
            }
            Err(SolveError::Degenerate { layer, i, j, value }) => {
                if step * 0.5 >= policy.min_step {
                    step *= 0.5;
                    continue;
                }
                termination = Termination::Degeneracy {
                    detail: format!("H_p = {value:e} in {layer:?} at (i={i}, j={j})"),
                };
                break;
            }
            Err(e) => return Err(TraceError::Solve(e)),
        }
    }
    // Always checkpoint the final accepted state.
    let last_idx = records.len() - 1;
    if checkpoints.last().map(|(i, _)| *i) != Some(last_idx) {
        checkpoints.push((last_idx, state.clone()));
    }
    Ok(Branch { direction, records, checkpoints, termination })
}

/// Phase pinning: keep the half-jump interface crossing within two cells of
/// x = 0, translating by whole cells and re-polishing with Newton. Without
/// this the front drifts into a far-field clamp along the branch and the
/// continuation stalls.
fn recenter(state: BoreState, fluids: &FluidPair) -> BoreState {
    let cfg = state.cfg;
    let dq = 2.0 * cfg.l / (cfg.nq - 1) as f64;
    let drift = state.front_position();
    let cells = (-drift / dq).round();
    if cells.abs() < 2.0 {
        return state;
    }
    let shifted = state.translate_cells(cells as i64);
    match newton_solve(&shifted, &cfg, fluids) {
        Ok((polished, _)) => polished,
        Err(_) => state,
    }
}

fn log_rate(values: &[f64]) -> f64 {
    // Least-squares slope of ln(v) against the step index.
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(k, &v)| (k as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Classify the approach to the limiting alternatives from the monitor
/// trends over the final third of the branch.
pub fn classify_limit(branch: &Branch, thresholds: &ClassifyThresholds) -> (LimitClass, TrendRates) {
    let n = branch.records.len();
    let tail = &branch.records[n - (n / 3).max(2).min(n)..];
    let slope: Vec<f64> = tail.iter().map(|r| r.max_slope).collect();
    let gap: Vec<f64> = tail
        .iter()
        .map(|r| match branch.direction {
            Direction::Depr => r.wall_gap_upper,
            Direction::Elev => r.wall_gap_lower,
        })
        .collect();
    let stag: Vec<f64> = tail.iter().map(|r| r.stagnation_indicator).collect();
    let rates = TrendRates {
        max_slope_rate: log_rate(&slope),
        wall_gap_rate: log_rate(&gap),
        stagnation_rate: log_rate(&stag),
    };
    if n < 10 {
        return (LimitClass::Inconclusive, rates);
    }
    let last = branch.records.last().unwrap();
    let last_gap = match branch.direction {
        Direction::Depr => last.wall_gap_upper,
        Direction::Elev => last.wall_gap_lower,
    };
    let class = if last.max_slope > thresholds.overturn_slope && rates.max_slope_rate > 0.0 {
        LimitClass::OverturningTrend
    } else if last_gap < thresholds.gc_wall_gap && rates.wall_gap_rate < 0.0 {
        LimitClass::GravityCurrentTrend
    } else if last.stagnation_indicator < thresholds.stagnation_floor
        && rates.stagnation_rate < 0.0
        && rates.max_slope_rate.abs() < 0.05
        && rates.wall_gap_rate.abs() < 0.05
    {
        LimitClass::DoubleStagnationTrend
    } else {
        LimitClass::Inconclusive
    };
    (class, rates)
}

/// Wall approached by a branch in the gravity-current scenario.
fn approached_wall(branch: &Branch) -> Direction {
    branch.direction
}

/// Interface slope where the trace crosses a band of heights near the
/// approached wall, one value per stored late-branch state, extrapolated to
/// vanishing wall gap. Returns the contact angle in degrees.
///
/// For each checkpointed state with small wall gap, the slope is fitted by
/// least squares over the x-interval where the gap lies in
/// `[1.5, 4] * wall_gap`; the slope sequence is then extrapolated linearly in
/// wall_gap to 0 (Richardson step) and the angle is `atan` of the magnitude.
pub fn contact_angle_estimate(branch: &Branch, gap_start: f64) -> Result<f64, TraceError> {
    let upper = matches!(approached_wall(branch), Direction::Depr);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (_, state) in &branch.checkpoints {
        let rec = monitors(state);
        let gap0 = if upper { rec.wall_gap_upper } else { rec.wall_gap_lower };
        if gap0 > gap_start {
            continue;
        }
        let field = PhysicalField::new(state.clone());
        let cfg = &state.cfg;
        // The gap to the approached wall is monotone in x (monotone bores
        // approach the wall upstream), so the band crossings are unique and
        // found by bisection on the interpolated trace.
        let gap_at = |x: f64| -> f64 {
            if upper {
                cfg.h2 - field.eta_at(x)
            } else {
                field.eta_at(x) + cfg.lambda
            }
        };
        let cross = |target: f64| -> Option<f64> {
            let (mut a, mut b) = (-cfg.l, cfg.l);
            let (ga, gb) = (gap_at(a), gap_at(b));
            if (ga - target) * (gb - target) > 0.0 {
                return None;
            }
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if (gap_at(m) - target) * (gap_at(a) - target) <= 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            Some(0.5 * (a + b))
        };
        let (x_lo, x_hi) = match (cross(1.5 * gap0), cross(4.0 * gap0)) {
            (Some(a), Some(b)) => (a.min(b), a.max(b)),
            _ => continue,
        };
        if x_hi - x_lo < 1e-9 {
            continue;
        }
        // Least-squares slope of eta sampled across the band interval.
        let nsamp = 17usize;
        let xs: Vec<f64> = (0..nsamp)
            .map(|k| x_lo + (x_hi - x_lo) * k as f64 / (nsamp - 1) as f64)
            .collect();
        let n = xs.len() as f64;
        let sy: f64 = xs.iter().map(|&x| field.eta_at(x)).sum();
        let sx: f64 = xs.iter().sum();
        let sxx: f64 = xs.iter().map(|&x| x * x).sum();
        let sxy: f64 = xs.iter().map(|&x| x * field.eta_at(x)).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        pts.push((gap0, slope));
    }
    if pts.len() < 3 {
        return Err(TraceError::Inconclusive(format!(
            "only {} states cross the near-wall band",
            pts.len()
        )));
    }
    // Linear extrapolation of slope against gap to gap -> 0.
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = (sy - b * sx) / n;
    Ok(a.abs().atan().to_degrees())
}

impl Branch {
    /// CSV with one row per monitor record.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "step,lambda,max_slope,min_slope_signed,wall_gap_upper,wall_gap_lower,stagnation_indicator,upper_interface_speed\n",
        );
        for (k, r) in self.records.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                k,
                fmt_f64(r.lambda),
                fmt_f64(r.max_slope),
                fmt_f64(r.min_slope_signed),
                fmt_f64(r.wall_gap_upper),
                fmt_f64(r.wall_gap_lower),
                fmt_f64(r.stagnation_indicator),
                fmt_f64(r.upper_interface_speed),
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("branch serialization is infallible")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_record(lambda: f64, max_slope: f64, gap: f64, stag: f64) -> MonitorRecord {
        MonitorRecord {
            lambda,
            max_slope,
            min_slope_signed: -max_slope,
            wall_gap_upper: gap,
            wall_gap_lower: gap,
            stagnation_indicator: stag,
            upper_interface_speed: stag,
        }
    }

    fn synthetic_branch(records: Vec<MonitorRecord>) -> Branch {
        Branch {
            direction: Direction::Depr,
            records,
            checkpoints: Vec::new(),
            termination: Termination::MaxSteps,
        }
    }

    #[test]
    fn classify_synthetic_overturning() {
        // max_slope doubles each step, everything else flat.
        let recs: Vec<_> = (0..16)
            .map(|k| synthetic_record(0.7 + 0.01 * k as f64, 0.1 * 2f64.powi(k), 0.4, 0.8))
            .collect();
        let b = synthetic_branch(recs);
        let (class, rates) = classify_limit(&b, &ClassifyThresholds::default());
        assert_eq!(class, LimitClass::OverturningTrend);
        assert!(rates.max_slope_rate > 0.5);
    }

    #[test]
    fn classify_synthetic_gravity_current() {
        // wall gap halves each step, upper speed to 0, slope flat.
        let recs: Vec<_> = (0..16)
            .map(|k| synthetic_record(0.7 + 0.01 * k as f64, 0.5, 0.8 * 0.5f64.powi(k), 0.8))
            .collect();
        let b = synthetic_branch(recs);
        let (class, rates) = classify_limit(&b, &ClassifyThresholds::default());
        assert_eq!(class, LimitClass::GravityCurrentTrend);
        assert!(rates.wall_gap_rate < -0.5);
    }

    #[test]
    fn classify_synthetic_double_stagnation() {
        let recs: Vec<_> = (0..16)
            .map(|k| synthetic_record(0.6, 0.5, 0.4, 0.8 * 0.5f64.powi(k)))
            .collect();
        let b = synthetic_branch(recs);
        let (class, _) = classify_limit(&b, &ClassifyThresholds::default());
        assert_eq!(class, LimitClass::DoubleStagnationTrend);
    }

    #[test]
    fn classify_short_branch_inconclusive() {
        let recs: Vec<_> =
            (0..5).map(|k| synthetic_record(0.7, 0.1 * 2f64.powi(k), 0.4, 0.8)).collect();
        let b = synthetic_branch(recs);
        let (class, _) = classify_limit(&b, &ClassifyThresholds::default());
        assert_eq!(class, LimitClass::Inconclusive);
    }

    #[test]
    fn contact_angle_on_synthetic_sixty_degree_interfaces() {
        // Interfaces with slope exactly -sqrt(3) through the near-wall band.
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let mut checkpoints = Vec::new();
        for (k, gap) in [0.08f64, 0.05, 0.03, 0.02].iter().enumerate() {
            let lambda = 0.9;
            let cfg = FrontConfig::new(&fluids, lambda, 1.0, 1001, 5, 5).unwrap();
            let mut state = BoreState::laminar(&fluids, &cfg);
            let grid = Grid::new(&fluids, &cfg);
            let s3 = 3f64.sqrt();
            for i in 0..cfg.nq {
                let x = grid.q[i];
                // Piecewise-linear: flat near the wall upstream, then slope
                // -sqrt(3) down to a flat downstream level.
                let e_top = cfg.h2 - gap;
                let eta = (e_top - s3 * (x + 0.8)).clamp(-0.6, e_top);
                state.set_column_linear(&grid, i, eta);
            }
            checkpoints.push((k, state));
        }
        let branch = Branch {
            direction: Direction::Depr,
            records: Vec::new(),
            checkpoints,
            termination: Termination::WallGapFloor,
        };
        let angle = contact_angle_estimate(&branch, 0.1).unwrap();
        assert!((angle - 60.0).abs() < 0.5, "angle {angle}");
    }

    #[test]
    fn contact_angle_needs_enough_states() {
        let branch = Branch {
            direction: Direction::Depr,
            records: Vec::new(),
            checkpoints: Vec::new(),
            termination: Termination::MaxSteps,
        };
        assert!(matches!(
            contact_angle_estimate(&branch, 0.1),
            Err(TraceError::Inconclusive(_))
        ));
    }
}

//! Nondimensional parameters, conjugate flows, and the flow force.
//!
//! Units are fixed once and for all: channel height 1, upstream speed 1.
//! The wave speed `c` and gravity `g` are absorbed by this scaling and never
//! appear at runtime; the only remaining parameters are the two densities,
//! the upstream lower-layer depth `lambda`, and the front Froude number.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from parameter validation and conjugate-flow root finding.
#[derive(Debug, Error)]
pub enum ParamError {
    #[error("invalid fluid pair: {0}")]
    InvalidFluids(String),
    #[error("invalid front config: {0}")]
    InvalidConfig(String),
    #[error("flow-force slice does not span the channel: {0}")]
    SliceDomain(String),
    #[error("conjugate-flow root finder failed: {0}")]
    RootFinder(String),
}

/// The two constant densities and the choice of dynamic condition.
///
/// `boussinesq = true` selects the equal-density limit in which the dynamic
/// interface condition carries the fixed weight `8 rho1 y` instead of the
/// Froude-number term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidPair {
    /// Density of the lower (heavier) fluid.
    pub rho1: f64,
    /// Density of the upper fluid.
    pub rho2: f64,
    /// Use the equal-density dynamic condition.
    pub boussinesq: bool,
}

impl FluidPair {
    /// Stably stratified pair with `rho2 < rho1`.
    pub fn new(rho1: f64, rho2: f64) -> Result<Self, ParamError> {
        let pair = FluidPair { rho1, rho2, boussinesq: false };
        pair.validate()?;
        Ok(pair)
    }

    /// Equal-density pair using the Boussinesq dynamic condition.
    pub fn boussinesq(rho: f64) -> Result<Self, ParamError> {
        let pair = FluidPair { rho1: rho, rho2: rho, boussinesq: true };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.rho1 > 0.0) || !(self.rho2 > 0.0) {
            return Err(ParamError::InvalidFluids(format!(
                "densities must be positive, got rho1={} rho2={}",
                self.rho1, self.rho2
            )));
        }
        if self.boussinesq {
            if self.rho1 != self.rho2 {
                return Err(ParamError::InvalidFluids(format!(
                    "boussinesq pair requires rho2 == rho1, got rho1={} rho2={}",
                    self.rho1, self.rho2
                )));
            }
        } else if !(self.rho2 < self.rho1) {
            return Err(ParamError::InvalidFluids(format!(
                "stable stratification requires rho2 < rho1, got rho1={} rho2={}",
                self.rho1, self.rho2
            )));
        }
        Ok(())
    }
}

/// Squared front Froude number `(sqrt(rho1) - sqrt(rho2)) / (sqrt(rho1) + sqrt(rho2))`.
///
/// This is the unique value admitting front-type solutions. Returns 0 in the
/// Boussinesq limit.
pub fn front_froude(fluids: &FluidPair) -> f64 {
    if fluids.boussinesq {
        return 0.0;
    }
    let (s1, s2) = (fluids.rho1.sqrt(), fluids.rho2.sqrt());
    (s1 - s2) / (s1 + s2)
}

/// Downstream conjugate thickness of the lower layer, `sqrt(rho1) / (sqrt(rho1) + sqrt(rho2))`.
///
/// This is also the upstream depth of the trivial (laminar) solution from
/// which both bore branches bifurcate.
pub fn conjugate_downstream(fluids: &FluidPair) -> f64 {
    let (s1, s2) = (fluids.rho1.sqrt(), fluids.rho2.sqrt());
    s1 / (s1 + s2)
}

/// Geometry, grid resolution, and solver controls for one front problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontConfig {
    /// Upstream lower-layer depth, in (0, 1).
    pub lambda: f64,
    /// Squared front Froude number; derived, stored for bookkeeping.
    pub froude_sq: f64,
    /// Upper-layer upstream depth `1 - lambda`; derived.
    pub h2: f64,
    /// Half-length of the truncated horizontal domain.
    pub l: f64,
    /// Horizontal grid count.
    pub nq: usize,
    /// Streamfunction grid count, lower layer.
    pub np1: usize,
    /// Streamfunction grid count, upper layer.
    pub np2: usize,
    /// Max-norm residual tolerance for Newton.
    pub newton_tol: f64,
    /// Iteration cap for Newton.
    pub max_newton_iters: usize,
}

impl FrontConfig {
    /// Build a validated config; `froude_sq` and `h2` are derived.
    pub fn new(
        fluids: &FluidPair,
        lambda: f64,
        l: f64,
        nq: usize,
        np1: usize,
        np2: usize,
    ) -> Result<Self, ParamError> {
        let cfg = FrontConfig {
            lambda,
            froude_sq: front_froude(fluids),
            h2: 1.0 - lambda,
            l,
            nq,
            np1,
            np2,
            newton_tol: 1e-11,
            max_newton_iters: 30,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(ParamError::InvalidConfig(format!(
                "lambda must lie in (0,1), got {}",
                self.lambda
            )));
        }
        if (self.h2 - (1.0 - self.lambda)).abs() > 1e-14 {
            return Err(ParamError::InvalidConfig("h2 != 1 - lambda".into()));
        }
        if !(self.l > 0.0) {
            return Err(ParamError::InvalidConfig(format!("L must be positive, got {}", self.l)));
        }
        if self.nq < 3 || self.np1 < 3 || self.np2 < 3 {
            return Err(ParamError::InvalidConfig(format!(
                "grid counts must be >= 3, got nq={} np1={} np2={}",
                self.nq, self.np1, self.np2
            )));
        }
        if !(self.newton_tol > 0.0) {
            return Err(ParamError::InvalidConfig("newton_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Piecewise-linear vertical streamfunction profile on the channel
/// `y in [-lambda, 1 - lambda]` with the interface at `y_interface`.
///
/// Wall values are pinned to the kinematic constants `psi(-lambda) =
/// lambda sqrt(rho1)` and `psi(1 - lambda) = -(1 - lambda) sqrt(rho2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaminarProfile {
    pub lambda: f64,
    /// Interface height; the lower-layer thickness is `y_interface + lambda`.
    pub y_interface: f64,
    /// Slope of psi in the lower layer (negative).
    pub slope1: f64,
    /// Slope of psi in the upper layer (negative).
    pub slope2: f64,
}

impl LaminarProfile {
    /// Laminar profile whose lower layer has thickness `h` (interface at `h - lambda`).
    pub fn with_thickness(fluids: &FluidPair, lambda: f64, h: f64) -> Self {
        let y_interface = h - lambda;
        let slope1 = -(lambda / h) * fluids.rho1.sqrt();
        let slope2 = -((1.0 - lambda) / (1.0 - h)) * fluids.rho2.sqrt();
        LaminarProfile { lambda, y_interface, slope1, slope2 }
    }

    /// The upstream profile: interface at 0, slopes `-sqrt(rho_i)`.
    pub fn upstream(fluids: &FluidPair, lambda: f64) -> Self {
        LaminarProfile::with_thickness(fluids, lambda, lambda)
    }

    /// The downstream conjugate profile.
    pub fn downstream(fluids: &FluidPair, lambda: f64) -> Self {
        LaminarProfile::with_thickness(fluids, lambda, conjugate_downstream(fluids))
    }

    /// psi at height y.
    pub fn psi(&self, y: f64) -> f64 {
        if y <= self.y_interface {
            self.slope1 * (y - self.y_interface)
        } else {
            self.slope2 * (y - self.y_interface)
        }
    }

    /// d psi / dy at height y (one-sided at the interface, lower side).
    pub fn psi_y(&self, y: f64) -> f64 {
        if y <= self.y_interface {
            self.slope1
        } else {
            self.slope2
        }
    }
}

/// Conjugate upstream/downstream laminar states of a bore.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateState {
    /// Upstream lower-layer thickness (= lambda).
    pub h_up: f64,
    /// Downstream lower-layer thickness.
    pub h_down: f64,
    pub psi_profile_up: LaminarProfile,
    pub psi_profile_down: LaminarProfile,
}

impl ConjugateState {
    pub fn new(fluids: &FluidPair, lambda: f64) -> Self {
        ConjugateState {
            h_up: lambda,
            h_down: conjugate_downstream(fluids),
            psi_profile_up: LaminarProfile::upstream(fluids, lambda),
            psi_profile_down: LaminarProfile::downstream(fluids, lambda),
        }
    }
}

/// Phase label on a vertical slice: lower fluid 1 or upper fluid 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Layer {
    Lower,
    Upper,
}

/// A vertical slice of a solution at fixed x: heights, gradient components,
/// and phase labels. Nodes must ascend from the bed `-lambda` to the lid
/// `1 - lambda`, with the interface lying exactly on a node so composite
/// quadrature sees the integrand kink.
#[derive(Debug, Clone)]
pub struct FlowSlice {
    pub y: Vec<f64>,
    pub psi_x: Vec<f64>,
    pub psi_y: Vec<f64>,
    pub label: Vec<Layer>,
}

impl FlowSlice {
    /// Sample a laminar profile on `n` points per layer. The interface node
    /// is duplicated with both one-sided states so composite quadrature sees
    /// the kinetic and hydrostatic jumps exactly.
    pub fn from_profile(profile: &LaminarProfile, lambda: f64, n: usize) -> Self {
        let top = 1.0 - lambda;
        let mut y = Vec::new();
        let mut psi_x = Vec::new();
        let mut psi_y = Vec::new();
        let mut label = Vec::new();
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            y.push(-lambda + t * (profile.y_interface + lambda));
            psi_x.push(0.0);
            psi_y.push(profile.slope1);
            label.push(Layer::Lower);
        }
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            y.push(profile.y_interface + t * (top - profile.y_interface));
            psi_x.push(0.0);
            psi_y.push(profile.slope2);
            label.push(Layer::Upper);
        }
        FlowSlice { y, psi_x, psi_y, label }
    }
}

/// Flow force of a vertical slice by composite trapezoid quadrature.
///
/// Non-Boussinesq integrand: `(psi_y^2 - psi_x^2 - (rho1 chi1 + rho2 chi2)(2 y / F^2 - 1)) / 2`.
/// In the Boussinesq case the hydrostatic term degenerates; the
/// interface-independent average-density part is dropped and the remainder
/// keeps the weights `+-2 rho1 y` per layer, so that only the finite,
/// interface-dependent part of the potential enters and S stays
/// x-independent for solutions of the Boussinesq system.
pub fn flow_force(slice: &FlowSlice, fluids: &FluidPair, froude_sq: f64) -> Result<f64, ParamError> {
    let n = slice.y.len();
    if n < 2 || n != slice.psi_x.len() || n != slice.psi_y.len() || n != slice.label.len() {
        return Err(ParamError::SliceDomain("inconsistent slice arrays".into()));
    }
    let span = slice.y[n - 1] - slice.y[0];
    if !(span > 0.99) {
        return Err(ParamError::SliceDomain(format!(
            "slice spans {:.6}, expected the full channel height 1",
            span
        )));
    }
    let integrand = |k: usize| -> f64 {
        let kin = slice.psi_y[k] * slice.psi_y[k] - slice.psi_x[k] * slice.psi_x[k];
        let rho = match slice.label[k] {
            Layer::Lower => fluids.rho1,
            Layer::Upper => fluids.rho2,
        };
        let pot = if fluids.boussinesq {
            let sign = match slice.label[k] {
                Layer::Lower => 1.0,
                Layer::Upper => -1.0,
            };
            rho - 4.0 * fluids.rho1 * slice.y[k] * sign
        } else {
            -rho * (2.0 * slice.y[k] / froude_sq - 1.0)
        };
        0.5 * (kin + pot)
    };
    let mut s = 0.0;
    let mut prev = integrand(0);
    for k in 1..n {
        let cur = integrand(k);
        s += 0.5 * (prev + cur) * (slice.y[k] - slice.y[k - 1]);
        prev = cur;
    }
    Ok(s)
}

/// Closed-form flow force of the laminar state with lower-layer thickness `h`.
///
/// Derived by integrating the piecewise-constant profile exactly:
/// kinetic part `(lambda^2 rho1 / h + h2^2 rho2 / (1 - h)) / 2` plus the
/// layer potentials. `s0_flow_force` is this at `h = lambda`.
pub fn laminar_flow_force(fluids: &FluidPair, lambda: f64, h: f64) -> f64 {
    let h2 = 1.0 - lambda;
    let yd = h - lambda;
    let kin1 = lambda * lambda * fluids.rho1 / h;
    let kin2 = h2 * h2 * fluids.rho2 / (1.0 - h);
    if fluids.boussinesq {
        // potential weights +-2 rho1 y per layer
        let pot1 = 2.0 * fluids.rho1 * (yd * yd - lambda * lambda);
        let pot2 = 2.0 * fluids.rho1 * (h2 * h2 - yd * yd);
        0.5 * (kin1 + kin2 + fluids.rho1 * h + fluids.rho2 * (1.0 - h) - pot1 + pot2)
    } else {
        let f2 = front_froude(fluids);
        // G(a,b) = int_a^b (2y/F^2 - 1) dy
        let g = |a: f64, b: f64| (b * b - a * a) / f2 - (b - a);
        let pot1 = fluids.rho1 * g(-lambda, yd);
        let pot2 = fluids.rho2 * g(yd, h2);
        0.5 * (kin1 + kin2 - pot1 - pot2)
    }
}

/// Flow force `S0(lambda)` of the trivial (upstream) state.
pub fn s0_flow_force(fluids: &FluidPair, lambda: f64) -> f64 {
    laminar_flow_force(fluids, lambda, lambda)
}

/// Residual of the dynamic jump condition for a laminar state of thickness `h`.
///
/// Non-Boussinesq: `(Psi_2y)^2 - (Psi_1y)^2 + 2 (rho2 - rho1) (h - lambda) / F^2 - (rho2 - rho1)`;
/// Boussinesq: the same kinetic jump minus `8 rho1 (h - lambda)`.
pub fn conjugate_jump_residual(fluids: &FluidPair, lambda: f64, h: f64) -> f64 {
    let h2 = 1.0 - lambda;
    let slope1_sq = (lambda / h).powi(2) * fluids.rho1;
    let slope2_sq = (h2 / (1.0 - h)).powi(2) * fluids.rho2;
    let yd = h - lambda;
    if fluids.boussinesq {
        slope2_sq - slope1_sq - 8.0 * fluids.rho1 * yd
    } else {
        let f2 = front_froude(fluids);
        slope2_sq - slope1_sq + 2.0 * (fluids.rho2 - fluids.rho1) * yd / f2 - (fluids.rho2 - fluids.rho1)
    }
}

/// Solve the two conjugate-flow equations (flow-force equality `S(h) = S0(lambda)`
/// and the dynamic jump condition) for the downstream thickness by a scan over
/// `h in (0,1)` with bisection refinement, returning the common roots.
///
/// For valid fluids the root set contains `lambda` itself and the conjugate
/// thickness of [`conjugate_downstream`]; anything else signals a defect in
/// the algebraic setup.
pub fn conjugate_roots(fluids: &FluidPair, lambda: f64, scan: usize) -> Result<Vec<f64>, ParamError> {
    let s0 = s0_flow_force(fluids, lambda);
    let force_res = |h: f64| laminar_flow_force(fluids, lambda, h) - s0;
    let jump_res = |h: f64| conjugate_jump_residual(fluids, lambda, h);

    // The flow-force equality has tangential (double) roots at the conjugate
    // depths, so sign changes live only in the jump condition; its simple
    // roots are bisected and then filtered by the flow-force equality.
    let jump_roots = scan_roots(&jump_res, scan);
    if jump_roots.is_empty() {
        return Err(ParamError::RootFinder(
            "no sign changes found for the conjugate-flow jump condition".into(),
        ));
    }
    let scale = 1.0 + s0.abs();
    let out: Vec<f64> =
        jump_roots.into_iter().filter(|&h| force_res(h).abs() < 1e-9 * scale).collect();
    if out.is_empty() {
        return Err(ParamError::RootFinder(
            "jump-condition roots do not satisfy the flow-force equality".into(),
        ));
    }
    Ok(out)
}

/// Sign-change scan on (0,1) followed by bisection to ~1e-15.
fn scan_roots(f: &dyn Fn(f64) -> f64, n: usize) -> Vec<f64> {
    let eps = 1e-9;
    let mut roots: Vec<f64> = Vec::new();
    let xs: Vec<f64> = (0..=n).map(|k| eps + (1.0 - 2.0 * eps) * k as f64 / n as f64).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    for k in 0..n {
        let (mut a, mut b) = (xs[k], xs[k + 1]);
        let (mut fa, fb) = (fs[k], fs[k + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = f(m);
                if fm == 0.0 || (b - a) < 1e-16 {
                    a = m;
                    b = m;
                    break;
                }
                if fa * fm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Closed-form algebra is exact up to a few ulps.
    const TOL_EXACT: f64 = 1e-14;
    /// Root-finder agreement with closed forms.
    const TOL_ROOT: f64 = 1e-10;

    #[test]
    fn front_froude_examples() {
        let b = FluidPair::boussinesq(1.0).unwrap();
        assert_eq!(front_froude(&b), 0.0);
        let f41 = FluidPair::new(4.0, 1.0).unwrap();
        assert!((front_froude(&f41) - 1.0 / 3.0).abs() < TOL_EXACT);
        let f94 = FluidPair::new(9.0, 4.0).unwrap();
        assert!((front_froude(&f94) - 1.0 / 5.0).abs() < TOL_EXACT);
    }

    #[test]
    fn conjugate_downstream_examples() {
        let b = FluidPair::boussinesq(1.0).unwrap();
        assert!((conjugate_downstream(&b) - 0.5).abs() < TOL_EXACT);
        let f41 = FluidPair::new(4.0, 1.0).unwrap();
        assert!((conjugate_downstream(&f41) - 2.0 / 3.0).abs() < TOL_EXACT);
    }

    #[test]
    fn fluid_pair_invariants_enforced() {
        assert!(FluidPair::new(1.0, 1.0).is_err());
        assert!(FluidPair::new(1.0, 2.0).is_err());
        assert!(FluidPair::new(-1.0, 0.5).is_err());
        assert!(FluidPair { rho1: 1.0, rho2: 0.9, boussinesq: true }.validate().is_err());
    }

    #[test]
    fn conjugate_root_set_contains_both_roots() {
        // Brute-force scan of the algebraic system on a 1e6-point grid with
        // bisection refinement; the root set at (4, 1, 0.4) is {0.4, 2/3}.
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let roots = conjugate_roots(&fluids, 0.4, 1_000_000).unwrap();
        assert!(roots.iter().any(|&r| (r - 0.4).abs() < TOL_ROOT), "missing lambda root: {roots:?}");
        assert!(
            roots.iter().any(|&r| (r - 2.0 / 3.0).abs() < TOL_ROOT),
            "missing conjugate root: {roots:?}"
        );
    }

    #[test]
    fn conjugate_closed_form_matches_root_finder_for_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rho1: f64 = rng.gen_range(0.5..5.0);
            let rho2: f64 = rng.gen_range(0.05..rho1 * 0.95);
            let fluids = FluidPair::new(rho1, rho2).unwrap();
            let lambda = rng.gen_range(0.15..0.85);
            let hstar = conjugate_downstream(&fluids);
            let roots = conjugate_roots(&fluids, lambda, 100_000).unwrap();
            let best = roots
                .iter()
                .map(|&r| (r - hstar).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(best < TOL_ROOT, "rho=({rho1},{rho2}) lambda={lambda}: dist {best}");
        }
    }

    #[test]
    fn boussinesq_conjugate_roots() {
        let fluids = FluidPair::boussinesq(1.0).unwrap();
        let roots = conjugate_roots(&fluids, 0.35, 200_000).unwrap();
        assert!(roots.iter().any(|&r| (r - 0.35).abs() < TOL_ROOT));
        assert!(roots.iter().any(|&r| (r - 0.5).abs() < TOL_ROOT));
    }

    #[test]
    fn flow_force_of_upstream_slice_matches_closed_form() {
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let lambda = 0.4;
        let prof = LaminarProfile::upstream(&fluids, lambda);
        let slice = FlowSlice::from_profile(&prof, lambda, 41);
        let s = flow_force(&slice, &fluids, front_froude(&fluids)).unwrap();
        // Trapezoid is exact here: the integrand is piecewise linear in y and
        // the interface sits on a node.
        assert!((s - s0_flow_force(&fluids, lambda)).abs() < 1e-12, "s = {s}");
    }

    #[test]
    fn conjugate_profile_shares_the_upstream_flow_force() {
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let lambda = 0.4;
        let prof = LaminarProfile::downstream(&fluids, lambda);
        let slice = FlowSlice::from_profile(&prof, lambda, 61);
        let s = flow_force(&slice, &fluids, front_froude(&fluids)).unwrap();
        assert!((s - s0_flow_force(&fluids, lambda)).abs() < 1e-12, "s = {s}");
    }

    #[test]
    fn boussinesq_flow_force_equality_and_jump() {
        let fluids = FluidPair::boussinesq(2.0).unwrap();
        for &lambda in &[0.3, 0.45, 0.6] {
            let s_up = s0_flow_force(&fluids, lambda);
            let s_down = laminar_flow_force(&fluids, lambda, 0.5);
            assert!((s_up - s_down).abs() < 1e-13, "lambda={lambda}");
            assert!(conjugate_jump_residual(&fluids, lambda, 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn laminar_flow_force_matches_slice_quadrature() {
        // The closed form is validated against quadrature rather than tabulated.
        let fluids = FluidPair::new(3.0, 1.2).unwrap();
        let lambda = 0.55;
        for &h in &[0.35, 0.55, conjugate_downstream(&fluids)] {
            let prof = LaminarProfile::with_thickness(&fluids, lambda, h);
            let slice = FlowSlice::from_profile(&prof, lambda, 33);
            let s = flow_force(&slice, &fluids, front_froude(&fluids)).unwrap();
            assert!((s - laminar_flow_force(&fluids, lambda, h)).abs() < 1e-12);
        }
    }

    #[test]
    fn slice_must_span_channel() {
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let prof = LaminarProfile::upstream(&fluids, 0.4);
        let mut slice = FlowSlice::from_profile(&prof, 0.4, 21);
        slice.y.pop();
        slice.psi_x.pop();
        slice.psi_y.pop();
        slice.label.pop();
        assert!(matches!(
            flow_force(&slice, &fluids, front_froude(&fluids)),
            Err(ParamError::SliceDomain(_))
        ));
    }

    #[test]
    fn trivial_slice_flow_force_is_x_independent() {
        // Two "columns" of the trivial solution are the same slice; equality
        // is exact by construction.
        let fluids = FluidPair::new(9.0, 4.0).unwrap();
        let prof = LaminarProfile::upstream(&fluids, 0.5);
        let a = flow_force(&FlowSlice::from_profile(&prof, 0.5, 31), &fluids, front_froude(&fluids))
            .unwrap();
        let b = flow_force(&FlowSlice::from_profile(&prof, 0.5, 31), &fluids, front_froude(&fluids))
            .unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn froude_decreasing_in_rho2(rho1 in 0.5f64..6.0, a in 0.05f64..0.9, b in 0.05f64..0.9) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let f_lo = front_froude(&FluidPair::new(rho1, lo * rho1).unwrap());
            let f_hi = front_froude(&FluidPair::new(rho1, hi * rho1).unwrap());
            prop_assert!(f_lo > f_hi);
        }

        #[test]
        fn conjugate_thickness_in_unit_interval(rho1 in 0.2f64..8.0, ratio in 0.01f64..0.99) {
            let fluids = FluidPair::new(rho1, ratio * rho1).unwrap();
            let h = conjugate_downstream(&fluids);
            prop_assert!(h > 0.5 && h < 1.0);
        }
    }
}

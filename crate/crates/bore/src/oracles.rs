//! Exact closed-form fields used as ground truth in property tests.
//!
//! The Stokes corner is the canonical 3/2-homogeneous free-boundary profile
//! supported on a 120-degree cone; the laminar and conjugate-profile fields
//! are the piecewise-linear streamfunctions of the far-field states.

use std::f64::consts::PI;

use crate::diagnostics::Phase;
use crate::params::{conjugate_downstream, FluidPair, LaminarProfile};

/// Rotation angles are handled as plain radians but constructed from exact
/// rational multiples of pi wherever possible to avoid branch-cut drift.
pub const CONE_LO: f64 = 7.0 * PI / 6.0;
pub const CONE_HI: f64 = 11.0 * PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    /// `u(z) = stokes(A_theta z)`, support the rotated cone.
    StokesCorner { theta: f64 },
    /// Piecewise-linear pseudo streamfunction on the physical channel.
    Laminar { profile: LaminarProfile },
}

/// An exact field with analytic value, gradient, and phase label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactField {
    kind: Kind,
    /// Homogeneity degree about the origin, when the field is homogeneous.
    pub homogeneity: Option<f64>,
    /// Densities `(rho_plus, rho_minus)` for which the field solves the
    /// two-phase free boundary problem, when it does.
    pub solves_for: Option<(f64, f64)>,
    /// Rotation angle of the support, radians counterclockwise.
    pub rotation: f64,
}

/// Value and gradient of the unrotated Stokes corner at `w`.
fn stokes_raw(wx: f64, wy: f64) -> (f64, [f64; 2]) {
    let s = wx.hypot(wy);
    if s == 0.0 {
        return (0.0, [0.0, 0.0]);
    }
    let mut phi = wy.atan2(wx);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    if !(phi > CONE_LO && phi < CONE_HI) {
        return (0.0, [0.0, 0.0]);
    }
    // Angle measured from the downward axis, in (-pi/3, pi/3).
    let ph = phi - 1.5 * PI;
    let a = -(2.0f64.sqrt()) / 3.0;
    let u = a * s.powf(1.5) * (1.5 * ph).cos();
    let c = 0.5 * 2.0f64.sqrt() * s.sqrt();
    let grad = [c * (0.5 * ph).sin(), c * (0.5 * ph).cos()];
    (u, grad)
}

impl ExactField {
    /// The Stokes corner rotated counterclockwise by `theta`:
    /// `-(sqrt(2)/3) |z|^{3/2} cos(3(arg - 3 pi/2)/2)` on the rotated
    /// 120-degree cone, zero elsewhere. Solves the two-phase problem with
    /// `rho_plus = 0`, `rho_minus = 1`.
    pub fn stokes_corner(theta: f64) -> Self {
        ExactField {
            kind: Kind::StokesCorner { theta },
            homogeneity: Some(1.5),
            solves_for: Some((0.0, 1.0)),
            rotation: theta,
        }
    }

    /// Upstream laminar streamfunction on the channel `y in [-lambda, 1-lambda]`.
    pub fn laminar(fluids: &FluidPair, lambda: f64) -> Self {
        ExactField {
            kind: Kind::Laminar { profile: LaminarProfile::upstream(fluids, lambda) },
            homogeneity: None,
            solves_for: None,
            rotation: 0.0,
        }
    }

    /// Conjugate upstream/downstream profile fields `(Psi_u, Psi_d)`, used as
    /// far-field clamps and flow-force test inputs.
    pub fn conjugate_profiles(fluids: &FluidPair, lambda: f64) -> (Self, Self) {
        let up = ExactField {
            kind: Kind::Laminar { profile: LaminarProfile::upstream(fluids, lambda) },
            homogeneity: None,
            solves_for: None,
            rotation: 0.0,
        };
        let down = ExactField {
            kind: Kind::Laminar {
                profile: LaminarProfile::with_thickness(fluids, lambda, conjugate_downstream(fluids)),
            },
            homogeneity: None,
            solves_for: None,
            rotation: 0.0,
        };
        (up, down)
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            Kind::StokesCorner { theta } => {
                let (c, s) = (theta.cos(), theta.sin());
                stokes_raw(c * x - s * y, s * x + c * y).0
            }
            Kind::Laminar { profile } => profile.psi(y),
        }
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        match self.kind {
            Kind::StokesCorner { theta } => {
                let (c, s) = (theta.cos(), theta.sin());
                let g = stokes_raw(c * x - s * y, s * x + c * y).1;
                // grad u(z) = R_theta^T grad ubar(R_theta z)
                [c * g[0] + s * g[1], -s * g[0] + c * g[1]]
            }
            Kind::Laminar { profile } => [0.0, profile.psi_y(y)],
        }
    }

    /// Phase label of the field's own sign: `Minus` where the value is
    /// negative, `Plus` on the interior of the nonnegative set.
    pub fn phase(&self, x: f64, y: f64) -> Phase {
        match self.kind {
            Kind::StokesCorner { .. } => {
                if self.value(x, y) < 0.0 {
                    Phase::Minus
                } else {
                    Phase::Plus
                }
            }
            Kind::Laminar { profile } => {
                if y <= profile.y_interface {
                    Phase::Plus
                } else {
                    Phase::Minus
                }
            }
        }
    }

    /// The interface height for profile fields.
    pub fn interface_height(&self) -> Option<f64> {
        match self.kind {
            Kind::Laminar { profile } => Some(profile.y_interface),
            _ => None,
        }
    }

    pub fn profile(&self) -> Option<LaminarProfile> {
        match self.kind {
            Kind::Laminar { profile } => Some(profile),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::front_froude;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn stokes_corner_point_values() {
        let f = ExactField::stokes_corner(0.0);
        // r = 1 on the downward axis: cos(0) = 1.
        assert!((f.value(0.0, -1.0) + 2.0f64.sqrt() / 3.0).abs() < 1e-15);
        // Free boundary rays carry the value 0.
        let (c, s) = (CONE_LO.cos(), CONE_LO.sin());
        assert_eq!(f.value(0.9 * c, 0.9 * s), 0.0);
        let (c, s) = (CONE_HI.cos(), CONE_HI.sin());
        assert_eq!(f.value(1.3 * c, 1.3 * s), 0.0);
        // Outside the cone the field vanishes identically.
        assert_eq!(f.value(0.5, 0.7), 0.0);
    }

    #[test]
    fn stokes_gradient_magnitude_is_half_radius() {
        // |grad u|^2 = r/2 inside the support; on the boundary rays this
        // equals -y, the jump condition with rho+ = 0, rho- = 1.
        let f = ExactField::stokes_corner(0.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let r = rng.gen_range(0.05..2.0);
            let ph = rng.gen_range(-PI / 3.0 + 1e-3..PI / 3.0 - 1e-3);
            let th = 1.5 * PI + ph;
            let (x, y) = (r * th.cos(), r * th.sin());
            let g = f.gradient(x, y);
            assert!((g[0] * g[0] + g[1] * g[1] - r / 2.0).abs() < 1e-12);
        }
        // On a boundary ray: |grad|^2 -> -y from inside.
        let r = 0.8;
        let th = CONE_LO + 1e-9;
        let (x, y) = (r * th.cos(), r * th.sin());
        let g = f.gradient(x, y);
        assert!((g[0] * g[0] + g[1] * g[1] + y).abs() < 1e-6);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let fields = [
            ExactField::stokes_corner(0.0),
            ExactField::stokes_corner(PI / 6.0),
            ExactField::stokes_corner(-PI / 6.0),
        ];
        let h = 1e-6;
        for f in &fields {
            let mut checked = 0;
            while checked < 100 {
                let x = rng.gen_range(-1.5..1.5);
                let y = rng.gen_range(-1.5..1.5);
                // Stay away from the free boundary: require the whole stencil
                // strictly inside one phase.
                let phases = [
                    f.phase(x - 2.0 * h, y),
                    f.phase(x + 2.0 * h, y),
                    f.phase(x, y - 2.0 * h),
                    f.phase(x, y + 2.0 * h),
                ];
                if phases.iter().any(|p| *p != phases[0]) || x.hypot(y) < 0.05 {
                    continue;
                }
                let g = f.gradient(x, y);
                let gx = (f.value(x + h, y) - f.value(x - h, y)) / (2.0 * h);
                let gy = (f.value(x, y + h) - f.value(x, y - h)) / (2.0 * h);
                assert!((g[0] - gx).abs() < 1e-8, "gx {} vs {}", g[0], gx);
                assert!((g[1] - gy).abs() < 1e-8, "gy {} vs {}", g[1], gy);
                checked += 1;
            }
        }
    }

    #[test]
    fn laminar_wall_values() {
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let lambda = 0.4;
        let f = ExactField::laminar(&fluids, lambda);
        assert!((f.value(0.0, -lambda) - lambda * 2.0).abs() < 1e-15);
        assert!((f.value(0.0, 1.0 - lambda) + (1.0 - lambda) * 1.0).abs() < 1e-15);
        assert_eq!(f.value(3.0, 0.0), 0.0);
    }

    #[test]
    fn conjugate_profile_shape() {
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let lambda = 0.4;
        let (_, down) = ExactField::conjugate_profiles(&fluids, lambda);
        let hd = conjugate_downstream(&fluids);
        let yd = hd - lambda;
        // Continuous at its interface height: both pieces vanish there.
        assert!(down.value(0.0, yd).abs() < 1e-15);
        assert!((down.value(0.0, yd - 1e-9) - down.value(0.0, yd + 1e-9)).abs() < 1e-8);
        // Slope of the lower piece.
        let p = down.profile().unwrap();
        assert!((p.slope1 + (lambda / hd) * fluids.rho1.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dynamic_condition_residual_flips_sign_at_trivial_lambda() {
        // Direct substitution scan: with eta == 0 globally, the candidate
        // downstream interface height is hstar - lambda, and the dynamic
        // condition evaluated there on the laminar gradients reads
        // 2 (rho2 - rho1) (hstar - lambda) / F^2. Zero iff lambda = hstar.
        let fluids = FluidPair::new(4.0, 1.0).unwrap();
        let hstar = conjugate_downstream(&fluids);
        let f2 = front_froude(&fluids);
        let residual = |lambda: f64| {
            let f = ExactField::laminar(&fluids, lambda);
            let g1 = f.gradient(0.0, -lambda / 2.0);
            let g2 = f.gradient(0.0, (1.0 - lambda) / 2.0);
            let yd = hstar - lambda;
            (g2[0] * g2[0] + g2[1] * g2[1]) - (g1[0] * g1[0] + g1[1] * g1[1])
                + 2.0 * (fluids.rho2 - fluids.rho1) * yd / f2
                - (fluids.rho2 - fluids.rho1)
        };
        assert!(residual(hstar).abs() < 1e-13);
        let below = residual(hstar - 0.1);
        let above = residual(hstar + 0.1);
        assert!(below * above < 0.0, "no sign flip: {below} vs {above}");
        assert!(residual(hstar - 0.2).abs() > residual(hstar - 0.1).abs());
    }

    proptest! {
        /// All homogeneous oracles are exactly homogeneous: u(rz) = r^{3/2} u(z).
        #[test]
        fn stokes_homogeneity(r in 0.01f64..10.0, th in 0.0f64..(2.0 * PI), rot in -1.0f64..1.0) {
            let f = ExactField::stokes_corner(rot);
            let (x, y) = (th.cos(), th.sin());
            let u1 = f.value(r * x, r * y);
            let u0 = f.value(x, y);
            prop_assert!((u1 - r.powf(1.5) * u0).abs() < 1e-12 * (1.0 + u1.abs()));
        }
    }
}

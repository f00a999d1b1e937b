//! Sampled fields: the common input to all diagnostics functionals.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagError;
use crate::oracles::ExactField;

/// Two-phase label. `Plus` is the interior of the nonnegative set of `u`,
/// `Minus` the set where `u < 0`; exactly one holds at each sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Plus,
    Minus,
}

/// One field evaluation: value, gradient, phase label.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub u: f64,
    pub grad: [f64; 2],
    pub phase: Phase,
}

/// Disk geometry the field is defined on, centered at the designated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiskDomain {
    Full,
    /// Half-disk `{y <= 0}` with the flat top T on `y = 0`.
    LowerHalf,
}

/// Ray-shaped kink geometry: the field is smooth except across rays leaving
/// `center` (local coordinates) at the given angles.
#[derive(Debug, Clone, PartialEq)]
pub struct RayKinks {
    pub center: [f64; 2],
    pub angles: Vec<f64>,
}

/// A scalar field with two-phase labels on a disk or half-disk, in local
/// coordinates about the designated center point.
///
/// `weight_offset` shifts the vertical coordinate used by potential-energy
/// weights: functionals that integrate `y * rho(chi)` use `y + weight_offset`,
/// so a field sampled about a point at global height `y0` of a problem whose
/// dynamic condition degenerates at height `y*` carries `weight_offset =
/// y0 - y*`. Oracle fields centered at their vertex use 0.
#[derive(Clone)]
pub struct SampledField {
    pub radius: f64,
    pub domain: DiskDomain,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub bernoulli_q: Option<f64>,
    pub weight_offset: f64,
    /// Polar angles (local, about the origin) across which the integrand may
    /// lose smoothness; the quadrature aligns sector boundaries with these.
    pub theta_breakpoints: Vec<f64>,
    /// Ray kinks about an off-origin vertex, when known; lets the quadrature
    /// integrate in vertex-centered coordinates at full accuracy.
    pub ray_kinks: Option<RayKinks>,
    eval: Arc<dyn Fn(f64, f64) -> FieldSample + Send + Sync>,
}

impl std::fmt::Debug for SampledField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledField")
            .field("radius", &self.radius)
            .field("domain", &self.domain)
            .field("rho_plus", &self.rho_plus)
            .field("rho_minus", &self.rho_minus)
            .field("bernoulli_q", &self.bernoulli_q)
            .field("weight_offset", &self.weight_offset)
            .finish()
    }
}

impl SampledField {
    /// Field from an analytic evaluator in local coordinates.
    pub fn from_fn<F>(
        radius: f64,
        domain: DiskDomain,
        rho_plus: f64,
        rho_minus: f64,
        eval: F,
    ) -> Self
    where
        F: Fn(f64, f64) -> FieldSample + Send + Sync + 'static,
    {
        SampledField {
            radius,
            domain,
            rho_plus,
            rho_minus,
            bernoulli_q: None,
            weight_offset: 0.0,
            theta_breakpoints: Vec::new(),
            ray_kinks: None,
            eval: Arc::new(eval),
        }
    }

    /// Wrap an exact oracle field, sampling about `center`. For fields
    /// centered at the origin of a Stokes corner the cone rays are installed
    /// as quadrature breakpoints.
    pub fn from_exact(
        field: &ExactField,
        center: [f64; 2],
        radius: f64,
        domain: DiskDomain,
        rho_plus: f64,
        rho_minus: f64,
    ) -> Self {
        let f = *field;
        let mut breaks = Vec::new();
        let mut kinks = None;
        if f.homogeneity.is_some() {
            let lo = (crate::oracles::CONE_LO - f.rotation).rem_euclid(2.0 * PI);
            let hi = (crate::oracles::CONE_HI - f.rotation).rem_euclid(2.0 * PI);
            if center == [0.0, 0.0] {
                breaks.push(lo);
                breaks.push(hi);
            } else {
                kinks = Some(RayKinks { center: [-center[0], -center[1]], angles: vec![lo, hi] });
            }
        }
        SampledField {
            radius,
            domain,
            rho_plus,
            rho_minus,
            bernoulli_q: None,
            weight_offset: 0.0,
            theta_breakpoints: breaks,
            ray_kinks: kinks,
            eval: Arc::new(move |x, y| FieldSample {
                u: f.value(center[0] + x, center[1] + y),
                grad: f.gradient(center[0] + x, center[1] + y),
                phase: f.phase(center[0] + x, center[1] + y),
            }),
        }
    }

    /// Field from polar-grid samples, bilinear in `(r, theta)`.
    ///
    /// `values[i][j]`, `grads[i][j]`, `phases[i][j]` at radius `i * radius / (nr - 1)`
    /// and angle `theta_lo + j * span / (ntheta - 1)`. Supplied gradients are
    /// checked against finite differences of the values; inconsistency beyond
    /// the grid truncation scale is a precondition error.
    pub fn from_polar_samples(
        radius: f64,
        domain: DiskDomain,
        rho_plus: f64,
        rho_minus: f64,
        values: Vec<Vec<f64>>,
        grads: Vec<Vec<[f64; 2]>>,
        phases: Vec<Vec<Phase>>,
    ) -> Result<Self, DiagError> {
        let nr = values.len();
        if nr < 3 || grads.len() != nr || phases.len() != nr {
            return Err(DiagError::Precondition("polar sample arrays inconsistent".into()));
        }
        let nt = values[0].len();
        if nt < 3 {
            return Err(DiagError::Precondition("need at least 3 angular samples".into()));
        }
        let (theta_lo, span) = match domain {
            DiskDomain::Full => (0.0, 2.0 * PI),
            DiskDomain::LowerHalf => (PI, PI),
        };
        let dr = radius / (nr - 1) as f64;
        let dth = span / (nt - 1) as f64;
        // Gradient consistency at interior nodes, away from phase changes.
        let mut worst: f64 = 0.0;
        for i in 1..nr - 1 {
            for j in 1..nt - 1 {
                let same = phases[i - 1][j] == phases[i + 1][j]
                    && phases[i][j - 1] == phases[i][j + 1]
                    && phases[i][j] == phases[i + 1][j];
                if !same {
                    continue;
                }
                let r = i as f64 * dr;
                let th = theta_lo + j as f64 * dth;
                let du_dr = (values[i + 1][j] - values[i - 1][j]) / (2.0 * dr);
                let du_dth = (values[i][j + 1] - values[i][j - 1]) / (2.0 * dth);
                let g = grads[i][j];
                let gr = g[0] * th.cos() + g[1] * th.sin();
                let gt = (-g[0] * th.sin() + g[1] * th.cos()) * r;
                worst = worst.max((gr - du_dr).abs()).max((gt - du_dth).abs());
            }
        }
        let scale = (dr * dr + dth * dth).sqrt();
        if worst > 50.0 * scale {
            return Err(DiagError::Precondition(format!(
                "supplied gradients deviate from finite differences by {worst:e}"
            )));
        }
        let eval = move |x: f64, y: f64| -> FieldSample {
            let r = x.hypot(y).min(radius);
            let mut th = y.atan2(x);
            if th < theta_lo {
                th += 2.0 * PI;
            }
            th = th.clamp(theta_lo, theta_lo + span);
            let fi = (r / dr).min((nr - 1) as f64 - 1e-12);
            let fj = ((th - theta_lo) / dth).min((nt - 1) as f64 - 1e-12);
            let (i, j) = (fi as usize, fj as usize);
            let (a, b) = (fi - i as f64, fj - j as f64);
            let lerp2 = |f00: f64, f10: f64, f01: f64, f11: f64| {
                f00 * (1.0 - a) * (1.0 - b) + f10 * a * (1.0 - b) + f01 * (1.0 - a) * b + f11 * a * b
            };
            let u = lerp2(values[i][j], values[i + 1][j], values[i][j + 1], values[i + 1][j + 1]);
            let gx = lerp2(
                grads[i][j][0],
                grads[i + 1][j][0],
                grads[i][j + 1][0],
                grads[i + 1][j + 1][0],
            );
            let gy = lerp2(
                grads[i][j][1],
                grads[i + 1][j][1],
                grads[i][j + 1][1],
                grads[i + 1][j + 1][1],
            );
            let phase = if a < 0.5 {
                if b < 0.5 {
                    phases[i][j]
                } else {
                    phases[i][j + 1]
                }
            } else if b < 0.5 {
                phases[i + 1][j]
            } else {
                phases[i + 1][j + 1]
            };
            FieldSample { u, grad: [gx, gy], phase }
        };
        Ok(SampledField {
            radius,
            domain,
            rho_plus,
            rho_minus,
            bernoulli_q: None,
            weight_offset: 0.0,
            theta_breakpoints: Vec::new(),
            ray_kinks: None,
            eval: Arc::new(eval),
        })
    }

    pub fn with_bernoulli_q(mut self, q: f64) -> Self {
        self.bernoulli_q = Some(q);
        self
    }

    pub fn with_weight_offset(mut self, off: f64) -> Self {
        self.weight_offset = off;
        self
    }

    pub fn with_breakpoints(mut self, breaks: Vec<f64>) -> Self {
        self.theta_breakpoints = breaks;
        self
    }

    pub fn with_ray_kinks(mut self, kinks: RayKinks) -> Self {
        self.ray_kinks = Some(kinks);
        self
    }

    /// Angles (about the origin) where rays from the kink vertex cross the
    /// circle of radius `r`, for boundary quadrature alignment.
    pub fn arc_breakpoints(&self, r: f64) -> Vec<f64> {
        let mut out = self.theta_breakpoints.clone();
        if let Some(k) = &self.ray_kinks {
            let c = k.center;
            let c2 = c[0] * c[0] + c[1] * c[1];
            for &a in &k.angles {
                let d = [a.cos(), a.sin()];
                let cd = c[0] * d[0] + c[1] * d[1];
                let disc = cd * cd - c2 + r * r;
                if disc <= 0.0 {
                    continue;
                }
                for t in [-cd + disc.sqrt(), -cd - disc.sqrt()] {
                    if t > 0.0 {
                        let z = [c[0] + t * d[0], c[1] + t * d[1]];
                        out.push(z[1].atan2(z[0]).rem_euclid(2.0 * PI));
                    }
                }
            }
        }
        out
    }

    #[inline]
    pub fn sample(&self, x: f64, y: f64) -> FieldSample {
        (self.eval)(x, y)
    }

    /// Density weight at a sample's phase.
    #[inline]
    pub fn rho(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Plus => self.rho_plus,
            Phase::Minus => self.rho_minus,
        }
    }

    /// A rescaled view `u_m(z) = u(r_m z) / r_m^d` on the unit disk.
    pub fn rescaled(&self, r_m: f64, degree: f64) -> SampledField {
        let inner = self.eval.clone();
        let scale_u = r_m.powf(degree);
        let scale_g = r_m.powf(degree - 1.0);
        SampledField {
            radius: 1.0,
            domain: self.domain,
            rho_plus: self.rho_plus,
            rho_minus: self.rho_minus,
            bernoulli_q: self.bernoulli_q,
            weight_offset: self.weight_offset / r_m,
            theta_breakpoints: self.theta_breakpoints.clone(),
            ray_kinks: self.ray_kinks.as_ref().map(|k| RayKinks {
                center: [k.center[0] / r_m, k.center[1] / r_m],
                angles: k.angles.clone(),
            }),
            eval: Arc::new(move |x, y| {
                let s = inner(r_m * x, r_m * y);
                FieldSample { u: s.u / scale_u, grad: [s.grad[0] / scale_g, s.grad[1] / scale_g], phase: s.phase }
            }),
        }
    }
}

/// A C^1 test vector field for variational residuals.
#[derive(Clone)]
pub struct TestField {
    /// phi(x, y).
    pub phi: Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
    /// Jacobian d phi_i / d x_j, row-major `[[dphi1/dx, dphi1/dy], [dphi2/dx, dphi2/dy]]`.
    pub dphi: Arc<dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync>,
    /// Support is contained in the ball of this radius about `support_center`.
    pub support_center: [f64; 2],
    pub support_radius: f64,
}

impl TestField {
    /// Smooth radial bump `a * exp(1 - 1/(1 - t^2))`, `t = |z - c| / w`,
    /// supported in the ball of radius `w` about `c`.
    pub fn bump(center: [f64; 2], width: f64, amplitude: [f64; 2]) -> Self {
        let c = center;
        let w = width;
        let beta = move |x: f64, y: f64| -> (f64, [f64; 2]) {
            let dx = (x - c[0]) / w;
            let dy = (y - c[1]) / w;
            let t2 = dx * dx + dy * dy;
            if t2 >= 1.0 {
                return (0.0, [0.0, 0.0]);
            }
            let q = 1.0 - t2;
            let b = (1.0 - 1.0 / q).exp();
            // d/dt2 of exp(1 - 1/q) = b * (-1/q^2)
            let db_dt2 = -b / (q * q);
            (b, [db_dt2 * 2.0 * dx / w, db_dt2 * 2.0 * dy / w])
        };
        let a = amplitude;
        let beta2 = beta;
        TestField {
            phi: Arc::new(move |x, y| {
                let (b, _) = beta(x, y);
                [a[0] * b, a[1] * b]
            }),
            dphi: Arc::new(move |x, y| {
                let (_, g) = beta2(x, y);
                [[a[0] * g[0], a[0] * g[1]], [a[1] * g[0], a[1] * g[1]]]
            }),
            support_center: center,
            support_radius: width,
        }
    }

    /// Divergence-free field `(dpsi/dy, -dpsi/dx)` of the stream bump
    /// `psi = exp(1 - 1/(1 - t^2))`; compact support like [`TestField::bump`].
    pub fn divergence_free_bump(center: [f64; 2], width: f64, amplitude: f64) -> Self {
        let c = center;
        let w = width;
        let parts = move |x: f64, y: f64| -> (f64, f64, f64, f64, f64) {
            // returns (b, bx, by, mixed second derivatives via finite structure)
            let dx = (x - c[0]) / w;
            let dy = (y - c[1]) / w;
            let t2 = dx * dx + dy * dy;
            if t2 >= 1.0 {
                return (0.0, 0.0, 0.0, 0.0, 0.0);
            }
            let q = 1.0 - t2;
            let b = (1.0 - 1.0 / q).exp();
            let f1 = -1.0 / (q * q); // d/dt2 of (1 - 1/q) ... times b gives first derivative
            let db = b * f1;
            // second derivative in t2: d/dt2 (b * f1) = db * f1 + b * (-2/q^3)
            let d2b = db * f1 + b * (-2.0 / (q * q * q));
            (b, db, d2b, dx, dy)
        };
        TestField {
            phi: Arc::new(move |x, y| {
                let (_, db, _, dx, dy) = parts(x, y);
                // psi_y = db * 2 dy / w ; psi_x = db * 2 dx / w
                [amplitude * db * 2.0 * dy / w, -amplitude * db * 2.0 * dx / w]
            }),
            dphi: Arc::new(move |x, y| {
                let (_, db, d2b, dx, dy) = parts(x, y);
                let k = 2.0 / w;
                // psi_xy etc. from psi = b(t2), t2 = dx^2 + dy^2
                let psi_xy = d2b * (2.0 * dx / w) * (2.0 * dy / w);
                let psi_yy = d2b * (2.0 * dy / w) * (2.0 * dy / w) + db * k / w;
                let psi_xx = d2b * (2.0 * dx / w) * (2.0 * dx / w) + db * k / w;
                [
                    [amplitude * psi_xy, amplitude * psi_yy],
                    [-amplitude * psi_xx, -amplitude * psi_xy],
                ]
            }),
            support_center: center,
            support_radius: width,
        }
    }
}

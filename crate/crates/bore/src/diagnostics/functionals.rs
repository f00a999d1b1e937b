//! The diagnostics functionals: traces in radius and their identity checks.

use std::f64::consts::PI;

use crate::diagnostics::quadrature::{
    arc_integral, polar_bulk, polar_bulk_about, polar_bulk_fixed, theta_span,
};
use crate::diagnostics::{DiagError, DiskDomain, QuadSettings, SampledField, TestField};
use crate::util::fmt_f64;

/// Geometric radius schedule `r_k = r_max * 2^{-k/4}`, decreasing, length `n`.
///
/// The limits of interest are r -> 0+, so the schedule spends its points at
/// small radii.
pub fn geometric_radii(r_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| r_max * 2f64.powf(-(k as f64) / 4.0)).collect()
}

/// A functional evaluated on a decreasing radius schedule.
#[derive(Debug, Clone)]
pub struct FunctionalTrace {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// Centered finite differences of the values in r.
    pub derivative_estimates: Vec<f64>,
    /// Mismatch of the finite-difference derivative against an analytic
    /// derivative identity, where one applies.
    pub identity_residuals: Option<Vec<f64>>,
}

impl FunctionalTrace {
    fn new(radii: Vec<f64>, values: Vec<f64>) -> Self {
        let derivative_estimates = centered_differences(&radii, &values);
        FunctionalTrace { radii, values, derivative_estimates, identity_residuals: None }
    }

    /// Largest increase `v_{k+1} - v_k` along the (decreasing-radius) trace.
    /// Negative means strictly decreasing along the trace.
    pub fn max_step_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spread of the values, for constancy checks.
    pub fn spread(&self) -> f64 {
        let max = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// CSV with the fixed column set `r,value,derivative_estimate,identity_residual`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value,derivative_estimate,identity_residual\n");
        for k in 0..self.radii.len() {
            let idres = self
                .identity_residuals
                .as_ref()
                .map(|v| fmt_f64(v[k]))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(self.radii[k]),
                fmt_f64(self.values[k]),
                fmt_f64(self.derivative_estimates[k]),
                idres
            ));
        }
        out
    }
}

fn centered_differences(radii: &[f64], values: &[f64]) -> Vec<f64> {
    let n = radii.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    for k in 0..n {
        let (i, j) = if k == 0 {
            (0, 1)
        } else if k == n - 1 {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        d[k] = (values[i] - values[j]) / (radii[i] - radii[j]);
    }
    d
}

/// Log-log least-squares slope of `values` against `radii`.
pub fn fit_log_slope(radii: &[f64], values: &[f64]) -> f64 {
    let pairs: Vec<(f64, f64)> = radii
        .iter()
        .zip(values.iter())
        .filter(|(_, &v)| v > 0.0)
        .map(|(&r, &v)| (r.ln(), v.ln()))
        .collect();
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn check_radii(field: &SampledField, radii: &[f64]) -> Result<(), DiagError> {
    if radii.is_empty() {
        return Err(DiagError::Domain("empty radius schedule".into()));
    }
    for w in radii.windows(2) {
        if w[1] >= w[0] {
            return Err(DiagError::Domain("radii must be strictly decreasing".into()));
        }
    }
    if radii[0] > field.radius * (1.0 + 1e-12) {
        return Err(DiagError::Domain(format!(
            "largest radius {} exceeds the sampled disk {}",
            radii[0], field.radius
        )));
    }
    Ok(())
}

fn bulk<F>(field: &SampledField, r: f64, s: &QuadSettings, f: F) -> Result<f64, DiagError>
where
    F: Fn(&crate::diagnostics::FieldSample, f64, f64) -> f64,
{
    // A field with ray kinks about an interior off-origin vertex integrates
    // in vertex-centered coordinates, keeping every panel smooth.
    if field.domain == DiskDomain::Full {
        if let Some(k) = &field.ray_kinks {
            let c2 = k.center[0] * k.center[0] + k.center[1] * k.center[1];
            if c2.sqrt() < 0.7 * r {
                let g = |x: f64, y: f64| {
                    let smp = field.sample(x, y);
                    (f(&smp, x, y), smp.phase as u8)
                };
                return polar_bulk_about(&g, r, k.center, &k.angles, s);
            }
        }
    }
    let g = |rr: f64, th: f64| {
        let (x, y) = (rr * th.cos(), rr * th.sin());
        let smp = field.sample(x, y);
        (f(&smp, x, y), smp.phase as u8)
    };
    polar_bulk(&g, r, field.domain, &field.theta_breakpoints, s)
}

fn boundary<F>(field: &SampledField, r: f64, s: &QuadSettings, f: F) -> Result<f64, DiagError>
where
    F: Fn(&crate::diagnostics::FieldSample, f64, f64, f64) -> f64,
{
    let g = |th: f64| {
        let (x, y) = (r * th.cos(), r * th.sin());
        let smp = field.sample(x, y);
        (f(&smp, x, y, th) * r, smp.phase as u8)
    };
    arc_integral(&g, field.domain, &field.arc_breakpoints(r), s)
}

/// Mean mixed and anisotropic energy densities
/// `A(r) = r^-2 int_{B_r} u_x u_y` and `B(r) = r^-2 int_{B_r} (u_y^2 - u_x^2)`.
pub fn functional_ab(
    field: &SampledField,
    radii: &[f64],
    settings: &QuadSettings,
) -> Result<(FunctionalTrace, FunctionalTrace), DiagError> {
    check_radii(field, radii)?;
    let mut avals = Vec::with_capacity(radii.len());
    let mut bvals = Vec::with_capacity(radii.len());
    for &r in radii {
        let s = QuadSettings { tol: settings.tol * r * r, ..*settings };
        let a = bulk(field, r, &s, |smp, _, _| smp.grad[0] * smp.grad[1])?;
        let b = bulk(field, r, &s, |smp, _, _| {
            smp.grad[1] * smp.grad[1] - smp.grad[0] * smp.grad[0]
        })?;
        avals.push(a / (r * r));
        bvals.push(b / (r * r));
    }
    Ok((FunctionalTrace::new(radii.to_vec(), avals), FunctionalTrace::new(radii.to_vec(), bvals)))
}

/// The explicit derivative identities of A and B for variational solutions:
/// `A'(r) = 1/(2 r^3) int_{B_r} rho x - 1/r^4 int_{dB_r} rho x y^2`,
/// `B'(r) = 1/r^3 int_{B_r} rho y - 1/r^4 int_{dB_r} rho y (y^2 - x^2)`.
pub fn ab_derivative_identity(
    field: &SampledField,
    r: f64,
    settings: &QuadSettings,
) -> Result<(f64, f64), DiagError> {
    let s = QuadSettings { tol: settings.tol * r.powi(3), ..*settings };
    let ax = bulk(field, r, &s, |smp, x, _| field.rho(smp.phase) * x)?;
    let ay = bulk(field, r, &s, |smp, _, y| field.rho(smp.phase) * y)?;
    let sb = QuadSettings { tol: settings.tol * r.powi(4), ..*settings };
    let bx = boundary(field, r, &sb, |smp, x, y, _| field.rho(smp.phase) * x * y * y)?;
    let by = boundary(field, r, &sb, |smp, x, y, _| {
        field.rho(smp.phase) * y * (y * y - x * x)
    })?;
    Ok((
        ax / (2.0 * r.powi(3)) - bx / r.powi(4),
        ay / r.powi(3) - by / r.powi(4),
    ))
}

/// Result of [`weiss_m`]: the M trace with derivative identity residuals.
#[derive(Debug, Clone)]
pub struct WeissReport {
    pub trace: FunctionalTrace,
    /// Right side of the derivative formula, per radius.
    pub boundary_formula: Vec<f64>,
    /// Richardson-extrapolated finite-difference derivative of M, per radius.
    pub fd_derivative: Vec<f64>,
}

fn weiss_m_at(field: &SampledField, r: f64, settings: &QuadSettings) -> Result<f64, DiagError> {
    let sb = QuadSettings { tol: settings.tol * r.powi(3), ..*settings };
    let off = field.weight_offset;
    let i = bulk(field, r, &sb, |smp, _, y| {
        let g = smp.grad;
        g[0] * g[0] + g[1] * g[1] - (y + off) * field.rho(smp.phase)
    })?;
    let sj = QuadSettings { tol: settings.tol * r.powi(4), ..*settings };
    let j = boundary(field, r, &sj, |smp, _, _, _| smp.u * smp.u)?;
    Ok(i / r.powi(3) - 1.5 * j / r.powi(4))
}

/// Weiss-type boundary adjusted energy
/// `M(r) = r^-3 int_{B_r}(|grad u|^2 - y rho chi) - (3/2) r^-4 int_{dB_r} u^2`,
/// with the derivative identity
/// `M'(r) = (2/r^3) int_{dB_r} (grad u . nu - (3/2) u / r)^2` evaluated by
/// boundary quadrature and compared against a Richardson-refined centered
/// difference of the trace. The identity holds for domain-variational
/// solutions; on other inputs the residual column measures the defect.
pub fn weiss_m(
    field: &SampledField,
    radii: &[f64],
    settings: &QuadSettings,
) -> Result<WeissReport, DiagError> {
    check_radii(field, radii)?;
    // The finite-difference stencil reaches past the largest radius.
    let delta = 0.02;
    if radii[0] * (1.0 + delta) > field.radius * (1.0 + 1e-12) {
        return Err(DiagError::Domain(
            "radius schedule leaves no room for the derivative stencil".into(),
        ));
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut formula = Vec::with_capacity(radii.len());
    let mut fd = Vec::with_capacity(radii.len());
    for &r in radii {
        values.push(weiss_m_at(field, r, settings)?);
        let sb = QuadSettings { tol: settings.tol * r.powi(3), ..*settings };
        let b = boundary(field, r, &sb, |smp, x, y, _| {
            let nu = [x / r, y / r];
            let d = smp.grad[0] * nu[0] + smp.grad[1] * nu[1] - 1.5 * smp.u / r;
            d * d
        })?;
        formula.push(2.0 * b / r.powi(3));
        // Richardson centered difference: D(h) = (M(r+h) - M(r-h)) / 2h.
        let d_at = |h: f64| -> Result<f64, DiagError> {
            Ok((weiss_m_at(field, r + h, settings)? - weiss_m_at(field, r - h, settings)?)
                / (2.0 * h))
        };
        let d1 = d_at(delta * r)?;
        let d2 = d_at(0.5 * delta * r)?;
        fd.push((4.0 * d2 - d1) / 3.0);
    }
    let mut trace = FunctionalTrace::new(radii.to_vec(), values);
    trace.identity_residuals =
        Some(fd.iter().zip(formula.iter()).map(|(a, b)| a - b).collect());
    Ok(WeissReport { trace, boundary_formula: formula, fd_derivative: fd })
}

/// ACF product report.
#[derive(Debug, Clone)]
pub struct AcfReport {
    pub trace: FunctionalTrace,
    /// Largest increase along the decreasing-radius trace; the continuum
    /// functional is non-increasing along it.
    pub max_violation: f64,
}

/// Alt-Caffarelli-Friedman product
/// `Phi(r) = (r^-2 int_{B_r} |grad u1|^2)(r^-2 int_{B_r} |grad u2|^2)`
/// for nonnegative subharmonic factors with disjoint supports.
pub fn acf_phi(
    u1: &SampledField,
    u2: &SampledField,
    radii: &[f64],
    settings: &QuadSettings,
) -> Result<AcfReport, DiagError> {
    check_radii(u1, radii)?;
    check_radii(u2, radii)?;
    // Disjoint-support and sign preconditions on a coarse polar net.
    let (tlo, thi) = theta_span(u1.domain);
    let scale = sample_scale(u1, radii[0]).max(sample_scale(u2, radii[0]));
    for i in 1..=12 {
        let r = radii[0] * i as f64 / 12.0;
        for j in 0..48 {
            let th = tlo + (thi - tlo) * j as f64 / 48.0;
            let (x, y) = (r * th.cos(), r * th.sin());
            let a = u1.sample(x, y).u;
            let b = u2.sample(x, y).u;
            if a < -1e-10 * scale || b < -1e-10 * scale {
                return Err(DiagError::Precondition(format!(
                    "factor negative at ({x:.4}, {y:.4}): u1={a:e}, u2={b:e}"
                )));
            }
            if a.abs() * b.abs() > 1e-10 * scale * scale {
                return Err(DiagError::Precondition(format!(
                    "supports overlap at ({x:.4}, {y:.4}): u1*u2 = {:e}",
                    a * b
                )));
            }
        }
    }
    let mut vals = Vec::with_capacity(radii.len());
    for &r in radii {
        let s = QuadSettings { tol: settings.tol * r * r, ..*settings };
        let e1 = bulk(u1, r, &s, |smp, _, _| smp.grad[0] * smp.grad[0] + smp.grad[1] * smp.grad[1])?;
        let e2 = bulk(u2, r, &s, |smp, _, _| smp.grad[0] * smp.grad[0] + smp.grad[1] * smp.grad[1])?;
        vals.push(e1 / (r * r) * (e2 / (r * r)));
    }
    let trace = FunctionalTrace::new(radii.to_vec(), vals);
    let max_violation = trace.max_step_increase();
    Ok(AcfReport { trace, max_violation })
}

fn sample_scale(field: &SampledField, r: f64) -> f64 {
    let mut m = 0.0f64;
    for i in 1..=6 {
        let rr = r * i as f64 / 6.0;
        for j in 0..16 {
            let th = 2.0 * PI * j as f64 / 16.0;
            let s = field.sample(rr * th.cos(), rr * th.sin());
            m = m.max(s.u.abs());
        }
    }
    m.max(1e-300)
}

/// Energy-bound margins for monotone-type fields.
#[derive(Debug, Clone)]
pub struct EnergyBoundReport {
    pub radii: Vec<f64>,
    /// `RHS - LHS` per radius; nonnegative means the bound holds.
    pub margins: Vec<f64>,
    pub min_margin: f64,
}

/// Pre-limit energy bound for fields with `|u_x| <= M |u_y|`:
///
/// `r^-2 int |grad u|^2  <=  B(r) + r^-2 [ (2M+1) int_{|u_x|>=|u_y|} |u_x u_y|
///                                        + 2 int_{|u_x|<|u_y|} |u_x u_y| ]`.
///
/// When `u_x u_y` carries a single sign the bracket collapses to
/// `max{2M+1, 2} |A(r)| r^2`, the form the bound is usually quoted in; the
/// split form is what the slope hypothesis actually yields and is the one
/// verified here.
pub fn energy_bound_check(
    field: &SampledField,
    radii: &[f64],
    m_lip: f64,
    settings: &QuadSettings,
) -> Result<EnergyBoundReport, DiagError> {
    check_radii(field, radii)?;
    // Sign conditions at samples: u_y single-signed, |u_x| <= M |u_y|.
    let (tlo, thi) = theta_span(field.domain);
    let mut sign = 0.0f64;
    for i in 1..=12 {
        let r = radii[0] * i as f64 / 12.0;
        for j in 0..48 {
            let th = tlo + (thi - tlo) * j as f64 / 48.0;
            let (x, y) = (r * th.cos(), r * th.sin());
            let g = field.sample(x, y).grad;
            if g[0].abs() > m_lip * g[1].abs() + 1e-12 {
                return Err(DiagError::Precondition(format!(
                    "slope condition |u_x| <= M |u_y| fails at sample ({x:.4}, {y:.4}): |u_x|={:e}, |u_y|={:e}, M={m_lip}",
                    g[0].abs(),
                    g[1].abs()
                )));
            }
            if g[1].abs() > 1e-12 {
                if sign == 0.0 {
                    sign = g[1].signum();
                } else if sign * g[1] < 0.0 {
                    return Err(DiagError::Precondition(format!(
                        "u_y changes sign at sample ({x:.4}, {y:.4})"
                    )));
                }
            }
        }
    }
    let mut margins = Vec::with_capacity(radii.len());
    for &r in radii {
        let s = QuadSettings { tol: settings.tol * r * r, ..*settings };
        let lhs = bulk(field, r, &s, |smp, _, _| {
            smp.grad[0] * smp.grad[0] + smp.grad[1] * smp.grad[1]
        })? / (r * r);
        let b = bulk(field, r, &s, |smp, _, _| {
            smp.grad[1] * smp.grad[1] - smp.grad[0] * smp.grad[0]
        })? / (r * r);
        // Partition integrals; the partition boundary is tracked as a cut.
        let g_steep = |rr: f64, th: f64| {
            let smp = field.sample(rr * th.cos(), rr * th.sin());
            let (ux, uy) = (smp.grad[0], smp.grad[1]);
            if ux.abs() >= uy.abs() {
                ((ux * uy).abs(), 1u8)
            } else {
                (0.0, 0u8)
            }
        };
        let g_flat = |rr: f64, th: f64| {
            let smp = field.sample(rr * th.cos(), rr * th.sin());
            let (ux, uy) = (smp.grad[0], smp.grad[1]);
            if ux.abs() < uy.abs() {
                ((ux * uy).abs(), 1u8)
            } else {
                (0.0, 0u8)
            }
        };
        let i_steep = polar_bulk(&g_steep, r, field.domain, &field.theta_breakpoints, &s)?;
        let i_flat = polar_bulk(&g_flat, r, field.domain, &field.theta_breakpoints, &s)?;
        let rhs = b + ((2.0 * m_lip + 1.0) * i_steep + 2.0 * i_flat) / (r * r);
        margins.push(rhs - lhs);
    }
    let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(EnergyBoundReport { radii: radii.to_vec(), margins, min_margin })
}

/// Gravity-current functional report.
#[derive(Debug, Clone)]
pub struct GcReport {
    pub trace: FunctionalTrace,
    /// True when the Bernoulli constant vanishes (stagnation regime).
    pub stagnation_regime: bool,
    pub formula: Vec<f64>,
    pub fd_derivative: Vec<f64>,
}

fn gc_m_at(field: &SampledField, r: f64, q: f64, settings: &QuadSettings) -> Result<f64, DiagError> {
    if q != 0.0 {
        let s = QuadSettings { tol: settings.tol * r * r, ..*settings };
        let i = bulk(field, r, &s, |smp, _, _| {
            let g = smp.grad;
            g[0] * g[0] + g[1] * g[1] - q * field.rho(smp.phase)
        })? / (r * r);
        let sj = QuadSettings { tol: settings.tol * r.powi(3), ..*settings };
        let j = boundary(field, r, &sj, |smp, _, _, _| smp.u * smp.u)? / r.powi(3);
        Ok(i - j)
    } else {
        let s = QuadSettings { tol: settings.tol * r.powi(3), ..*settings };
        let i = bulk(field, r, &s, |smp, _, y| {
            let g = smp.grad;
            g[0] * g[0] + g[1] * g[1] - y * field.rho(smp.phase)
        })? / r.powi(3);
        let sj = QuadSettings { tol: settings.tol * r.powi(4), ..*settings };
        let j = boundary(field, r, &sj, |smp, _, _, _| smp.u * smp.u)? / r.powi(4);
        Ok(i - 1.5 * j)
    }
}

/// Gravity-current monotonicity functional on the half-disk.
///
/// For `Q != 0`: `M_gc = r^-2 int (|grad u|^2 - Q rho chi) - r^-3 int_{arc} u^2` with
/// `M_gc' = (2/r^2) int_{arc} (grad u . nu - u/r)^2 - (3/r^3) int y rho chi
///          + (1/r^2) int_{arc} y rho chi`.
/// For `Q = 0`: `M_gc = r^-3 int (|grad u|^2 - y rho chi) - (3/2) r^-4 int_{arc} u^2`
/// with `M_gc' = (2/r^3) int_{arc} (grad u . nu - (3/2) u/r)^2`.
///
/// The `Q != 0` derivative carries the arc term `r^-2 int y rho chi`: redoing
/// the elimination of the Bernoulli bulk term shows it survives, and without
/// it the identity fails on the exact solution `u = alpha y` (whose trace is
/// constant `-Q rho_- pi/2`).
pub fn gc_m(
    field: &SampledField,
    radii: &[f64],
    settings: &QuadSettings,
) -> Result<GcReport, DiagError> {
    check_radii(field, radii)?;
    if field.domain != DiskDomain::LowerHalf {
        return Err(DiagError::Domain("gc_m requires a half-disk field".into()));
    }
    let q = field
        .bernoulli_q
        .ok_or_else(|| DiagError::Domain("gc_m requires bernoulli_q".into()))?;
    // u <= 0 on samples, u = 0 on the flat top T.
    let scale = sample_scale(field, radii[0]);
    for i in 0..=16 {
        let x = field.radius * (i as f64 / 16.0 * 2.0 - 1.0);
        let u = field.sample(x, 0.0).u;
        if u.abs() > 1e-9 * scale {
            return Err(DiagError::Precondition(format!("u != 0 on T at x = {x:.4}: {u:e}")));
        }
    }
    for i in 1..=12 {
        let r = radii[0] * i as f64 / 12.0;
        for j in 1..48 {
            let th = PI + PI * j as f64 / 48.0;
            let (x, y) = (r * th.cos(), r * th.sin());
            let u = field.sample(x, y).u;
            if u > 1e-9 * scale {
                return Err(DiagError::Precondition(format!(
                    "u > 0 at sample ({x:.4}, {y:.4}): {u:e}"
                )));
            }
        }
    }
    let delta = 0.02;
    if radii[0] * (1.0 + delta) > field.radius * (1.0 + 1e-12) {
        return Err(DiagError::Domain(
            "radius schedule leaves no room for the derivative stencil".into(),
        ));
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut formula = Vec::with_capacity(radii.len());
    let mut fd = Vec::with_capacity(radii.len());
    for &r in radii {
        values.push(gc_m_at(field, r, q, settings)?);
        let f = if q != 0.0 {
            let sb = QuadSettings { tol: settings.tol * r * r, ..*settings };
            let b = boundary(field, r, &sb, |smp, x, y, _| {
                let d = (smp.grad[0] * x + smp.grad[1] * y) / r - smp.u / r;
                d * d
            })?;
            let bulk_y = bulk(field, r, &sb, |smp, _, y| y * field.rho(smp.phase))?;
            let arc_y = boundary(field, r, &sb, |smp, _, y, _| y * field.rho(smp.phase))?;
            2.0 * b / (r * r) - 3.0 * bulk_y / r.powi(3) + arc_y / (r * r)
        } else {
            let sb = QuadSettings { tol: settings.tol * r.powi(3), ..*settings };
            let b = boundary(field, r, &sb, |smp, x, y, _| {
                let d = (smp.grad[0] * x + smp.grad[1] * y) / r - 1.5 * smp.u / r;
                d * d
            })?;
            2.0 * b / r.powi(3)
        };
        formula.push(f);
        let d_at = |h: f64| -> Result<f64, DiagError> {
            Ok((gc_m_at(field, r + h, q, settings)? - gc_m_at(field, r - h, q, settings)?)
                / (2.0 * h))
        };
        let d1 = d_at(delta * r)?;
        let d2 = d_at(0.5 * delta * r)?;
        fd.push((4.0 * d2 - d1) / 3.0);
    }
    let mut trace = FunctionalTrace::new(radii.to_vec(), values);
    trace.identity_residuals =
        Some(fd.iter().zip(formula.iter()).map(|(a, b)| a - b).collect());
    Ok(GcReport { trace, stagnation_regime: q == 0.0, formula, fd_derivative: fd })
}

/// Blowup-limit phase configurations for the gravity-current density formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GcChi {
    /// Heavier fluid fills the half-disk.
    AllMinus,
    /// Lighter fluid fills the half-disk.
    AllPlus,
    /// chi_minus is the support of the Stokes corner rotated by `rotation`.
    StokesCone { rotation: f64 },
}

/// Quadrature of the gravity-current density formula:
/// `M_gc(0+) = -int_{B_1^-} y (rho_+ chi_0^+ + rho_- chi_0^-)` in the
/// stagnation regime, and `-Q int_{B_1^-} (rho_+ chi_0^+ + rho_- chi_0^-)`
/// when `Q != 0`.
pub fn gc_density_value(
    chi: GcChi,
    rho_plus: f64,
    rho_minus: f64,
    q: f64,
    settings: &QuadSettings,
) -> Result<f64, DiagError> {
    let (lo, hi) = (crate::oracles::CONE_LO, crate::oracles::CONE_HI);
    let rho_at = move |th: f64| -> f64 {
        match chi {
            GcChi::AllMinus => rho_minus,
            GcChi::AllPlus => rho_plus,
            GcChi::StokesCone { rotation } => {
                let t = (th + rotation).rem_euclid(2.0 * PI);
                if t > lo && t < hi {
                    rho_minus
                } else {
                    rho_plus
                }
            }
        }
    };
    let breaks: Vec<f64> = match chi {
        GcChi::StokesCone { rotation } => {
            vec![(lo - rotation).rem_euclid(2.0 * PI), (hi - rotation).rem_euclid(2.0 * PI)]
        }
        _ => Vec::new(),
    };
    let g = |r: f64, th: f64| {
        let rho = rho_at(th);
        let w = if q != 0.0 { -q * rho } else { -r * th.sin() * rho };
        (w, (rho == rho_minus) as u8)
    };
    polar_bulk(&g, 1.0, DiskDomain::LowerHalf, &breaks, settings)
}

/// Scaling regime of a blowup sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlowupRegime {
    /// Internal-front scaling `u(r ·) / r^{3/2}`.
    Front,
    /// Gravity-current scaling: `u(r ·)/r` if `q != 0`, else `u(r ·)/r^{3/2}`.
    Gc { q: f64 },
}

/// Rescale the field about its center at radius `r_m` per the regime's
/// exponent and estimate the Lipschitz seminorm of the output on its disk.
pub fn blowup_sample(field: &SampledField, r_m: f64, regime: BlowupRegime) -> (SampledField, f64) {
    let degree = match regime {
        BlowupRegime::Front => 1.5,
        BlowupRegime::Gc { q } => {
            if q != 0.0 {
                1.0
            } else {
                1.5
            }
        }
    };
    let out = field.rescaled(r_m, degree);
    let (tlo, thi) = theta_span(out.domain);
    let mut lip = 0.0f64;
    for i in 1..=24 {
        let r = i as f64 / 24.0;
        for j in 0..64 {
            let th = tlo + (thi - tlo) * j as f64 / 64.0;
            let g = out.sample(r * th.cos(), r * th.sin()).grad;
            lip = lip.max(g[0].hypot(g[1]));
        }
    }
    (out, lip)
}

/// Largest constant C with `u >= C |z|^mu cos(mu (theta - pi/2))` on the
/// sampled truncated cone about the upward axis.
///
/// The cone has half-aperture `pi / (2 mu)` unless `aperture` restricts it.
/// Positive C certifies the Oddson bound shape on the sampled region.
pub fn oddson_check(
    field: &SampledField,
    mu: f64,
    r_max: f64,
    aperture: Option<f64>,
) -> Result<f64, DiagError> {
    let half = aperture.map(|a| a / 2.0).unwrap_or(PI / (2.0 * mu));
    if half > PI / (2.0 * mu) + 1e-12 {
        return Err(DiagError::Domain(
            "aperture exceeds the cone on which the comparison function is positive".into(),
        ));
    }
    let mut c = f64::INFINITY;
    let n_r = 64;
    let n_t = 65;
    for i in 1..=n_r {
        // Log-spaced radii over roughly two decades.
        let r = r_max * (0.01f64).powf(1.0 - i as f64 / n_r as f64);
        for j in 0..n_t {
            let th = PI / 2.0 - half + 2.0 * half * (j as f64 + 0.5) / n_t as f64;
            let (x, y) = (r * th.cos(), r * th.sin());
            let u = field.sample(x, y).u;
            if u <= 0.0 {
                return Err(DiagError::Precondition(format!(
                    "nonpositive interior sample at ({x:.5}, {y:.5}): u = {u:e}"
                )));
            }
            let w = r.powf(mu) * (mu * (th - PI / 2.0)).cos();
            if w > 0.0 {
                c = c.min(u / w);
            }
        }
    }
    Ok(c)
}

fn variational_integrand(
    field: &SampledField,
    tf: &TestField,
    weight_q: f64,
    include_chi: bool,
    x: f64,
    y: f64,
) -> (f64, u8) {
    let smp = field.sample(x, y);
    let phi = (tf.phi)(x, y);
    let d = (tf.dphi)(x, y);
    let g = smp.grad;
    let div = d[0][0] + d[1][1];
    let dquad = d[0][0] * g[0] * g[0]
        + d[0][1] * g[0] * g[1]
        + d[1][0] * g[1] * g[0]
        + d[1][1] * g[1] * g[1];
    let mut v = (g[0] * g[0] + g[1] * g[1]) * div - 2.0 * dquad;
    if include_chi {
        let w = y + field.weight_offset + weight_q;
        // div((y + Q) phi) = (y + Q) div(phi) + phi_2
        v -= field.rho(smp.phase) * (w * div + phi[1]);
    }
    (v, smp.phase as u8)
}

/// Bulk residual of the domain-variational identity, one value per test field.
///
/// In the front regime the weight is `y`; in the gravity-current regime it is
/// `y + Q` and test fields must be tangential on T. A residual at quadrature
/// scale certifies the variational property at the sampled resolution.
/// `include_chi = false` drops the phase term, for harmonic-field checks
/// against divergence-free test fields.
pub fn variational_residual(
    field: &SampledField,
    test_fields: &[TestField],
    include_chi: bool,
    settings: &QuadSettings,
) -> Result<Vec<f64>, DiagError> {
    let gc = field.domain == DiskDomain::LowerHalf;
    let weight_q = if gc {
        field
            .bernoulli_q
            .ok_or_else(|| DiagError::Domain("gravity-current residual requires bernoulli_q".into()))?
    } else {
        0.0
    };
    let mut out = Vec::with_capacity(test_fields.len());
    for tf in test_fields {
        // Support / tangency contracts.
        let reach = tf.support_center[0].hypot(tf.support_center[1]) + tf.support_radius;
        if reach > field.radius * (1.0 + 1e-12) {
            return Err(DiagError::Precondition(format!(
                "test field support (reach {reach:.4}) leaves the sampled disk of radius {}",
                field.radius
            )));
        }
        if gc {
            if tf.support_center[1] > 0.0 {
                return Err(DiagError::Precondition(
                    "test field support must lie in the lower half-plane".into(),
                ));
            }
            for i in 0..=32 {
                let x = tf.support_center[0]
                    + tf.support_radius * (2.0 * i as f64 / 32.0 - 1.0);
                let p = (tf.phi)(x, 0.0);
                if p[1].abs() > 1e-12 {
                    return Err(DiagError::Precondition(format!(
                        "test field is not tangential on T at x = {x:.4}: phi_2 = {:e}",
                        p[1]
                    )));
                }
            }
        } else {
            // Compact support in the open disk.
            for i in 0..=32 {
                let th = 2.0 * PI * i as f64 / 32.0;
                let p = (tf.phi)(field.radius * th.cos(), field.radius * th.sin());
                if p[0].abs() + p[1].abs() > 1e-12 {
                    return Err(DiagError::Precondition(
                        "test field does not vanish on the disk boundary".into(),
                    ));
                }
            }
        }
        let g = |r: f64, th: f64| {
            let (x, y) = (r * th.cos(), r * th.sin());
            variational_integrand(field, tf, weight_q, include_chi, x, y)
        };
        out.push(polar_bulk(&g, field.radius, field.domain, &field.theta_breakpoints, settings)?);
    }
    Ok(out)
}

/// Fixed-rule variant of [`variational_residual`] for refinement studies:
/// `n x 2n` GL3 panels per sector.
pub fn variational_residual_fixed(
    field: &SampledField,
    tf: &TestField,
    include_chi: bool,
    n: usize,
) -> f64 {
    let weight_q = if field.domain == DiskDomain::LowerHalf {
        field.bernoulli_q.unwrap_or(0.0)
    } else {
        0.0
    };
    let g = |r: f64, th: f64| {
        let (x, y) = (r * th.cos(), r * th.sin());
        variational_integrand(field, tf, weight_q, include_chi, x, y).0
    };
    polar_bulk_fixed(&g, field.radius, field.domain, &field.theta_breakpoints, n, 2 * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{FieldSample, Phase};
    use crate::oracles::ExactField;

    fn plane_field(radius: f64) -> SampledField {
        // u = y with labels by sign of y.
        SampledField::from_fn(radius, DiskDomain::Full, 1.0, 1.0, |_, y| FieldSample {
            u: y,
            grad: [0.0, 1.0],
            phase: if y < 0.0 { Phase::Minus } else { Phase::Plus },
        })
    }

    fn stokes_field(radius: f64) -> SampledField {
        SampledField::from_exact(
            &ExactField::stokes_corner(0.0),
            [0.0, 0.0],
            radius,
            DiskDomain::Full,
            0.0,
            1.0,
        )
    }

    #[test]
    fn ab_of_plane_wave() {
        // u = y: A == 0, B == pi.
        let f = plane_field(1.0);
        let radii = geometric_radii(1.0, 6);
        let (a, b) = functional_ab(&f, &radii, &QuadSettings::default()).unwrap();
        for k in 0..radii.len() {
            assert!(a.values[k].abs() < 1e-9);
            assert!((b.values[k] - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn ab_of_saddle() {
        // u = xy: odd integrands, A == B == 0.
        let f = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, |x, y| FieldSample {
            u: x * y,
            grad: [y, x],
            phase: if x * y < 0.0 { Phase::Minus } else { Phase::Plus },
        });
        let radii = geometric_radii(1.0, 5);
        let (a, b) = functional_ab(&f, &radii, &QuadSettings::default()).unwrap();
        for k in 0..radii.len() {
            assert!(a.values[k].abs() < 1e-9, "A = {}", a.values[k]);
            assert!(b.values[k].abs() < 1e-9, "B = {}", b.values[k]);
        }
    }

    #[test]
    fn ab_of_stokes_corner() {
        // A vanishes by symmetry; B is linear in r with slope sqrt(3)/6
        // (one-time quadrature values, frozen: the 3/2-homogeneity scales the
        // r^-2-normalized densities linearly in r).
        let f = stokes_field(1.0);
        let radii = geometric_radii(1.0, 9);
        let (a, b) = functional_ab(&f, &radii, &QuadSettings::default()).unwrap();
        let slope = 3f64.sqrt() / 6.0;
        for k in 0..radii.len() {
            assert!(a.values[k].abs() < 1e-9, "A = {}", a.values[k]);
            assert!(
                (b.values[k] - slope * radii[k]).abs() < 1e-9,
                "B({}) = {}",
                radii[k],
                b.values[k]
            );
        }
        // Lipschitz continuity of A and B via the explicit derivative
        // formulas as an independent quadrature.
        let (ap, bp) = ab_derivative_identity(&f, 0.5, &QuadSettings::default()).unwrap();
        assert!(ap.abs() < 1e-8, "A' = {ap}");
        assert!((bp - slope).abs() < 1e-8, "B' = {bp}");
    }

    #[test]
    fn weiss_m_constant_on_stokes_corner() {
        // M(ubar; r) = 1/sqrt(3), constant by 3/2-homogeneity.
        let f = stokes_field(1.3);
        let radii = geometric_radii(1.0, 9);
        let rep = weiss_m(&f, &radii, &QuadSettings::default()).unwrap();
        let expect = 1.0 / 3f64.sqrt();
        for (k, v) in rep.trace.values.iter().enumerate() {
            assert!((v - expect).abs() < 1e-8, "M({}) = {v}", radii[k]);
        }
        for k in 0..radii.len() {
            assert!(rep.boundary_formula[k].abs() < 1e-8);
            assert!(rep.fd_derivative[k].abs() < 1e-6);
        }
    }

    #[test]
    fn weiss_identity_on_shifted_corner() {
        // A horizontally shifted corner is still an exact variational
        // solution of the same problem, but no longer homogeneous about the
        // origin, so M' != 0 and the derivative identity is non-trivial.
        let shift = 0.05;
        let base = ExactField::stokes_corner(0.0);
        let f = SampledField::from_exact(
            &base,
            [-shift, 0.0],
            0.7,
            DiskDomain::Full,
            0.0,
            1.0,
        );
        let radii: Vec<f64> = geometric_radii(0.6, 6);
        let rep = weiss_m(&f, &radii, &QuadSettings::with_tol(1e-9)).unwrap();
        for k in 0..radii.len() {
            let rel = (rep.fd_derivative[k] - rep.boundary_formula[k]).abs()
                / rep.boundary_formula[k].abs().max(1e-4);
            assert!(
                rel < 1e-4,
                "r = {}: fd {} vs formula {}",
                radii[k],
                rep.fd_derivative[k],
                rep.boundary_formula[k]
            );
        }
    }

    #[test]
    fn acf_on_plane_pair() {
        // u1 = y+, u2 = y-: each factor pi/2, product pi^2/4.
        let u1 = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, |_, y| FieldSample {
            u: y.max(0.0),
            grad: if y > 0.0 { [0.0, 1.0] } else { [0.0, 0.0] },
            phase: if y > 0.0 { Phase::Plus } else { Phase::Minus },
        });
        let u2 = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, |_, y| FieldSample {
            u: (-y).max(0.0),
            grad: if y < 0.0 { [0.0, -1.0] } else { [0.0, 0.0] },
            phase: if y < 0.0 { Phase::Plus } else { Phase::Minus },
        });
        let radii = geometric_radii(1.0, 6);
        let rep = acf_phi(&u1, &u2, &radii, &QuadSettings::default()).unwrap();
        for v in &rep.trace.values {
            assert!((v - PI * PI / 4.0).abs() < 1e-8);
        }
        assert!(rep.max_violation < 1e-8);
    }

    #[test]
    fn acf_zero_factor_and_violation_reporting() {
        let u1 = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, |x, y| {
            let f = ExactField::stokes_corner(0.0);
            FieldSample { u: -f.value(x, y), grad: { let g = f.gradient(x, y); [-g[0], -g[1]] }, phase: f.phase(x, y) }
        })
        .with_breakpoints(vec![crate::oracles::CONE_LO, crate::oracles::CONE_HI]);
        let zero = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, |_, _| FieldSample {
            u: 0.0,
            grad: [0.0, 0.0],
            phase: Phase::Plus,
        });
        let radii = geometric_radii(1.0, 5);
        let rep = acf_phi(&u1, &zero, &radii, &QuadSettings::default()).unwrap();
        for v in &rep.trace.values {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn acf_rejects_overlapping_supports() {
        let u1 = plane_field(1.0);
        let u2 = plane_field(1.0);
        let radii = geometric_radii(1.0, 4);
        assert!(matches!(
            acf_phi(&u1, &u2, &radii, &QuadSettings::default()),
            Err(DiagError::Precondition(_))
        ));
    }

    #[test]
    fn energy_bound_on_plane_wave_is_tight() {
        // u = y with M = 0: LHS = pi, RHS = pi, margin 0.
        let f = plane_field(1.0);
        let radii = geometric_radii(1.0, 5);
        let rep = energy_bound_check(&f, &radii, 0.0, &QuadSettings::default()).unwrap();
        for &m in &rep.margins {
            assert!(m.abs() < 1e-8, "margin {m}");
        }
    }

    #[test]
    fn energy_bound_on_stokes_corner() {
        let f = stokes_field(1.0);
        let radii = geometric_radii(1.0, 7);
        let rep = energy_bound_check(&f, &radii, 3f64.sqrt(), &QuadSettings::default()).unwrap();
        assert!(rep.min_margin > 0.0, "min margin {}", rep.min_margin);
        // Margin per the exact values: (sqrt(3)/6 + 1/6 - pi/9) r.
        let expect = 3f64.sqrt() / 6.0 + 1.0 / 6.0 - PI / 9.0;
        for (k, &m) in rep.margins.iter().enumerate() {
            assert!((m - expect * radii[k]).abs() < 1e-7, "margin {m} at r={}", radii[k]);
        }
    }

    #[test]
    fn energy_bound_rejects_horizontal_shear() {
        // u = x violates |u_x| <= M |u_y| for every finite M.
        let f = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, |x, _| FieldSample {
            u: x,
            grad: [1.0, 0.0],
            phase: if x < 0.0 { Phase::Minus } else { Phase::Plus },
        });
        let radii = geometric_radii(1.0, 4);
        assert!(matches!(
            energy_bound_check(&f, &radii, 10.0, &QuadSettings::default()),
            Err(DiagError::Precondition(_))
        ));
    }

    #[test]
    fn gc_density_values_lemma() {
        // (rho+, rho-) = (1, 2), stagnation regime.
        let s = QuadSettings::with_tol(1e-10);
        let v1 = gc_density_value(GcChi::AllMinus, 1.0, 2.0, 0.0, &s).unwrap();
        assert!((v1 - 2.0 * 2.0 / 3.0).abs() < 1e-9);
        let v2 = gc_density_value(GcChi::AllPlus, 1.0, 2.0, 0.0, &s).unwrap();
        assert!((v2 - 2.0 * 1.0 / 3.0).abs() < 1e-9);
        let v3 = gc_density_value(GcChi::StokesCone { rotation: 0.0 }, 1.0, 2.0, 0.0, &s).unwrap();
        let expect3 = (2.0 / 3.0 - 1.0 / 3f64.sqrt()) * 1.0 + 2.0 / 3f64.sqrt();
        assert!((v3 - expect3).abs() < 1e-9, "{v3} vs {expect3}");
        let v4 =
            gc_density_value(GcChi::StokesCone { rotation: PI / 6.0 }, 1.0, 2.0, 0.0, &s).unwrap();
        let expect4 = 1.0 / 6.0 + 2.0 / 2.0;
        assert!((v4 - expect4).abs() < 1e-9, "{v4} vs {expect4}");
        // Q != 0 values: -Q rho pi/2.
        let q = -0.3;
        let vm = gc_density_value(GcChi::AllMinus, 1.0, 2.0, q, &s).unwrap();
        assert!((vm - (-q) * 2.0 * PI / 2.0).abs() < 1e-9);
        let vp = gc_density_value(GcChi::AllPlus, 1.0, 2.0, q, &s).unwrap();
        assert!((vp - (-q) * 1.0 * PI / 2.0).abs() < 1e-9);
        // The four stagnation alternatives are pairwise distinct.
        let vals = [v1, v2, v3, v4];
        for i in 0..4 {
            for j in i + 1..4 {
                assert!((vals[i] - vals[j]).abs() > 1e-3, "values {i} and {j} collide");
            }
        }
    }

    #[test]
    fn gc_m_stagnant_configurations() {
        // u == 0, chi- == 1, Q = 0: M_gc(r) = 2 rho_- / 3 for all r.
        let f = SampledField::from_fn(1.1, DiskDomain::LowerHalf, 1.0, 2.0, |_, _| FieldSample {
            u: 0.0,
            grad: [0.0, 0.0],
            phase: Phase::Minus,
        })
        .with_bernoulli_q(0.0);
        let radii = geometric_radii(1.0, 6);
        let rep = gc_m(&f, &radii, &QuadSettings::default()).unwrap();
        assert!(rep.stagnation_regime);
        for v in &rep.trace.values {
            assert!((v - 2.0 * 2.0 / 3.0).abs() < 1e-8);
        }
        for k in 0..radii.len() {
            assert!(rep.formula[k].abs() < 1e-8);
            assert!(rep.fd_derivative[k].abs() < 1e-6);
        }
    }

    #[test]
    fn gc_m_stokes_corner_values() {
        let (rp, rm) = (1.0, 2.0);
        for (rot, expect) in [
            (0.0, (2.0 / 3.0 - 1.0 / 3f64.sqrt()) * rp + rm / 3f64.sqrt()),
            (PI / 6.0, rp / 6.0 + rm / 2.0),
        ] {
            let base = ExactField::stokes_corner(rot);
            let f = SampledField::from_fn(1.1, DiskDomain::LowerHalf, rp, rm, move |x, y| {
                FieldSample { u: base.value(x, y), grad: base.gradient(x, y), phase: base.phase(x, y) }
            })
            .with_bernoulli_q(0.0)
            .with_breakpoints(vec![
                (crate::oracles::CONE_LO - rot).rem_euclid(2.0 * PI),
                (crate::oracles::CONE_HI - rot).rem_euclid(2.0 * PI),
            ]);
            let radii = geometric_radii(1.0, 5);
            let rep = gc_m(&f, &radii, &QuadSettings::default()).unwrap();
            for v in &rep.trace.values {
                assert!((v - expect).abs() < 1e-8, "rot {rot}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn gc_m_linear_shear_q_nonzero() {
        // u = alpha y, chi- == 1, Q = -0.3: M_gc == -Q rho_- pi/2 and the
        // corrected derivative identity holds (both sides vanish).
        let alpha = 0.8;
        let q = -0.3;
        let f = SampledField::from_fn(1.1, DiskDomain::LowerHalf, 1.0, 2.0, move |_, y| {
            FieldSample { u: alpha * y, grad: [0.0, alpha], phase: Phase::Minus }
        })
        .with_bernoulli_q(q);
        let radii = geometric_radii(1.0, 6);
        let rep = gc_m(&f, &radii, &QuadSettings::default()).unwrap();
        assert!(!rep.stagnation_regime);
        for v in &rep.trace.values {
            assert!((v - (-q) * 2.0 * PI / 2.0).abs() < 1e-8, "{v}");
        }
        for k in 0..radii.len() {
            assert!(rep.formula[k].abs() < 1e-7, "formula {}", rep.formula[k]);
            assert!(rep.fd_derivative[k].abs() < 1e-6);
            assert!(rep.trace.identity_residuals.as_ref().unwrap()[k].abs() < 1e-6);
        }
    }

    #[test]
    fn gc_m_rejects_positive_samples() {
        let f = SampledField::from_fn(1.0, DiskDomain::LowerHalf, 1.0, 2.0, |_, y| FieldSample {
            u: -y,
            grad: [0.0, -1.0],
            phase: Phase::Minus,
        })
        .with_bernoulli_q(0.0);
        let radii = geometric_radii(0.9, 4);
        assert!(matches!(gc_m(&f, &radii, &QuadSettings::default()), Err(DiagError::Precondition(_))));
    }

    #[test]
    fn blowup_invariance_of_homogeneous_fields() {
        // Front regime on the Stokes corner: output identical to the input.
        let f = stokes_field(1.0);
        for &rm in &[0.7, 0.25, 0.04] {
            let (out, lip) = blowup_sample(&f, rm, BlowupRegime::Front);
            for &(x, y) in &[(0.3, -0.5), (-0.2, -0.7), (0.1, 0.4)] {
                let a = out.sample(x, y).u;
                let b = f.sample(x, y).u;
                assert!((a - b).abs() < 1e-12, "rm={rm}: {a} vs {b}");
            }
            // sup |grad ubar| on the unit disk is sqrt(1/2).
            assert!(lip <= (0.5f64).sqrt() + 1e-9);
        }
        // gc regime with Q != 0 on u = alpha y.
        let alpha = 1.7;
        let lin = SampledField::from_fn(1.0, DiskDomain::LowerHalf, 1.0, 2.0, move |_, y| {
            FieldSample { u: alpha * y, grad: [0.0, alpha], phase: Phase::Minus }
        });
        let (out, lip) = blowup_sample(&lin, 0.3, BlowupRegime::Gc { q: -0.1 });
        assert!((out.sample(0.2, -0.6).u - alpha * -0.6).abs() < 1e-12);
        assert!((lip - alpha).abs() < 1e-9);
    }

    #[test]
    fn oddson_exact_comparison_function() {
        let mu = 1.25;
        let field = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, move |x, y| {
            let r = x.hypot(y);
            let th = y.atan2(x);
            let u = if r == 0.0 { 0.0 } else { r.powf(mu) * (mu * (th - PI / 2.0)).cos() };
            FieldSample { u, grad: [0.0, 0.0], phase: Phase::Plus }
        });
        let c = oddson_check(&field, mu, 0.9, None).unwrap();
        assert!((c - 1.0).abs() < 1e-9, "c = {c}");
        let field2 = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, move |x, y| {
            let r = x.hypot(y);
            let th = y.atan2(x);
            let u = if r == 0.0 { 0.0 } else { 2.0 * r.powf(mu) * (mu * (th - PI / 2.0)).cos() };
            FieldSample { u, grad: [0.0, 0.0], phase: Phase::Plus }
        });
        let c2 = oddson_check(&field2, mu, 0.9, None).unwrap();
        assert!((c2 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn oddson_rejects_nonpositive_samples() {
        let field = plane_field(1.0);
        // u = y is zero on the x-axis but positive in the upper cone; shrink
        // to a field that is negative somewhere in the cone instead.
        let neg = SampledField::from_fn(1.0, DiskDomain::Full, 1.0, 1.0, |x, y| FieldSample {
            u: -y.abs() + 0.001 * x,
            grad: [0.0, 0.0],
            phase: Phase::Plus,
        });
        assert!(oddson_check(&neg, 1.25, 0.9, None).is_err());
        assert!(oddson_check(&field, 1.25, 0.9, Some(1.0)).is_ok());
    }

    #[test]
    fn variational_residual_of_stokes_corner_refines_to_zero() {
        let f = stokes_field(1.0);
        let tf = TestField::bump([0.1, -0.45], 0.4, [0.7, -0.4]);
        let r2 = variational_residual_fixed(&f, &tf, true, 2).abs();
        let r8 = variational_residual_fixed(&f, &tf, true, 8).abs();
        assert!(r8 < r2 / 4.0, "r2 = {r2:e}, r8 = {r8:e}");
        let adaptive =
            variational_residual(&f, &[tf], true, &QuadSettings::with_tol(1e-10)).unwrap();
        assert!(adaptive[0].abs() < 1e-8, "adaptive residual {:e}", adaptive[0]);
    }

    #[test]
    fn variational_residual_harmonic_divergence_free() {
        // u = y, divergence-free test field, chi term disabled: the integrand
        // is an exact divergence and the residual vanishes.
        let f = plane_field(1.0);
        let tf = TestField::divergence_free_bump([0.2, 0.1], 0.5, 1.3);
        let res = variational_residual(&f, &[tf], false, &QuadSettings::with_tol(1e-10)).unwrap();
        assert!(res[0].abs() < 1e-9, "residual {:e}", res[0]);
    }

    #[test]
    fn variational_residual_rejects_non_tangential_gc_test_field() {
        let f = SampledField::from_fn(1.0, DiskDomain::LowerHalf, 1.0, 2.0, |_, y| FieldSample {
            u: y,
            grad: [0.0, 1.0],
            phase: Phase::Minus,
        })
        .with_bernoulli_q(-0.2);
        // Bump centered on T with a vertical component: violates phi . nu = 0.
        let tf = TestField::bump([0.0, 0.0], 0.4, [0.0, 1.0]);
        assert!(matches!(
            variational_residual(&f, &[tf], true, &QuadSettings::default()),
            Err(DiagError::Precondition(_))
        ));
    }

    #[test]
    fn trace_csv_has_fixed_columns() {
        let t = FunctionalTrace::new(vec![1.0, 0.5], vec![2.0, 1.0]);
        let csv = t.to_csv();
        assert!(csv.starts_with("r,value,derivative_estimate,identity_residual\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}

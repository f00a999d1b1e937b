//! Free-boundary diagnostics functionals on sampled fields.
//!
//! Every functional here consumes a [`SampledField`] — a scalar field with
//! gradients and two-phase labels on a disk or half-disk — and measures one of
//! the analytical quantities used to classify blowup limits: the mean energy
//! densities A and B, the Weiss-type boundary adjusted energy M, the ACF
//! product, the gravity-current functional M_gc, Oddson cone bounds, and
//! domain-variational residuals. The functionals only measure; they never
//! feed back into the solver.

mod field;
mod functionals;
mod quadrature;

pub use field::{DiskDomain, FieldSample, Phase, RayKinks, SampledField, TestField};
pub use functionals::{
    ab_derivative_identity, acf_phi, blowup_sample, energy_bound_check, fit_log_slope,
    functional_ab, gc_density_value, gc_m, geometric_radii, oddson_check, variational_residual,
    variational_residual_fixed, weiss_m, AcfReport, BlowupRegime, EnergyBoundReport,
    FunctionalTrace, GcChi, GcReport, WeissReport,
};
pub use quadrature::QuadSettings;

use thiserror::Error;

/// Errors from diagnostics preconditions and quadrature.
#[derive(Debug, Error)]
pub enum DiagError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quadrature tolerance not met: achieved {achieved:e}, requested {requested:e}")]
    Tolerance { achieved: f64, requested: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

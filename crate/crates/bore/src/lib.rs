//! Steady two-layer internal hydrodynamic bores and their limiting diagnostics.
//!
//! The crate is organized around a single pipeline:
//!
//! 1. [`params`] — nondimensional fluid data, the front Froude number,
//!    conjugate-flow states, and the flow force.
//! 2. [`oracles`] — exact closed-form fields (Stokes corner, laminar flows,
//!    conjugate profiles) used as ground truth throughout the test suites.
//! 3. [`djsolver`] — discretization and Newton solution of the internal front
//!    system in Dubreil-Jacotin (streamfunction) coordinates.
//! 4. [`continuation`] — natural-parameter tracing of the elevation and
//!    depression branches with monitors, limit classification, and contact
//!    angle extrapolation.
//! 5. [`diagnostics`] — energy densities, Weiss-type and gravity-current
//!    monotonicity functionals, the ACF product, Oddson cone bounds, and
//!    variational residuals evaluated on sampled fields.

pub mod continuation;
pub mod diagnostics;
pub mod djsolver;
pub mod oracles;
pub mod params;
pub mod util;

//! Adomian-type series solutions of quadratic BSDEs driven by a 2-D Brownian
//! motion: coefficient recurrences and majorants, two closed-form examples,
//! a Markovian PDE cascade, and Monte Carlo checks of the resulting
//! representation.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod cascade;
pub mod error;
pub mod exact;
pub mod gates;
pub mod mc;
pub mod series;

pub use cascade::{
    cascade_source, run_cascade_with, BoundaryMode, CascadeOptions, CascadeResult, CascadeWeights,
    Density, GridFunction, GridSpec, ProblemSpec, Terminal, TimeScheme,
};
pub use error::{Error, Result};
pub use exact::{
    blowup_horizon, ex1_closed, ex1_coefficients, ex1_coefficients_exact, ex1_constant,
    ex1_riccati_residual, ex2_closed, ex2_coefficients, ex2_coefficients_exact, ex2_zeta,
    ex2_zeta_derivative, ConstantReading, Ex1Coefficients, Ex2Coefficients, SHIPPED_READING,
};
pub use series::{
    catalan_closed, catalan_recurrence, cauchy_convolve, convergence_threshold, majorant_ratio,
    majorant_term, root_test_radius, CatalanTable, MajorantParams, OddPowerSeries,
};

//! Monte Carlo checks: the exponential equation, the quadratic Brownian
//! functional, and the Example 1 bracket structure.

pub mod bracket;
pub mod expeq;
pub mod kl;
pub mod paths;
pub mod stats;

pub use bracket::{ex1_conditional_bracket, ex1_conditional_bracket_coeffs, ConditionalBracket};
pub use expeq::{
    raw_residual_sweep, report, verify_exponential_equation_ex1, verify_exponential_equation_sweep,
    ExpEquationConfig, ResidualReport,
};
pub use kl::{
    estimate_exp_quadratic_functional, exp_quadratic_closed_form, kl_orthogonality_check,
    kl_product_formula, KLExpansion, KlCheck, KlProduct,
};
pub use paths::{sample_paths, stochastic_exponential, BrownianSource, Driver, Path2, PathBundle};
pub use stats::{compensated_sum, summarize, Estimate, Summary};

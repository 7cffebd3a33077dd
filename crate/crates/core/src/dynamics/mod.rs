//! Orbits, fixed points and closed-form analyses of reduced operators.

mod analysis;
mod fixed_point;
mod iterate;

use thiserror::Error;

pub use analysis::{
    analyze_f_alpha, analyze_quadratic_1d, f_alpha, quadratic_1d_coefficients, regularity_check,
    FAlphaAnalysis, FAlphaRegime, Quadratic1dAnalysis, Quadratic1dRegime, Regularity,
};
pub use fixed_point::{
    classify, find_fixed_point, spectral_radius, FixedPointOptions, FixedPointReport, Stability,
    CLASSIFICATION_MARGIN,
};
pub use iterate::{iterate, IterateOptions, Trajectory};

use crate::operators::OperatorError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("alpha = {0} must lie in (0, 1/2)")]
    AlphaOutOfRange(f64),
    #[error("coefficients a={a}, b={b}, c={c} do not define a 1D quadratic stochastic operator")]
    InvalidCoefficients { a: f64, b: f64, c: f64 },
    #[error("no fixed point within tolerance: residual {} after {} iterations", .report.residual, .report.iterations)]
    NoConvergence { report: Box<FixedPointReport> },
}

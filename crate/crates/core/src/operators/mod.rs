//! Heredity tensors on the hyper-simplex and their reduction to ordinary
//! quadratic stochastic operators on the simplex.
//!
//! The canonical (female-first) form of a bisexual operator is
//!
//! ```text
//! λ'(σ) = 2 Σ_{σ'∈Ω_f, σ''∈Ω_m} p_{σ'σ'',σ} λ(σ') λ(σ'')
//! ```
//!
//! and, for 1:1 operators whose coefficients do not depend on the child's
//! gender, the substitution `y_k = λ(σ_f^k) + λ(σ_m^k)` turns it into
//! `y'_k = Σ_{ij} p_{ij,k} y_i y_j` on `S^{n-1}`.

mod distribution;
mod reduced;
mod tensor;

use thiserror::Error;

pub use distribution::{Distribution, ReducedDistribution, SexRatio, SIMPLEX_TOL};
pub use reduced::{apply_reduced, fold, lift, reduce, ReducedQso};
pub use tensor::{
    apply_canonical, mendelian_coefficients, nonmendelian_coefficients, validate_pq,
    HeredityTensor, MeasureFamily, Support, ValidationReport, Violation,
};

use crate::genotype::SpaceError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("sex ratio p = {0} must lie strictly between 0 and 1")]
    InvalidRatio(f64),
    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entry {index} is negative or not finite ({value})")]
    NegativeEntry { index: usize, value: f64 },
    #[error("values sum to {sum}, not 1")]
    NotOnSimplex { sum: f64 },
    #[error("female mass {female} / male mass {male} does not match p:q = {p}:{q}")]
    DistributionOutsideHyperSimplex {
        female: f64,
        male: f64,
        p: f64,
        q: f64,
    },
    #[error("operand belongs to a different genotype space")]
    SpaceMismatch,
    #[error("offspring set of ({mother}, {father}) has zero base-measure mass")]
    ZeroMassOffspringSet { mother: String, father: String },
    #[error("measure is not gender symmetric at trait '{trait_label}': {female} vs {male}")]
    AsymmetricMeasure {
        trait_label: String,
        female: f64,
        male: f64,
    },
    #[error("no measure given for parent pair ({mother}, {father})")]
    MissingPair { mother: String, father: String },
    #[error("measure family violates its invariants:\n{0}")]
    InvalidMeasure(ValidationReport),
    #[error("reduction needs a 1:1 sex ratio, tensor has p = {p}")]
    NotOneToOne { p: f64 },
    #[error(
        "coefficients for parents ({mother}, {father}) differ by child gender at trait '{child}': {female} vs {male}"
    )]
    ChildAsymmetry {
        mother: String,
        father: String,
        child: String,
        female: f64,
        male: f64,
    },
    #[error("p[{i},{j},·] sums to {sum}, not 1")]
    NotStochastic { i: usize, j: usize, sum: f64 },
    #[error("p[{i},{j},{k}] != p[{j},{i},{k}]")]
    NotSymmetric { i: usize, j: usize, k: usize },
    #[error("distribution is not gender symmetric at trait {trait_index}: {female} vs {male}")]
    GenderAsymmetric {
        trait_index: usize,
        female: f64,
        male: f64,
    },
}

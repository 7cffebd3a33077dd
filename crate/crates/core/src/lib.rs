//! Quadratic stochastic operators for bisexual populations.
//!
//! - [`genotype`]: genotype spaces with a gender locus and offspring sets.
//! - [`operators`]: heredity tensors, the p:q property, and reduction to a
//!   QSO on the simplex.
//! - [`dynamics`]: orbits, fixed points, stability, closed-form 1D analyses.
//! - [`models`]: the Mendelian trait, multi-allele, Rh and ABO operators.
//! - [`ingest`]: CSV formats and frequency estimation from counts.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod genotype;
pub mod ingest;
pub mod models;
pub mod operators;

pub use dynamics::{find_fixed_point, iterate, FixedPointReport, Stability, Trajectory};
pub use genotype::{Gender, Genotype, GenotypeSpace};
pub use operators::{
    Distribution, HeredityTensor, MeasureFamily, ReducedDistribution, ReducedQso, SexRatio,
};

//! Concrete operators: a single Mendelian trait, a multi-allele Mendelian
//! locus (a Volterra operator), and the Rh and ABO blood-group operators
//! built from embedded parent/child frequency tables.
//!
//! The blood-group tables store child measures `μ_{σ'σ''}(σ)`; operator
//! coefficients are always derived from them as `p = 2μ` (x-form `4μ`).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::genotype::GenotypeSpace;
use crate::ingest::{self, IngestError, LoadOptions};
use crate::operators::{
    nonmendelian_coefficients, reduce, MeasureFamily, OperatorError, ReducedQso,
};

/// Embedded Rh table (`# space: +|-`).
pub const RH_TABLE: &str = include_str!("../../../data/rh.csv");
/// Embedded ABO table (`# space: A|B|AB|O`).
pub const ABO_TABLE: &str = include_str!("../../../data/abo.csv");

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("alpha = {0} must lie in (0, 1/2)")]
    AlphaOutOfRange(f64),
    #[error("alpha weights must be strictly positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("alpha weights must sum to 1/2, got {0}")]
    BadSum(f64),
    #[error("need at least two alleles, got {0}")]
    TooFewAlleles(usize),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSource {
    ClosedForm,
    EmbeddedTable,
    CoefficientFile,
}

impl ModelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelSource::ClosedForm => "closed-form",
            ModelSource::EmbeddedTable => "embedded-table",
            ModelSource::CoefficientFile => "coefficient-file",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDescriptor {
    pub name: String,
    pub n: usize,
    pub type_labels: Vec<String>,
    pub parameters: BTreeMap<String, f64>,
    pub source: ModelSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub descriptor: ModelDescriptor,
    pub qso: ReducedQso,
}

/// Dominant/recessive trait: `p_{11,1} = 1`, `p_{12,1} = 2α`, `p_{22,1} = 0`.
pub fn mendelian_trait(alpha: f64) -> Result<Model, ModelError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(ModelError::AlphaOutOfRange(alpha));
    }
    let qso = ReducedQso::from_fn(2, |i, j, k| {
        let first = match (i, j) {
            (0, 0) => 1.0,
            (1, 1) => 0.0,
            _ => 2.0 * alpha,
        };
        if k == 0 {
            first
        } else {
            1.0 - first
        }
    })?;
    Ok(Model {
        descriptor: ModelDescriptor {
            name: "trait".into(),
            n: 2,
            type_labels: vec!["A".into(), "a".into()],
            parameters: BTreeMap::from([("alpha".into(), alpha)]),
            source: ModelSource::ClosedForm,
        },
        qso,
    })
}

/// Volterra operator of a multi-allele Mendelian locus:
/// `p_{ii,i} = 1`, `p_{ij,i} = α_i/(α_i+α_j)`, `p_{ij,j} = α_j/(α_i+α_j)`.
pub fn multi_allele(alphas: &[f64]) -> Result<Model, ModelError> {
    let n = alphas.len();
    if n < 2 {
        return Err(ModelError::TooFewAlleles(n));
    }
    if let Some(&bad) = alphas.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(ModelError::NonPositiveAlpha(bad));
    }
    let sum: f64 = alphas.iter().sum();
    if (sum - 0.5).abs() > 1e-9 {
        return Err(ModelError::BadSum(sum));
    }
    let qso = ReducedQso::from_fn(n, |i, j, k| {
        if i == j {
            (k == i) as u8 as f64
        } else if k == i || k == j {
            alphas[k] / (alphas[i] + alphas[j])
        } else {
            0.0
        }
    })?;
    let parameters = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| (format!("alpha{}", i + 1), a))
        .collect();
    Ok(Model {
        descriptor: ModelDescriptor {
            name: "multi".into(),
            n,
            type_labels: (1..=n).map(|i| i.to_string()).collect(),
            parameters,
            source: ModelSource::ClosedForm,
        },
        qso,
    })
}

/// Non-Mendelian operator of an arbitrary measure family.
pub fn from_measure_family(
    name: &str,
    family: &MeasureFamily,
    source: ModelSource,
) -> Result<Model, ModelError> {
    let space = family.space();
    let tensor = nonmendelian_coefficients(space, family)?;
    let qso = reduce(&tensor)?;
    Ok(Model {
        descriptor: ModelDescriptor {
            name: name.into(),
            n: qso.n(),
            type_labels: space.trait_labels(),
            parameters: BTreeMap::new(),
            source,
        },
        qso,
    })
}

/// Embedded Rh measures exactly as tabulated (rows already sum to 1).
pub fn rh_measures() -> MeasureFamily {
    ingest::parse_measure_family(RH_TABLE, &LoadOptions::default())
        .expect("embedded Rh table is valid")
}

/// Embedded ABO measures, optionally scaled so every row sums to 1.
pub fn abo_measures(renormalize: bool) -> MeasureFamily {
    let opts = LoadOptions {
        renormalize,
        ..LoadOptions::default()
    };
    ingest::parse_measure_family(ABO_TABLE, &opts).expect("embedded ABO table is valid")
}

pub fn rh_space() -> GenotypeSpace {
    rh_measures().space().clone()
}

pub fn abo_space() -> GenotypeSpace {
    abo_measures(false).space().clone()
}

pub fn rh_model() -> Model {
    rh_model_from(&rh_measures()).expect("embedded Rh table reduces")
}

pub fn abo_model() -> Model {
    abo_model_from(&abo_measures(true)).expect("embedded ABO table reduces")
}

pub fn rh_model_from(family: &MeasureFamily) -> Result<Model, ModelError> {
    let mut model = from_measure_family("rh", family, ModelSource::EmbeddedTable)?;
    if let Some((a, b, c)) = crate::dynamics::quadratic_1d_coefficients(&model.qso) {
        model.descriptor.parameters.extend([
            ("a".to_string(), a),
            ("b".to_string(), b),
            ("c".to_string(), c),
        ]);
    }
    Ok(model)
}

pub fn abo_model_from(family: &MeasureFamily) -> Result<Model, ModelError> {
    from_measure_family("abo", family, ModelSource::EmbeddedTable)
}

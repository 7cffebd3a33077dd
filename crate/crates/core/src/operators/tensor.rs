use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::distribution::{Distribution, SexRatio, SIMPLEX_TOL};
use super::OperatorError;
use crate::genotype::{Gender, Genotype, GenotypeSpace};

/// Which offspring sets the coefficients are supported on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Zero outside `Ω_M(σ', σ'')`.
    Mendelian,
    /// Any child genotype allowed for mixed-gender parents.
    Full,
}

/// Heredity coefficients `p_{σ'σ'',σ}` in canonical form.
///
/// Only female-first parent pairs are stored, indexed by
/// `(mother trait, father trait, child genotype)`. Same-gender pairs are
/// implicitly zero and `p_{σ'σ'',σ} = p_{σ''σ',σ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeredityTensor {
    space: GenotypeSpace,
    ratio: SexRatio,
    support: Support,
    coeffs: Vec<f64>,
}

impl HeredityTensor {
    /// Wraps raw coefficients. Only the shape is checked; use
    /// [`validate_pq`] for the p:q constraints.
    pub fn from_coefficients(
        space: GenotypeSpace,
        ratio: SexRatio,
        support: Support,
        coeffs: Vec<f64>,
    ) -> Result<Self, OperatorError> {
        let m = space.trait_count();
        let expected = m * m * space.len();
        if coeffs.len() != expected {
            return Err(OperatorError::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            space,
            ratio,
            support,
            coeffs,
        })
    }

    pub fn from_fn(
        space: GenotypeSpace,
        ratio: SexRatio,
        support: Support,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let m = space.trait_count();
        let total = space.len();
        let mut coeffs = Vec::with_capacity(m * m * total);
        for mother in 0..m {
            for father in 0..m {
                for child in 0..total {
                    coeffs.push(f(mother, father, child));
                }
            }
        }
        Self {
            space,
            ratio,
            support,
            coeffs,
        }
    }

    pub fn space(&self) -> &GenotypeSpace {
        &self.space
    }

    pub fn ratio(&self) -> SexRatio {
        self.ratio
    }

    pub fn support(&self) -> Support {
        self.support
    }

    fn offset(&self, mother: usize, father: usize) -> usize {
        let m = self.space.trait_count();
        (mother * m + father) * self.space.len()
    }

    /// Coefficient for female parent trait `mother`, male parent trait
    /// `father` and child genotype index `child`.
    pub fn coefficient(&self, mother: usize, father: usize, child: usize) -> f64 {
        self.coeffs[self.offset(mother, father) + child]
    }

    pub fn set_coefficient(&mut self, mother: usize, father: usize, child: usize, value: f64) {
        let at = self.offset(mother, father) + child;
        self.coeffs[at] = value;
    }

    /// Coefficient row over all children for one parent pair.
    pub fn pair(&self, mother: usize, father: usize) -> &[f64] {
        let at = self.offset(mother, father);
        &self.coeffs[at..at + self.space.len()]
    }

    /// `p_{σ'σ'',σ}` for arbitrary genotype indices, zero for same-gender parents.
    pub fn p(&self, a: usize, b: usize, child: usize) -> f64 {
        let (ga, gb) = (self.space.gender_of(a), self.space.gender_of(b));
        match (ga, gb) {
            (Gender::Female, Gender::Male) => {
                self.coefficient(self.space.trait_of(a), self.space.trait_of(b), child)
            }
            (Gender::Male, Gender::Female) => {
                self.coefficient(self.space.trait_of(b), self.space.trait_of(a), child)
            }
            _ => 0.0,
        }
    }

    /// Offspring set `Ω(σ', σ'')` of a female-first pair under this tensor's support.
    pub fn offspring_set(&self, mother: usize, father: usize) -> BTreeSet<usize> {
        let a = Genotype::new(Gender::Female, self.space.traits_of(mother));
        let b = Genotype::new(Gender::Male, self.space.traits_of(father));
        let set = match self.support {
            Support::Mendelian => self.space.mendelian_offspring_set(&a, &b),
            Support::Full => self.space.nonmendelian_offspring_set(&a, &b),
        };
        set.expect("traits come from the space")
    }
}

/// One violated p:q constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Negative {
        mother: String,
        father: String,
        child: String,
        value: f64,
    },
    Support {
        mother: String,
        father: String,
        child: String,
        value: f64,
    },
    Normalization {
        mother: String,
        father: String,
        sum: f64,
        expected: f64,
    },
    Ratio {
        mother: String,
        father: String,
        child_trait: String,
        female: f64,
        male: f64,
    },
}

impl Violation {
    /// The `(mother, father)` trait labels the violation belongs to.
    pub fn pair(&self) -> (&str, &str) {
        match self {
            Violation::Negative { mother, father, .. }
            | Violation::Support { mother, father, .. }
            | Violation::Normalization { mother, father, .. }
            | Violation::Ratio { mother, father, .. } => (mother, father),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative {
                mother,
                father,
                child,
                value,
            } => write!(f, "negative: pair ({mother},{father}) child {child} = {value}"),
            Violation::Support {
                mother,
                father,
                child,
                value,
            } => write!(
                f,
                "support: pair ({mother},{father}) child {child} outside offspring set = {value}"
            ),
            Violation::Normalization {
                mother,
                father,
                sum,
                expected,
            } => write!(
                f,
                "normalization: pair ({mother},{father}) sums to {sum}, expected {expected} (off by {:e})",
                sum - expected
            ),
            Violation::Ratio {
                mother,
                father,
                child_trait,
                female,
                male,
            } => write!(
                f,
                "ratio: pair ({mother},{father}) child trait {child_trait}: female {female}, male {male}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations at tolerance {:e}", self.tolerance);
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks non-negativity, support, per-pair normalization `1/(2pq)` and the
/// `p:q` child-gender ratio (compared as `q·p_f` against `p·p_m`).
pub fn validate_pq(t: &HeredityTensor, tol: f64) -> ValidationReport {
    let space = &t.space;
    let m = space.trait_count();
    let (p, q) = (t.ratio.p(), t.ratio.q());
    let expected = t.ratio.pair_mass();
    let mut violations = Vec::new();
    for mother in 0..m {
        for father in 0..m {
            let mother_label = space.trait_label(mother);
            let father_label = space.trait_label(father);
            let row = t.pair(mother, father);
            let allowed = t.offspring_set(mother, father);
            for (child, &value) in row.iter().enumerate() {
                if !(value >= 0.0) {
                    violations.push(Violation::Negative {
                        mother: mother_label.clone(),
                        father: father_label.clone(),
                        child: space.genotype_label(child),
                        value,
                    });
                } else if !allowed.contains(&child) && value > tol {
                    violations.push(Violation::Support {
                        mother: mother_label.clone(),
                        father: father_label.clone(),
                        child: space.genotype_label(child),
                        value,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if !((sum - expected).abs() <= tol) {
                violations.push(Violation::Normalization {
                    mother: mother_label.clone(),
                    father: father_label.clone(),
                    sum,
                    expected,
                });
            }
            for child_trait in 0..m {
                let female = row[child_trait];
                let male = row[child_trait + m];
                if !((q * female - p * male).abs() <= tol) {
                    violations.push(Violation::Ratio {
                        mother: mother_label.clone(),
                        father: father_label.clone(),
                        child_trait: space.trait_label(child_trait),
                        female,
                        male,
                    });
                }
            }
        }
    }
    ValidationReport {
        tolerance: tol,
        violations,
    }
}

/// Family of child measures `μ_{σ'σ''}`, one per female-first parent pair.
///
/// Each measure lies on the 1:1 hyper-simplex and is gender symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFamily {
    space: GenotypeSpace,
    measures: Vec<Vec<f64>>,
}

impl MeasureFamily {
    /// `measures[mother * m + father]` is the child distribution for that pair.
    /// Invariants are checked at `tol`.
    pub fn new(
        space: GenotypeSpace,
        measures: Vec<Vec<f64>>,
        tol: f64,
    ) -> Result<Self, OperatorError> {
        let m = space.trait_count();
        if measures.len() != m * m {
            return Err(OperatorError::DimensionMismatch {
                expected: m * m,
                got: measures.len(),
            });
        }
        for row in &measures {
            if row.len() != space.len() {
                return Err(OperatorError::DimensionMismatch {
                    expected: space.len(),
                    got: row.len(),
                });
            }
        }
        let out = Self { space, measures };
        let report = validate_pq(&out.raw_tensor(), 2.0 * tol);
        if report.is_empty() {
            Ok(out)
        } else {
            Err(OperatorError::InvalidMeasure(report))
        }
    }

    /// Builds a family from a sparse map keyed by `(mother, father)` traits.
    pub fn from_pairs(
        space: GenotypeSpace,
        mut pairs: BTreeMap<(usize, usize), Vec<f64>>,
        tol: f64,
    ) -> Result<Self, OperatorError> {
        let m = space.trait_count();
        let mut measures = Vec::with_capacity(m * m);
        for mother in 0..m {
            for father in 0..m {
                match pairs.remove(&(mother, father)) {
                    Some(row) => measures.push(row),
                    None => {
                        return Err(OperatorError::MissingPair {
                            mother: space.trait_label(mother),
                            father: space.trait_label(father),
                        })
                    }
                }
            }
        }
        Self::new(space, measures, tol)
    }

    /// `μ ≡ 1/(2m)` for every pair.
    pub fn uniform(space: GenotypeSpace) -> Self {
        let m = space.trait_count();
        let row = vec![1.0 / space.len() as f64; space.len()];
        Self {
            measures: vec![row; m * m],
            space,
        }
    }

    pub fn space(&self) -> &GenotypeSpace {
        &self.space
    }

    pub fn measure(&self, mother: usize, father: usize) -> &[f64] {
        &self.measures[mother * self.space.trait_count() + father]
    }

    pub fn measures(&self) -> &[Vec<f64>] {
        &self.measures
    }

    /// Largest `|Σ μ − 1|` over all pairs.
    pub fn max_row_error(&self) -> f64 {
        self.measures
            .iter()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Scales every measure to sum to 1 and re-checks the invariants at the
    /// construction tolerance.
    pub fn renormalized(&self) -> Result<Self, OperatorError> {
        let measures = self
            .measures
            .iter()
            .map(|row| {
                let s: f64 = row.iter().sum();
                row.iter().map(|v| v / s).collect()
            })
            .collect();
        Self::new(self.space.clone(), measures, SIMPLEX_TOL)
    }

    /// `2μ` as a full-support 1:1 tensor, without any checks.
    pub(crate) fn raw_tensor(&self) -> HeredityTensor {
        let m = self.space.trait_count();
        HeredityTensor::from_fn(
            self.space.clone(),
            SexRatio::FISHER,
            Support::Full,
            |mother, father, child| 2.0 * self.measures[mother * m + father][child],
        )
    }
}

/// Mendelian coefficients `p = 2μ₀(σ)/μ₀(Ω_M(σ',σ''))` on the offspring set.
pub fn mendelian_coefficients(
    space: &GenotypeSpace,
    mu0: &Distribution,
) -> Result<HeredityTensor, OperatorError> {
    if mu0.len() != space.len() {
        return Err(OperatorError::DimensionMismatch {
            expected: space.len(),
            got: mu0.len(),
        });
    }
    if !mu0.ratio().is_one_to_one() {
        return Err(OperatorError::NotOneToOne { p: mu0.ratio().p() });
    }
    let m = space.trait_count();
    let mu = mu0.values();
    for t in 0..m {
        if (mu[t] - mu[t + m]).abs() > SIMPLEX_TOL {
            return Err(OperatorError::AsymmetricMeasure {
                trait_label: space.trait_label(t),
                female: mu[t],
                male: mu[t + m],
            });
        }
    }
    let mut coeffs = vec![0.0; m * m * space.len()];
    for mother in 0..m {
        for father in 0..m {
            let a = Genotype::new(Gender::Female, space.traits_of(mother));
            let b = Genotype::new(Gender::Male, space.traits_of(father));
            let set = space.mendelian_offspring_set(&a, &b)?;
            let mass: f64 = set.iter().map(|&k| mu[k]).sum();
            if !(mass > 0.0) {
                return Err(OperatorError::ZeroMassOffspringSet {
                    mother: space.genotype_label(space.genotype_index(Gender::Female, mother)),
                    father: space.genotype_label(space.genotype_index(Gender::Male, father)),
                });
            }
            let base = (mother * m + father) * space.len();
            for &k in &set {
                coeffs[base + k] = 2.0 * mu[k] / mass;
            }
        }
    }
    HeredityTensor::from_coefficients(space.clone(), SexRatio::FISHER, Support::Mendelian, coeffs)
}

/// Non-Mendelian coefficients `p = 2μ_{σ'σ''}(σ)` for mixed-gender pairs.
pub fn nonmendelian_coefficients(
    space: &GenotypeSpace,
    family: &MeasureFamily,
) -> Result<HeredityTensor, OperatorError> {
    if family.space() != space {
        return Err(OperatorError::SpaceMismatch);
    }
    Ok(family.raw_tensor())
}

/// One generation of the canonical operator
/// `λ'(σ) = 2 Σ_{σ'∈Ω_f, σ''∈Ω_m} p_{σ'σ'',σ} λ(σ')λ(σ'')`.
///
/// The image stays on the hyper-simplex whenever `t` passes [`validate_pq`].
pub fn apply_canonical(
    t: &HeredityTensor,
    lam: &Distribution,
) -> Result<Distribution, OperatorError> {
    let total = t.space.len();
    if lam.len() != total {
        return Err(OperatorError::DimensionMismatch {
            expected: total,
            got: lam.len(),
        });
    }
    if (lam.ratio().p() - t.ratio.p()).abs() > SIMPLEX_TOL {
        return Err(OperatorError::DistributionOutsideHyperSimplex {
            female: lam.female_mass(),
            male: lam.male_mass(),
            p: t.ratio.p(),
            q: t.ratio.q(),
        });
    }
    let m = t.space.trait_count();
    let x = lam.values();
    let mut out = vec![0.0; total];
    for mother in 0..m {
        for father in 0..m {
            let w = 2.0 * x[mother] * x[m + father];
            if w == 0.0 {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(t.pair(mother, father)) {
                *o += c * w;
            }
        }
    }
    Ok(Distribution::from_raw(out, t.ratio))
}

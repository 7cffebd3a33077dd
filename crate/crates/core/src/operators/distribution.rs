use rand::RngCore;

use super::OperatorError;

/// Tolerance for simplex and hyper-simplex membership.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Female:male ratio `p:q` with `p + q = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SexRatio {
    p: f64,
}

impl SexRatio {
    /// Fisher's 1:1 ratio.
    pub const FISHER: SexRatio = SexRatio { p: 0.5 };

    pub fn new(p: f64) -> Result<Self, OperatorError> {
        if p.is_finite() && p > 0.0 && p < 1.0 {
            Ok(Self { p })
        } else {
            Err(OperatorError::InvalidRatio(p))
        }
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn q(self) -> f64 {
        1.0 - self.p
    }

    pub fn is_one_to_one(self) -> bool {
        (self.p - 0.5).abs() <= 1e-12
    }

    /// Per-pair coefficient mass `1/(2pq)`.
    pub fn pair_mass(self) -> f64 {
        1.0 / (2.0 * self.p * self.q())
    }
}

impl Default for SexRatio {
    fn default() -> Self {
        Self::FISHER
    }
}

fn check_entries(values: &[f64]) -> Result<(), OperatorError> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(OperatorError::NegativeEntry { index, value });
        }
    }
    Ok(())
}

/// A point of the hyper-simplex: a distribution over Ω with female mass `p`
/// and male mass `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    values: Vec<f64>,
    ratio: SexRatio,
}

impl Distribution {
    pub fn new(values: Vec<f64>, ratio: SexRatio) -> Result<Self, OperatorError> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(OperatorError::DimensionMismatch {
                expected: values.len() + values.len() % 2,
                got: values.len(),
            });
        }
        check_entries(&values)?;
        let out = Self { values, ratio };
        let (female, male) = (out.female_mass(), out.male_mass());
        if (female + male - 1.0).abs() > SIMPLEX_TOL {
            return Err(OperatorError::NotOnSimplex { sum: female + male });
        }
        if (female - ratio.p()).abs() > SIMPLEX_TOL || (male - ratio.q()).abs() > SIMPLEX_TOL {
            return Err(OperatorError::DistributionOutsideHyperSimplex {
                female,
                male,
                p: ratio.p(),
                q: ratio.q(),
            });
        }
        Ok(out)
    }

    pub(crate) fn from_raw(values: Vec<f64>, ratio: SexRatio) -> Self {
        Self { values, ratio }
    }

    /// Uniform within each gender block.
    pub fn uniform(m: usize, ratio: SexRatio) -> Self {
        let mut values = vec![ratio.p() / m as f64; m];
        values.extend(std::iter::repeat_n(ratio.q() / m as f64, m));
        Self { values, ratio }
    }

    /// Draws each gender block uniformly from its scaled simplex.
    pub fn sample<R: RngCore + ?Sized>(m: usize, ratio: SexRatio, rng: &mut R) -> Self {
        let f = ReducedDistribution::sample_uniform(m, rng);
        let g = ReducedDistribution::sample_uniform(m, rng);
        let values = f
            .values()
            .iter()
            .map(|v| v * ratio.p())
            .chain(g.values().iter().map(|v| v * ratio.q()))
            .collect();
        Self { values, ratio }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ratio(&self) -> SexRatio {
        self.ratio
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn female_mass(&self) -> f64 {
        self.values[..self.values.len() / 2].iter().sum()
    }

    pub fn male_mass(&self) -> f64 {
        self.values[self.values.len() / 2..].iter().sum()
    }
}

/// A point of the ordinary simplex `S^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDistribution {
    values: Vec<f64>,
}

impl ReducedDistribution {
    pub fn new(values: Vec<f64>) -> Result<Self, OperatorError> {
        if values.is_empty() {
            return Err(OperatorError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        check_entries(&values)?;
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(OperatorError::NotOnSimplex { sum });
        }
        Ok(Self { values })
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut values = vec![0.0; n];
        values[i] = 1.0;
        Self { values }
    }

    /// Uniform sample from the simplex.
    ///
    /// Portable recipe: for each coordinate draw `u = (next_u64 >> 11) · 2⁻⁵³`,
    /// set `e = −ln(1 − u)` and normalise the exponentials by their sum.
    pub fn sample_uniform<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Self {
        let exps: Vec<f64> = (0..n)
            .map(|_| {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                -(1.0 - u).ln()
            })
            .collect();
        let total: f64 = exps.iter().sum();
        if total > 0.0 {
            Self {
                values: exps.iter().map(|e| e / total).collect(),
            }
        } else {
            Self::uniform(n)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l1_distance(&self, other: &ReducedDistribution) -> f64 {
        l1(&self.values, &other.values)
    }
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

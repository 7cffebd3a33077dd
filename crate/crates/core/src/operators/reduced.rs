use nalgebra::DMatrix;

use super::distribution::{Distribution, ReducedDistribution, SexRatio, SIMPLEX_TOL};
use super::tensor::HeredityTensor;
use super::OperatorError;
use crate::genotype::GenotypeSpace;

/// Quadratic stochastic operator `y'_k = Σ_{i,j} p_{ij,k} y_i y_j` on `S^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedQso {
    n: usize,
    coeffs: Vec<f64>,
}

impl ReducedQso {
    /// Coefficients in `(i, j, k)` row-major order. Checks non-negativity,
    /// symmetry in `(i, j)` and `Σ_k p_{ij,k} = 1` at 1e-9.
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self, OperatorError> {
        if n == 0 || coeffs.len() != n * n * n {
            return Err(OperatorError::DimensionMismatch {
                expected: n * n * n,
                got: coeffs.len(),
            });
        }
        for (index, &value) in coeffs.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(OperatorError::NegativeEntry { index, value });
            }
        }
        let q = Self { n, coeffs };
        for i in 0..n {
            for j in 0..n {
                let sum: f64 = (0..n).map(|k| q.coefficient(i, j, k)).sum();
                if (sum - 1.0).abs() > SIMPLEX_TOL {
                    return Err(OperatorError::NotStochastic { i, j, sum });
                }
                if j > i {
                    for k in 0..n {
                        if (q.coefficient(i, j, k) - q.coefficient(j, i, k)).abs() > SIMPLEX_TOL {
                            return Err(OperatorError::NotSymmetric { i, j, k });
                        }
                    }
                }
            }
        }
        Ok(q)
    }

    pub fn from_fn(
        n: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, OperatorError> {
        let mut coeffs = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    coeffs.push(f(i, j, k));
                }
            }
        }
        Self::new(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeffs[(i * self.n + j) * self.n + k]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn min_coefficient(&self) -> f64 {
        self.coeffs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Raw quadratic form, no checks and no renormalization.
    pub(crate) fn step_into(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..n {
            if y[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = y[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let row = &self.coeffs[(i * n + j) * n..(i * n + j + 1) * n];
                for (o, &c) in out.iter_mut().zip(row) {
                    *o += c * w;
                }
            }
        }
    }

    pub fn apply(&self, y: &ReducedDistribution) -> Result<ReducedDistribution, OperatorError> {
        apply_reduced(self, y)
    }

    /// `J_{ki} = ∂y'_k/∂y_i = 2 Σ_j p_{ij,k} y_j`.
    pub fn jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |k, i| {
            2.0 * (0..n)
                .map(|j| self.coefficient(i, j, k) * y[j])
                .sum::<f64>()
        })
    }
}

/// Exact evaluation of the quadratic form.
pub fn apply_reduced(
    q: &ReducedQso,
    y: &ReducedDistribution,
) -> Result<ReducedDistribution, OperatorError> {
    if y.len() != q.n {
        return Err(OperatorError::DimensionMismatch {
            expected: q.n,
            got: y.len(),
        });
    }
    let mut out = vec![0.0; q.n];
    q.step_into(y.values(), &mut out);
    Ok(ReducedDistribution::from_raw(out))
}

/// Folds a 1:1, child-gender-symmetric tensor into an `n`-type QSO with
/// `p_{ij,k} = (P(i,j,k) + P(j,i,k)) / 2`, where `P(i,j,k)` is the
/// coefficient for mother trait `i`, father trait `j` and female child `k`.
pub fn reduce(t: &HeredityTensor) -> Result<ReducedQso, OperatorError> {
    if !t.ratio().is_one_to_one() {
        return Err(OperatorError::NotOneToOne { p: t.ratio().p() });
    }
    let space = t.space();
    let m = space.trait_count();
    for mother in 0..m {
        for father in 0..m {
            let row = t.pair(mother, father);
            for k in 0..m {
                let (female, male) = (row[k], row[k + m]);
                if (female - male).abs() > SIMPLEX_TOL {
                    return Err(OperatorError::ChildAsymmetry {
                        mother: space.trait_label(mother),
                        father: space.trait_label(father),
                        child: space.trait_label(k),
                        female,
                        male,
                    });
                }
            }
        }
    }
    ReducedQso::from_fn(m, |i, j, k| {
        0.5 * (t.coefficient(i, j, k) + t.coefficient(j, i, k))
    })
}

/// `λ(σ_f^k) = λ(σ_m^k) = y_k / 2`.
pub fn lift(space: &GenotypeSpace, y: &ReducedDistribution) -> Result<Distribution, OperatorError> {
    let m = space.trait_count();
    if y.len() != m {
        return Err(OperatorError::DimensionMismatch {
            expected: m,
            got: y.len(),
        });
    }
    let half: Vec<f64> = y.values().iter().map(|v| 0.5 * v).collect();
    let mut values = half.clone();
    values.extend(half);
    Ok(Distribution::from_raw(values, SexRatio::FISHER))
}

/// `y_k = λ(σ_f^k) + λ(σ_m^k)` for a gender-symmetric `λ`.
pub fn fold(
    space: &GenotypeSpace,
    lam: &Distribution,
) -> Result<ReducedDistribution, OperatorError> {
    let m = space.trait_count();
    if lam.len() != 2 * m {
        return Err(OperatorError::DimensionMismatch {
            expected: 2 * m,
            got: lam.len(),
        });
    }
    let x = lam.values();
    for k in 0..m {
        if (x[k] - x[k + m]).abs() > SIMPLEX_TOL {
            return Err(OperatorError::GenderAsymmetric {
                trait_index: k,
                female: x[k],
                male: x[k + m],
            });
        }
    }
    Ok(ReducedDistribution::from_raw(
        (0..m).map(|k| x[k] + x[k + m]).collect(),
    ))
}

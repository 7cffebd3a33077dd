use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::iterate::{advance, l1};
use super::DynamicsError;
use crate::operators::{OperatorError, ReducedDistribution, ReducedQso};

/// Spectral radii within this distance of 1 classify as neutral.
pub const CLASSIFICATION_MARGIN: f64 = 1e-6;

const NEWTON_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Attracting,
    Repelling,
    Neutral,
    Undetermined,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Attracting => "attracting",
            Stability::Repelling => "repelling",
            Stability::Neutral => "neutral",
            Stability::Undetermined => "undetermined",
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify(spectral_radius: f64) -> Stability {
    if !spectral_radius.is_finite() {
        Stability::Undetermined
    } else if spectral_radius < 1.0 - CLASSIFICATION_MARGIN {
        Stability::Attracting
    } else if spectral_radius > 1.0 + CLASSIFICATION_MARGIN {
        Stability::Repelling
    } else {
        Stability::Neutral
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport {
    pub point: ReducedDistribution,
    /// `‖y − V(y)‖₁` with the exact quadratic form.
    pub residual: f64,
    pub iterations: usize,
    pub jacobian_spectral_radius: f64,
    pub classification: Stability,
}

/// Jacobian restricted to the tangent space `{v : Σ v = 0}` of the simplex,
/// in the basis `e_a − e_{n−1}`, `a < n − 1`.
///
/// The columns of `J` all sum to `2 Σ y = 2`, so `J` maps the tangent space
/// into itself and the restriction is the leading block of `J B`.
fn tangent_jacobian(q: &ReducedQso, y: &[f64]) -> DMatrix<f64> {
    let n = q.n();
    let jac = q.jacobian(y);
    let d = n - 1;
    DMatrix::from_fn(d, d, |a, b| jac[(a, b)] - jac[(a, d)])
}

/// Spectral radius of the Jacobian of `q` at `y`, restricted to the simplex.
pub fn spectral_radius(q: &ReducedQso, y: &[f64]) -> f64 {
    if q.n() < 2 {
        return 0.0;
    }
    let r = tangent_jacobian(q, y);
    if r.iter().any(|v| !v.is_finite()) {
        return f64::NAN;
    }
    r.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn residual(q: &ReducedQso, y: &[f64], scratch: &mut [f64]) -> f64 {
    q.step_into(y, scratch);
    l1(y, scratch)
}

/// One Newton step on `V(y) − y = 0` in tangent coordinates. Returns `None`
/// when the linear system is singular or the step leaves the simplex.
fn newton_step(q: &ReducedQso, y: &[f64]) -> Option<Vec<f64>> {
    let n = q.n();
    let d = n - 1;
    let mut vy = vec![0.0; n];
    q.step_into(y, &mut vy);
    let g = DVector::from_fn(d, |a, _| vy[a] - y[a]);
    let mut lhs = tangent_jacobian(q, y);
    for a in 0..d {
        lhs[(a, a)] -= 1.0;
    }
    let delta = lhs.lu().solve(&g)?;
    if delta.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut out = y.to_vec();
    let mut last = 0.0;
    for a in 0..d {
        out[a] -= delta[a];
        last += delta[a];
    }
    out[d] += last;
    if out.iter().any(|&v| v < -1e-12) {
        return None;
    }
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= s);
    Some(out)
}

/// Fixed-point iteration from `y0`, polished by damped Newton steps on the
/// residual map, then classified by the restricted Jacobian spectrum.
pub fn find_fixed_point(
    q: &ReducedQso,
    y0: &ReducedDistribution,
    opts: &FixedPointOptions,
) -> Result<FixedPointReport, DynamicsError> {
    if !(opts.tol > 0.0) || opts.max_iters == 0 {
        return Err(DynamicsError::InvalidOptions(format!(
            "need tol > 0 and max_iters >= 1, got tol={} max_iters={}",
            opts.tol, opts.max_iters
        )));
    }
    let n = q.n();
    if y0.len() != n {
        return Err(OperatorError::DimensionMismatch {
            expected: n,
            got: y0.len(),
        }
        .into());
    }
    let mut y = y0.values().to_vec();
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    while iterations < opts.max_iters {
        advance(q, &y, &mut next);
        let step = l1(&y, &next);
        std::mem::swap(&mut y, &mut next);
        iterations += 1;
        if step < opts.tol {
            break;
        }
    }

    let mut res = residual(q, &y, &mut next);
    if n > 1 {
        for _ in 0..NEWTON_STEPS {
            if res == 0.0 {
                break;
            }
            let Some(candidate) = newton_step(q, &y) else {
                // falls back to plain iteration
                advance(q, &y, &mut next);
                let r = residual(q, &next, &mut vec![0.0; n]);
                if r < res {
                    y.copy_from_slice(&next);
                    res = r;
                    continue;
                }
                break;
            };
            let r = residual(q, &candidate, &mut next);
            if r < res {
                y = candidate;
                res = r;
            } else {
                break;
            }
        }
    }

    let rho = spectral_radius(q, &y);
    let report = FixedPointReport {
        point: ReducedDistribution::from_raw(y),
        residual: res,
        iterations,
        jacobian_spectral_radius: rho,
        classification: classify(rho),
    };
    if res <= opts.tol {
        Ok(report)
    } else {
        Err(DynamicsError::NoConvergence {
            report: Box::new(report),
        })
    }
}

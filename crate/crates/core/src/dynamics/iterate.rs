use super::DynamicsError;
use crate::operators::{OperatorError, ReducedDistribution, ReducedQso};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    pub max_iters: usize,
    /// Stop once the ℓ1 step length drops below this.
    pub tol: f64,
    /// Keep every `stride`-th point of the orbit (the start and the last
    /// point are always kept).
    pub stride: usize,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            max_iters: 1_000_000,
            tol: 1e-12,
            stride: 1,
        }
    }
}

impl IterateOptions {
    pub(crate) fn check(&self) -> Result<(), DynamicsError> {
        if !(self.tol > 0.0) {
            return Err(DynamicsError::InvalidOptions(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(DynamicsError::InvalidOptions(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.stride == 0 {
            return Err(DynamicsError::InvalidOptions(
                "stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<ReducedDistribution>,
    pub converged: bool,
    pub iterations: usize,
    /// ℓ1 distance between the last two iterates.
    pub final_residual: f64,
}

impl Trajectory {
    pub fn last(&self) -> &ReducedDistribution {
        self.points
            .last()
            .expect("trajectory always holds its start")
    }
}

/// One step of the operator followed by division by the total mass.
///
/// The total mass `s` evolves as `s ↦ s²`, which repels from 1, so rounding
/// errors would double every generation without the retraction.
pub(crate) fn advance(q: &ReducedQso, y: &[f64], out: &mut [f64]) {
    q.step_into(y, out);
    let s: f64 = out.iter().sum();
    if s > 0.0 && s != 1.0 {
        out.iter_mut().for_each(|v| *v /= s);
    }
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Runs the orbit of `y0` until the step length is below `opts.tol` or the
/// iteration budget is spent. Non-convergence is reported, not an error.
pub fn iterate(
    q: &ReducedQso,
    y0: &ReducedDistribution,
    opts: &IterateOptions,
) -> Result<Trajectory, DynamicsError> {
    opts.check()?;
    if y0.len() != q.n() {
        return Err(OperatorError::DimensionMismatch {
            expected: q.n(),
            got: y0.len(),
        }
        .into());
    }
    let mut cur = y0.values().to_vec();
    let mut next = vec![0.0; cur.len()];
    let mut points = vec![y0.clone()];
    let mut converged = false;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        advance(q, &cur, &mut next);
        residual = l1(&cur, &next);
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        converged = residual < opts.tol;
        if converged || iterations == opts.max_iters || iterations % opts.stride == 0 {
            points.push(ReducedDistribution::from_raw(cur.clone()));
        }
        if converged {
            break;
        }
    }
    Ok(Trajectory {
        points,
        converged,
        iterations,
        final_residual: residual,
    })
}

use std::fmt;

use super::DynamicsError;
use crate::operators::ReducedQso;

/// Result of the `p_{ij,k} > 1/(2n)` regularity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub holds: bool,
    /// `min p_{ij,k} − 1/(2n)`.
    pub margin: f64,
}

/// When every coefficient exceeds `1/(2n)` the operator has a unique fixed
/// point attracting every orbit.
pub fn regularity_check(q: &ReducedQso) -> Regularity {
    let margin = q.min_coefficient() - 1.0 / (2.0 * q.n() as f64);
    Regularity {
        holds: margin > 0.0,
        margin,
    }
}

/// `f_α(x) = 2(1 − 4α)x² + 4αx` on `[0, 1/2]`.
pub fn f_alpha(alpha: f64, x: f64) -> f64 {
    2.0 * (1.0 - 4.0 * alpha) * x * x + 4.0 * alpha * x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FAlphaRegime {
    Identity,
    ConvergesToZero,
    ConvergesToHalf,
}

impl fmt::Display for FAlphaRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FAlphaRegime::Identity => "identity",
            FAlphaRegime::ConvergesToZero => "converges to 0",
            FAlphaRegime::ConvergesToHalf => "converges to 1/2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FAlphaAnalysis {
    pub alpha: f64,
    pub fixed_points: [f64; 2],
    pub regime: FAlphaRegime,
}

pub fn analyze_f_alpha(alpha: f64) -> Result<FAlphaAnalysis, DynamicsError> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(DynamicsError::AlphaOutOfRange(alpha));
    }
    let regime = if (alpha - 0.25).abs() <= 1e-12 {
        FAlphaRegime::Identity
    } else if alpha < 0.25 {
        FAlphaRegime::ConvergesToZero
    } else {
        FAlphaRegime::ConvergesToHalf
    };
    Ok(FAlphaAnalysis {
        alpha,
        fixed_points: [0.0, 0.5],
        regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadratic1dRegime {
    /// Every point is fixed.
    Identity,
    /// `0 < Δ < 4`.
    UniqueAttracting,
    Unclassified,
}

impl fmt::Display for Quadratic1dRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadratic1dRegime::Identity => "identity",
            Quadratic1dRegime::UniqueAttracting => "unique attracting",
            Quadratic1dRegime::Unclassified => "unclassified",
        })
    }
}

/// The map `y ↦ a y² + 2b y(1−y) + c(1−y)²` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic1dAnalysis {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `Δ = 4(1−a)c + (1−2b)²`, also the discriminant of the fixed-point equation.
    pub delta: f64,
    /// Fixed points in `[0, 1]`, ascending. For the identity map these are
    /// the endpoints.
    pub fixed_points: Vec<f64>,
    pub regime: Quadratic1dRegime,
}

impl Quadratic1dAnalysis {
    pub fn map(&self, y: f64) -> f64 {
        self.a * y * y + 2.0 * self.b * y * (1.0 - y) + self.c * (1.0 - y) * (1.0 - y)
    }
}

/// `(a, b, c) = (p_{11,1}, p_{12,1}, p_{22,1})` of a two-type operator.
pub fn quadratic_1d_coefficients(q: &ReducedQso) -> Option<(f64, f64, f64)> {
    (q.n() == 2).then(|| {
        (
            q.coefficient(0, 0, 0),
            q.coefficient(0, 1, 0),
            q.coefficient(1, 1, 0),
        )
    })
}

const ZERO: f64 = 1e-15;

pub fn analyze_quadratic_1d(a: f64, b: f64, c: f64) -> Result<Quadratic1dAnalysis, DynamicsError> {
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    if !(in_unit(a) && in_unit(b) && in_unit(c)) {
        return Err(DynamicsError::InvalidCoefficients { a, b, c });
    }
    let delta = 4.0 * (1.0 - a) * c + (1.0 - 2.0 * b).powi(2);
    // fixed points solve qa·y² + qb·y + qc = 0
    let qa = a - 2.0 * b + c;
    let qb = 2.0 * b - 2.0 * c - 1.0;
    let qc = c;
    let g = |y: f64| (qa * y + qb) * y + qc;

    let identity = qa.abs() <= ZERO && qb.abs() <= ZERO && qc.abs() <= ZERO;
    let mut roots = Vec::new();
    if identity {
        roots.extend([0.0, 1.0]);
    } else if qa.abs() <= ZERO {
        roots.push(-qc / qb);
    } else {
        let disc = delta.max(0.0).sqrt();
        let t = -0.5 * (qb + qb.signum() * disc);
        if t != 0.0 {
            roots.push(t / qa);
            roots.push(qc / t);
        } else {
            roots.push(-qb / (2.0 * qa));
        }
    }

    let mut fixed_points: Vec<f64> = Vec::new();
    for mut y in roots {
        if !(y > -1e-9 && y < 1.0 + 1e-9) {
            continue;
        }
        y = y.clamp(0.0, 1.0);
        if !identity {
            for _ in 0..3 {
                let dg = 2.0 * qa * y + qb;
                if dg.abs() > ZERO {
                    let step = g(y) / dg;
                    if (y - step).is_finite() && (0.0..=1.0).contains(&(y - step)) {
                        y -= step;
                    }
                }
            }
        }
        if fixed_points.iter().all(|&p| (p - y).abs() > 1e-12) {
            fixed_points.push(y);
        }
    }
    fixed_points.sort_by(f64::total_cmp);

    let regime = if identity {
        Quadratic1dRegime::Identity
    } else if delta > 0.0 && delta < 4.0 {
        Quadratic1dRegime::UniqueAttracting
    } else {
        Quadratic1dRegime::Unclassified
    };
    Ok(Quadratic1dAnalysis {
        a,
        b,
        c,
        delta,
        fixed_points,
        regime,
    })
}

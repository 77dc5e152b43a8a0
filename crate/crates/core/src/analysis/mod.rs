//! Rate predictions, empirical rate fits and reference sequences.

mod fit;
mod legendre;
mod oracles;
mod predict;
mod report;

pub use fit::{fit_rate, fit_rate_log, RateFit, GEOMETRIC_R2, MIN_POINTS, UNDERFLOW};
pub use legendre::estimate_legendre_exponent;
pub use oracles::{oracle_basicnum, oracle_polyak, BasicSequence};
pub use predict::{
    bound_sequence, predict_rate_general, predict_rate_sharp, RateConstants, RatePrediction, RateSource,
};
pub use report::{per_coordinate_report, write_rates_csv, CoordinateReport};

use std::collections::BTreeMap;
use std::fmt;

/// Asymptotic behaviour of a nonnegative sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// `O(factor^t)`.
    Geometric {
        factor: f64,
    },
    /// `O(t^exponent)`.
    Power {
        exponent: f64,
    },
    /// Exactly zero from some step on; fits record the first zero step.
    FiniteTime {
        step: Option<usize>,
    },
    PerCoordinate(BTreeMap<usize, Regime>),
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Geometric { .. } => "geometric",
            Regime::Power { .. } => "power",
            Regime::FiniteTime { .. } => "finite_time",
            Regime::PerCoordinate(_) => "per_coordinate",
        }
    }

    /// Factor, exponent or first zero step; NaN when there is none.
    pub fn parameter(&self) -> f64 {
        match self {
            Regime::Geometric { factor } => *factor,
            Regime::Power { exponent } => *exponent,
            Regime::FiniteTime { step: Some(s) } => *s as f64,
            _ => f64::NAN,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Geometric { factor } => write!(f, "geometric(factor={})", short(*factor, 6)),
            Regime::Power { exponent } => write!(f, "power(exponent={})", short(*exponent, 4)),
            Regime::FiniteTime { step: Some(s) } => write!(f, "finite_time(t={s})"),
            Regime::FiniteTime { step: None } => write!(f, "finite_time"),
            Regime::PerCoordinate(m) => {
                write!(f, "per_coordinate(")?;
                for (k, (i, r)) in m.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}: {r}", i + 1)?;
                }
                write!(f, ")")
            }
        }
    }
}

fn short(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

pub(crate) fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let sse = (syy - slope * sxy).max(0.0);
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_stderr = if n > 2.0 && sxx > 0.0 { (sse / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    LineFit { slope, r_squared, slope_stderr }
}

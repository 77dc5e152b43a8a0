use super::{line_fit, Regime};
use crate::error::{Error, Result};

/// Shortest series accepted by the fitters.
pub const MIN_POINTS: usize = 100;
/// Values below this are treated as floating-point underflow and dropped.
pub const UNDERFLOW: f64 = 1e-300;
/// Semilog fits at or above this `R²` are reported as geometric.
pub const GEOMETRIC_R2: f64 = 0.999;

const MIN_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub regime: Regime,
    /// Standard error of the factor or exponent.
    pub std_error: f64,
    /// 1-based inclusive range of steps used by the fit.
    pub window: (usize, usize),
    pub r_squared: f64,
}

/// Classifies the decay of a nonnegative series indexed by `t = 1, 2, …`.
///
/// An exactly-zero tail reached from a normal value is finite-time convergence.
/// Otherwise the first `burn_in` fraction and any underflowed tail are dropped,
/// and the remaining window is fitted on a semilog scale, falling back to log-log.
pub fn fit_rate(series: &[f64], burn_in: f64) -> Result<RateFit> {
    check_len(series.len())?;
    if let Some(v) = series.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidArgument(format!("series must be nonnegative, found {v}")));
    }
    let n = series.len();
    let zero_from = series.iter().rposition(|v| *v != 0.0).map_or(0, |k| k + 1);
    if zero_from < n && (zero_from == 0 || series[zero_from - 1] >= UNDERFLOW) {
        return Ok(RateFit {
            regime: Regime::FiniteTime { step: Some(zero_from + 1) },
            std_error: 0.0,
            window: (zero_from + 1, n),
            r_squared: 1.0,
        });
    }
    let logs: Vec<f64> = series.iter().map(|v| if *v >= UNDERFLOW { v.ln() } else { f64::NEG_INFINITY }).collect();
    fit_logs(&logs, burn_in)
}

/// Same as [`fit_rate`] for a series given by its natural logarithms.
pub fn fit_rate_log(log_series: &[f64], burn_in: f64) -> Result<RateFit> {
    check_len(log_series.len())?;
    if log_series.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("log series contains NaN".into()));
    }
    fit_logs(log_series, burn_in)
}

fn check_len(n: usize) -> Result<()> {
    if n < MIN_POINTS {
        Err(Error::InsufficientData { needed: MIN_POINTS, got: n })
    } else {
        Ok(())
    }
}

fn fit_logs(logs: &[f64], burn_in: f64) -> Result<RateFit> {
    if !(0.0..1.0).contains(&burn_in) {
        return Err(Error::InvalidArgument(format!("burn-in fraction {burn_in} must lie in [0, 1)")));
    }
    let lo = (burn_in * logs.len() as f64).floor() as usize;
    let hi = logs[lo..].iter().position(|v| !v.is_finite()).map_or(logs.len(), |k| lo + k);
    if hi - lo < MIN_WINDOW {
        return Err(Error::InsufficientData { needed: MIN_WINDOW, got: hi - lo });
    }
    let t: Vec<f64> = (lo + 1..=hi).map(|k| k as f64).collect();
    let y = &logs[lo..hi];
    let window = (lo + 1, hi);
    let semi = line_fit(&t, y);
    if semi.r_squared >= GEOMETRIC_R2 {
        let factor = semi.slope.exp();
        return Ok(RateFit {
            regime: Regime::Geometric { factor },
            std_error: factor * semi.slope_stderr,
            window,
            r_squared: semi.r_squared,
        });
    }
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ll = line_fit(&lt, y);
    Ok(RateFit {
        regime: Regime::Power { exponent: ll.slope },
        std_error: ll.slope_stderr,
        window,
        r_squared: ll.r_squared,
    })
}

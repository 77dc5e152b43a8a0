use crate::error::{Error, Result};

/// Exponential weights `z_i ∝ x_i e^{y_i}`, normalized with log-sum-exp.
pub fn prox_simplex_entropy(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    crate::error::check_dim(x.len(), y.len())?;
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::ProxDomain { index: i, value: *v });
    }
    let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    Ok(log_weights(&logs, y).iter().map(|l| l.exp()).collect())
}

/// Log-coordinates of the exponential-weights update.
pub(crate) fn log_weights(logs: &[f64], y: &[f64]) -> Vec<f64> {
    let s: Vec<f64> = logs.iter().zip(y).map(|(l, v)| l + v).collect();
    let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + s.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    s.iter().map(|v| v - lse).collect()
}

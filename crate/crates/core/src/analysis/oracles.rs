use crate::error::{Error, Result};

/// Iterates of `s_{t+1} = s_t − a s_t^{1+r}` from `s_1 = s0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSequence {
    /// `values[k] = s_{k+1}`.
    pub values: Vec<f64>,
    /// `s_t (a r t)^{1/r}`, which tends to 1.
    pub normalized: Vec<f64>,
}

pub fn oracle_basicnum(a: f64, r: f64, s0: f64, horizon: usize) -> Result<BasicSequence> {
    if !(a >= 0.0) || !(r > 0.0) || !(s0 > 0.0) {
        return Err(Error::InvalidArgument(format!("need a ≥ 0, r > 0, s0 > 0; got a={a}, r={r}, s0={s0}")));
    }
    if !(1.0 - 2.0 * a * s0.powf(r) > 0.0) {
        return Err(Error::InvalidArgument(format!("need 1 − 2a·s0^r > 0; got a={a}, r={r}, s0={s0}")));
    }
    let mut values = Vec::with_capacity(horizon);
    let mut normalized = Vec::with_capacity(horizon);
    let mut s = s0;
    for t in 1..=horizon {
        if !(s > 0.0 && s <= s0) {
            return Err(Error::SequenceDivergence { step: t, value: s });
        }
        values.push(s);
        normalized.push(s * (a * r * t as f64).powf(1.0 / r));
        s -= a * s.powf(1.0 + r);
    }
    Ok(BasicSequence { values, normalized })
}

/// Upper bounds `b[t] = d0 / (1 + r d0^r Σ_{s≤t} ρ_s)^{1/r}` for any sequence with
/// `d_1 = d0` and `d_{t+1} ≤ d_t − ρ_t d_t^{1+r}`; `b[t]` bounds `d_{t+1}`.
pub fn oracle_polyak(d0: f64, rho: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(d0 >= 0.0) || !(r > 0.0) || rho.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidArgument("need d0 ≥ 0, r > 0 and ρ ≥ 0".into()));
    }
    let scale = r * d0.powf(r);
    let mut out = Vec::with_capacity(rho.len() + 1);
    let mut sum = 0.0;
    out.push(d0);
    for p in rho {
        sum += p;
        out.push(d0 / (1.0 + scale * sum).powf(1.0 / r));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_product_tends_to_one() {
        for (a, r) in [(0.1, 1.0), (0.1, 0.5), (0.05, 2.0)] {
            let s = oracle_basicnum(a, r, 0.1, 100_000).unwrap();
            let last = *s.normalized.last().unwrap();
            assert!((last - 1.0).abs() < 0.02, "a={a} r={r}: {last}");
            assert!(s.values.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn rejects_large_start() {
        assert!(oracle_basicnum(1.0, 1.0, 0.6, 10).is_err());
    }

    #[test]
    fn polyak_closed_form() {
        let b = oracle_polyak(1.0, &[0.2; 50], 1.0).unwrap();
        for (t, v) in b.iter().enumerate() {
            assert!((v - 1.0 / (1.0 + 0.2 * t as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn polyak_bounds_recursion() {
        for r in [0.5, 1.0, 2.0] {
            let rho: Vec<f64> = (0..500).map(|t| 0.1 + 0.05 * ((t % 7) as f64)).collect();
            let b = oracle_polyak(0.5, &rho, r).unwrap();
            let mut d = 0.5f64;
            for (t, p) in rho.iter().enumerate() {
                d -= p * d.powf(1.0 + r);
                assert!(d <= b[t + 1] * (1.0 + 1e-12));
            }
        }
    }
}

use crate::domains::DomainKind;
use crate::error::{check_dim, Error, Result};
use crate::kernels::{BregmanKernel, Regularizer};

/// Coordinate-wise closed-form prox on intervals and boxes.
pub fn prox_closed_form(h: &Regularizer, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let dom = h.domain();
    if !matches!(dom.kind(), DomainKind::Interval { .. } | DomainKind::OrthantBox { .. }) {
        return Err(Error::UnsupportedPairing("closed-form prox needs an interval or box domain".into()));
    }
    check_dim(h.dim(), x.len())?;
    check_dim(h.dim(), y.len())?;
    let kernel = h.kernel();
    let mut z = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let (lo, hi) = (dom.lower(i), dom.upper(i));
        let (xi, yi) = (x[i], y[i]);
        if xi < lo || xi > hi || !kernel.contains(xi) {
            return Err(Error::Domain { value: xi, domain: format!("[{lo}, {hi}]") });
        }
        if !kernel.differentiable_at(xi) {
            return Err(Error::ProxDomain { index: i, value: xi });
        }
        let raw = match kernel {
            BregmanKernel::Euclidean => xi + yi,
            BregmanKernel::Entropy => xi * yi.exp(),
            BregmanKernel::Tsallis { q, .. } => {
                let q = *q;
                // z^{q−1} = x^{q−1} − (1−q)y
                let base = xi.powf(q - 1.0) - (1.0 - q) * yi;
                if q < 1.0 {
                    if !(base > 0.0) {
                        return Err(Error::ProxUndefined(format!(
                            "coordinate {i}: y = {yi} violates y < x^(q-1)/(1-q) = {}",
                            xi.powf(q - 1.0) / (1.0 - q)
                        )));
                    }
                    base.powf(1.0 / (q - 1.0))
                } else if base <= 0.0 {
                    0.0
                } else {
                    base.powf(1.0 / (q - 1.0))
                }
            }
            BregmanKernel::Hellinger => {
                let s2 = (1.0 - xi) * (1.0 + xi);
                let w = xi + yi * s2.sqrt();
                w / (s2 + w * w).sqrt()
            }
            BregmanKernel::Custom(_) => kernel.mirror_inverse(kernel.grad(xi) + yi)?,
        };
        z.push(raw.clamp(lo, hi));
    }
    Ok(z)
}

/// Entropic closed form on log-coordinates: `ln z = min(ln x + y, ln upper)`.
pub(crate) fn entropy_log(h: &Regularizer, logs: &[f64], y: &[f64]) -> Vec<f64> {
    let dom = h.domain();
    logs.iter().zip(y).enumerate().map(|(i, (l, yi))| (l + yi).min(dom.upper(i).ln())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;

    #[test]
    fn closed_form_examples() {
        let e = Regularizer::new(BregmanKernel::Euclidean, Domain::orthant(1)).unwrap();
        assert_eq!(prox_closed_form(&e, &[2.0], &[-3.0]).unwrap(), vec![0.0]);
        let h = Regularizer::new(BregmanKernel::Entropy, Domain::orthant(1)).unwrap();
        assert_eq!(prox_closed_form(&h, &[1.0], &[0.0]).unwrap(), vec![1.0]);
        let hel = Regularizer::new(BregmanKernel::Hellinger, Domain::interval(-1.0, 1.0).unwrap()).unwrap();
        let z = prox_closed_form(&hel, &[0.0], &[1.0]).unwrap()[0];
        assert!((z - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tsallis_condition_raises() {
        let t =
            Regularizer::new(BregmanKernel::tsallis(0.5).unwrap(), Domain::orthant_box(vec![1.0]).unwrap()).unwrap();
        // x = 0.25: x^{q−1}/(1−q) = 4
        assert!(matches!(prox_closed_form(&t, &[0.25], &[4.0]), Err(Error::ProxUndefined(_))));
        let z = prox_closed_form(&t, &[0.25], &[0.5]).unwrap()[0];
        // z^{-1/2} = 2 − 0.25
        assert!((z - 1.0 / 1.75f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn matches_mirror_inverse() {
        let kernels = [BregmanKernel::Entropy, BregmanKernel::tsallis(0.5).unwrap(), BregmanKernel::Hellinger];
        for k in kernels {
            let dom = if matches!(k, BregmanKernel::Hellinger) {
                Domain::interval(-1.0, 1.0).unwrap()
            } else {
                Domain::orthant_box(vec![1.0]).unwrap()
            };
            let h = Regularizer::new(k.clone(), dom).unwrap();
            for &(x, y) in &[(0.3, -0.2), (0.6, 0.1), (0.05, -1.0)] {
                let z = prox_closed_form(&h, &[x], &[y]).unwrap()[0];
                let want = k.mirror_inverse(k.grad(x) + y).unwrap();
                assert!((z - want).abs() < 1e-12, "{} {x} {y}", k.name());
            }
        }
    }

    #[test]
    fn steep_boundary_rejected() {
        let h = Regularizer::new(BregmanKernel::Entropy, Domain::orthant(1)).unwrap();
        assert!(matches!(prox_closed_form(&h, &[0.0], &[1.0]), Err(Error::ProxDomain { .. })));
    }
}

//! Prox-mappings `P_x(y) = argmin_z ⟨y, x − z⟩ + D(z, x)`.

mod closed_form;
mod dual_newton;
mod projection;
mod simplex;

pub use closed_form::prox_closed_form;
pub use dual_newton::prox_polyhedral_dual;
pub use projection::prox_euclidean_polyhedral;
pub use simplex::prox_simplex_entropy;

use crate::domains::DomainKind;
use crate::error::{check_dim, Error, Result};
use crate::iterate::Iterate;
use crate::kernels::{BregmanKernel, Regularizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxEngine {
    /// Coordinate-wise closed form on intervals and boxes.
    ClosedForm,
    /// Exponential weights on the simplex.
    SimplexEntropy,
    /// Newton's method on the equality multipliers, for steep kernels.
    DualNewton,
    /// Active-set Euclidean projection onto `{Az = b, z ≥ 0}`.
    EuclideanProjection,
}

/// Picks the engine matching the (kernel, domain) pairing.
pub fn select_engine(h: &Regularizer) -> Result<ProxEngine> {
    let kernel = h.kernel();
    match h.domain().kind() {
        DomainKind::Interval { .. } | DomainKind::OrthantBox { .. } => Ok(ProxEngine::ClosedForm),
        DomainKind::Simplex if matches!(kernel, BregmanKernel::Entropy) => Ok(ProxEngine::SimplexEntropy),
        DomainKind::Simplex | DomainKind::Polyhedron => {
            if kernel.steep() {
                Ok(ProxEngine::DualNewton)
            } else if matches!(kernel, BregmanKernel::Euclidean) {
                Ok(ProxEngine::EuclideanProjection)
            } else {
                Err(Error::UnsupportedPairing(format!(
                    "non-steep kernel {} on a polyhedron has no prox engine",
                    kernel.name()
                )))
            }
        }
    }
}

/// True when the engine tracks `ln x` alongside `x`.
pub fn tracks_logs(h: &Regularizer) -> bool {
    matches!(h.kernel(), BregmanKernel::Entropy)
}

/// Prox-mapping dispatched on the (kernel, domain) pairing.
pub fn prox(h: &Regularizer, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dim(h.dim(), x.len())?;
    check_dim(h.dim(), y.len())?;
    match select_engine(h)? {
        ProxEngine::ClosedForm => prox_closed_form(h, x, y),
        ProxEngine::SimplexEntropy => prox_simplex_entropy(x, y),
        ProxEngine::DualNewton => prox_polyhedral_dual(h, x, y),
        ProxEngine::EuclideanProjection => prox_euclidean_polyhedral(h.domain(), x, y),
    }
}

/// Prox-mapping on iterates; entropic engines update `ln x` exactly.
pub fn prox_iterate(h: &Regularizer, state: &Iterate, y: &[f64]) -> Result<Iterate> {
    check_dim(h.dim(), state.dim())?;
    check_dim(h.dim(), y.len())?;
    if !tracks_logs(h) {
        return prox(h, &state.x, y).map(Iterate::new);
    }
    let logs = state.logs();
    if let Some(i) = logs.iter().position(|l| !l.is_finite()) {
        return Err(Error::ProxDomain { index: i, value: state.x[i] });
    }
    let out = match select_engine(h)? {
        ProxEngine::ClosedForm => closed_form::entropy_log(h, &logs, y),
        ProxEngine::SimplexEntropy => simplex::log_weights(&logs, y),
        ProxEngine::DualNewton => dual_newton::entropy_log(h, &logs, y)?,
        ProxEngine::EuclideanProjection => unreachable!("entropy is steep"),
    };
    Ok(Iterate::from_logs(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;

    #[test]
    fn engine_selection() {
        let r = |k, d| Regularizer::new(k, d).unwrap();
        assert_eq!(select_engine(&r(BregmanKernel::Entropy, Domain::orthant(2))).unwrap(), ProxEngine::ClosedForm);
        assert_eq!(
            select_engine(&r(BregmanKernel::Entropy, Domain::simplex(3).unwrap())).unwrap(),
            ProxEngine::SimplexEntropy
        );
        assert_eq!(
            select_engine(&r(BregmanKernel::tsallis(0.5).unwrap(), Domain::simplex(3).unwrap())).unwrap(),
            ProxEngine::DualNewton
        );
        assert_eq!(
            select_engine(&r(BregmanKernel::Euclidean, Domain::simplex(3).unwrap())).unwrap(),
            ProxEngine::EuclideanProjection
        );
        let t15 = BregmanKernel::tsallis(1.5).unwrap();
        assert!(matches!(select_engine(&r(t15, Domain::simplex(3).unwrap())), Err(Error::UnsupportedPairing(_))));
    }

    #[test]
    fn iterate_prox_matches_plain_prox() {
        let h = Regularizer::new(BregmanKernel::Entropy, Domain::simplex(3).unwrap()).unwrap();
        let x = vec![0.2, 0.3, 0.5];
        let y = vec![0.1, -0.4, 0.3];
        let a = prox(&h, &x, &y).unwrap();
        let b = prox_iterate(&h, &Iterate::new(x), &y).unwrap();
        for i in 0..3 {
            assert!((a[i] - b.x[i]).abs() < 1e-15);
        }
    }
}

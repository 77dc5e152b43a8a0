use std::collections::BTreeMap;

use super::Regime;
use crate::domains::SolutionProfile;
use crate::error::{Error, Result};
use crate::kernels::{BoundaryClass, Regularizer};
use crate::solver::{dist, validate_step, MethodConfig, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSource {
    /// Divergence bound from the Legendre exponent at the solution.
    General,
    /// Per-coordinate rates along the sharp directions.
    Sharp,
    /// Whole-iterate rate at an extreme solution where the field is sharp.
    SharpExtreme,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateConstants {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    pub gamma: f64,
    /// `D(x*, X_1)`.
    pub d1: Option<f64>,
    /// Constant `C` of the sublinear bound.
    pub c: Option<f64>,
    pub delta_eff: Option<f64>,
    /// Kernel exponent of a power-like boundary.
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePrediction {
    /// Rate of `D(x*, X_t)` for general predictions, of the sharp coordinates
    /// (or the whole iterate) for sharp ones.
    pub regime: Regime,
    /// Rate of `‖X_t − x*‖` when one is predicted.
    pub norm: Option<Regime>,
    pub source: RateSource,
    pub constants: RateConstants,
}

fn legendre_exponent(h: &Regularizer, p: &[f64], radius: f64) -> Result<f64> {
    match h.legendre_exponent_analytic(p) {
        Err(Error::UnsupportedKernel(_)) => super::estimate_legendre_exponent(h, p, radius, 0),
        other => other,
    }
}

/// Divergence and norm rates implied by the Legendre exponent `α` and constant
/// `β` at the solution; errors with `InvalidStep` when the step-size conditions fail.
pub fn predict_rate_general(prob: &Problem, h: &Regularizer, cfg: &MethodConfig) -> Result<RatePrediction> {
    let xs = prob
        .solution
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("rate prediction needs a known solution".into()))?;
    let d1 = h.divergence(xs, &cfg.init)?;
    // iterates stay where ½‖x − x*‖² ≤ D(x*, X_1)
    let reach = dist(&cfg.init, xs).max((2.0 * d1).sqrt());
    let radius = reach.min(prob.radius).max(1e-12);
    let alpha = legendre_exponent(h, xs, radius)?;
    let beta = h.legendre_constant(xs, radius)?;
    let report = validate_step(cfg, prob, beta);
    if let Some(c) = report.conditions.iter().find(|c| !c.holds) {
        return Err(Error::InvalidStep(format!(
            "{} fails at t={} (slack {:e})",
            c.name,
            c.first_violation.unwrap_or(1),
            c.min_slack
        )));
    }
    let (mu, gamma) = (prob.strong, cfg.gamma(1));
    let mut constants =
        RateConstants { alpha: Some(alpha), beta: Some(beta), mu: Some(mu), gamma, d1: Some(d1), ..Default::default() };
    let (regime, norm) = if alpha == 0.0 {
        let factor = 1.0 - mu * gamma / (2.0 * beta);
        (Regime::Geometric { factor }, Regime::Geometric { factor: factor.sqrt() })
    } else {
        let kappa = alpha / (1.0 - alpha);
        let denom = (2.0 * beta.powf(1.0 / (1.0 - alpha)) * d1.powf(-kappa)).max(2f64.powf(kappa));
        constants.c = Some(kappa / denom);
        (Regime::Power { exponent: 1.0 - 1.0 / alpha }, Regime::Power { exponent: -1.0 / (2.0 * alpha) })
    };
    Ok(RatePrediction { regime, norm: Some(norm), source: RateSource::General, constants })
}

/// The bound on `D(x*, X_t)`, `t = 1..=len`, carried by a general prediction.
pub fn bound_sequence(pred: &RatePrediction, cfg: &MethodConfig, len: usize) -> Result<Vec<f64>> {
    let k = &pred.constants;
    let (Some(alpha), Some(beta), Some(mu), Some(d1)) = (k.alpha, k.beta, k.mu, k.d1) else {
        return Err(Error::InvalidArgument("bound sequences need a general prediction".into()));
    };
    let mut out = Vec::with_capacity(len);
    let mut acc = if alpha == 0.0 { 1.0 } else { 0.0 };
    for t in 1..=len {
        if alpha == 0.0 {
            out.push(d1 * acc);
            acc *= 1.0 - mu * cfg.gamma(t) / (2.0 * beta);
        } else {
            let c = k.c.unwrap_or(0.0);
            out.push(d1 * (1.0 + c * mu * acc).powf(1.0 - 1.0 / alpha));
            acc += cfg.gamma(t);
        }
    }
    Ok(out)
}

/// Rates along the sharp coordinates of a classified solution, decided by the
/// boundary class of the kernel.
pub fn predict_rate_sharp(profile: &SolutionProfile, h: &Regularizer, cfg: &MethodConfig) -> Result<RatePrediction> {
    let class = h
        .kernel()
        .boundary_class()
        .ok_or_else(|| Error::NotDecomposable(format!("kernel `{}` declares no boundary class", h.kernel().name())))?;
    let delta_eff =
        profile.delta_eff.ok_or_else(|| Error::InvalidArgument("the solution has no sharp coordinates".into()))?;
    let gamma = cfg.gamma(1);
    let (coord, nu) = match class {
        BoundaryClass::EuclideanLike => (Regime::FiniteTime { step: None }, None),
        BoundaryClass::EntropyLike => (Regime::Geometric { factor: (-gamma * delta_eff / 2.0).exp() }, None),
        BoundaryClass::PowerLike(nu) => (Regime::Power { exponent: -1.0 / nu }, Some(nu)),
    };
    let constants =
        RateConstants { alpha: profile.legendre_exponent, gamma, delta_eff: Some(delta_eff), nu, ..Default::default() };
    if profile.is_extreme && profile.is_field_sharp {
        return Ok(RatePrediction {
            regime: coord.clone(),
            norm: Some(coord),
            source: RateSource::SharpExtreme,
            constants,
        });
    }
    let map: BTreeMap<usize, Regime> = profile.sharps.iter().map(|&i| (i, coord.clone())).collect();
    Ok(RatePrediction { regime: Regime::PerCoordinate(map), norm: None, source: RateSource::Sharp, constants })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{classify_solution, Domain};
    use crate::field::AffineField;
    use crate::kernels::BregmanKernel;
    use std::sync::Arc;

    fn line_problem(kernel: BregmanKernel, dom: Domain, field: AffineField, xs: f64) -> (Problem, Regularizer) {
        let p = Problem::new(dom.clone(), Arc::new(field), 1.0, 1.0).unwrap().with_solution(vec![xs]).unwrap();
        (p, Regularizer::new(kernel, dom).unwrap())
    }

    #[test]
    fn general_predictions() {
        let (p, h) = line_problem(BregmanKernel::Euclidean, Domain::orthant(1), AffineField::identity(1), 0.0);
        let cfg = MethodConfig::mirror_prox(0.1, 100, vec![0.5]).unwrap();
        let r = predict_rate_general(&p, &h, &cfg).unwrap();
        assert!((r.regime.parameter() - 0.95).abs() < 1e-12);

        let (p, h) = line_problem(BregmanKernel::Entropy, Domain::orthant(1), AffineField::identity(1), 0.0);
        let r = predict_rate_general(&p, &h, &cfg).unwrap();
        assert_eq!(r.regime, Regime::Power { exponent: -1.0 });
        assert_eq!(r.norm, Some(Regime::Power { exponent: -1.0 }));
        // β = 2 and D1 = ½ give C = 1/max(16, 2)
        assert!((r.constants.c.unwrap() - 1.0 / 16.0).abs() < 1e-9);

        let big = MethodConfig::mirror_prox(0.4, 100, vec![0.5]).unwrap();
        assert!(matches!(predict_rate_general(&p, &h, &big), Err(Error::InvalidStep(_))));
    }

    #[test]
    fn sharp_predictions() {
        let dom = Domain::orthant(1);
        let f = AffineField::shifted(vec![1.0]);
        let prof = classify_solution(&dom, &f, &[0.0]).unwrap();
        let cfg = MethodConfig::mirror_descent(0.1, 100, vec![0.5]).unwrap();
        let h = Regularizer::new(BregmanKernel::Entropy, dom.clone()).unwrap();
        let r = predict_rate_sharp(&prof, &h, &cfg).unwrap();
        assert_eq!(r.source, RateSource::SharpExtreme);
        assert!((r.regime.parameter() - (-0.05f64).exp()).abs() < 1e-15);
        let h = Regularizer::new(BregmanKernel::Euclidean, dom).unwrap();
        assert_eq!(predict_rate_sharp(&prof, &h, &cfg).unwrap().regime, Regime::FiniteTime { step: None });
        let hd = Domain::interval(-1.0, 1.0).unwrap();
        let prof = classify_solution(&hd, &AffineField::shifted(vec![2.0]), &[-1.0]).unwrap();
        let h = Regularizer::new(BregmanKernel::Hellinger, hd).unwrap();
        assert_eq!(predict_rate_sharp(&prof, &h, &cfg).unwrap().regime, Regime::Power { exponent: -2.0 });
    }

    #[test]
    fn bound_dominates_euclidean_run() {
        let (p, h) = line_problem(BregmanKernel::Euclidean, Domain::orthant(1), AffineField::identity(1), 0.0);
        let cfg = MethodConfig::mirror_prox(0.1, 300, vec![0.5]).unwrap().with_early_stop(None);
        let pred = predict_rate_general(&p, &h, &cfg).unwrap();
        let tr = crate::solver::run(&p, &h, &cfg).unwrap();
        let b = bound_sequence(&pred, &cfg, tr.len()).unwrap();
        assert!(tr.divergence.iter().zip(&b).all(|(d, b)| *d <= b * (1.0 + 1e-12)));
    }
}

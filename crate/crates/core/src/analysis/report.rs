use std::io::Write;

use super::{fit_rate, fit_rate_log, predict_rate_general, predict_rate_sharp, RateFit, Regime};
use crate::domains::{Side, SolutionProfile};
use crate::error::{Error, Result};
use crate::kernels::Regularizer;
use crate::solver::{fmt_f64, MethodConfig, Problem, Trajectory};

/// Burn-in fraction used by the reports.
const BURN_IN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateReport {
    /// 0-based coordinate index.
    pub coordinate: usize,
    pub sharp: bool,
    pub predicted: Option<Regime>,
    /// `None` when the run is too short to fit.
    pub fitted: Option<RateFit>,
}

/// Predicted and fitted rates of `|X_{t,i} − x*_i|` for every active coordinate:
/// sharp coordinates get the sharp prediction, flat ones the general norm rate.
pub fn per_coordinate_report(
    traj: &Trajectory,
    profile: &SolutionProfile,
    prob: &Problem,
    h: &Regularizer,
    cfg: &MethodConfig,
) -> Result<Vec<CoordinateReport>> {
    let sharp_pred = if profile.sharps.is_empty() { None } else { Some(predict_rate_sharp(profile, h, cfg)?) };
    let flat_pred = match predict_rate_general(prob, h, cfg) {
        Ok(p) => p.norm,
        Err(Error::InvalidStep(_)) => {
            let a = h.legendre_exponent_analytic(&profile.solution).unwrap_or(0.0);
            (a > 0.0).then(|| Regime::Power { exponent: -1.0 / (2.0 * a) })
        }
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for &(i, side) in &profile.active_set.entries {
        let sharp = profile.sharps.contains(&i);
        let predicted = if sharp {
            sharp_pred.as_ref().map(|p| match &p.regime {
                Regime::PerCoordinate(m) => m[&i].clone(),
                r => r.clone(),
            })
        } else {
            flat_pred.clone()
        };
        let xs = profile.solution[i];
        let fit = if traj.log_base.is_some() && side == Side::Lower && xs == 0.0 {
            fit_rate_log(&traj.log_coordinate(i), BURN_IN)
        } else {
            let s: Vec<f64> = traj.coordinate(i).iter().map(|v| (v - xs).abs()).collect();
            fit_rate(&s, BURN_IN)
        };
        let fitted = match fit {
            Ok(f) => Some(f),
            Err(Error::InsufficientData { .. }) => None,
            Err(e) => return Err(e),
        };
        out.push(CoordinateReport { coordinate: i, sharp, predicted, fitted });
    }
    Ok(out)
}

/// Writes `coordinate,regime_predicted,param_predicted,regime_fitted,param_fitted,window_lo,window_hi,r2`
/// with 1-based coordinates.
pub fn write_rates_csv<W: Write>(reports: &[CoordinateReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record([
        "coordinate",
        "regime_predicted",
        "param_predicted",
        "regime_fitted",
        "param_fitted",
        "window_lo",
        "window_hi",
        "r2",
    ])
    .map_err(err)?;
    for r in reports {
        let (rp, pp) = match &r.predicted {
            Some(p) => (p.label().to_string(), param(p)),
            None => (String::new(), String::new()),
        };
        let (rf, pf, lo, hi, r2) = match &r.fitted {
            Some(f) => (
                f.regime.label().to_string(),
                param(&f.regime),
                f.window.0.to_string(),
                f.window.1.to_string(),
                fmt_f64(f.r_squared),
            ),
            None => Default::default(),
        };
        w.write_record([(r.coordinate + 1).to_string(), rp, pp, rf, pf, lo, hi, r2]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn param(r: &Regime) -> String {
    let v = r.parameter();
    if v.is_nan() {
        String::new()
    } else {
        fmt_f64(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{classify_solution, Domain};
    use crate::field::AffineField;
    use crate::kernels::BregmanKernel;
    use crate::solver::run;
    use std::sync::Arc;

    #[test]
    fn simplex_sharp_and_flat_coordinates() {
        let dom = Domain::simplex(3).unwrap();
        let f = AffineField::shifted_identity(&[-0.4, 0.0, 1.0]);
        let xs = vec![0.0, 0.0, 1.0];
        let prof = classify_solution(&dom, &f, &xs).unwrap();
        let p = Problem::new(dom.clone(), Arc::new(f), 1.0, 1.0).unwrap().with_solution(xs).unwrap();
        let h = Regularizer::new(BregmanKernel::Entropy, dom).unwrap();
        let cfg = MethodConfig::mirror_prox(0.1, 5000, vec![1.0 / 3.0; 3]).unwrap();
        let tr = run(&p, &h, &cfg).unwrap();
        let rep = per_coordinate_report(&tr, &prof, &p, &h, &cfg).unwrap();
        assert_eq!(rep.len(), 2);
        let c1 = rep.iter().find(|r| r.coordinate == 0).unwrap();
        assert!(c1.sharp);
        assert_eq!(c1.fitted.as_ref().unwrap().regime.label(), "geometric");
        let c2 = rep.iter().find(|r| r.coordinate == 1).unwrap();
        assert!(!c2.sharp);
        assert_eq!(c2.fitted.as_ref().unwrap().regime.label(), "power");
        let mut buf = Vec::new();
        write_rates_csv(&rep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("coordinate,regime_predicted,param_predicted,regime_fitted"));
        assert_eq!(text.lines().count(), 3);
    }
}

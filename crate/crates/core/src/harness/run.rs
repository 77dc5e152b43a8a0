use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{set_path, Config, Experiment};
use super::{csv_string, write_file, HarnessError};
use crate::analysis::{
    estimate_legendre_exponent, fit_rate, per_coordinate_report, predict_rate_general, predict_rate_sharp,
    CoordinateReport, RateFit, RatePrediction, Regime,
};
use crate::domains::{classify_solution, SolutionProfile};
use crate::solver::{fmt_f64, run, validate_step, StepReport, Trajectory};

const LEGENDRE_RADIUS: f64 = 0.5;

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub horizon: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub(crate) fn apply(&self, table: &mut toml::Table) -> Result<(), HarnessError> {
        if let Some(h) = self.horizon {
            set_path(table, "method.horizon", toml::Value::Integer(h as i64))?;
        }
        if let Some(s) = self.seed {
            set_path(table, "output.seed", toml::Value::Integer(s as i64))?;
        }
        Ok(())
    }

    pub(crate) fn out_dir(&self, cfg: &Config) -> PathBuf {
        self.out.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Everything produced by one run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub trajectory: Trajectory,
    pub steps: StepReport,
    pub profile: Option<SolutionProfile>,
    pub general: Option<Result<RatePrediction, String>>,
    pub sharp: Option<Result<RatePrediction, String>>,
    pub divergence_fit: Option<RateFit>,
    pub distance_fit: Option<RateFit>,
    pub coordinates: Vec<CoordinateReport>,
    pub summary: String,
}

impl RunRecord {
    /// Predicted rate of `‖X_t − x*‖`: the whole-iterate sharp rate when there is
    /// one, the general norm rate otherwise.
    pub fn predicted_norm(&self) -> Option<Regime> {
        if let Some(Ok(s)) = &self.sharp {
            if s.norm.is_some() {
                return s.norm.clone();
            }
        }
        match &self.general {
            Some(Ok(g)) => g.norm.clone(),
            _ => None,
        }
    }
}

fn fit_if_long(series: &[f64], burn_in: f64) -> Option<RateFit> {
    fit_rate(series, burn_in).ok()
}

/// Runs a validated experiment and gathers predictions and fits.
pub fn execute(exp: &Experiment) -> Result<RunRecord, HarnessError> {
    let (prob, h, cfg) = (&exp.problem, &exp.regularizer, &exp.method);
    let beta = match &prob.solution {
        Some(xs) => h.legendre_constant(xs, crate::solver::dist(&cfg.init, xs).max(1e-12)).unwrap_or(1.0),
        None => 1.0,
    };
    let steps = validate_step(cfg, prob, beta);
    let trajectory = run(prob, h, cfg)?;
    let mut profile = None;
    let mut general = None;
    let mut sharp = None;
    let mut coordinates = Vec::new();
    if let Some(xs) = &prob.solution {
        let p = classify_solution(&prob.domain, prob.field.as_ref(), xs)
            .map_err(|e| HarnessError::Config(format!("problem.solution: {e}")))?;
        general = Some(predict_rate_general(prob, h, cfg).map_err(|e| e.to_string()));
        if !p.sharps.is_empty() {
            sharp = Some(predict_rate_sharp(&p, h, cfg).map_err(|e| e.to_string()));
        }
        if !p.active_set.is_empty() {
            coordinates = per_coordinate_report(&trajectory, &p, prob, h, cfg)?;
        }
        profile = Some(p);
    }
    let divergence_fit = fit_if_long(&trajectory.divergence, exp.burn_in);
    let distance_fit = fit_if_long(&trajectory.distance, exp.burn_in);
    let mut rec = RunRecord {
        trajectory,
        steps,
        profile,
        general,
        sharp,
        divergence_fit,
        distance_fit,
        coordinates,
        summary: String::new(),
    };
    rec.summary = summary(exp, &rec);
    Ok(rec)
}

fn describe_prediction(p: &Option<Result<RatePrediction, String>>) -> String {
    match p {
        None => "n/a".into(),
        Some(Err(e)) => format!("unavailable ({e})"),
        Some(Ok(p)) => {
            let norm = p.norm.as_ref().map_or(String::new(), |n| format!(", norm {n}"));
            format!("{}{norm} [{:?}]", p.regime, p.source)
        }
    }
}

fn describe_fit(f: &Option<RateFit>) -> String {
    match f {
        None => "n/a (fewer than 100 usable points)".into(),
        Some(f) => format!(
            "{} r2={} window={}..{} stderr={}",
            f.regime,
            fmt_f64(f.r_squared),
            f.window.0,
            f.window.1,
            fmt_f64(f.std_error)
        ),
    }
}

fn summary(exp: &Experiment, rec: &RunRecord) -> String {
    let (prob, h, cfg) = (&exp.problem, &exp.regularizer, &exp.method);
    let tr = &rec.trajectory;
    let mut s = String::new();
    let _ = writeln!(s, "kernel      {}", h.name());
    let _ = writeln!(s, "field       {}", prob.field.describe());
    let _ = writeln!(s, "lipschitz   {}  strong {}", prob.lipschitz, prob.strong);
    let _ = writeln!(
        s,
        "method      alpha_a={} alpha_b={} gamma_1={} horizon={}",
        cfg.alpha_a,
        cfg.alpha_b,
        cfg.gamma(1),
        cfg.horizon
    );
    for c in &rec.steps.conditions {
        let status = if c.holds { "ok" } else { "VIOLATED" };
        let _ = writeln!(s, "step        {:<18} {status} (min slack {})", c.name, fmt_f64(c.min_slack));
    }
    let _ = writeln!(s, "iterations  {}  field calls {}  stop {}", tr.len(), tr.field_calls, tr.stop.label());
    match tr.neighborhood_exit {
        Some(t) => {
            let _ = writeln!(s, "neighborhood left at t={t}");
        }
        None => {
            let _ = writeln!(s, "neighborhood stayed inside");
        }
    }
    if let (Some(d), Some(r)) = (tr.divergence.last(), tr.distance.last()) {
        let _ = writeln!(s, "final       divergence {}  distance {}", fmt_f64(*d), fmt_f64(*r));
    }
    if let Some(xs) = prob.solution.as_deref() {
        let analytic = h.legendre_exponent_analytic(xs).map_or("n/a".into(), fmt_f64);
        let sampled = estimate_legendre_exponent(h, xs, LEGENDRE_RADIUS, exp.seed).map_or("n/a".into(), fmt_f64);
        let _ = writeln!(s, "legendre    exponent analytic {analytic}  sampled {sampled}");
    }
    if let Some(p) = &rec.profile {
        let one = |v: &[usize]| v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
        let _ = writeln!(
            s,
            "solution    active {{{}}} sharp {{{}}} flat {{{}}} extreme {}",
            one(&p.active_set.indices()),
            one(&p.sharps),
            one(&p.flats),
            p.is_extreme
        );
        if let Some(d) = p.delta {
            let _ = writeln!(
                s,
                "sharpness   delta {} delta_eff {} separation {}",
                fmt_f64(d),
                p.delta_eff.map_or("n/a".into(), fmt_f64),
                p.separation_constant.map_or("n/a".into(), fmt_f64)
            );
        }
    }
    let _ = writeln!(s, "predicted   divergence/general: {}", describe_prediction(&rec.general));
    if rec.sharp.is_some() {
        let _ = writeln!(s, "predicted   sharp: {}", describe_prediction(&rec.sharp));
    }
    let _ = writeln!(s, "fitted      divergence: {}", describe_fit(&rec.divergence_fit));
    let _ = writeln!(s, "fitted      distance: {}", describe_fit(&rec.distance_fit));
    if !rec.coordinates.is_empty() {
        let _ = writeln!(s, "coordinate  sharp  predicted                      fitted");
        for c in &rec.coordinates {
            let pred = c.predicted.as_ref().map_or("n/a".into(), |r| r.to_string());
            let fit = c.fitted.as_ref().map_or("n/a".into(), |f| f.regime.to_string());
            let _ = writeln!(s, "{:<11} {:<6} {:<30} {}", c.coordinate + 1, c.sharp, pred, fit);
        }
    }
    let _ = writeln!(
        s,
        "note        predicted factors and exponents come from upper bounds; compare regimes and leading rates only"
    );
    s
}

fn regime_cells(r: Option<&Regime>) -> (String, String) {
    match r {
        Some(r) => {
            let v = r.parameter();
            (r.label().into(), if v.is_nan() { String::new() } else { fmt_f64(v) })
        }
        None => (String::new(), String::new()),
    }
}

fn rate_row(label: String, pred: Option<&Regime>, fit: Option<&RateFit>) -> Vec<String> {
    let (rp, pp) = regime_cells(pred);
    let (rf, pf) = regime_cells(fit.map(|f| &f.regime));
    let (lo, hi, r2) = match fit {
        Some(f) => (f.window.0.to_string(), f.window.1.to_string(), fmt_f64(f.r_squared)),
        None => Default::default(),
    };
    vec![label, rp, pp, rf, pf, lo, hi, r2]
}

/// `rates.csv`: one row per active coordinate, then `div` and `dist` rows.
pub fn rates_csv(rec: &RunRecord) -> Result<String, HarnessError> {
    let mut rows: Vec<Vec<String>> = rec
        .coordinates
        .iter()
        .map(|c| rate_row((c.coordinate + 1).to_string(), c.predicted.as_ref(), c.fitted.as_ref()))
        .collect();
    let general = match &rec.general {
        Some(Ok(g)) => Some(&g.regime),
        _ => None,
    };
    rows.push(rate_row("div".into(), general, rec.divergence_fit.as_ref()));
    let norm = rec.predicted_norm();
    rows.push(rate_row("dist".into(), norm.as_ref(), rec.distance_fit.as_ref()));
    csv_string(
        &[
            "coordinate",
            "regime_predicted",
            "param_predicted",
            "regime_fitted",
            "param_fitted",
            "window_lo",
            "window_hi",
            "r2",
        ],
        &rows,
    )
}

/// Writes `trajectory.csv`, `rates.csv` and `summary.txt` into `dir`.
pub fn write_artifacts(rec: &RunRecord, dir: &Path) -> Result<(), HarnessError> {
    write_file(&dir.join("trajectory.csv"), &rec.trajectory.to_csv_string()?)?;
    write_file(&dir.join("rates.csv"), &rates_csv(rec)?)?;
    write_file(&dir.join("summary.txt"), &rec.summary)
}

pub(crate) const MANIFEST_HEADER: [&str; 6] = ["run", "label", "config_sha256", "dir", "status", "stop"];

pub(crate) fn load_with_overrides(path: &Path, ov: &Overrides) -> Result<Config, HarnessError> {
    let base = Config::load(path)?;
    let mut table = base.to_table()?;
    ov.apply(&mut table)?;
    let mut cfg = Config::from_table(table)?;
    cfg.base_dir = base.base_dir;
    Ok(cfg)
}

/// `run <config>`: executes one configuration and writes its artifacts and manifest.
pub fn cmd_run(path: &Path, ov: &Overrides) -> Result<RunRecord, HarnessError> {
    let cfg = load_with_overrides(path, ov)?;
    let exp = cfg.build()?;
    let dir = ov.out_dir(&cfg);
    let rec = execute(&exp)?;
    write_artifacts(&rec, &dir)?;
    write_file(&dir.join("config.toml"), &cfg.to_toml()?)?;
    let row =
        vec!["1".into(), path.display().to_string(), cfg.hash()?, ".".into(), "ok".into(), rec.trajectory.stop.label()];
    write_file(&dir.join("manifest"), &csv_string(&MANIFEST_HEADER, &[row])?)?;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::catalog;

    #[test]
    fn euclidean_summary_reports_geometric_distance() {
        let exp = catalog::euclidean_identity(500).build().unwrap();
        let rec = execute(&exp).unwrap();
        let fit = rec.distance_fit.as_ref().unwrap();
        assert!((fit.regime.parameter() - 0.9).abs() < 1e-6);
        assert!(rec.summary.contains("geometric(factor=0.9"));
        let csv = rates_csv(&rec).unwrap();
        assert!(csv.lines().any(|l| l.starts_with("dist,geometric")));
    }

    #[test]
    fn simplex_summary_has_coordinate_table() {
        let exp = catalog::simplex_split(2000).build().unwrap();
        let rec = execute(&exp).unwrap();
        assert_eq!(rec.coordinates.len(), 2);
        assert!(rec.summary.contains("coordinate  sharp"));
    }
}

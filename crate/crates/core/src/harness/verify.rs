//! Invariant suites: prox engines, divergence lemmas, energy and rates.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::catalog;
use super::config::DEFAULT_HORIZON;
use super::reproduce::{table1, table2};
use super::run::Overrides;
use super::{csv_string, write_file, HarnessError};
use crate::analysis::{bound_sequence, fit_rate, fit_rate_log, predict_rate_general, Regime};
use crate::domains::{separation_certificate, Certificate, Domain, Side};
use crate::kernels::{BregmanKernel, Regularizer};
use crate::prox::{prox, prox_euclidean_polyhedral, prox_polyhedral_dual, prox_simplex_entropy};
use crate::solver::{energy_series, fmt_f64, run, template_slacks, MethodConfig, Preset};

pub const SAMPLES: usize = 1000;
pub const SUITES: [&str; 5] = ["prox", "energy", "lemmas", "rates", "all"];

/// Outcome of one invariant check over a batch of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub samples: usize,
    pub failures: usize,
    /// Smallest `allowed − observed` margin; negative when some sample failed.
    pub worst_slack: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Tally {
    suite: &'static str,
    name: String,
    samples: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(suite: &'static str, name: impl Into<String>) -> Self {
        Self { suite, name: name.into(), samples: 0, failures: 0, worst: f64::INFINITY }
    }

    /// Records one sample with margin `slack` (≥ 0 passes).
    fn record(&mut self, slack: f64) {
        self.samples += 1;
        if !(slack >= 0.0) {
            self.failures += 1;
        }
        if slack.is_nan() {
            self.worst = f64::NEG_INFINITY;
        } else {
            self.worst = self.worst.min(slack);
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            suite: self.suite,
            name: self.name,
            samples: self.samples,
            failures: self.failures,
            worst_slack: self.worst,
        }
    }
}

/// Kernel/domain pairs covered by the batteries; every one is 1-strongly convex on its domain.
pub fn battery_pairs() -> Vec<Regularizer> {
    let pairs = [
        (BregmanKernel::Euclidean, Domain::cube(-1.0, 1.0, 3)),
        (BregmanKernel::Entropy, Domain::orthant_box(vec![1.0; 3])),
        (BregmanKernel::tsallis(0.5).expect("valid q"), Domain::orthant_box(vec![1.0; 3])),
        (BregmanKernel::Hellinger, Domain::cube(-1.0, 1.0, 3)),
        (BregmanKernel::Entropy, Domain::simplex(4)),
        (BregmanKernel::tsallis(0.5).expect("valid q"), Domain::simplex(3)),
        (BregmanKernel::Euclidean, Domain::simplex(4)),
    ];
    pairs.into_iter().map(|(k, d)| Regularizer::new(k, d.expect("valid domain")).expect("supported pairing")).collect()
}

fn label(h: &Regularizer) -> String {
    format!("{}@{}", h.kernel().name(), h.domain().describe())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A random relative-interior point pulled slightly toward the domain center.
fn interior<R: Rng>(h: &Regularizer, rng: &mut R) -> Vec<f64> {
    let c = h.domain().center();
    let x = h.domain().sample_interior(rng);
    x.iter().zip(&c).map(|(v, m)| m + 0.95 * (v - m)).collect()
}

fn dual<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn run_batteries(
    suite: &'static str,
    seed: u64,
    samples: usize,
    f: impl Fn(&Regularizer, &mut ChaCha8Rng, &mut Tally) -> crate::Result<()>,
    name: &str,
) -> crate::Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (k, h) in battery_pairs().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let mut t = Tally::new(suite, format!("{name}[{}]", label(h)));
        for _ in 0..samples {
            f(h, &mut rng, &mut t)?;
        }
        out.push(t.finish());
    }
    Ok(out)
}

/// Prox engines: agreement with independent closed forms and non-expansiveness.
pub fn prox_suite(seed: u64, samples: usize) -> crate::Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new("prox", "dual_newton_vs_exponential_weights");
    for k in 0..samples {
        let n = 3 + k % 4;
        let dom = Domain::simplex(n)?;
        let h = Regularizer::new(BregmanKernel::Entropy, dom.clone())?;
        let x = dom.sample_interior(&mut rng);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = prox_polyhedral_dual(&h, &x, &y)?;
        let b = prox_simplex_entropy(&x, &y)?;
        let err = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        t.record(1e-10 - err);
    }
    out.push(t.finish());

    let mut t = Tally::new("prox", "euclidean_projection_vs_sorting");
    for k in 0..samples {
        let n = 3 + k % 4;
        let dom = Domain::simplex(n)?;
        let x = dom.sample_interior(&mut rng);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let v: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let z = prox_euclidean_polyhedral(&dom, &x, &y)?;
        let w = sort_projection(&v);
        let err = z.iter().zip(&w).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        t.record(1e-10 - err);
    }
    out.push(t.finish());

    out.extend(run_batteries(
        "prox",
        seed,
        samples,
        |h, rng, t| {
            let x = interior(h, rng);
            let (y1, y2) = (dual(h.dim(), rng), dual(h.dim(), rng));
            let (z1, z2) = (prox(h, &x, &y1)?, prox(h, &x, &y2)?);
            t.record(dist(&y1, &y2) + 1e-9 - dist(&z1, &z2));
            Ok(())
        },
        "nonexpansive",
    )?);
    out.extend(run_batteries(
        "prox",
        seed,
        samples,
        |h, rng, t| {
            // the output is feasible and satisfies ⟨∇h(z) − ∇h(x) − y, p − z⟩ ≥ 0
            let x = interior(h, rng);
            let y = dual(h.dim(), rng);
            let z = prox(h, &x, &y)?;
            let feasible = h.domain().contains(&z);
            if !h.kernel().steep() {
                t.record(if feasible { 0.0 } else { -1.0 });
                return Ok(());
            }
            let (gz, gx) = (h.gradient(&z)?, h.gradient(&x)?);
            let r: Vec<f64> = (0..z.len()).map(|i| gz[i] - gx[i] - y[i]).collect();
            let p = h.domain().sample_point(rng);
            let scale = 1.0 + r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            t.record(if feasible { dot(&r, &p) - dot(&r, &z) + 1e-9 * scale } else { -1.0 });
            Ok(())
        },
        "variational_optimality",
    )?);
    Ok(out)
}

fn sort_projection(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let (mut css, mut theta) = (0.0, 0.0);
    for (k, uk) in u.iter().enumerate() {
        css += uk;
        let t = (css - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Divergence identities, one- and two-step prox inequalities, and the
/// separation machinery.
pub fn lemmas_suite(seed: u64, samples: usize) -> crate::Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    out.extend(run_batteries(
        "lemmas",
        seed,
        samples,
        |h, rng, t| {
            let (p, x, xp) = (interior(h, rng), interior(h, rng), interior(h, rng));
            let (gx, gxp) = (h.gradient(&x)?, h.gradient(&xp)?);
            let g: Vec<f64> = gxp.iter().zip(&gx).map(|(a, b)| a - b).collect();
            let xm: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
            let lhs = h.divergence(&p, &xp)?;
            let rhs = h.divergence(&p, &x)? + h.divergence(&x, &xp)? + dot(&g, &xm);
            t.record(1e-10 - (lhs - rhs).abs());
            Ok(())
        },
        "three_point_identity",
    )?);
    out.extend(run_batteries(
        "lemmas",
        seed,
        samples,
        |h, rng, t| {
            let (p, x) = (h.domain().sample_point(rng), interior(h, rng));
            let d = h.divergence(&p, &x)?;
            let q = 0.5 * dist(&p, &x).powi(2);
            t.record(d - q * (1.0 - 1e-12));
            Ok(())
        },
        "strong_convexity",
    )?);
    out.extend(run_batteries(
        "lemmas",
        seed,
        samples,
        |h, rng, t| {
            let (p, x) = (h.domain().sample_point(rng), interior(h, rng));
            let y = dual(h.dim(), rng);
            let xp = prox(h, &x, &y)?;
            let dpx = h.divergence(&p, &x)?;
            let lhs = h.divergence(&p, &xp)?;
            let xpm: Vec<f64> = xp.iter().zip(&p).map(|(a, b)| a - b).collect();
            let xm: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
            let first = dpx + dot(&y, &xpm) - h.divergence(&xp, &x)?;
            let second = dpx + dot(&y, &xm) + 0.5 * dot(&y, &y);
            let tol = 1e-9 * (1.0 + lhs.abs() + dpx.abs());
            t.record((first - lhs + tol).min(second - lhs + tol));
            Ok(())
        },
        "one_step_inequality",
    )?);
    out.extend(run_batteries(
        "lemmas",
        seed,
        samples,
        |h, rng, t| {
            let (p, x) = (h.domain().sample_point(rng), interior(h, rng));
            let (y1, y2) = (dual(h.dim(), rng), dual(h.dim(), rng));
            let x1 = prox(h, &x, &y1)?;
            let x2 = prox(h, &x, &y2)?;
            let dpx = h.divergence(&p, &x)?;
            let lhs = h.divergence(&p, &x2)?;
            let x1m: Vec<f64> = x1.iter().zip(&p).map(|(a, b)| a - b).collect();
            let dy: Vec<f64> = y2.iter().zip(&y1).map(|(a, b)| a - b).collect();
            let rhs = dpx + dot(&y2, &x1m) + 0.5 * dot(&dy, &dy) - 0.5 * dist(&x1, &x).powi(2);
            t.record(rhs - lhs + 1e-9 * (1.0 + lhs.abs() + dpx.abs()));
            Ok(())
        },
        "two_step_inequality",
    )?);
    out.extend(certificate_checks(seed, samples)?);
    out.push(extreme_point_check()?);
    Ok(out)
}

/// Oriented slack of coordinate `i` at `x` relative to `x*`.
fn oriented(x: &[f64], xs: &[f64], i: usize, side: Side) -> f64 {
    side.sign() * (x[i] - xs[i])
}

/// Checks every certificate of the proper subsets of the active set against its side conditions.
pub fn certificate_checks(seed: u64, samples: usize) -> crate::Result<Vec<CheckResult>> {
    let cases = [
        ("simplex3_vertex", Domain::simplex(3)?, vec![0.0, 0.0, 1.0]),
        ("eps_line", Domain::polyhedron(vec![vec![1.0, -0.1]], vec![0.0])?, vec![0.0, 0.0]),
    ];
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (name, dom, xs) in cases {
        let mut t = Tally::new("lemmas", format!("certificate_side_conditions[{name}]"));
        let active = dom.active_set(&xs, crate::domains::ACTIVE_TOL)?;
        let idx = active.indices();
        let a = dom.constraint_matrix();
        let mut points: Vec<Vec<f64>> = (0..samples).map(|_| dom.sample_point(&mut rng)).collect();
        points.extend(dom.vertices());
        for mask in 0..(1u32 << idx.len()) - 1 {
            let subset: Vec<usize> =
                idx.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &i)| i).collect();
            match separation_certificate(&dom, &xs, &subset)? {
                Certificate::Direction { z, bound } => {
                    let az = (0..a.nrows())
                        .map(|r| (0..z.len()).map(|j| a[(r, j)] * z[j]).sum::<f64>().abs())
                        .fold(0.0, f64::max);
                    t.record(1e-12 - az);
                    t.record(if subset.iter().all(|&i| z[i] == 0.0) { 0.0 } else { -1.0 });
                    for &(i, side) in active.entries.iter().filter(|e| !subset.contains(&e.0)) {
                        t.record(side.sign() * z[i] - (1.0 - 1e-12));
                    }
                    let norm = dot(&z, &z).sqrt();
                    let sup = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    t.record(bound + 1e-12 - norm.max(sup));
                    t.record(bound - 1.0);
                }
                Certificate::Dominated { index, bound } => {
                    let side = active.side(index).unwrap_or(Side::Lower);
                    for x in &points {
                        let yi = oriented(x, &xs, index, side);
                        let m = subset
                            .iter()
                            .map(|&j| oriented(x, &xs, j, active.side(j).unwrap_or(Side::Lower)))
                            .fold(0.0f64, f64::max);
                        t.record(bound * m + 1e-12 - yi);
                    }
                    t.record(bound - 1.0);
                }
            }
        }
        out.push(t.finish());
    }
    Ok(out)
}

/// The rank test for extreme points agrees with vertex enumeration.
pub fn extreme_point_check() -> crate::Result<CheckResult> {
    let mut t = Tally::new("lemmas", "extreme_test_vs_vertex_enumeration");
    let doms = [
        Domain::simplex(3)?,
        Domain::simplex(5)?,
        Domain::polyhedron(vec![vec![1.0, 1.0, 2.0], vec![0.0, 1.0, -1.0]], vec![2.0, 0.0])?,
        Domain::polyhedron(vec![vec![1.0, 2.0, 1.0, 1.0], vec![1.0, 0.0, 3.0, 1.0]], vec![4.0, 3.0])?,
    ];
    for dom in doms {
        let verts = dom.vertices();
        t.record(if verts.is_empty() { -1.0 } else { 0.0 });
        for v in &verts {
            t.record(if dom.is_extreme(v)? { 0.0 } else { -1.0 });
        }
        for (k, u) in verts.iter().enumerate() {
            for v in &verts[k + 1..] {
                let mid: Vec<f64> = u.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect();
                t.record(if dom.is_extreme(&mid)? { -1.0 } else { 0.0 });
            }
        }
        let s = dom.slater_point().expect("polyhedra carry a Slater point").to_vec();
        t.record(if dom.is_extreme(&s)? { -1.0 } else { 0.0 });
    }
    Ok(t.finish())
}

/// Energy decrease, the template inequality and the general divergence bound
/// along every catalog run under all three presets.
pub fn energy_suite(horizon: usize) -> crate::Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for name in catalog::NAMES {
        for preset in [Preset::MirrorDescent, Preset::MirrorProx, Preset::Optimistic] {
            let exp = catalog::by_name(name, horizon)
                .expect("catalog name")
                .build()
                .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
            let (prob, h) = (&exp.problem, &exp.regularizer);
            let base = &exp.method;
            let cfg = MethodConfig::preset(preset, base.gamma(1), horizon, base.init.clone())?;
            let tr = run(prob, h, &cfg)?;
            let tag = format!("{name}/{}", preset.name());

            let rep = energy_series(&tr, prob, h, &cfg)?;
            let mut t = Tally::new("energy", format!("energy_decrease[{tag}]"));
            t.samples = tr.len().saturating_sub(1);
            t.failures = rep.violations.len();
            t.worst = rep.min_slack;
            out.push(t.finish());

            let mut t = Tally::new("energy", format!("template_inequality[{tag}]"));
            for c in [0.0, 1.0 - cfg.alpha_a - cfg.alpha_b] {
                for s in template_slacks(&tr, prob, h, &cfg, c)? {
                    t.record(s + 1e-9);
                }
            }
            out.push(t.finish());

            if let Ok(pred) = predict_rate_general(prob, h, &cfg) {
                let bound = bound_sequence(&pred, &cfg, tr.len())?;
                let mut t = Tally::new("energy", format!("divergence_bound[{tag}]"));
                for (d, b) in tr.divergence.iter().zip(&bound) {
                    t.record(b * (1.0 + 1e-9) + 1e-300 - d);
                }
                out.push(t.finish());
            }
        }
    }
    Ok(out)
}

fn check_from_flag(suite: &'static str, name: String, ok: bool, slack: f64) -> CheckResult {
    CheckResult { suite, name, samples: 1, failures: usize::from(!ok), worst_slack: slack }
}

/// Rate regimes of the reproduction tables and the simplex per-coordinate split.
pub fn rates_suite(horizon: usize, seed: u64) -> Result<Vec<CheckResult>, HarnessError> {
    let mut out = Vec::new();
    for report in [table1(horizon, seed)?, table2(horizon)?] {
        for (row, ok) in report.rows.iter().zip(&report.passed) {
            out.push(check_from_flag(
                "rates",
                format!("{}[{}]", report.target, row[0]),
                *ok,
                if *ok { 0.0 } else { -1.0 },
            ));
        }
    }
    let exp = catalog::simplex_split(horizon).build()?;
    let tr = run(&exp.problem, &exp.regularizer, &exp.method)?;
    let first = fit_rate_log(&tr.log_coordinate(0), 0.2)?;
    let ok = first.regime.label() == "geometric" && first.r_squared >= 0.999;
    out.push(check_from_flag("rates", "simplex_split[sharp coordinate geometric]".into(), ok, first.r_squared - 0.999));
    let second = fit_rate(&tr.coordinate(1), 0.2)?;
    let slack = match second.regime {
        Regime::Power { exponent } => 0.05 - (exponent + 1.0).abs(),
        _ => -1.0,
    };
    out.push(check_from_flag("rates", "simplex_split[flat coordinate 1/t]".into(), slack >= 0.0, slack));
    Ok(out)
}

/// Runs one suite (`prox`, `energy`, `lemmas`, `rates` or `all`).
pub fn run_suite(suite: &str, seed: u64, horizon: usize) -> Result<Vec<CheckResult>, HarnessError> {
    let energy_horizon = horizon.min(2000);
    Ok(match suite {
        "prox" => prox_suite(seed, SAMPLES)?,
        "lemmas" => lemmas_suite(seed, SAMPLES)?,
        "energy" => energy_suite(energy_horizon)?,
        "rates" => rates_suite(horizon, seed)?,
        "all" => {
            let mut v = prox_suite(seed, SAMPLES)?;
            v.extend(lemmas_suite(seed, SAMPLES)?);
            v.extend(energy_suite(energy_horizon)?);
            v.extend(rates_suite(horizon, seed)?);
            v
        }
        other => return Err(HarnessError::UnknownTarget(other.to_string())),
    })
}

pub fn results_csv(results: &[CheckResult]) -> Result<String, HarnessError> {
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.suite.to_string(),
                r.name.clone(),
                r.samples.to_string(),
                r.failures.to_string(),
                fmt_f64(r.worst_slack),
                if r.passed() { "pass" } else { "FAIL" }.to_string(),
            ]
        })
        .collect();
    csv_string(&["suite", "check", "samples", "failures", "worst_slack", "status"], &rows)
}

/// `verify <suite>`: prints and writes `verify.csv`, failing with `VerifyFailed`
/// when any check fails.
pub fn cmd_verify(suite: &str, ov: &Overrides) -> Result<Vec<CheckResult>, HarnessError> {
    let results = run_suite(suite, ov.seed.unwrap_or(0), ov.horizon.unwrap_or(DEFAULT_HORIZON))?;
    let dir = ov.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let csv = results_csv(&results)?;
    print!("{csv}");
    write_file(&dir.join("verify.csv"), &csv)?;
    let failed = results.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(HarnessError::VerifyFailed(failed));
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batteries_pass() {
        for r in prox_suite(1, 50).unwrap().into_iter().chain(lemmas_suite(1, 50).unwrap()) {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn energy_suite_passes_on_short_runs() {
        for r in energy_suite(300).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }
}

//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::sync::Arc;

use bregman_vi::analysis::{
    estimate_legendre_exponent, fit_rate, fit_rate_log, oracle_basicnum, oracle_polyak, Regime,
};
use bregman_vi::harness::verify::{certificate_checks, run_suite};
use bregman_vi::solver::Trajectory;
use bregman_vi::{classify_solution, run, AffineField, BregmanKernel, Domain, MethodConfig, Problem, Regularizer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA: f64 = 0.1;
const LONG: usize = 100_000;

type Outcome = Result<String, String>;

fn md_1d(
    kernel: BregmanKernel,
    dom: Domain,
    offset: f64,
    xs: f64,
    horizon: usize,
) -> (Problem, Regularizer, MethodConfig, Trajectory) {
    let prob = Problem::new(dom.clone(), Arc::new(AffineField::shifted(vec![offset])), 1.0, 1.0)
        .unwrap()
        .with_solution(vec![xs])
        .unwrap();
    let h = Regularizer::new(kernel, dom).unwrap();
    let cfg = MethodConfig::mirror_descent(GAMMA, horizon, vec![0.5]).unwrap();
    let tr = run(&prob, &h, &cfg).unwrap();
    (prob, h, cfg, tr)
}

fn half_line() -> Domain {
    Domain::orthant(1)
}

fn unit_box() -> Domain {
    Domain::orthant_box(vec![1.0]).unwrap()
}

fn tsallis() -> BregmanKernel {
    BregmanKernel::tsallis(0.5).unwrap()
}

fn factor(r: &Regime) -> Option<f64> {
    match r {
        Regime::Geometric { factor } => Some(*factor),
        _ => None,
    }
}

fn exponent(r: &Regime) -> Option<f64> {
    match r {
        Regime::Power { exponent } => Some(*exponent),
        _ => None,
    }
}

fn within(name: &str, got: Option<f64>, want: f64, tol: f64) -> Result<String, String> {
    match got {
        Some(v) if (v - want).abs() <= tol => Ok(format!("{name}={v:.6}")),
        Some(v) => Err(format!("{name}={v} want {want}±{tol}")),
        None => Err(format!("{name}: wrong regime")),
    }
}

fn geometric_euclidean() -> Outcome {
    let (_, _, _, tr) = md_1d(BregmanKernel::Euclidean, half_line(), 0.0, 0.0, 500);
    let dist = fit_rate(&tr.distance, 0.2).map_err(|e| e.to_string())?;
    let div = fit_rate(&tr.divergence, 0.2).map_err(|e| e.to_string())?;
    let a = within("distance factor", factor(&dist.regime), 0.9, 1e-6)?;
    let b = within("divergence factor", factor(&div.regime), 0.81, 1e-6)?;
    Ok(format!("{a}, {b}"))
}

fn entropic_one_over_t() -> Outcome {
    let (_, _, _, tr) = md_1d(BregmanKernel::Entropy, half_line(), 0.0, 0.0, LONG);
    if tr.len() != LONG {
        return Err(format!("run stopped at {}", tr.len()));
    }
    let v = tr.base[LONG - 1][0] * GAMMA * LONG as f64;
    if (0.95..=1.05).contains(&v) {
        Ok(format!("X_T·γT={v:.6}"))
    } else {
        Err(format!("X_T·γT={v} outside [0.95, 1.05]"))
    }
}

fn norm_and_divergence(tr: &Trajectory, norm: f64, div: f64, tol: f64) -> Outcome {
    let n = fit_rate(&tr.distance, 0.2).map_err(|e| e.to_string())?;
    let d = fit_rate(&tr.divergence, 0.2).map_err(|e| e.to_string())?;
    let a = within("norm exponent", exponent(&n.regime), norm, tol)?;
    let b = within("divergence exponent", exponent(&d.regime), div, tol)?;
    Ok(format!("{a}, {b}"))
}

fn tsallis_exponents() -> Outcome {
    let (_, _, _, tr) = md_1d(tsallis(), unit_box(), 0.0, 0.0, LONG);
    norm_and_divergence(&tr, -2.0 / 3.0, -1.0 / 3.0, 0.03)
}

fn hellinger_shifted() -> Outcome {
    let (_, _, _, tr) = md_1d(BregmanKernel::Hellinger, Domain::interval(-1.0, 1.0).unwrap(), 1.0, -1.0, LONG);
    norm_and_divergence(&tr, -2.0 / 3.0, -1.0 / 3.0, 0.03)
}

fn sharp_finite_time() -> Outcome {
    let (_, _, _, tr) = md_1d(BregmanKernel::Euclidean, half_line(), 1.0, 0.0, 50);
    // independent oracle: x ← [x − γ(x + 1)]_+
    let mut x = 0.5f64;
    let mut first_zero = None;
    for (k, state) in tr.base.iter().enumerate() {
        if state[0] != x {
            return Err(format!("iterate {} = {} differs from oracle {}", k + 1, state[0], x));
        }
        if x == 0.0 && first_zero.is_none() {
            first_zero = Some(k);
        }
        x = (x + -GAMMA * (x + 1.0)).max(0.0);
    }
    match first_zero {
        Some(k) if tr.base[k..].iter().all(|s| s[0] == 0.0) && k <= 4 => {
            Ok(format!("exact zero from 0-based index {k} on, matching the oracle"))
        }
        other => Err(format!("first zero at {other:?}")),
    }
}

fn sharp_entropy() -> Outcome {
    let (prob, _, _, tr) = md_1d(BregmanKernel::Entropy, half_line(), 1.0, 0.0, LONG);
    let fit = fit_rate_log(&tr.log_coordinate(0), 0.2).map_err(|e| e.to_string())?;
    let f = within("factor", factor(&fit.regime), (-0.1f64).exp(), 1e-3)?;
    let profile = classify_solution(&prob.domain, prob.field.as_ref(), &[0.0]).map_err(|e| e.to_string())?;
    let delta_eff = profile.delta_eff.ok_or("no effective sharpness")?;
    let bound = (-GAMMA * delta_eff / 2.0).exp();
    let got = factor(&fit.regime).unwrap_or(f64::INFINITY);
    if got <= bound {
        Ok(format!("{f} ≤ bound {bound:.6}"))
    } else {
        Err(format!("factor {got} exceeds bound {bound}"))
    }
}

fn sharp_tsallis() -> Outcome {
    let (_, _, _, tr) = md_1d(tsallis(), unit_box(), 1.0, 0.0, LONG);
    let fit = fit_rate(&tr.distance, 0.2).map_err(|e| e.to_string())?;
    within("norm exponent", exponent(&fit.regime), -2.0, 0.05)
}

fn simplex_split() -> Outcome {
    let dom = Domain::simplex(3).unwrap();
    let prob = Problem::new(dom.clone(), Arc::new(AffineField::shifted_identity(&[-0.4, 0.0, 1.0])), 1.0, 1.0)
        .unwrap()
        .with_solution(vec![0.0, 0.0, 1.0])
        .unwrap();
    let h = Regularizer::new(BregmanKernel::Entropy, dom).unwrap();
    let cfg = MethodConfig::mirror_descent(GAMMA, LONG, vec![1.0 / 3.0; 3]).unwrap();
    let tr = run(&prob, &h, &cfg).map_err(|e| e.to_string())?;
    let first = fit_rate_log(&tr.log_coordinate(0), 0.2).map_err(|e| e.to_string())?;
    if first.r_squared < 0.999 {
        return Err(format!("coordinate 1 semilog R²={}", first.r_squared));
    }
    let a = within("coordinate 1 factor", factor(&first.regime), (-0.04f64).exp(), 5e-3)?;
    let second = fit_rate(&tr.coordinate(1), 0.2).map_err(|e| e.to_string())?;
    let b = within("coordinate 2 exponent", exponent(&second.regime), -1.0, 0.05)?;
    let (lo, hi) = (0.2 / GAMMA * 0.5, 2.0 / GAMMA * 2.0);
    let band: Vec<f64> = (1000..=tr.len()).map(|t| tr.base[t - 1][1] * t as f64).collect();
    let (mn, mx) = band.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    if mn < lo || mx > hi {
        return Err(format!("x_2·t spans [{mn}, {mx}], outside [{lo}, {hi}]"));
    }
    Ok(format!("{a}, {b}, x_2·t in [{mn:.3}, {mx:.3}]"))
}

fn legendre_exponents() -> Outcome {
    let cases: [(BregmanKernel, Domain, f64, f64); 4] = [
        (BregmanKernel::Euclidean, half_line(), 0.0, 0.0),
        (BregmanKernel::Entropy, half_line(), 0.0, 0.5),
        (tsallis(), unit_box(), 0.0, 0.75),
        (BregmanKernel::Hellinger, Domain::interval(-1.0, 1.0).unwrap(), -1.0, 0.75),
    ];
    let mut notes = Vec::new();
    for (k, dom, p, want) in cases {
        let name = k.name();
        let h = Regularizer::new(k, dom).unwrap();
        let est = estimate_legendre_exponent(&h, &[p], 0.5, 7).map_err(|e| e.to_string())?;
        notes.push(within(&format!("{name} boundary"), Some(est), want, 0.05)?);
        let mid = h.domain().center();
        let inner = estimate_legendre_exponent(&h, &mid, 0.5, 7).map_err(|e| e.to_string())?;
        if inner > 0.05 {
            return Err(format!("{name} interior estimate {inner} > 0.05"));
        }
    }
    let h = Regularizer::new(BregmanKernel::Entropy, Domain::simplex(3).unwrap()).unwrap();
    let inner = estimate_legendre_exponent(&h, &[1.0 / 3.0; 3], 0.2, 7).map_err(|e| e.to_string())?;
    if inner > 0.05 {
        return Err(format!("simplex interior estimate {inner} > 0.05"));
    }
    Ok(notes.join(", "))
}

fn invariant_suites() -> Outcome {
    let mut samples = 0;
    for suite in ["prox", "lemmas", "energy"] {
        let results = run_suite(suite, 0, 2000).map_err(|e| e.to_string())?;
        if let Some(bad) = results.iter().find(|r| !r.passed()) {
            return Err(format!("{}: {} failures of {}", bad.name, bad.failures, bad.samples));
        }
        samples += results.iter().map(|r| r.samples).sum::<usize>();
    }
    Ok(format!("{samples} samples, zero failures"))
}

fn sequence_oracles() -> Outcome {
    let mut notes = Vec::new();
    for (a, r) in [(0.1, 1.0), (0.1, 0.5), (0.05, 2.0)] {
        let s = oracle_basicnum(a, r, 1.0, LONG).map_err(|e| e.to_string())?;
        let last = *s.normalized.last().unwrap();
        if !(0.98..=1.02).contains(&last) {
            return Err(format!("(a={a}, r={r}) normalized product {last}"));
        }
        notes.push(format!("{last:.4}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in [0.5, 1.0, 2.0] {
        for _ in 0..1000 {
            let rho: Vec<f64> = (0..200).map(|_| rng.random_range(0.0..0.3)).collect();
            let bound = oracle_polyak(1.0, &rho, r).map_err(|e| e.to_string())?;
            let mut d = 1.0f64;
            for (t, p) in rho.iter().enumerate() {
                let slack = rng.random_range(0.0..0.01) * d;
                d = (d - p * d.powf(1.0 + r) - slack).max(0.0);
                if d > bound[t + 1] * (1.0 + 1e-12) {
                    return Err(format!("r={r}: d={d} exceeds bound {} at step {}", bound[t + 1], t + 2));
                }
            }
        }
    }
    Ok(format!("normalized products {}; Polyak bound never exceeded", notes.join(", ")))
}

fn certificates() -> Outcome {
    let results = certificate_checks(3, 1000).map_err(|e| e.to_string())?;
    match results.iter().find(|r| !r.passed()) {
        Some(bad) => Err(format!("{}: {} failures", bad.name, bad.failures)),
        None => Ok(format!("{} cases, all side conditions hold", results.len())),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("euclidean geometric rate", geometric_euclidean),
        ("entropy 1/t rate", entropic_one_over_t),
        ("tsallis exponents", tsallis_exponents),
        ("hellinger shifted exponents", hellinger_shifted),
        ("sharp finite termination", sharp_finite_time),
        ("sharp entropy linear rate", sharp_entropy),
        ("sharp tsallis exponent", sharp_tsallis),
        ("simplex per-coordinate split", simplex_split),
        ("legendre exponent estimates", legendre_exponents),
        ("invariant suites", invariant_suites),
        ("sequence oracles", sequence_oracles),
        ("separation certificates", certificates),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

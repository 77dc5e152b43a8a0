//! Entropic mirror descent on the simplex with one sharp and one flat active
//! coordinate: the per-coordinate split of the convergence rate.

use std::sync::Arc;

use bregman_vi::analysis::per_coordinate_report;
use bregman_vi::{classify_solution, run, AffineField, BregmanKernel, Domain, MethodConfig, Problem, Regularizer};

fn main() -> bregman_vi::Result<()> {
    let dom = Domain::simplex(3)?;
    let field = Arc::new(AffineField::shifted_identity(&[-0.4, 0.0, 1.0]));
    let prob = Problem::new(dom.clone(), field, 1.0, 1.0)?.with_solution(vec![0.0, 0.0, 1.0])?;
    let h = Regularizer::new(BregmanKernel::Entropy, dom)?;
    let cfg = MethodConfig::mirror_descent(0.1, 50_000, vec![1.0 / 3.0; 3])?;
    let tr = run(&prob, &h, &cfg)?;

    let profile = classify_solution(&prob.domain, prob.field.as_ref(), &[0.0, 0.0, 1.0])?;
    println!(
        "sharp {:?}, flat {:?}, δ = {:?}, δ_eff = {:?}",
        profile.sharps, profile.flats, profile.delta, profile.delta_eff
    );
    for rep in per_coordinate_report(&tr, &profile, &prob, &h, &cfg)? {
        let predicted = rep.predicted.map_or("-".to_string(), |r| r.to_string());
        let fitted = rep.fitted.map_or("-".to_string(), |f| f.regime.to_string());
        println!("x_{}  sharp={:<5}  predicted {predicted:<30} fitted {fitted}", rep.coordinate + 1, rep.sharp);
    }
    for t in [1_000, 10_000, 50_000] {
        println!("t = {t:>6}: x_2·t = {:.4}", tr.base[t - 1][1] * t as f64);
    }
    Ok(())
}

//! Mirror descent, mirror-prox and optimistic mirror descent on `F(x) = x`,
//! with fitted and predicted rates for each kernel.

use std::sync::Arc;

use bregman_vi::analysis::{fit_rate, predict_rate_general};
use bregman_vi::{run, AffineField, BregmanKernel, Domain, MethodConfig, Preset, Problem, Regularizer};

fn main() -> bregman_vi::Result<()> {
    let cases = [
        (BregmanKernel::Euclidean, Domain::orthant(1)),
        (BregmanKernel::Entropy, Domain::orthant(1)),
        (BregmanKernel::tsallis(0.5)?, Domain::orthant_box(vec![1.0])?),
    ];
    println!("{:<14} {:<5} {:<32} {:<32}", "kernel", "mode", "predicted divergence", "fitted divergence");
    for (k, dom) in cases {
        let prob = Problem::new(dom.clone(), Arc::new(AffineField::identity(1)), 1.0, 1.0)?.with_solution(vec![0.0])?;
        let h = Regularizer::new(k, dom)?;
        for preset in [Preset::MirrorDescent, Preset::MirrorProx, Preset::Optimistic] {
            let cfg = MethodConfig::preset(preset, 0.1, 20_000, vec![0.5])?;
            let tr = run(&prob, &h, &cfg)?;
            let pred = predict_rate_general(&prob, &h, &cfg)?;
            let fit = fit_rate(&tr.divergence, 0.2)?;
            println!(
                "{:<14} {:<5} {:<32} {:<32}",
                h.kernel().name(),
                preset.name(),
                pred.regime.to_string(),
                fit.regime.to_string()
            );
        }
    }
    Ok(())
}

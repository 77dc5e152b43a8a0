//! Energy decrease and the one-step template inequality along a run, with the
//! step-size conditions reported first.

use std::sync::Arc;

use bregman_vi::solver::{energy_series, template_slacks, validate_step};
use bregman_vi::{run, AffineField, BregmanKernel, Domain, MethodConfig, Preset, Problem, Regularizer};

fn main() -> bregman_vi::Result<()> {
    let dom = Domain::interval(-1.0, 1.0)?;
    let prob =
        Problem::new(dom.clone(), Arc::new(AffineField::shifted(vec![1.0])), 1.0, 1.0)?.with_solution(vec![-1.0])?;
    let h = Regularizer::new(BregmanKernel::Hellinger, dom)?;
    for preset in [Preset::MirrorDescent, Preset::MirrorProx, Preset::Optimistic] {
        let cfg = MethodConfig::preset(preset, 0.1, 5_000, vec![0.5])?;
        let steps = validate_step(&cfg, &prob, h.legendre_constant(&[-1.0], 1.0)?);
        let tr = run(&prob, &h, &cfg)?;
        let energy = energy_series(&tr, &prob, &h, &cfg)?;
        let worst = template_slacks(&tr, &prob, &h, &cfg, 0.0)?.into_iter().fold(f64::INFINITY, f64::min);
        println!(
            "{:<4} steps ok: {:<5} energy {:.3e} -> {:.3e}, violations {}, worst template slack {worst:.3e}",
            preset.name(),
            steps.valid(),
            energy.energy[0],
            energy.energy.last().copied().unwrap_or(f64::NAN),
            energy.violations.len()
        );
    }
    Ok(())
}

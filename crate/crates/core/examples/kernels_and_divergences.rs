//! Scalar kernels, their mirror maps and Bregman divergences.

use bregman_vi::{BregmanKernel, Domain, Regularizer};

fn main() -> bregman_vi::Result<()> {
    let kernels =
        [BregmanKernel::Euclidean, BregmanKernel::Entropy, BregmanKernel::tsallis(0.5)?, BregmanKernel::Hellinger];
    println!("{:<14} {:>10} {:>10} {:>12} {:>12}", "kernel", "θ'(0.3)", "θ''(0.3)", "D(0.1, 0.3)", "inverse");
    for k in &kernels {
        let g = k.eval(0.3, 1)?;
        println!(
            "{:<14} {:>10.5} {:>10.5} {:>12.6} {:>12.6}",
            k.name(),
            g,
            k.eval(0.3, 2)?,
            k.divergence(0.1, 0.3)?,
            k.mirror_inverse(g)?
        );
    }

    // separable regularizer on the simplex: D is the KL divergence
    let h = Regularizer::new(BregmanKernel::Entropy, Domain::simplex(3)?)?;
    let (p, x): ([f64; 3], [f64; 3]) = ([0.5, 0.3, 0.2], [1.0 / 3.0; 3]);
    let kl: f64 = p.iter().zip(&x).map(|(a, b)| a * (a / b).ln()).sum();
    println!("\nentropy on the simplex: D(p, x) = {:.12}, KL = {kl:.12}", h.divergence(&p, &x)?);
    Ok(())
}

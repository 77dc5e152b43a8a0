//! Analytic and sampled Legendre exponents at boundary and interior points.

use bregman_vi::analysis::estimate_legendre_exponent;
use bregman_vi::{BregmanKernel, Domain, Regularizer};

fn main() -> bregman_vi::Result<()> {
    let cases = [
        (BregmanKernel::Euclidean, Domain::orthant(1), 0.0),
        (BregmanKernel::Entropy, Domain::orthant(1), 0.0),
        (BregmanKernel::tsallis(0.5)?, Domain::orthant_box(vec![1.0])?, 0.0),
        (BregmanKernel::Hellinger, Domain::interval(-1.0, 1.0)?, -1.0),
    ];
    println!("{:<14} {:>9} {:>9} {:>9} {:>9}", "kernel", "analytic", "sampled", "β", "interior");
    for (k, dom, p) in cases {
        let h = Regularizer::new(k, dom)?;
        let analytic = h.legendre_exponent_analytic(&[p])?;
        let sampled = estimate_legendre_exponent(&h, &[p], 0.5, 1)?;
        let beta = h.legendre_constant(&[p], 0.5)?;
        let inner = estimate_legendre_exponent(&h, &h.domain().center(), 0.5, 1)?;
        println!("{:<14} {analytic:>9.4} {sampled:>9.4} {beta:>9.4} {inner:>9.4}", h.kernel().name());
    }

    // a simplex vertex: the entropy exponent is still 1/2
    let h = Regularizer::new(BregmanKernel::Entropy, Domain::simplex(3)?)?;
    let vertex = [0.0, 0.0, 1.0];
    println!(
        "\nentropy at a simplex vertex: analytic {}, sampled {:.4}",
        h.legendre_exponent_analytic(&vertex)?,
        estimate_legendre_exponent(&h, &vertex, 0.5, 1)?
    );
    Ok(())
}

//! The prox-mapping engines: closed forms, exponential weights, Euclidean
//! projection and dual Newton on general polyhedra.

use bregman_vi::prox::{prox, prox_euclidean_polyhedral, prox_polyhedral_dual, prox_simplex_entropy};
use bregman_vi::{BregmanKernel, Domain, Regularizer};

fn show(label: &str, z: &[f64]) {
    let cells: Vec<String> = z.iter().map(|v| format!("{v:.6}")).collect();
    println!("{label:<34} [{}]", cells.join(", "));
}

fn main() -> bregman_vi::Result<()> {
    let simplex = Domain::simplex(3)?;
    let x = [0.2, 0.3, 0.5];
    let y = [0.4, -0.2, 0.1];

    let h = Regularizer::new(BregmanKernel::Entropy, simplex.clone())?;
    show("exponential weights", &prox_simplex_entropy(&x, &y)?);
    show("entropy dual Newton", &prox_polyhedral_dual(&h, &x, &y)?);
    show("euclidean projection", &prox_euclidean_polyhedral(&simplex, &x, &y)?);

    let h = Regularizer::new(BregmanKernel::tsallis(0.5)?, simplex)?;
    show("tsallis dual Newton", &prox(&h, &x, &y)?);

    let box1 = Regularizer::new(BregmanKernel::Hellinger, Domain::interval(-1.0, 1.0)?)?;
    show("hellinger closed form on [-1, 1]", &prox(&box1, &[0.5], &[-3.0])?);

    // a polyhedron with two equalities
    let poly = Domain::polyhedron(vec![vec![1.0, 1.0, 2.0], vec![0.0, 1.0, -1.0]], vec![2.0, 0.0])?;
    let h = Regularizer::new(BregmanKernel::Entropy, poly.clone())?;
    let start = poly.slater_point().expect("polyhedra carry a Slater point").to_vec();
    let z = prox(&h, &start, &[0.3, -0.1, 0.2])?;
    show("entropy on a polyhedron", &z);
    println!("{:<34} {:.2e}", "equality residual", poly.equality_residual(&z));
    Ok(())
}

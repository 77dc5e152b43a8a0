//! Slack decomposition at a boundary solution and the separation certificates
//! for every proper subset of its active set (indices are 0-based).

use bregman_vi::domains::separation_constant;
use bregman_vi::{separation_certificate, AffineField, Certificate, Domain, VectorField};

fn report(name: &str, dom: &Domain, xs: &[f64], active: &[usize]) -> bregman_vi::Result<()> {
    println!("{name}: x* = {xs:?}, separation constant {:.6}", separation_constant(dom, xs)?);
    for mask in 0..(1usize << active.len()) - 1 {
        let subset: Vec<usize> = (0..active.len()).filter(|b| mask & (1 << b) != 0).map(|b| active[b]).collect();
        match separation_certificate(dom, xs, &subset)? {
            Certificate::Dominated { index, bound } => {
                println!("  I = {subset:?}: x[{index}] ≤ {bound:.4} · max_(j in I) x[j]")
            }
            Certificate::Direction { z, bound } => println!("  I = {subset:?}: direction {z:?} (bound {bound:.4})"),
        }
    }
    Ok(())
}

fn main() -> bregman_vi::Result<()> {
    let simplex = Domain::simplex(3)?;
    report("simplex", &simplex, &[0.0, 0.0, 1.0], &[0, 1])?;

    // the line x_1 = 0.1 x_2 in the nonnegative quadrant
    let line = Domain::polyhedron(vec![vec![1.0, -0.1]], vec![0.0])?;
    report("thin cone", &line, &[0.0, 0.0], &[0, 1])?;

    let f = AffineField::shifted_identity(&[-0.4, 0.0, 1.0]);
    let profile = bregman_vi::classify_solution(&simplex, &f, &[0.0, 0.0, 1.0])?;
    println!(
        "\nF(x*) = {:?}: sharp {:?}, flat {:?}, extreme {}",
        f.eval(&[0.0, 0.0, 1.0]),
        profile.sharps,
        profile.flats,
        profile.is_extreme
    );
    Ok(())
}

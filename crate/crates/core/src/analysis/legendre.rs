use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::line_fit;
use crate::error::{Error, Result};
use crate::kernels::{BregmanKernel, Regularizer, RANDOM_DIRECTIONS};

const MIN_LEVELS: usize = 3;

/// Numerical Legendre exponent at `p`: along each probe direction, `1 − slope`
/// of `ln √D(p, p + r d)` against `ln r` on the geometric radius grid; the
/// largest value over directions, clamped to `[0, 1]`.
pub fn estimate_legendre_exponent(h: &Regularizer, p: &[f64], radius: f64, seed: u64) -> Result<f64> {
    h.domain().check_feasible(p)?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    let custom = matches!(h.kernel(), BregmanKernel::Custom(_));
    let hp = if custom { h.value(p)?.abs() } else { 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<f64> = None;
    for d in h.domain().probe_directions(p, &mut rng, RANDOM_DIRECTIONS) {
        let (mut lr, mut ld) = (Vec::new(), Vec::new());
        for (r, x) in h.ray_samples(p, &d, radius) {
            let dv = h.divergence_unchecked(p, &x)?;
            // direct-formula divergences lose all digits near the diagonal
            let floor = if custom { 1e-13 * (1.0 + hp + h.value(&x)?.abs()) } else { 0.0 };
            if dv > floor && dv.is_finite() {
                lr.push(r.ln());
                ld.push(0.5 * dv.ln());
            }
        }
        if lr.len() >= MIN_LEVELS {
            let a = 1.0 - line_fit(&lr, &ld).slope;
            best = Some(best.map_or(a, |b: f64| b.max(a)));
        }
    }
    best.map(|a| a.clamp(0.0, 1.0))
        .ok_or_else(|| Error::InvalidArgument("no feasible probe direction at the point".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;

    fn est(k: BregmanKernel, d: Domain, p: &[f64]) -> f64 {
        estimate_legendre_exponent(&Regularizer::new(k, d).unwrap(), p, 0.5, 7).unwrap()
    }

    #[test]
    fn one_dimensional_kernels() {
        assert!(est(BregmanKernel::Euclidean, Domain::orthant(1), &[0.0]).abs() < 0.05);
        assert!((est(BregmanKernel::Entropy, Domain::orthant(1), &[0.0]) - 0.5).abs() < 0.05);
        let t = BregmanKernel::tsallis(0.5).unwrap();
        assert!((est(t, Domain::orthant_box(vec![1.0]).unwrap(), &[0.0]) - 0.75).abs() < 0.05);
        let hel = Domain::interval(-1.0, 1.0).unwrap();
        assert!((est(BregmanKernel::Hellinger, hel.clone(), &[-1.0]) - 0.75).abs() < 0.05);
        assert!(est(BregmanKernel::Hellinger, hel, &[0.2]) < 0.05);
    }

    #[test]
    fn interior_points_are_smooth() {
        assert!(est(BregmanKernel::Entropy, Domain::orthant(2), &[0.3, 0.7]) < 0.05);
        assert!(est(BregmanKernel::Entropy, Domain::simplex(3).unwrap(), &[0.2, 0.3, 0.5]) < 0.05);
    }

    #[test]
    fn simplex_vertex() {
        let a = est(BregmanKernel::Entropy, Domain::simplex(3).unwrap(), &[0.0, 0.0, 1.0]);
        assert!((a - 0.5).abs() < 0.05);
    }
}

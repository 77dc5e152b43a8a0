use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::kernels::{BregmanKernel, Regularizer};
use crate::lp::{LinearProgram, LpOutcome, Relation};

const MAX_NEWTON: usize = 100;
const TOL: f64 = 1e-11;

// Values of Σθ*(u_i), z(u) and dz/du at u = c + Aᵀλ; None where θ* is infinite.
struct DualPoint {
    conj: f64,
    z: DVector<f64>,
    dz: DVector<f64>,
}

/// Solves `θ'(z_i) = θ'(x_i) + y_i + (Aᵀλ)_i`, `Az = b` by damped Newton on `λ`.
pub fn prox_polyhedral_dual(h: &Regularizer, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let kernel = h.kernel();
    if !kernel.steep() {
        return Err(Error::SteepnessRequired(kernel.name()));
    }
    let dom = h.domain();
    if !dom.has_equalities() {
        return Err(Error::UnsupportedPairing("dual Newton prox needs equality constraints".into()));
    }
    check_dim(h.dim(), x.len())?;
    check_dim(h.dim(), y.len())?;
    if !h.in_prox_domain(x) {
        let i = x.iter().position(|v| !kernel.differentiable_at(*v)).unwrap_or(0);
        return Err(Error::ProxDomain { index: i, value: x[i] });
    }
    if matches!(kernel, BregmanKernel::Entropy) {
        let logs: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        return Ok(entropy_log(h, &logs, y)?.iter().map(|l| l.exp()).collect());
    }
    let c: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| kernel.grad(*xi) + yi).collect();
    let eval = |shift: &DVector<f64>| -> Option<DualPoint> {
        let n = c.len();
        let mut z = DVector::zeros(n);
        let mut dz = DVector::zeros(n);
        let mut conj = 0.0;
        for i in 0..n {
            let u = c[i] + shift[i];
            let zi = kernel.mirror_inverse(u).ok()?;
            // θ*(u) = u z − θ(z)
            conj += u * zi - kernel.value(zi);
            z[i] = zi;
            let hz = kernel.hess(zi);
            dz[i] = if hz.is_finite() && hz > 0.0 { 1.0 / hz } else { 0.0 };
        }
        conj.is_finite().then_some(DualPoint { conj, z, dz })
    };
    let (_, z) = newton(dom.constraint_matrix(), dom.rhs(), eval)?;
    Ok(z.as_slice().to_vec())
}

/// Entropic dual Newton on log-coordinates: `ln z = ln x + y + Aᵀλ`.
pub(crate) fn entropy_log(h: &Regularizer, logs: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let dom = h.domain();
    let s: Vec<f64> = logs.iter().zip(y).map(|(l, v)| l + v).collect();
    // Az = 0 is scale free: rescale so the largest weight is O(1)
    let homogeneous = dom.rhs().iter().all(|v| *v == 0.0);
    let shift0 = if homogeneous { s.iter().copied().fold(f64::NEG_INFINITY, f64::max) } else { 0.0 };
    let eval = |shift: &DVector<f64>| -> Option<DualPoint> {
        let z = DVector::from_fn(s.len(), |i, _| (s[i] + shift[i] - shift0).exp());
        let conj = z.sum();
        conj.is_finite().then(|| DualPoint { conj, dz: z.clone(), z })
    };
    let (lambda, _) = newton(dom.constraint_matrix(), dom.rhs(), eval)?;
    let at = dom.constraint_matrix().transpose() * lambda;
    Ok(s.iter().zip(at.iter()).map(|(v, a)| v + a).collect())
}

fn newton<F>(a: &DMatrix<f64>, b: &DVector<f64>, eval: F) -> Result<(DVector<f64>, DVector<f64>)>
where
    F: Fn(&DVector<f64>) -> Option<DualPoint>,
{
    let at = a.transpose();
    let (mut lambda, mut pt) = start(a, &eval)?;
    let objective = |p: &DualPoint, l: &DVector<f64>| p.conj - b.dot(l);
    let residual_of = |p: &DualPoint| {
        let g = a * &p.z - b;
        let scale = b.amax().max((a.abs() * &p.z).amax());
        (g, scale)
    };
    let mut last_res = f64::INFINITY;
    for _ in 0..=MAX_NEWTON {
        let (g, scale) = residual_of(&pt);
        let res = g.amax();
        last_res = res;
        if res <= TOL * scale.max(f64::MIN_POSITIVE) {
            return Ok((lambda, pt.z));
        }
        let hess = a * DMatrix::from_diagonal(&pt.dz) * &at;
        let dir = match hess.clone().cholesky() {
            Some(ch) => -ch.solve(&g),
            None => -hess.pseudo_inverse(1e-14).map_err(|e| Error::InvalidArgument(e.to_string()))? * &g,
        };
        let f0 = objective(&pt, &lambda);
        let slope = g.dot(&dir);
        let mut step = 1.0;
        let mut accepted = false;
        while step > 1e-20 {
            let trial = &lambda + &dir * step;
            if let Some(p) = eval(&(&at * &trial)) {
                let f1 = objective(&p, &trial);
                let (g1, _) = residual_of(&p);
                if f1 <= f0 + 1e-4 * step * slope + 1e-15 * f0.abs() || g1.amax() < 0.5 * res {
                    lambda = trial;
                    pt = p;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::Convergence { iterations: MAX_NEWTON, residual: last_res })
}

/// A dual point where the objective is finite: `λ = 0` when possible, otherwise
/// a multiple of some `w` with `Aᵀw < 0`, which pushes every mirror coordinate
/// down and exists whenever the polyhedron is bounded.
fn start<F>(a: &DMatrix<f64>, eval: &F) -> Result<(DVector<f64>, DualPoint)>
where
    F: Fn(&DVector<f64>) -> Option<DualPoint>,
{
    let (m, n) = a.shape();
    let zero = DVector::zeros(m);
    if let Some(p) = eval(&DVector::zeros(n)) {
        return Ok((zero, p));
    }
    let undefined = || Error::ProxUndefined("dual objective infinite at λ = 0 and no descent shift found".into());
    let mut lp = LinearProgram::new(vec![0.0; m]);
    for j in 0..m {
        lp.set_free(j);
    }
    for i in 0..n {
        lp.add_row((0..m).map(|j| a[(j, i)]).collect(), Relation::Le, -1.0);
    }
    let w = match lp.solve() {
        LpOutcome::Optimal { x, .. } => DVector::from_vec(x),
        _ => return Err(undefined()),
    };
    let at = a.transpose();
    let mut scale = 1.0;
    while scale < 1e18 {
        let lambda = &w * scale;
        if let Some(p) = eval(&(&at * &lambda)) {
            return Ok((lambda, p));
        }
        scale *= 2.0;
    }
    Err(undefined())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Domain;
    use crate::prox::prox_simplex_entropy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_exponential_weights() {
        let h = Regularizer::new(BregmanKernel::Entropy, Domain::simplex(3).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = h.domain().sample_interior(&mut rng);
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = prox_polyhedral_dual(&h, &x, &y).unwrap();
            let b = prox_simplex_entropy(&x, &y).unwrap();
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let dom = Domain::polyhedron(vec![vec![1.0, 1.0, 2.0], vec![0.0, 1.0, -1.0]], vec![2.0, 0.0]).unwrap();
        for k in [BregmanKernel::Entropy, BregmanKernel::tsallis_bounded(0.5, 2.0).unwrap()] {
            let h = Regularizer::new(k, dom.clone()).unwrap();
            let x = dom.slater_point().unwrap().to_vec();
            let z = prox_polyhedral_dual(&h, &x, &[0.0; 3]).unwrap();
            for i in 0..3 {
                assert!((z[i] - x[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_dual_step_starts_from_shifted_multiplier() {
        // the Tsallis mirror map only reaches values below 1/(q(1−q)) = 4
        let h = Regularizer::new(BregmanKernel::tsallis(0.5).unwrap(), Domain::simplex(3).unwrap()).unwrap();
        let x = [0.2, 0.3, 0.5];
        let y = [3.0, -1.0, 2.9];
        let k = h.kernel();
        assert!((0..3).any(|i| k.mirror_inverse(k.grad(x[i]) + y[i]).is_err()));
        let z = prox_polyhedral_dual(&h, &x, &y).unwrap();
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let u: Vec<f64> = (0..3).map(|i| k.grad(z[i]) - k.grad(x[i]) - y[i]).collect();
        assert!((u[0] - u[1]).abs() < 1e-8 && (u[1] - u[2]).abs() < 1e-8, "{u:?}");
    }

    #[test]
    fn tsallis_on_simplex_is_feasible_and_stationary() {
        let h = Regularizer::new(BregmanKernel::tsallis(0.5).unwrap(), Domain::simplex(3).unwrap()).unwrap();
        let x = [0.2, 0.3, 0.5];
        let y = [0.3, -0.5, 0.1];
        let z = prox_polyhedral_dual(&h, &x, &y).unwrap();
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-11);
        let k = h.kernel();
        // θ'(z_i) − θ'(x_i) − y_i is constant across i
        let r: Vec<f64> = (0..3).map(|i| k.grad(z[i]) - k.grad(x[i]) - y[i]).collect();
        assert!((r[0] - r[1]).abs() < 1e-9 && (r[1] - r[2]).abs() < 1e-9);
    }

    #[test]
    fn eps_line_reduces_to_scalar_recursion() {
        let eps = 0.1;
        let gamma = 0.1;
        let u = [-1.0, 0.0];
        let dom = Domain::polyhedron(vec![vec![1.0, -eps]], vec![0.0]).unwrap();
        let h = Regularizer::new(BregmanKernel::Entropy, dom).unwrap();
        let mut chi: f64 = 0.7;
        let mut x = vec![eps * chi, chi];
        for _ in 0..50 {
            let y: Vec<f64> = (0..2).map(|i| -gamma * (x[i] - u[i])).collect();
            x = prox_polyhedral_dual(&h, &x, &y).unwrap();
            let up = eps * u[0] + u[1];
            chi *= (-gamma * (eps * eps + 1.0) / (eps + 1.0) * chi + gamma * up / (eps + 1.0)).exp();
            assert!((x[1] - chi).abs() < 1e-12 * chi);
            assert!((x[0] - eps * x[1]).abs() < 1e-12 * chi);
        }
    }

    #[test]
    fn non_steep_kernels_rejected() {
        let h = Regularizer::new(BregmanKernel::Euclidean, Domain::simplex(3).unwrap()).unwrap();
        assert!(matches!(prox_polyhedral_dual(&h, &[0.3, 0.3, 0.4], &[0.0; 3]), Err(Error::SteepnessRequired(_))));
    }
}

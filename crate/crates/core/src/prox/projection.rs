use nalgebra::{DMatrix, DVector};

use crate::domains::Domain;
use crate::error::{check_dim, Error, Result};

const KKT_TOL: f64 = 1e-9;

/// Euclidean projection of `x + y` onto `{z ≥ 0, Az = b}` by a primal
/// active-set method started from a feasible point.
pub fn prox_euclidean_polyhedral(dom: &Domain, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_dim(dom.dim(), x.len())?;
    check_dim(dom.dim(), y.len())?;
    let n = dom.dim();
    let v = DVector::from_fn(n, |i, _| x[i] + y[i]);
    if !dom.has_equalities() {
        return Ok((0..n).map(|i| v[i].clamp(dom.lower(i), dom.upper(i))).collect());
    }
    let a = dom.constraint_matrix();
    let b = dom.rhs();
    let mut z = if dom.contains(x) {
        DVector::from_column_slice(x)
    } else {
        DVector::from_column_slice(dom.slater_point().expect("polyhedra carry a Slater point"))
    };
    let mut working: Vec<bool> = (0..n).map(|i| z[i] <= 0.0).collect();
    for i in 0..n {
        if working[i] {
            z[i] = 0.0;
        }
    }
    let max_iter = 50 * (n + a.nrows() + 1);
    for _ in 0..max_iter {
        let target = equality_qp(a, b, &v, &working)?;
        let p = &target - &z;
        if p.amax() <= 1e-13 * (1.0 + v.amax()) {
            // multipliers of the working bounds: z − v = Aᵀμ + ν
            let (mu, nu) = multipliers(a, &z, &v, &working);
            let worst = (0..n).filter(|&i| working[i]).min_by(|&i, &j| nu[i].total_cmp(&nu[j]));
            match worst {
                Some(i) if nu[i] < -KKT_TOL => working[i] = false,
                _ => {
                    let out: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
                    let kkt = kkt_residual(a, b, &DVector::from_column_slice(&out), &v, &mu, &nu);
                    if kkt > KKT_TOL * (1.0 + v.amax()) {
                        return Err(Error::Convergence { iterations: max_iter, residual: kkt });
                    }
                    return Ok(out);
                }
            }
            continue;
        }
        let mut step = 1.0;
        let mut block = None;
        for i in 0..n {
            if !working[i] && p[i] < 0.0 {
                let s = z[i] / -p[i];
                if s < step {
                    step = s;
                    block = Some(i);
                }
            }
        }
        z += &p * step;
        if let Some(i) = block {
            working[i] = true;
            z[i] = 0.0;
        }
    }
    Err(Error::Convergence { iterations: max_iter, residual: f64::NAN })
}

// argmin ½‖z − v‖² s.t. Az = b, z_i = 0 on the working set.
fn equality_qp(a: &DMatrix<f64>, b: &DVector<f64>, v: &DVector<f64>, working: &[bool]) -> Result<DVector<f64>> {
    let free: Vec<usize> = (0..v.len()).filter(|&i| !working[i]).collect();
    let mut z = DVector::zeros(v.len());
    if free.is_empty() {
        return Ok(z);
    }
    let af = DMatrix::from_fn(a.nrows(), free.len(), |r, c| a[(r, free[c])]);
    let vf = DVector::from_fn(free.len(), |i, _| v[free[i]]);
    let rhs = &af * &vf - b;
    let gram = &af * af.transpose();
    let mu = gram.pseudo_inverse(1e-13).map_err(|e| Error::InvalidArgument(e.to_string()))? * rhs;
    let zf = vf - af.transpose() * mu;
    for (k, &i) in free.iter().enumerate() {
        z[i] = zf[k];
    }
    Ok(z)
}

fn multipliers(a: &DMatrix<f64>, z: &DVector<f64>, v: &DVector<f64>, working: &[bool]) -> (DVector<f64>, DVector<f64>) {
    let n = v.len();
    let g = z - v;
    let free: Vec<usize> = (0..n).filter(|&i| !working[i]).collect();
    let mu = if free.is_empty() || a.nrows() == 0 {
        // fall back to least squares on all coordinates
        let svd = a.transpose().svd(true, true);
        svd.solve(&g, 1e-13).unwrap_or_else(|_| DVector::zeros(a.nrows()))
    } else {
        let aft = DMatrix::from_fn(free.len(), a.nrows(), |r, c| a[(c, free[r])]);
        let gf = DVector::from_fn(free.len(), |i, _| g[free[i]]);
        aft.svd(true, true).solve(&gf, 1e-13).unwrap_or_else(|_| DVector::zeros(a.nrows()))
    };
    let nu = &g - a.transpose() * &mu;
    (mu, nu)
}

fn kkt_residual(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    z: &DVector<f64>,
    v: &DVector<f64>,
    mu: &DVector<f64>,
    nu: &DVector<f64>,
) -> f64 {
    let stat = (z - v - a.transpose() * mu - nu).amax();
    let feas = (a * z - b).amax();
    let comp = z.iter().zip(nu.iter()).map(|(zi, ni)| (zi * ni).abs()).fold(0.0, f64::max);
    let dual = nu.iter().map(|ni| (-ni).max(0.0)).fold(0.0, f64::max);
    stat.max(feas).max(comp).max(dual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_examples() {
        let s3 = Domain::simplex(3).unwrap();
        let z = prox_euclidean_polyhedral(&s3, &[0.5; 3], &[0.0; 3]).unwrap();
        assert!(z.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
        let s2 = Domain::simplex(2).unwrap();
        let z = prox_euclidean_polyhedral(&s2, &[0.5, 0.5], &[1.5, -0.5]).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-12 && z[1].abs() < 1e-12);
        let o = Domain::orthant(2);
        assert_eq!(prox_euclidean_polyhedral(&o, &[1.0, 1.0], &[-2.0, 0.5]).unwrap(), vec![0.0, 1.5]);
    }

    #[test]
    fn matches_sorting_projection_on_simplex() {
        // classic sort-and-threshold projection as an independent oracle
        let oracle = |v: &[f64]| {
            let mut u = v.to_vec();
            u.sort_by(|a, b| b.total_cmp(a));
            let mut css = 0.0;
            let mut theta = 0.0;
            for (k, uk) in u.iter().enumerate() {
                css += uk;
                let t = (css - 1.0) / (k as f64 + 1.0);
                if uk - t > 0.0 {
                    theta = t;
                }
            }
            v.iter().map(|x| (x - theta).max(0.0)).collect::<Vec<_>>()
        };
        let s = Domain::simplex(5).unwrap();
        let x = [0.2; 5];
        for k in 0..200 {
            let y: Vec<f64> = (0..5).map(|i| ((k * 7 + i * 13) % 17) as f64 / 5.0 - 1.6).collect();
            let v: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let z = prox_euclidean_polyhedral(&s, &x, &y).unwrap();
            let w = oracle(&v);
            for i in 0..5 {
                assert!((z[i] - w[i]).abs() < 1e-10, "{v:?}");
            }
        }
    }
}

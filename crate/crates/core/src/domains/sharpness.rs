//! Slack decomposition of `F(x*)`, sharp/flat classification and the
//! separation constant of a polyhedral domain.

use nalgebra::{DMatrix, DVector};

use super::{ActiveSet, Domain, ACTIVE_TOL};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Tolerance on the decomposition residual certifying a solution.
pub const SLACK_RESIDUAL_TOL: f64 = 1e-8;
/// Enumeration limit for the separation constant.
pub const MAX_ENUMERATED_ACTIVE: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct SlackDecomposition {
    /// `(i, σ_i)` for every active coordinate, in active-set order.
    pub slacks: Vec<(usize, f64)>,
    /// Multipliers `λ` of the equality constraints.
    pub multipliers: Vec<f64>,
    pub residual: f64,
}

impl SlackDecomposition {
    pub fn slack(&self, i: usize) -> Option<f64> {
        self.slacks.iter().find(|s| s.0 == i).map(|s| s.1)
    }

    /// `Σ σ_i s_i e_i + Aᵀλ`.
    pub fn reconstruct(&self, dom: &Domain, active: &ActiveSet) -> Vec<f64> {
        let mut g = vec![0.0; dom.dim()];
        for &(i, s) in &self.slacks {
            g[i] += s * active.side(i).map_or(1.0, |side| side.sign());
        }
        if dom.n_constraints() > 0 {
            let at = dom.constraint_matrix().transpose() * DVector::from_column_slice(&self.multipliers);
            for (gi, a) in g.iter_mut().zip(at.iter()) {
                *gi += a;
            }
        }
        g
    }
}

/// Minimizes `‖g − Σ σ_i s_i e_i − Aᵀλ‖` over `σ ≥ 0` and free `λ`.
pub fn slack_decomposition(dom: &Domain, g: &[f64], active: &ActiveSet) -> Result<SlackDecomposition> {
    crate::error::check_dim(dom.dim(), g.len())?;
    let n = dom.dim();
    let k = active.len();
    // work inside ker A, where Aᵀλ vanishes
    let mut cols = DMatrix::zeros(n, k);
    for (c, &(i, side)) in active.entries.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[i] = side.sign();
        let pe = dom.project_kernel(&e);
        for r in 0..n {
            cols[(r, c)] = pe[r];
        }
    }
    let target = DVector::from_vec(dom.project_kernel(g));
    let sigma = nnls(&cols, &target);
    let mut rest = DVector::from_column_slice(g);
    for (c, &(i, side)) in active.entries.iter().enumerate() {
        rest[i] -= sigma[c] * side.sign();
    }
    let multipliers = if dom.n_constraints() > 0 {
        let at = dom.constraint_matrix().transpose();
        let svd = at.svd(true, true);
        svd.solve(&rest, 1e-13).map_err(|e| Error::InvalidArgument(e.to_string()))?
    } else {
        DVector::zeros(0)
    };
    let residual = if dom.n_constraints() > 0 {
        (&rest - dom.constraint_matrix().transpose() * &multipliers).norm()
    } else {
        rest.norm()
    };
    if residual > SLACK_RESIDUAL_TOL {
        return Err(Error::NotASolution { residual });
    }
    Ok(SlackDecomposition {
        slacks: active.entries.iter().enumerate().map(|(c, e)| (e.0, sigma[c])).collect(),
        multipliers: multipliers.as_slice().to_vec(),
        residual,
    })
}

// Lawson-Hanson nonnegative least squares.
fn nnls(c: &DMatrix<f64>, d: &DVector<f64>) -> DVector<f64> {
    let k = c.ncols();
    let mut x = DVector::zeros(k);
    if k == 0 {
        return x;
    }
    let tol = 1e-13 * (1.0 + c.norm()) * (1.0 + d.norm());
    let mut passive = vec![false; k];
    for _ in 0..(3 * k + 10) {
        let w = c.transpose() * (d - c * &x);
        let cand = (0..k).filter(|&j| !passive[j] && w[j] > tol).max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = cand else { break };
        passive[j] = true;
        for _ in 0..(3 * k + 10) {
            let z = passive_lsq(c, d, &passive);
            if (0..k).filter(|&j| passive[j]).all(|j| z[j] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for j in 0..k {
                if passive[j] && z[j] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[j]));
                }
            }
            x = &x + (&z - &x) * alpha;
            for j in 0..k {
                if passive[j] && x[j] <= 1e-15 {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
        }
    }
    x
}

fn passive_lsq(c: &DMatrix<f64>, d: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&j| passive[j]).collect();
    let sub = DMatrix::from_fn(c.nrows(), idx.len(), |r, q| c[(r, idx[q])]);
    let sol = sub.svd(true, true).solve(d, 1e-13).unwrap_or_else(|_| DVector::zeros(idx.len()));
    let mut z = DVector::zeros(passive.len());
    for (q, &j) in idx.iter().enumerate() {
        z[j] = sol[q];
    }
    z
}

/// Outcome of the separation dichotomy for a subset `I` of the active set.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Coordinate `index` is dominated: `x_i ≤ bound · max_{j∈I} x_j` on the domain
    /// (slacks measured from the active bound).
    Dominated { index: usize, bound: f64 },
    /// `z ∈ ker A` with `z_I = 0` and `1 ≤ z_i ≤ bound` on the rest of the active set.
    Direction { z: Vec<f64>, bound: f64 },
}

impl Certificate {
    pub fn bound(&self) -> f64 {
        match self {
            Certificate::Dominated { bound, .. } | Certificate::Direction { bound, .. } => *bound,
        }
    }
}

pub fn separation_certificate(dom: &Domain, x_star: &[f64], subset: &[usize]) -> Result<Certificate> {
    let active = dom.active_set(x_star, ACTIVE_TOL)?;
    if let Some(bad) = subset.iter().find(|i| !active.contains(**i)) {
        return Err(Error::InvalidArgument(format!("coordinate {bad} of the subset is not active")));
    }
    let rest: Vec<(usize, f64)> =
        active.entries.iter().filter(|e| !subset.contains(&e.0)).map(|e| (e.0, e.1.sign())).collect();
    if rest.is_empty() {
        return Err(Error::Degenerate);
    }
    if let Some(z) = direction_lp(dom, subset, &rest) {
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let sup = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        return Ok(Certificate::Direction { bound: norm.max(sup).max(1.0), z });
    }
    let mut best: Option<(usize, f64)> = None;
    for &(i, _) in &rest {
        if let Some(c) = domination_lp(dom, &active, subset, &rest, i) {
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((i, c));
            }
        }
    }
    match best {
        Some((index, c)) => Ok(Certificate::Dominated { index, bound: c.max(1.0) }),
        None => Err(Error::Infeasible("neither alternative of the separation dichotomy is feasible".into())),
    }
}

// min ‖z‖_∞ s.t. Az = 0, z_I = 0, s_i z_i ≥ 1 on the rest.
fn direction_lp(dom: &Domain, subset: &[usize], rest: &[(usize, f64)]) -> Option<Vec<f64>> {
    let n = dom.dim();
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::new(obj);
    for j in 0..n {
        lp.set_free(j);
    }
    let a = dom.constraint_matrix();
    for r in 0..a.nrows() {
        let mut row: Vec<f64> = a.row(r).iter().copied().collect();
        row.push(0.0);
        lp.add_row(row, Relation::Eq, 0.0);
    }
    for &i in subset {
        let mut row = vec![0.0; n + 1];
        row[i] = 1.0;
        lp.add_row(row, Relation::Eq, 0.0);
    }
    for &(i, s) in rest {
        let mut row = vec![0.0; n + 1];
        row[i] = s;
        lp.add_row(row, Relation::Ge, 1.0);
    }
    for j in 0..n {
        let mut row = vec![0.0; n + 1];
        row[j] = 1.0;
        row[n] = -1.0;
        lp.add_row(row.clone(), Relation::Le, 0.0);
        row[n] = 1.0;
        lp.add_row(row, Relation::Ge, 0.0);
    }
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => {
            let mut z = x[..n].to_vec();
            // snap LP round-off on the prescribed zeros
            for &i in subset {
                z[i] = 0.0;
            }
            Some(z)
        }
        _ => None,
    }
}

// Homogeneous certificate: Σ_{k∈rest} a_k s_k e_k − Σ_{j∈I} b_j s_j e_j = Aᵀμ,
// a ≥ 0, a_i = 1, minimizing ‖b‖₁. Pairing with x − x* gives
// y_i ≤ Σ a_k y_k = Σ b_j y_j ≤ ‖b‖₁ max_{j∈I} y_j for the oriented slacks y.
fn domination_lp(dom: &Domain, active: &ActiveSet, subset: &[usize], rest: &[(usize, f64)], i: usize) -> Option<f64> {
    let n = dom.dim();
    let m = dom.n_constraints();
    let nr = rest.len();
    let ni = subset.len();
    // variables: a (nr), b+ (ni), b- (ni), μ (m, free)
    let nv = nr + 2 * ni + m;
    let mut obj = vec![0.0; nv];
    for v in obj.iter_mut().skip(nr).take(2 * ni) {
        *v = 1.0;
    }
    let mut lp = LinearProgram::new(obj);
    for q in 0..m {
        lp.set_free(nr + 2 * ni + q);
    }
    let a = dom.constraint_matrix();
    for coord in 0..n {
        let mut row = vec![0.0; nv];
        if let Some(p) = rest.iter().position(|r| r.0 == coord) {
            row[p] = rest[p].1;
        }
        if let Some(p) = subset.iter().position(|&j| j == coord) {
            let s = active.side(coord).map_or(1.0, |side| side.sign());
            row[nr + p] = -s;
            row[nr + ni + p] = s;
        }
        for q in 0..m {
            row[nr + 2 * ni + q] = -a[(q, coord)];
        }
        lp.add_row(row, Relation::Eq, 0.0);
    }
    let mut pin = vec![0.0; nv];
    pin[rest.iter().position(|r| r.0 == i)?] = 1.0;
    lp.add_row(pin, Relation::Eq, 1.0);
    match lp.solve() {
        LpOutcome::Optimal { value, .. } => Some(value.max(0.0)),
        _ => None,
    }
}

/// Maximum certificate bound over all proper subsets of the active set, floored at 1.
pub fn separation_constant(dom: &Domain, x_star: &[f64]) -> Result<f64> {
    let active = dom.active_set(x_star, ACTIVE_TOL)?;
    let idx = active.indices();
    if idx.len() > MAX_ENUMERATED_ACTIVE {
        return Err(Error::CombinatorialLimit(idx.len()));
    }
    let mut c = 1.0f64;
    let full = (1u32 << idx.len()) - 1;
    for mask in 0..full {
        let subset: Vec<usize> =
            idx.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &i)| i).collect();
        c = c.max(separation_certificate(dom, x_star, &subset)?.bound());
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionProfile {
    pub solution: Vec<f64>,
    pub active_set: ActiveSet,
    pub decomposition: SlackDecomposition,
    pub sharps: Vec<usize>,
    pub flats: Vec<usize>,
    /// Smallest positive slack; `None` without sharp coordinates.
    pub delta: Option<f64>,
    pub is_field_sharp: bool,
    pub is_extreme: bool,
    /// `δ` when there are no flats, else `δ / (c·|active|)`.
    pub delta_eff: Option<f64>,
    /// `None` when the active set is too large to enumerate.
    pub separation_constant: Option<f64>,
    /// Filled in by [`SolutionProfile::with_legendre_exponent`].
    pub legendre_exponent: Option<f64>,
}

impl SolutionProfile {
    pub fn slack(&self, i: usize) -> Option<f64> {
        self.decomposition.slack(i)
    }

    pub fn with_legendre_exponent(mut self, alpha: f64) -> Self {
        self.legendre_exponent = Some(alpha);
        self
    }
}

pub fn classify_solution(dom: &Domain, field: &dyn VectorField, x_star: &[f64]) -> Result<SolutionProfile> {
    crate::error::check_dim(dom.dim(), field.dim())?;
    let active = dom.active_set(x_star, ACTIVE_TOL)?;
    let g = field.eval(x_star);
    let decomposition = slack_decomposition(dom, &g, &active)?;
    let scale = 1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (mut sharps, mut flats) = (Vec::new(), Vec::new());
    for &(i, s) in &decomposition.slacks {
        if s > 1e-9 * scale {
            sharps.push(i);
        } else {
            flats.push(i);
        }
    }
    let delta = sharps.iter().filter_map(|&i| decomposition.slack(i)).reduce(f64::min);
    let is_extreme = dom.is_extreme_with(&active);
    let separation = if active.len() <= MAX_ENUMERATED_ACTIVE { Some(separation_constant(dom, x_star)?) } else { None };
    let delta_eff = match (delta, flats.is_empty()) {
        (Some(d), true) => Some(d),
        (Some(d), false) => separation.map(|c| d / (c * active.len() as f64)),
        (None, _) => None,
    };
    Ok(SolutionProfile {
        solution: x_star.to_vec(),
        active_set: active,
        decomposition,
        is_field_sharp: flats.is_empty(),
        sharps,
        flats,
        delta,
        is_extreme,
        delta_eff,
        separation_constant: separation,
        legendre_exponent: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Side;
    use crate::field::AffineField;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eps_line() -> Domain {
        Domain::polyhedron(vec![vec![1.0, -0.1]], vec![0.0]).unwrap()
    }

    #[test]
    fn slack_examples() {
        let s = Domain::simplex(3).unwrap();
        let act = ActiveSet::lower(&[0, 1]);
        let d = slack_decomposition(&s, &[0.4, 0.0, 0.0], &act).unwrap();
        assert!((d.slack(0).unwrap() - 0.4).abs() < 1e-12);
        assert!(d.slack(1).unwrap().abs() < 1e-12);
        assert!(d.residual < 1e-12);

        let o = Domain::orthant(1);
        let d = slack_decomposition(&o, &[1.0], &ActiveSet::lower(&[0])).unwrap();
        assert!((d.slack(0).unwrap() - 1.0).abs() < 1e-15);
        let d = slack_decomposition(&o, &[0.0], &ActiveSet::lower(&[0])).unwrap();
        assert_eq!(d.slack(0).unwrap(), 0.0);

        assert!(matches!(slack_decomposition(&o, &[-1.0], &ActiveSet::lower(&[0])), Err(Error::NotASolution { .. })));
    }

    #[test]
    fn slack_roundtrip_on_simplex_with_offset() {
        // a shift along (1,1,1) lands in row(A)
        let s = Domain::simplex(3).unwrap();
        let act = ActiveSet::lower(&[0, 1]);
        let g = [1.4, 1.2, 1.0];
        let d = slack_decomposition(&s, &g, &act).unwrap();
        let r = d.reconstruct(&s, &act);
        for i in 0..3 {
            assert!((r[i] - g[i]).abs() < 1e-8);
        }
        assert!((d.slack(0).unwrap() - 0.4).abs() < 1e-12);
        assert!((d.slack(1).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_slacks_use_orientation() {
        let h = Domain::interval(-1.0, 1.0).unwrap();
        let act = h.active_set(&[1.0], 1e-9).unwrap();
        assert_eq!(act.side(0), Some(Side::Upper));
        let d = slack_decomposition(&h, &[-2.0], &act).unwrap();
        assert!((d.slack(0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn simplex_direction_certificate() {
        let s = Domain::simplex(3).unwrap();
        match separation_certificate(&s, &[0.0, 0.0, 1.0], &[]).unwrap() {
            Certificate::Direction { z, bound } => {
                for (a, b) in z.iter().zip(&[1.0, 1.0, -2.0]) {
                    assert!((a - b).abs() < 1e-10);
                }
                assert!((bound - 6f64.sqrt()).abs() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eps_line_domination_certificate() {
        let d = eps_line();
        let x = [0.0, 0.0];
        match separation_certificate(&d, &x, &[1]).unwrap() {
            Certificate::Dominated { index, bound } => {
                assert_eq!(index, 0);
                assert_eq!(bound, 1.0);
            }
            other => panic!("{other:?}"),
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p = d.sample_interior(&mut rng);
            assert!(p[0] <= p[1] + 1e-9);
        }
        assert!(matches!(separation_certificate(&d, &x, &[0, 1]), Err(Error::Degenerate)));
    }

    #[test]
    fn orthant_certificate_and_constants() {
        let o = Domain::orthant(1);
        match separation_certificate(&o, &[0.0], &[]).unwrap() {
            Certificate::Direction { z, bound } => {
                assert_eq!(z, vec![1.0]);
                assert_eq!(bound, 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(separation_constant(&o, &[0.0]).unwrap(), 1.0);
        let s = Domain::simplex(3).unwrap();
        let c = separation_constant(&s, &[0.0, 0.0, 1.0]).unwrap();
        assert!((c - 6f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn classify_examples() {
        let s = Domain::simplex(3).unwrap();
        let f = AffineField::shifted_identity(&[-0.4, -0.2, 1.0]);
        let p = classify_solution(&s, &f, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.sharps, vec![0, 1]);
        assert!((p.delta.unwrap() - 0.2).abs() < 1e-12);
        assert!(p.is_field_sharp && p.is_extreme);
        assert!((p.delta_eff.unwrap() - 0.2).abs() < 1e-12);

        let o = Domain::orthant(1);
        let p = classify_solution(&o, &AffineField::shifted(vec![1.0]), &[0.0]).unwrap();
        assert_eq!(p.sharps, vec![0]);
        assert_eq!(p.delta, Some(1.0));
        let p = classify_solution(&o, &AffineField::identity(1), &[0.0]).unwrap();
        assert_eq!(p.flats, vec![0]);
        assert_eq!(p.delta, None);
        assert!(!p.is_field_sharp);
    }

    #[test]
    fn mixed_profile_uses_separation_constant() {
        let s = Domain::simplex(3).unwrap();
        let f = AffineField::shifted_identity(&[-0.4, 0.0, 1.0]);
        let p = classify_solution(&s, &f, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.flats, vec![1]);
        let c = p.separation_constant.unwrap();
        assert!((p.delta_eff.unwrap() - 0.4 / (2.0 * c)).abs() < 1e-12);
    }

    #[test]
    fn too_many_active_coordinates() {
        let o = Domain::orthant(13);
        assert!(matches!(separation_constant(&o, &[0.0; 13]), Err(Error::CombinatorialLimit(13))));
    }
}

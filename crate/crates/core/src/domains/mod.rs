//! Feasible sets in the normal form `{x ≥ lo, x ≤ hi, Ax = b}`.

mod sharpness;

pub use sharpness::{
    classify_solution, separation_certificate, separation_constant, slack_decomposition, Certificate,
    SlackDecomposition, SolutionProfile,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};

/// Default tolerance for active-set detection.
pub const ACTIVE_TOL: f64 = 1e-9;
/// Feasibility tolerance on the equality constraints.
pub const EQ_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    /// The cube `[lo, hi]^dim`.
    Interval { lo: f64, hi: f64 },
    /// `x ≥ 0` with optional finite upper bounds.
    OrthantBox { upper: Option<Vec<f64>> },
    /// Probability simplex `{x ≥ 0, Σx = 1}`.
    Simplex,
    /// `{x ≥ 0, Ax = b}`.
    Polyhedron,
}

/// Which bound of a coordinate is binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    /// Sign that turns the coordinate into an outward-nonnegative slack.
    pub fn sign(self) -> f64 {
        match self {
            Side::Lower => 1.0,
            Side::Upper => -1.0,
        }
    }
}

/// Active coordinates together with the bound each one sits on.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActiveSet {
    pub entries: Vec<(usize, Side)>,
}

impl ActiveSet {
    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.entries.iter().any(|e| e.0 == i)
    }

    pub fn side(&self, i: usize) -> Option<Side> {
        self.entries.iter().find(|e| e.0 == i).map(|e| e.1)
    }

    /// Active set at lower bounds only, for the given indices.
    pub fn lower(indices: &[usize]) -> Self {
        Self { entries: indices.iter().map(|&i| (i, Side::Lower)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    a: DMatrix<f64>,
    b: DVector<f64>,
    slater: Option<Vec<f64>>,
}

impl Domain {
    pub fn describe(&self) -> String {
        match &self.kind {
            DomainKind::Interval { lo, hi } if self.dim == 1 => format!("interval[{lo}, {hi}]"),
            DomainKind::Interval { lo, hi } => format!("cube[{lo}, {hi}]^{}", self.dim),
            DomainKind::OrthantBox { upper: None } => format!("orthant({})", self.dim),
            DomainKind::OrthantBox { upper: Some(u) } => format!("box{u:?}"),
            DomainKind::Simplex => format!("simplex({})", self.dim),
            DomainKind::Polyhedron => format!("polyhedron({}x{})", self.a.nrows(), self.dim),
        }
    }

    /// A fixed interior point: the midpoint of a cube or box, the all-ones point
    /// of an orthant, or the Slater point.
    pub fn center(&self) -> Vec<f64> {
        match &self.kind {
            DomainKind::Interval { lo, hi } => vec![0.5 * (lo + hi); self.dim],
            DomainKind::OrthantBox { upper: None } => vec![1.0; self.dim],
            DomainKind::OrthantBox { upper: Some(u) } => u.iter().map(|v| 0.5 * v).collect(),
            _ => self.slater.clone().expect("polyhedra carry a Slater point"),
        }
    }

    /// One-dimensional interval.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::cube(lo, hi, 1)
    }

    pub fn cube(lo: f64, hi: f64, dim: usize) -> Result<Self> {
        if !(lo < hi) || dim == 0 {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]^{dim}")));
        }
        Ok(Self {
            kind: DomainKind::Interval { lo, hi },
            dim,
            a: DMatrix::zeros(0, dim),
            b: DVector::zeros(0),
            slater: None,
        })
    }

    /// Nonnegative orthant `ℝⁿ₊`.
    pub fn orthant(dim: usize) -> Self {
        Self {
            kind: DomainKind::OrthantBox { upper: None },
            dim,
            a: DMatrix::zeros(0, dim),
            b: DVector::zeros(0),
            slater: None,
        }
    }

    /// Box `[0, upper]`.
    pub fn orthant_box(upper: Vec<f64>) -> Result<Self> {
        if upper.iter().any(|u| !(*u > 0.0)) {
            return Err(Error::InvalidArgument("box upper bounds must be positive".into()));
        }
        let dim = upper.len();
        Ok(Self {
            kind: DomainKind::OrthantBox { upper: Some(upper) },
            dim,
            a: DMatrix::zeros(0, dim),
            b: DVector::zeros(0),
            slater: None,
        })
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument("simplex needs dimension >= 2".into()));
        }
        Ok(Self {
            kind: DomainKind::Simplex,
            dim,
            a: DMatrix::from_element(1, dim, 1.0),
            b: DVector::from_element(1, 1.0),
            slater: Some(vec![1.0 / dim as f64; dim]),
        })
    }

    /// `{x ≥ 0, Ax = b}` with a Slater point found by LP.
    pub fn polyhedron(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let (a, b) = Self::matrices(a, b)?;
        let slater = find_slater(&a, &b)?;
        Ok(Self { kind: DomainKind::Polyhedron, dim: a.ncols(), a, b, slater: Some(slater) })
    }

    /// `{x ≥ 0, Ax = b}` with a user-supplied Slater point.
    pub fn polyhedron_with_slater(a: Vec<Vec<f64>>, b: Vec<f64>, slater: Vec<f64>) -> Result<Self> {
        let (a, b) = Self::matrices(a, b)?;
        check_dim(a.ncols(), slater.len())?;
        if slater.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("Slater point must be strictly positive".into()));
        }
        let r = &a * DVector::from_column_slice(&slater) - &b;
        let scale = 1.0 + b.amax();
        if r.amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!("Slater point violates Ax = b by {:e}", r.amax())));
        }
        Ok(Self { kind: DomainKind::Polyhedron, dim: a.ncols(), a, b, slater: Some(slater) })
    }

    fn matrices(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let m = a.len();
        check_dim(m, b.len())?;
        let n = a
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("polyhedron needs at least one constraint row".into()))?;
        if n == 0 {
            return Err(Error::InvalidArgument("polyhedron needs at least one variable".into()));
        }
        for row in &a {
            check_dim(n, row.len())?;
        }
        let flat: Vec<f64> = a.into_iter().flatten().collect();
        Ok((DMatrix::from_row_slice(m, n, &flat), DVector::from_vec(b)))
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn n_constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn slater_point(&self) -> Option<&[f64]> {
        self.slater.as_deref()
    }

    /// True for simplex and general polyhedra.
    pub fn has_equalities(&self) -> bool {
        self.a.nrows() > 0
    }

    pub fn lower(&self, _i: usize) -> f64 {
        match &self.kind {
            DomainKind::Interval { lo, .. } => *lo,
            _ => 0.0,
        }
    }

    pub fn upper(&self, i: usize) -> f64 {
        match &self.kind {
            DomainKind::Interval { hi, .. } => *hi,
            DomainKind::OrthantBox { upper: Some(u) } => u[i],
            _ => f64::INFINITY,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        if (0..self.dim).any(|i| x[i] < self.lower(i) || x[i] > self.upper(i)) {
            return false;
        }
        self.equality_residual(x) <= EQ_TOL
    }

    /// `‖Ax − b‖_∞`, zero when there are no equality constraints.
    pub fn equality_residual(&self, x: &[f64]) -> f64 {
        if self.a.nrows() == 0 {
            return 0.0;
        }
        (&self.a * DVector::from_column_slice(x) - &self.b).amax()
    }

    pub fn check_feasible(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim, x.len())?;
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Infeasible(format!(
                "{x:?} violates the constraints (equality residual {:e})",
                self.equality_residual(x)
            )))
        }
    }

    /// Coordinates within `tol` of a bound.
    pub fn active_set(&self, x: &[f64], tol: f64) -> Result<ActiveSet> {
        self.check_feasible(x)?;
        let mut entries = Vec::new();
        for (i, &v) in x.iter().enumerate() {
            if v - self.lower(i) <= tol {
                entries.push((i, Side::Lower));
            } else if self.upper(i) - v <= tol {
                entries.push((i, Side::Upper));
            }
        }
        Ok(ActiveSet { entries })
    }

    /// Orthonormal basis of `ker A` as columns (identity without equalities).
    pub fn kernel_basis(&self) -> DMatrix<f64> {
        if self.a.nrows() == 0 {
            return DMatrix::identity(self.dim, self.dim);
        }
        null_space(&self.a)
    }

    /// Orthogonal projection onto `ker A`.
    pub fn project_kernel(&self, v: &[f64]) -> Vec<f64> {
        if self.a.nrows() == 0 {
            return v.to_vec();
        }
        let k = self.kernel_basis();
        let v = DVector::from_column_slice(v);
        (&k * (k.transpose() * v)).as_slice().to_vec()
    }

    /// Largest `s ≥ 0` with `x + s·d` inside the bounds (d assumed in `ker A`).
    pub fn max_step(&self, x: &[f64], d: &[f64]) -> f64 {
        let mut s = f64::INFINITY;
        for i in 0..self.dim {
            if d[i] < 0.0 {
                s = s.min((x[i] - self.lower(i)) / -d[i]);
            } else if d[i] > 0.0 {
                s = s.min((self.upper(i) - x[i]) / d[i]);
            }
        }
        s.max(0.0)
    }

    /// Range of coordinate `i` over the domain.
    pub fn coordinate_range(&self, i: usize) -> (f64, f64) {
        match &self.kind {
            DomainKind::Simplex => (0.0, 1.0),
            DomainKind::Polyhedron => {
                let n = self.dim;
                let mut obj = vec![0.0; n];
                obj[i] = -1.0;
                let mut lp = LinearProgram::new(obj);
                for r in 0..self.a.nrows() {
                    lp.add_row(self.a.row(r).iter().copied().collect(), Relation::Eq, self.b[r]);
                }
                match lp.solve() {
                    LpOutcome::Optimal { x, .. } => (0.0, x[i]),
                    _ => (0.0, f64::INFINITY),
                }
            }
            _ => (self.lower(i), self.upper(i)),
        }
    }

    /// Unit feasible directions out of `p`: signed coordinate directions
    /// (projected onto `ker A`) plus `n_random` directions toward interior points.
    pub fn probe_directions<R: Rng + ?Sized>(&self, p: &[f64], rng: &mut R, n_random: usize) -> Vec<Vec<f64>> {
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for i in 0..self.dim {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; self.dim];
                e[i] = s;
                let d = self.project_kernel(&e);
                let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n < 1e-12 {
                    continue;
                }
                let d: Vec<f64> = d.iter().map(|v| v / n).collect();
                if self.max_step(p, &d) > 1e-12 {
                    dirs.push(d);
                }
            }
        }
        for _ in 0..n_random {
            let y = self.sample_interior(rng);
            let d: Vec<f64> = y.iter().zip(p).map(|(a, b)| a - b).collect();
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-12 {
                dirs.push(d.iter().map(|v| v / n).collect());
            }
        }
        dirs
    }

    /// A random strictly interior point.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.kind {
            DomainKind::Interval { lo, hi } => (0..self.dim)
                .map(|_| {
                    let (l, h) = finite_window(*lo, *hi);
                    l + (h - l) * rng.random_range(0.02..0.98)
                })
                .collect(),
            DomainKind::OrthantBox { upper } => (0..self.dim)
                .map(|i| {
                    let h = upper.as_ref().map_or(1.0, |u| u[i]);
                    h * rng.random_range(0.02..0.98)
                })
                .collect(),
            DomainKind::Simplex => {
                let w: Vec<f64> = (0..self.dim).map(|_| rng.random_range(0.05..1.0f64)).collect();
                let s: f64 = w.iter().sum();
                w.iter().map(|v| v / s).collect()
            }
            DomainKind::Polyhedron => {
                // random walk from the Slater point inside ker A
                let mut x = self.slater.clone().expect("polyhedron always has a Slater point");
                for _ in 0..4 {
                    let d = self.random_kernel_direction(rng);
                    let s = self.max_step(&x, &d);
                    let s = if s.is_finite() { s } else { 1.0 };
                    let f = rng.random_range(0.0..0.9);
                    for i in 0..self.dim {
                        x[i] += f * s * d[i];
                    }
                }
                x
            }
        }
    }

    /// A random unit direction in `ker A`.
    pub fn random_kernel_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let k = self.kernel_basis();
        if k.ncols() == 0 {
            return vec![0.0; self.dim];
        }
        let c = DVector::from_fn(k.ncols(), |_, _| StandardNormal.sample(rng));
        let d = &k * c;
        let n = d.norm();
        (d / n).as_slice().to_vec()
    }

    /// A random feasible point, possibly on faces (used for property batteries).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let x = self.sample_interior(rng);
        if rng.random_bool(0.25) && self.a.nrows() == 0 {
            let mut x = x;
            let i = rng.random_range(0..self.dim);
            let l = self.lower(i);
            x[i] = if l.is_finite() { l } else { x[i] };
            return x;
        }
        x
    }

    /// True when `x` is an extreme point: `rank([A; e_i, i active]) = n`.
    pub fn is_extreme(&self, x: &[f64]) -> Result<bool> {
        let active = self.active_set(x, ACTIVE_TOL)?;
        Ok(self.is_extreme_with(&active))
    }

    pub(crate) fn is_extreme_with(&self, active: &ActiveSet) -> bool {
        let n = self.dim;
        let mut rows: Vec<f64> = Vec::new();
        for r in 0..self.a.nrows() {
            rows.extend(self.a.row(r).iter());
        }
        for &i in &active.indices() {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            rows.extend(e);
        }
        let nrows = self.a.nrows() + active.len();
        nrows > 0 && rank(&DMatrix::from_row_slice(nrows, n, &rows)) == n
    }

    /// Vertex enumeration for small polyhedra (test oracle).
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let n = self.dim;
        let m = self.a.nrows();
        let mut out: Vec<Vec<f64>> = Vec::new();
        if n > 12 {
            return out;
        }
        for mask in 0u32..(1 << n) {
            let zeros: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for r in 0..m {
                rows.push(self.a.row(r).iter().copied().collect::<Vec<_>>());
                rhs.push(self.b[r]);
            }
            for &i in &zeros {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                rows.push(e);
                rhs.push(self.lower(i));
            }
            let mat = DMatrix::from_row_slice(rows.len(), n, &rows.concat());
            if rank(&mat) < n {
                continue;
            }
            let svd = mat.clone().svd(true, true);
            let Ok(x) = svd.solve(&DVector::from_vec(rhs.clone()), 1e-12) else { continue };
            let x: Vec<f64> = x.iter().map(|v| if v.abs() < 1e-12 { 0.0 } else { *v }).collect();
            let ok = (&mat * DVector::from_column_slice(&x) - DVector::from_vec(rhs)).amax() < 1e-9
                && (0..n).all(|i| x[i] >= self.lower(i) - 1e-12 && x[i] <= self.upper(i) + 1e-12);
            if ok && !out.iter().any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-9)) {
                out.push(x);
            }
        }
        out
    }
}

fn finite_window(lo: f64, hi: f64) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 1.0),
        (false, true) => (hi - 1.0, hi),
        (false, false) => (-1.0, 1.0),
    }
}

pub(crate) fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let tol = 1e-10 * sv.max().max(1.0);
    sv.iter().filter(|s| **s > tol).count()
}

/// Orthonormal basis of the null space of `a`, as columns.
pub(crate) fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    // pad to a square matrix so the SVD exposes all right singular vectors
    let mut sq = DMatrix::zeros(a.nrows().max(n), n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let tol = 1e-10 * svd.singular_values.max().max(1.0);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= tol)
        .map(|(k, _)| vt.row(k).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

// maximize t s.t. Ax = b, x_i − t ≥ 0, t ≤ 1
fn find_slater(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Vec<f64>> {
    let n = a.ncols();
    let mut obj = vec![0.0; n + 1];
    obj[n] = -1.0;
    let mut lp = LinearProgram::new(obj);
    for r in 0..a.nrows() {
        let mut row: Vec<f64> = a.row(r).iter().copied().collect();
        row.push(0.0);
        lp.add_row(row, Relation::Eq, b[r]);
    }
    for i in 0..n {
        let mut row = vec![0.0; n + 1];
        row[i] = 1.0;
        row[n] = -1.0;
        lp.add_row(row, Relation::Ge, 0.0);
    }
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    lp.add_row(cap, Relation::Le, 1.0);
    match lp.solve() {
        LpOutcome::Optimal { x, .. } if x[n] > 1e-9 => {
            // polish onto Ax = b
            let xs = DVector::from_column_slice(&x[..n]);
            let r = a * &xs - b;
            let corr = a.clone().pseudo_inverse(1e-12).map_err(|e| Error::InvalidArgument(e.to_string()))? * r;
            let s = xs - corr;
            if s.iter().all(|v| *v > 0.0) {
                Ok(s.as_slice().to_vec())
            } else {
                Ok(x[..n].to_vec())
            }
        }
        LpOutcome::Infeasible => Err(Error::Infeasible("polyhedron {x >= 0, Ax = b} is empty".into())),
        _ => Err(Error::InvalidArgument("polyhedron has no strictly positive (Slater) point".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn active_set_examples() {
        let s = Domain::simplex(3).unwrap();
        assert_eq!(s.active_set(&[0.0, 0.0, 1.0], 1e-9).unwrap().indices(), vec![0, 1]);
        let i = Domain::orthant(1);
        assert!(i.active_set(&[0.5], 1e-9).unwrap().is_empty());
        let o = Domain::orthant(2);
        assert_eq!(o.active_set(&[0.0, 1.0], 1e-9).unwrap().indices(), vec![0]);
        assert!(matches!(s.active_set(&[0.5, 0.0, 0.0], 1e-9), Err(Error::Infeasible(_))));
        let h = Domain::interval(-1.0, 1.0).unwrap();
        assert_eq!(h.active_set(&[1.0], 1e-9).unwrap().entries, vec![(0, Side::Upper)]);
    }

    #[test]
    fn slater_point_by_lp() {
        let d = Domain::polyhedron(vec![vec![1.0, -0.1]], vec![0.0]);
        // {x1 = 0.1 x2} is a cone; only the origin-scaled ray has a positive point
        let d = d.unwrap();
        let s = d.slater_point().unwrap();
        assert!(s.iter().all(|v| *v > 0.0));
        assert!(d.equality_residual(s) < 1e-12);
        assert!(Domain::polyhedron(vec![vec![1.0, 1.0]], vec![-1.0]).is_err());
        assert!(Domain::polyhedron_with_slater(vec![vec![1.0, 1.0]], vec![1.0], vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn interior_samples_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let doms = [
            Domain::simplex(4).unwrap(),
            Domain::orthant(3),
            Domain::cube(-1.0, 1.0, 2).unwrap(),
            Domain::polyhedron(vec![vec![1.0, 1.0, 2.0], vec![0.0, 1.0, -1.0]], vec![2.0, 0.0]).unwrap(),
        ];
        for d in &doms {
            for _ in 0..200 {
                let x = d.sample_interior(&mut rng);
                assert!(d.contains(&x), "{x:?}");
                assert!(d.active_set(&x, 1e-9).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn kernel_basis_is_orthonormal_null_space() {
        let d = Domain::polyhedron(vec![vec![1.0, 1.0, 2.0], vec![0.0, 1.0, -1.0]], vec![2.0, 0.0]).unwrap();
        let k = d.kernel_basis();
        assert_eq!(k.ncols(), 1);
        assert!((d.constraint_matrix() * &k).amax() < 1e-12);
        assert!(((k.transpose() * &k)[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_vertices() {
        let v = Domain::simplex(3).unwrap().vertices();
        assert_eq!(v.len(), 3);
    }
}

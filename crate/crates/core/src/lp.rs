//! Dense two-phase simplex for the small LPs of the separation machinery.

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// minimize cᵀx subject to rows, with x_j ≥ 0 unless marked free.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    n: usize,
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl LinearProgram {
    pub(crate) fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { n, objective, free: vec![false; n], rows: Vec::new() }
    }

    pub(crate) fn set_free(&mut self, j: usize) {
        self.free[j] = true;
    }

    pub(crate) fn add_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n);
        self.rows.push((coeffs, rel, rhs));
    }

    pub(crate) fn solve(&self) -> LpOutcome {
        // column map: original var -> (plus column, optional minus column)
        let mut cols = Vec::with_capacity(self.n);
        let mut ncols = 0;
        for j in 0..self.n {
            if self.free[j] {
                cols.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                cols.push((ncols, None));
                ncols += 1;
            }
        }
        let n_struct = ncols;
        let slack_count = self.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let m = self.rows.len();
        let n_art = m;
        let total = n_struct + slack_count + n_art;
        let rhs_col = total;
        let mut t = vec![vec![0.0; total + 1]; m + 1];

        let mut slack_idx = n_struct;
        for (i, (coeffs, rel, rhs)) in self.rows.iter().enumerate() {
            let row = &mut t[i];
            for (j, &(p, mneg)) in cols.iter().enumerate() {
                row[p] = coeffs[j];
                if let Some(mm) = mneg {
                    row[mm] = -coeffs[j];
                }
            }
            match rel {
                Relation::Le => {
                    row[slack_idx] = 1.0;
                    slack_idx += 1;
                }
                Relation::Ge => {
                    row[slack_idx] = -1.0;
                    slack_idx += 1;
                }
                Relation::Eq => {}
            }
            row[rhs_col] = *rhs;
            if *rhs < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
            row[n_struct + slack_count + i] = 1.0;
        }
        let art_start = n_struct + slack_count;
        let mut basis: Vec<usize> = (0..m).map(|i| art_start + i).collect();

        // phase 1 objective: sum of artificials, expressed in reduced costs
        for j in 0..=total {
            if j >= art_start && j < rhs_col {
                continue;
            }
            let s: f64 = (0..m).map(|i| t[i][j]).sum();
            t[m][j] = -s;
        }
        if !simplex_iterate(&mut t, &mut basis, total, total) {
            return LpOutcome::Unbounded;
        }
        let scale = 1.0 + self.rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if -t[m][rhs_col] > 1e-9 * scale {
            return LpOutcome::Infeasible;
        }
        // drive artificials out of the basis
        let mut dropped = vec![false; m];
        for r in 0..m {
            if basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| t[r][c].abs() > EPS) {
                    pivot(&mut t, &mut basis, r, c);
                } else {
                    dropped[r] = true;
                }
            }
        }
        // phase 2 objective
        for v in t[m].iter_mut() {
            *v = 0.0;
        }
        for (j, &(p, mneg)) in cols.iter().enumerate() {
            t[m][p] = self.objective[j];
            if let Some(mm) = mneg {
                t[m][mm] = -self.objective[j];
            }
        }
        for r in 0..m {
            if dropped[r] {
                continue;
            }
            let b = basis[r];
            let cb = t[m][b];
            if cb != 0.0 {
                for j in 0..=total {
                    t[m][j] -= cb * t[r][j];
                }
            }
        }
        // zero out dropped rows so they never pivot
        for r in 0..m {
            if dropped[r] {
                for v in t[r].iter_mut() {
                    *v = 0.0;
                }
            }
        }
        if !simplex_iterate(&mut t, &mut basis, art_start, total) {
            return LpOutcome::Unbounded;
        }
        let mut raw = vec![0.0; total];
        for r in 0..m {
            if !dropped[r] {
                raw[basis[r]] = t[r][rhs_col];
            }
        }
        let x: Vec<f64> = cols.iter().map(|&(p, mneg)| raw[p] - mneg.map_or(0.0, |mm| raw[mm])).collect();
        let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome::Optimal { x, value }
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    basis[r] = c;
}

// Bland's rule; columns >= `limit` never enter. Returns false when unbounded.
fn simplex_iterate(t: &mut [Vec<f64>], basis: &mut [usize], limit: usize, rhs_col: usize) -> bool {
    let m = t.len() - 1;
    for _ in 0..10_000 {
        let Some(c) = (0..limit).find(|&j| t[m][j] < -EPS) else {
            return true;
        };
        let mut best: Option<(usize, f64)> = None;
        for r in 0..m {
            if t[r][c] > EPS {
                let ratio = t[r][rhs_col] / t[r][c];
                best = match best {
                    None => Some((r, ratio)),
                    Some((br, bv)) => {
                        if ratio < bv - EPS || (ratio <= bv + EPS && basis[r] < basis[br]) {
                            Some((r, ratio))
                        } else {
                            Some((br, bv))
                        }
                    }
                };
            }
        }
        match best {
            None => return false,
            Some((r, _)) => pivot(t, basis, r, c),
        }
    }
    true
}

//! Euclidean projection onto plans with unit row sums, prescribed column
//! sums and a fixed support.
//!
//! The minimizer has the form `D_st = Y_st - a_s - b_t` on free entries.
//! When every connected block of the pattern is a full bipartite block the
//! multipliers have a closed form; otherwise the closed form is used as a
//! starting point and the multipliers are corrected by conjugate gradients
//! on the (singular but consistent) system they satisfy.

use log::debug;

use super::pattern::SparsityPattern;
use super::plan::TransportPlan;
use crate::error::{Error, Result};

/// Marginal tolerance a projection must meet.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Per-pattern data reused across projections.
#[derive(Debug, Clone)]
pub struct Projector {
    /// Entry is free (not in an anchored row).
    free: Vec<bool>,
    entry_row: Vec<usize>,
    entry_col: Vec<usize>,
    /// Free entries per row / column.
    r: Vec<f64>,
    c: Vec<f64>,
    comp_row: Vec<usize>,
    comp_col: Vec<usize>,
    /// Free entries per component and row count per component.
    comp_entries: Vec<f64>,
    comp_rows: Vec<f64>,
    /// Required sum of the free entries of each column.
    col_free_target: Vec<f64>,
    /// Required full column sum (fixed entries included) of active columns.
    col_target: Vec<Option<f64>>,
    /// Active rows that carry free entries.
    free_rows: Vec<usize>,
    free_cols: Vec<usize>,
}

const NONE: usize = usize::MAX;

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Projector {
    pub fn new(p: &SparsityPattern) -> Self {
        let (n1, n2) = (p.n1(), p.n2());
        let nnz = p.nnz();
        let mut free = vec![false; nnz];
        let mut entry_row = vec![0; nnz];
        let mut entry_col = vec![0; nnz];
        let mut r = vec![0.0; n1];
        let mut c = vec![0.0; n2];
        let mut fixed_col = vec![0.0; n2];
        let mut col_active = vec![false; n2];
        // union-find over rows 0..n1 and columns n1..n1+n2
        let mut parent: Vec<usize> = (0..n1 + n2).collect();
        for (k, (s, t)) in p.entries().enumerate() {
            entry_row[k] = s;
            entry_col[k] = t;
            col_active[t] = true;
            if p.is_fixed_row(s) {
                fixed_col[t] += 1.0;
            } else {
                free[k] = true;
                r[s] += 1.0;
                c[t] += 1.0;
                let (a, b) = (find(&mut parent, s), find(&mut parent, n1 + t));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let free_rows: Vec<usize> = (0..n1).filter(|&s| r[s] > 0.0).collect();
        let free_cols: Vec<usize> = (0..n2).filter(|&t| c[t] > 0.0).collect();
        let mut label = vec![NONE; n1 + n2];
        let mut n_comp = 0;
        let mut comp_row = vec![NONE; n1];
        let mut comp_col = vec![NONE; n2];
        for &s in &free_rows {
            let root = find(&mut parent, s);
            if label[root] == NONE {
                label[root] = n_comp;
                n_comp += 1;
            }
            comp_row[s] = label[root];
        }
        for &t in &free_cols {
            let root = find(&mut parent, n1 + t);
            comp_col[t] = label[root];
        }
        let mut comp_entries = vec![0.0; n_comp];
        let mut comp_rows = vec![0.0; n_comp];
        let mut comp_cols = vec![0.0; n_comp];
        let mut comp_fixed = vec![0.0; n_comp];
        for &s in &free_rows {
            comp_rows[comp_row[s]] += 1.0;
            comp_entries[comp_row[s]] += r[s];
        }
        for &t in &free_cols {
            comp_cols[comp_col[t]] += 1.0;
            comp_fixed[comp_col[t]] += fixed_col[t];
        }
        let mut col_free_target = vec![0.0; n2];
        let mut col_target = vec![None; n2];
        for t in 0..n2 {
            if !col_active[t] {
                continue;
            }
            if c[t] > 0.0 {
                let k = comp_col[t];
                // rows and anchor mass of the block, spread evenly over its columns
                let tau = (comp_rows[k] + comp_fixed[k]) / comp_cols[k];
                col_free_target[t] = tau - fixed_col[t];
                col_target[t] = Some(tau);
            } else {
                col_target[t] = Some(fixed_col[t]);
            }
        }
        Projector {
            free,
            entry_row,
            entry_col,
            r,
            c,
            comp_row,
            comp_col,
            comp_entries,
            comp_rows,
            col_free_target,
            col_target,
            free_rows,
            free_cols,
        }
    }

    /// Column sums a feasible plan must have (`None` for inactive columns).
    pub fn column_targets(&self) -> &[Option<f64>] {
        &self.col_target
    }

    /// Largest marginal violation of `d`.
    pub fn marginal_residual(&self, d: &TransportPlan) -> f64 {
        let p = d.pattern();
        let mut worst = 0.0f64;
        for (s, sum) in d.row_sums().into_iter().enumerate() {
            if p.is_active(s) {
                worst = worst.max((sum - 1.0).abs());
            }
        }
        for (t, sum) in d.col_sums().into_iter().enumerate() {
            if let Some(target) = self.col_target[t] {
                worst = worst.max((sum - target).abs());
            }
        }
        worst
    }

    /// Row and column residuals of the free part: `rowsum - 1`,
    /// `colsum - free target`.
    fn free_residuals(&self, vals: &[f64], n1: usize, n2: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rr = vec![0.0; n1];
        let mut cr = vec![0.0; n2];
        for k in 0..vals.len() {
            if self.free[k] {
                rr[self.entry_row[k]] += vals[k];
                cr[self.entry_col[k]] += vals[k];
            }
        }
        for &s in &self.free_rows {
            rr[s] -= 1.0;
        }
        for &t in &self.free_cols {
            cr[t] -= self.col_free_target[t];
        }
        (rr, cr)
    }

    /// Applies `x = K v` for the multiplier system, `K = [diag(r) B; B' diag(c)]`.
    fn apply_k(&self, va: &[f64], vb: &[f64], oa: &mut [f64], ob: &mut [f64]) {
        for &s in &self.free_rows {
            oa[s] = self.r[s] * va[s];
        }
        for &t in &self.free_cols {
            ob[t] = self.c[t] * vb[t];
        }
        for k in 0..self.free.len() {
            if self.free[k] {
                let (s, t) = (self.entry_row[k], self.entry_col[k]);
                oa[s] += vb[t];
                ob[t] += va[s];
            }
        }
    }

    /// Solves `K [a; b] = [rr; cr]` by Jacobi-preconditioned CG.
    fn solve_multipliers(
        &self,
        rr: &[f64],
        cr: &[f64],
        n1: usize,
        n2: usize,
    ) -> (Vec<f64>, Vec<f64>) {
        let dot = |x: &[f64], y: &[f64], xb: &[f64], yb: &[f64]| -> f64 {
            self.free_rows.iter().map(|&s| x[s] * y[s]).sum::<f64>()
                + self.free_cols.iter().map(|&t| xb[t] * yb[t]).sum::<f64>()
        };
        let mut a = vec![0.0; n1];
        let mut b = vec![0.0; n2];
        let mut ra = rr.to_vec();
        let mut rb = cr.to_vec();
        let mut za: Vec<f64> = (0..n1)
            .map(|s| {
                if self.r[s] > 0.0 {
                    ra[s] / self.r[s]
                } else {
                    0.0
                }
            })
            .collect();
        let mut zb: Vec<f64> = (0..n2)
            .map(|t| {
                if self.c[t] > 0.0 {
                    rb[t] / self.c[t]
                } else {
                    0.0
                }
            })
            .collect();
        let mut pa = za.clone();
        let mut pb = zb.clone();
        let mut rz = dot(&ra, &za, &rb, &zb);
        let mut qa = vec![0.0; n1];
        let mut qb = vec![0.0; n2];
        let max_iter = (4 * (self.free_rows.len() + self.free_cols.len()) + 100).min(5000);
        let stop = 0.01 * MARGINAL_TOL;
        for _ in 0..max_iter {
            let worst = self
                .free_rows
                .iter()
                .map(|&s| ra[s].abs())
                .chain(self.free_cols.iter().map(|&t| rb[t].abs()))
                .fold(0.0f64, f64::max);
            if worst <= stop || rz <= 0.0 {
                break;
            }
            self.apply_k(&pa, &pb, &mut qa, &mut qb);
            let pq = dot(&pa, &qa, &pb, &qb);
            if !(pq > 0.0) {
                break;
            }
            let alpha = rz / pq;
            for &s in &self.free_rows {
                a[s] += alpha * pa[s];
                ra[s] -= alpha * qa[s];
                za[s] = ra[s] / self.r[s];
            }
            for &t in &self.free_cols {
                b[t] += alpha * pb[t];
                rb[t] -= alpha * qb[t];
                zb[t] = rb[t] / self.c[t];
            }
            let rz_new = dot(&ra, &za, &rb, &zb);
            let beta = rz_new / rz;
            rz = rz_new;
            for &s in &self.free_rows {
                pa[s] = za[s] + beta * pa[s];
            }
            for &t in &self.free_cols {
                pb[t] = zb[t] + beta * pb[t];
            }
        }
        (a, b)
    }

    /// Projects `y` (supported on the projector's pattern).
    pub fn project(&self, y: &TransportPlan) -> Result<TransportPlan> {
        let p = y.pattern();
        if p.nnz() != self.free.len() {
            return Err(Error::DimensionMismatch(
                "plan does not match the projector's pattern".into(),
            ));
        }
        let (n1, n2) = (p.n1(), p.n2());
        let yv = y.values();
        let (rr, cr) = self.free_residuals(yv, n1, n2);
        let mut excess = vec![0.0; self.comp_entries.len()];
        for k in 0..yv.len() {
            if self.free[k] {
                excess[self.comp_row[self.entry_row[k]]] += yv[k];
            }
        }
        for (e, rows) in excess.iter_mut().zip(&self.comp_rows) {
            *e -= rows;
        }
        let mut vals: Vec<f64> = (0..yv.len())
            .map(|k| {
                if !self.free[k] {
                    return 1.0;
                }
                let (s, t) = (self.entry_row[k], self.entry_col[k]);
                let comp = self.comp_row[s];
                yv[k] - rr[s] / self.r[s] - cr[t] / self.c[t]
                    + excess[comp] / self.comp_entries[comp]
            })
            .collect();
        debug_assert!(self.free_cols.iter().all(|&t| self.comp_col[t] != NONE));

        let mut plan = TransportPlan::new(y.pattern_arc().clone(), vals.clone())?;
        let mut res = self.marginal_residual(&plan);
        let mut rounds = 0;
        while res > 0.1 * MARGINAL_TOL && rounds < 6 {
            let (rr, cr) = self.free_residuals(&vals, n1, n2);
            let (a, b) = self.solve_multipliers(&rr, &cr, n1, n2);
            for k in 0..vals.len() {
                if self.free[k] {
                    vals[k] -= a[self.entry_row[k]] + b[self.entry_col[k]];
                }
            }
            plan = TransportPlan::new(y.pattern_arc().clone(), vals.clone())?;
            res = self.marginal_residual(&plan);
            rounds += 1;
        }
        if rounds > 0 {
            debug!("projection needed {rounds} correction round(s), residual {res:e}");
        }
        if !(res <= MARGINAL_TOL) {
            return Err(Error::ProjectionFailed { residual: res });
        }
        Ok(plan)
    }
}

/// One-off projection; builds a [`Projector`] for `y`'s pattern.
pub fn project(y: &TransportPlan) -> Result<TransportPlan> {
    Projector::new(y.pattern()).project(y)
}

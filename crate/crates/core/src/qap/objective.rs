//! Objective `1/2 |S1 D - D S2|^2 + mu/2 |M1 D - D M2|^2` and its gradient
//! for a plan `D` with sources as rows. Only rows that can be nonzero are
//! ever formed; nothing dense is materialized.

use rayon::prelude::*;

use super::plan::TransportPlan;
use crate::descriptors::SparseOperator;
use crate::error::{Error, Result};

/// Operators of the two surfaces and the balance weight.
#[derive(Debug, Clone, Copy)]
pub struct QapProblem<'a> {
    pub s1: &'a SparseOperator,
    pub s2: &'a SparseOperator,
    pub m1: &'a SparseOperator,
    pub m2: &'a SparseOperator,
    pub mu: f64,
}

/// Sparse rows of a residual `A D - D B`.
struct Residual {
    /// For each source row: `(col, value)` sorted by column, empty if zero.
    rows: Vec<Vec<(usize, f64)>>,
}

/// Dense accumulator over target columns with a touched list.
struct Scatter {
    acc: Vec<f64>,
    mark: Vec<bool>,
    touched: Vec<usize>,
}

impl Scatter {
    fn new(n: usize) -> Self {
        Scatter {
            acc: vec![0.0; n],
            mark: vec![false; n],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, t: usize, v: f64) {
        if !self.mark[t] {
            self.mark[t] = true;
            self.touched.push(t);
        }
        self.acc[t] += v;
    }

    fn drain_sorted(&mut self) -> Vec<(usize, f64)> {
        self.touched.sort_unstable();
        let out = self.touched.iter().map(|&t| (t, self.acc[t])).collect();
        for &t in &self.touched {
            self.acc[t] = 0.0;
            self.mark[t] = false;
        }
        self.touched.clear();
        out
    }

    fn clear(&mut self) {
        for &t in &self.touched {
            self.acc[t] = 0.0;
            self.mark[t] = false;
        }
        self.touched.clear();
    }
}

impl<'a> QapProblem<'a> {
    pub fn new(
        s1: &'a SparseOperator,
        s2: &'a SparseOperator,
        m1: &'a SparseOperator,
        m2: &'a SparseOperator,
        mu: f64,
    ) -> Result<Self> {
        if s1.n() != m1.n() || s2.n() != m2.n() {
            return Err(Error::DimensionMismatch(format!(
                "operator sizes differ: S1 {} M1 {} S2 {} M2 {}",
                s1.n(),
                m1.n(),
                s2.n(),
                m2.n()
            )));
        }
        if !(mu >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "mu must be nonnegative, got {mu}"
            )));
        }
        Ok(QapProblem { s1, s2, m1, m2, mu })
    }

    fn check(&self, d: &TransportPlan) -> Result<()> {
        let p = d.pattern();
        if p.n1() != self.s1.n() || p.n2() != self.s2.n() {
            return Err(Error::DimensionMismatch(format!(
                "plan is {}x{}, operators are {} and {}",
                p.n1(),
                p.n2(),
                self.s1.n(),
                self.s2.n()
            )));
        }
        Ok(())
    }

    /// Rows of `A D - D B` that can be nonzero: active rows and their
    /// neighbors under `A`.
    fn residual(a: &SparseOperator, b: &SparseOperator, d: &TransportPlan) -> Residual {
        let p = d.pattern();
        let n1 = p.n1();
        let mut needed = vec![false; n1];
        for s in p.active_rows() {
            for (k, _) in a.row_iter(s) {
                needed[k] = true;
            }
        }
        let vals = d.values();
        let rows: Vec<Vec<(usize, f64)>> = (0..n1)
            .into_par_iter()
            .map_init(
                || Scatter::new(p.n2()),
                |sc, k| {
                    if !needed[k] {
                        return Vec::new();
                    }
                    for (j, w) in a.row_iter(k) {
                        for (e, &t) in p.row_range(j).zip(p.row(j)) {
                            sc.add(t, w * vals[e]);
                        }
                    }
                    for (e, &l) in p.row_range(k).zip(p.row(k)) {
                        let v = vals[e];
                        for (t, w) in b.row_iter(l) {
                            sc.add(t, -v * w);
                        }
                    }
                    sc.drain_sorted()
                },
            )
            .collect();
        Residual { rows }
    }

    fn sq_norm(r: &Residual) -> f64 {
        r.rows
            .iter()
            .map(|row| row.iter().map(|e| e.1 * e.1).sum::<f64>())
            .sum()
    }

    /// Objective value.
    pub fn objective(&self, d: &TransportPlan) -> Result<f64> {
        self.check(d)?;
        let rs = Self::residual(self.s1, self.s2, d);
        let mut f = 0.5 * Self::sq_norm(&rs);
        if self.mu != 0.0 {
            let rm = Self::residual(self.m1, self.m2, d);
            f += 0.5 * self.mu * Self::sq_norm(&rm);
        }
        Ok(f)
    }

    /// Objective and its gradient at the admissible entries of `d`.
    pub fn objective_and_gradient(&self, d: &TransportPlan) -> Result<(f64, TransportPlan)> {
        self.check(d)?;
        let rs = Self::residual(self.s1, self.s2, d);
        let mut f = 0.5 * Self::sq_norm(&rs);
        let rm = if self.mu != 0.0 {
            let rm = Self::residual(self.m1, self.m2, d);
            f += 0.5 * self.mu * Self::sq_norm(&rm);
            Some(rm)
        } else {
            None
        };
        let p = d.pattern();
        let n1 = p.n1();
        let grad_rows: Vec<Vec<f64>> = (0..n1)
            .into_par_iter()
            .map_init(
                || Scatter::new(p.n2()),
                |sc, s| {
                    if !p.is_active(s) {
                        return Vec::new();
                    }
                    accumulate_grad_row(sc, self.s1, self.s2, &rs, s, 1.0);
                    if let Some(rm) = &rm {
                        accumulate_grad_row(sc, self.m1, self.m2, rm, s, self.mu);
                    }
                    let g = p.row(s).iter().map(|&t| sc.acc[t]).collect();
                    sc.clear();
                    g
                },
            )
            .collect();
        let grad = TransportPlan::new(d.pattern_arc().clone(), grad_rows.concat())?;
        Ok((f, grad))
    }

    pub fn gradient(&self, d: &TransportPlan) -> Result<TransportPlan> {
        Ok(self.objective_and_gradient(d)?.1)
    }
}

/// Adds `w * (A R - R B)[s, :]` into the scatter.
fn accumulate_grad_row(
    sc: &mut Scatter,
    a: &SparseOperator,
    b: &SparseOperator,
    r: &Residual,
    s: usize,
    w: f64,
) {
    for (k, av) in a.row_iter(s) {
        for &(t, rv) in &r.rows[k] {
            sc.add(t, w * av * rv);
        }
    }
    for &(l, rv) in &r.rows[s] {
        for (t, bv) in b.row_iter(l) {
            sc.add(t, -w * rv * bv);
        }
    }
}

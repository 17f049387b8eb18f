use std::path::Path;
use std::sync::Arc;

use super::pattern::SparsityPattern;
use crate::anchor::Correspondence;
use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, write_text};

/// Relaxed assignment: one value per admissible entry of its pattern,
/// implicitly zero elsewhere. Values may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl TransportPlan {
    pub fn new(pattern: Arc<SparsityPattern>, values: Vec<f64>) -> Result<Self> {
        if values.len() != pattern.nnz() {
            return Err(Error::DimensionMismatch(format!(
                "plan has {} values, pattern has {} entries",
                values.len(),
                pattern.nnz()
            )));
        }
        Ok(TransportPlan { pattern, values })
    }

    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let n = pattern.nnz();
        TransportPlan {
            pattern,
            values: vec![0.0; n],
        }
    }

    /// Plan with value `f(source, target)` at every admissible entry.
    pub fn from_fn(pattern: Arc<SparsityPattern>, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = pattern.entries().map(|(s, t)| f(s, t)).collect();
        TransportPlan { pattern, values }
    }

    /// One-hot rows from a map: 1 at `(s, map(s))` when admissible.
    pub fn one_hot(pattern: Arc<SparsityPattern>, map: &Correspondence) -> Self {
        Self::from_fn(
            pattern,
            |s, t| if map.get(s) == Some(t) { 1.0 } else { 0.0 },
        )
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    pub fn pattern_arc(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at `(s, t)`, zero when not admissible.
    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.pattern
            .find(s, t)
            .map(|k| self.values[k])
            .unwrap_or(0.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.pattern.n1())
            .map(|s| self.values[self.pattern.row_range(s)].iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.pattern.n2()];
        for ((_, t), v) in self.pattern.entries().zip(&self.values) {
            c[t] += v;
        }
        c
    }

    pub fn dot(&self, other: &TransportPlan) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Dense `n1 x n2` copy, for tests and small problems.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.pattern.n1(), self.pattern.n2());
        for ((s, t), v) in self.pattern.entries().zip(&self.values) {
            m[(s, t)] = *v;
        }
        m
    }

    /// CSV with header `row,col,value` (source, target, value).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value\n");
        for ((s, t), v) in self.pattern.entries().zip(&self.values) {
            out.push_str(&format!("{s},{t},{}\n", fmt_f64(*v)));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path, &self.to_csv())
    }
}

/// Row-wise argmax over admissible entries, ties to the smallest target.
/// Inactive rows stay unmapped.
pub fn extract_map(plan: &TransportPlan) -> Correspondence {
    let p = plan.pattern();
    let map = (0..p.n1())
        .map(|s| {
            let r = p.row_range(s);
            let mut best: Option<(usize, f64)> = None;
            for (k, &t) in r.clone().zip(p.row(s)) {
                let v = plan.values[k];
                if best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((t, v));
                }
            }
            best.map(|b| b.0)
        })
        .collect();
    Correspondence::new(map, p.n2()).expect("pattern columns are in range")
}

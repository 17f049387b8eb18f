use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::io::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Stiffness,
    Mass,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Stiffness => "stiffness",
            OperatorKind::Mass => "mass",
        }
    }
}

/// Square sparse real matrix in compressed row form with sorted columns.
/// Holds a stiffness or mass matrix; pattern is edge adjacency plus the
/// diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    kind: OperatorKind,
}

impl SparseOperator {
    /// Builds from per-row `(col, value)` lists. Columns are sorted; duplicate
    /// columns within a row are summed in input order.
    pub fn from_rows(n: usize, kind: OperatorKind, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                debug_assert!(c < n);
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseOperator {
            n,
            row_ptr,
            cols,
            vals,
            kind,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>, kind: OperatorKind) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| m[(i, j)] != 0.0 || i == j)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        SparseOperator::from_rows(n, kind, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (c, v) = self.row(i);
        c.iter().copied().zip(v.iter().copied())
    }

    /// Entry `(i, j)`, zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).1.iter().sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.row_sums().iter().sum()
    }

    /// Coordinate list `(row, col, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row_iter(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row_iter(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        self.entries()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// `P A P^T` for the relabeling `old -> perm[old]`.
    pub fn permuted(&self, perm: &[usize]) -> SparseOperator {
        assert_eq!(perm.len(), self.n);
        let mut rows = vec![Vec::new(); self.n];
        for (i, j, v) in self.entries() {
            rows[perm[i]].push((perm[j], v));
        }
        SparseOperator::from_rows(self.n, self.kind, rows)
    }

    /// MatrixMarket coordinate text, 1-based, every stored entry listed.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "%%MatrixMarket matrix coordinate real general");
        let _ = writeln!(s, "% kind: {}", self.kind.name());
        let _ = writeln!(s, "{} {} {}", self.n, self.n, self.nnz());
        for (i, j, v) in self.entries() {
            let _ = writeln!(s, "{} {} {}", i + 1, j + 1, fmt_f64(v));
        }
        s
    }

    pub fn from_matrix_market(text: &str) -> Result<SparseOperator> {
        let bad = |line: usize, msg: &str| Error::Parse {
            path: "<matrix market>".into(),
            line,
            msg: msg.to_string(),
        };
        let mut kind = OperatorKind::Stiffness;
        let mut dims: Option<(usize, usize)> = None;
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut seen = 0;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('%') {
                if rest.trim() == "kind: mass" {
                    kind = OperatorKind::Mass;
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match dims {
                None => {
                    let p = |k: usize| toks.get(k).and_then(|t| t.parse::<usize>().ok());
                    let (r, c, nnz) = (p(0), p(1), p(2));
                    match (r, c, nnz) {
                        (Some(r), Some(c), Some(nnz)) if r == c => {
                            dims = Some((r, nnz));
                            rows = vec![Vec::new(); r];
                        }
                        _ => return Err(bad(ln + 1, "bad size line (square matrix expected)")),
                    }
                }
                Some((n, _)) => {
                    let i: usize = toks
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(ln + 1, "bad row"))?;
                    let j: usize = toks
                        .get(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(ln + 1, "bad col"))?;
                    let v: f64 = toks
                        .get(2)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(ln + 1, "bad value"))?;
                    if i == 0 || j == 0 || i > n || j > n {
                        return Err(bad(ln + 1, "index out of range"));
                    }
                    rows[i - 1].push((j - 1, v));
                    seen += 1;
                }
            }
        }
        let (n, nnz) = dims.ok_or_else(|| bad(0, "missing size line"))?;
        if seen != nnz {
            return Err(bad(0, "entry count does not match header"));
        }
        Ok(SparseOperator::from_rows(n, kind, rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_roundtrip() {
        let rows = vec![
            vec![(0, 1.0 / 3.0), (1, -0.25)],
            vec![(0, -0.25), (1, std::f64::consts::E), (2, 1e-300)],
            vec![(1, 1e-300), (2, 7.0)],
        ];
        let a = SparseOperator::from_rows(3, OperatorKind::Mass, rows);
        let b = SparseOperator::from_matrix_market(&a.to_matrix_market()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duplicate_columns_sum() {
        let a = SparseOperator::from_rows(
            2,
            OperatorKind::Stiffness,
            vec![vec![(1, 1.0), (0, 2.0), (1, 3.0)], vec![]],
        );
        assert_eq!(a.get(0, 1), 4.0);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }
}

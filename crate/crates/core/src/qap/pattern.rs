use crate::error::{Error, Result};

/// Admissible entries of a transport plan, stored row-wise (one row per
/// source vertex, columns are target vertices).
///
/// A row with no entries is inactive: the source takes no part in the
/// current solve. An anchored row holds exactly one entry, fixed to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    n1: usize,
    n2: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    anchor: Vec<Option<usize>>,
}

impl SparsityPattern {
    /// `rows` lists the active sources with their admissible targets;
    /// `anchors` pins `(source, target)` pairs. An anchored source keeps only
    /// its anchor target, whether or not it is also listed in `rows`.
    pub fn new(
        n1: usize,
        n2: usize,
        rows: &[(usize, Vec<usize>)],
        anchors: &[(usize, usize)],
    ) -> Result<Self> {
        let mut per_row: Vec<Option<Vec<usize>>> = vec![None; n1];
        for (s, targets) in rows {
            if *s >= n1 {
                return Err(Error::BadIndex(format!(
                    "pattern row {s} out of range 0..{n1}"
                )));
            }
            if let Some(&t) = targets.iter().find(|&&t| t >= n2) {
                return Err(Error::BadIndex(format!(
                    "pattern column {t} out of range 0..{n2}"
                )));
            }
            per_row[*s]
                .get_or_insert_with(Vec::new)
                .extend_from_slice(targets);
        }
        let mut anchor = vec![None; n1];
        for &(s, t) in anchors {
            if s >= n1 || t >= n2 {
                return Err(Error::BadIndex(format!("anchor ({s}, {t}) out of range")));
            }
            if matches!(anchor[s], Some(prev) if prev != t) {
                return Err(Error::InvalidInput(format!("source {s} is anchored twice")));
            }
            anchor[s] = Some(t);
            per_row[s] = Some(vec![t]);
        }
        let mut row_ptr = Vec::with_capacity(n1 + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for (s, row) in per_row.into_iter().enumerate() {
            if let Some(mut r) = row {
                if r.is_empty() {
                    return Err(Error::InfeasiblePattern {
                        kind: "row",
                        index: s,
                    });
                }
                r.sort_unstable();
                r.dedup();
                cols.extend(r);
            }
            row_ptr.push(cols.len());
        }
        Ok(SparsityPattern {
            n1,
            n2,
            row_ptr,
            cols,
            anchor,
        })
    }

    /// Every entry admissible, no anchors.
    pub fn full(n1: usize, n2: usize) -> Self {
        let rows: Vec<(usize, Vec<usize>)> = (0..n1).map(|s| (s, (0..n2).collect())).collect();
        Self::new(n1, n2, &rows, &[]).expect("full pattern is valid")
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Number of admissible entries.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, s: usize) -> &[usize] {
        &self.cols[self.row_ptr[s]..self.row_ptr[s + 1]]
    }

    /// Entry index range of row `s` into plan value arrays.
    pub fn row_range(&self, s: usize) -> std::ops::Range<usize> {
        self.row_ptr[s]..self.row_ptr[s + 1]
    }

    pub fn is_active(&self, s: usize) -> bool {
        self.row_ptr[s + 1] > self.row_ptr[s]
    }

    pub fn active_rows(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n1).filter(move |&s| self.is_active(s))
    }

    pub fn anchor(&self, s: usize) -> Option<usize> {
        self.anchor[s]
    }

    pub fn n_anchors(&self) -> usize {
        self.anchor.iter().filter(|a| a.is_some()).count()
    }

    /// Position of `(s, t)` in the entry arrays.
    pub fn find(&self, s: usize, t: usize) -> Option<usize> {
        let r = self.row_range(s);
        self.cols[r.clone()]
            .binary_search(&t)
            .ok()
            .map(|k| r.start + k)
    }

    /// All entries `(source, target)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n1).flat_map(move |s| self.row(s).iter().map(move |&t| (s, t)))
    }

    /// Whether entry `k` is an anchor entry (fixed to 1).
    pub fn is_fixed_row(&self, s: usize) -> bool {
        self.anchor[s].is_some()
    }

    /// Admissible entries per target column.
    pub fn col_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n2];
        for &t in &self.cols {
            c[t] += 1;
        }
        c
    }

    pub fn max_row_len(&self) -> usize {
        (0..self.n1).map(|s| self.row(s).len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_override_rows() {
        let p =
            SparsityPattern::new(3, 3, &[(0, vec![2, 0, 1]), (1, vec![1, 2])], &[(1, 0)]).unwrap();
        assert_eq!(p.row(0), &[0, 1, 2]);
        assert_eq!(p.row(1), &[0]);
        assert!(!p.is_active(2));
        assert_eq!(p.anchor(1), Some(0));
        assert_eq!(p.find(0, 2), Some(2));
        assert_eq!(p.find(1, 1), None);
    }

    #[test]
    fn empty_row_is_infeasible() {
        let err = SparsityPattern::new(2, 2, &[(0, vec![0]), (1, vec![])], &[]).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasiblePattern {
                kind: "row",
                index: 1
            }
        ));
    }
}

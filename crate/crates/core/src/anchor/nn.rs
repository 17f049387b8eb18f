//! Brute-force Euclidean nearest neighbors between two descriptor sets,
//! blocked through a sequential matrix product so results do not depend on
//! the thread count.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use rayon::prelude::*;

const BLOCK: usize = 256;

/// Stand-in for non-finite descriptor entries (unreachable anchors). Scaled
/// signatures live in `[0, 1]`, so this keeps such points apart from
/// reachable ones without poisoning the products.
const NON_FINITE: f64 = 4.0;

fn sanitize(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| if v.is_finite() { v } else { NON_FINITE })
        .collect()
}

fn sq_norms(x: &[f64], dim: usize) -> Vec<f64> {
    x.chunks_exact(dim)
        .map(|r| r.iter().map(|v| v * v).sum())
        .collect()
}

struct BlockResult {
    row_best: Vec<usize>,
    col_best: Vec<(f64, usize)>,
}

fn blocks(a: &[f64], b: &[f64], dim: usize, want_cols: bool) -> Vec<BlockResult> {
    let (a, b) = (sanitize(a), sanitize(b));
    let (na, nb) = (a.len() / dim, b.len() / dim);
    let (a2, b2) = (sq_norms(&a, dim), sq_norms(&b, dim));
    let bm = MatRef::from_row_major_slice(&b, nb, dim);
    let starts: Vec<usize> = (0..na).step_by(BLOCK).collect();
    starts
        .par_iter()
        .map(|&r0| {
            let rows = BLOCK.min(na - r0);
            let am = MatRef::from_row_major_slice(&a[r0 * dim..(r0 + rows) * dim], rows, dim);
            let mut g = Mat::<f64>::zeros(rows, nb);
            matmul(
                g.as_mut(),
                Accum::Replace,
                am,
                bm.transpose(),
                1.0,
                Par::Seq,
            );
            let mut row_best = Vec::with_capacity(rows);
            let mut col_best = if want_cols {
                vec![(f64::INFINITY, usize::MAX); nb]
            } else {
                Vec::new()
            };
            for i in 0..rows {
                let mut best = (f64::INFINITY, 0usize);
                for j in 0..nb {
                    let d = a2[r0 + i] + b2[j] - 2.0 * g[(i, j)];
                    if d < best.0 {
                        best = (d, j);
                    }
                    if want_cols && d < col_best[j].0 {
                        col_best[j] = (d, r0 + i);
                    }
                }
                row_best.push(best.1);
            }
            BlockResult { row_best, col_best }
        })
        .collect()
}

/// Index of the nearest row of `b` for every row of `a`; ties go to the
/// smaller index.
pub(crate) fn nearest(a: &[f64], b: &[f64], dim: usize) -> Vec<usize> {
    if a.is_empty() {
        return Vec::new();
    }
    blocks(a, b, dim, false)
        .into_iter()
        .flat_map(|r| r.row_best)
        .collect()
}

/// Nearest neighbors in both directions: `(a -> b, b -> a)`.
pub(crate) fn nearest_both(a: &[f64], b: &[f64], dim: usize) -> (Vec<usize>, Vec<usize>) {
    let nb = b.len() / dim;
    let mut fwd = Vec::with_capacity(a.len() / dim);
    let mut col = vec![(f64::INFINITY, 0usize); nb];
    for r in blocks(a, b, dim, true) {
        fwd.extend(r.row_best);
        for (c, cand) in col.iter_mut().zip(r.col_best) {
            if cand.0 < c.0 {
                *c = cand;
            }
        }
    }
    (fwd, col.into_iter().map(|c| c.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(a: &[f64], b: &[f64], dim: usize) -> Vec<usize> {
        a.chunks_exact(dim)
            .map(|x| {
                let mut best = (f64::INFINITY, 0);
                for (j, y) in b.chunks_exact(dim).enumerate() {
                    let d: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
                    if d < best.0 {
                        best = (d, j);
                    }
                }
                best.1
            })
            .collect()
    }

    #[test]
    fn agrees_with_direct_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dim = 7;
        let a: Vec<f64> = (0..600 * dim).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..300 * dim).map(|_| rng.random()).collect();
        assert_eq!(nearest(&a, &b, dim), oracle(&a, &b, dim));
        let (f, r) = nearest_both(&a, &b, dim);
        assert_eq!(f, oracle(&a, &b, dim));
        assert_eq!(r, oracle(&b, &a, dim));
    }

    #[test]
    fn self_match_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<f64> = (0..500 * 4).map(|_| rng.random()).collect();
        let (f, r) = nearest_both(&a, &a, 4);
        assert!(f.iter().enumerate().all(|(i, &j)| i == j));
        assert!(r.iter().enumerate().all(|(i, &j)| i == j));
    }
}

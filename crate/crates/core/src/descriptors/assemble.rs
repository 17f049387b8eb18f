use log::warn;

use super::sparse::{OperatorKind, SparseOperator};
use crate::geometry::{triangle_area, Point, TriMesh, NO_VERTEX};

const COT_WARN: f64 = 1e8;

/// Cotangent of the angle at `o` in triangle `(i, j, o)`.
pub(crate) fn cot_at(p: &[Point], i: usize, j: usize, o: usize) -> f64 {
    let u = p[i] - p[o];
    let v = p[j] - p[o];
    u.dot(&v) / u.cross(&v).norm()
}

/// Area with corners taken in lexicographic coordinate order, so every
/// caller gets the same rounding for the same face whatever the labels.
pub(crate) fn sorted_area(p: &[Point], a: usize, b: usize, c: usize) -> f64 {
    let mut t = [&p[a], &p[b], &p[c]];
    t.sort_unstable_by(|x, y| {
        x.iter()
            .zip(y.iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    triangle_area(t[0], t[1], t[2])
}

/// Stiffness and mass weight of edge `(i, j)`, `i < j`, given its opposite
/// vertices in increasing order (one for a boundary edge, two inside).
pub(crate) fn edge_weights(
    p: &[Point],
    i: usize,
    j: usize,
    opposite: &[usize],
    big_cot: &mut usize,
) -> (f64, f64) {
    debug_assert!(i < j);
    let mut cot = 0.0;
    let mut area = 0.0;
    for &o in opposite {
        let c = cot_at(p, i, j, o);
        if !(c.abs() <= COT_WARN) {
            *big_cot += 1;
        }
        cot += c;
        area += sorted_area(p, i, j, o);
    }
    (-0.5 * cot, area / 12.0)
}

pub(crate) fn warn_big_cot(count: usize) {
    if count > 0 {
        warn!("{count} cotangent(s) exceed 1e8 in magnitude; near-degenerate triangles present");
    }
}

/// Sum in increasing value order, which does not depend on how the terms
/// were labeled.
pub(crate) fn ordered_sum(vals: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = vals.collect();
    v.sort_unstable_by(f64::total_cmp);
    v.iter().sum()
}

/// Sorts each row, then inserts the diagonal: minus the off-diagonal sum for
/// stiffness, the off-diagonal sum for mass. Sums run in increasing value
/// order, so relabeling vertices permutes the result exactly.
pub(crate) fn with_diagonal(
    mut rows: Vec<Vec<(usize, f64)>>,
    kind: OperatorKind,
) -> SparseOperator {
    let n = rows.len();
    for (i, row) in rows.iter_mut().enumerate() {
        let s = ordered_sum(row.iter().map(|e| e.1));
        row.sort_by_key(|e| e.0);
        let d = match kind {
            OperatorKind::Stiffness => -s,
            OperatorKind::Mass => s,
        };
        let at = row.partition_point(|e| e.0 < i);
        row.insert(at, (i, d));
    }
    SparseOperator::from_rows(n, kind, rows)
}

fn assemble(mesh: &TriMesh) -> (SparseOperator, SparseOperator) {
    let p = mesh.vertices();
    let n = mesh.n_vertices();
    let mut s_rows = vec![Vec::new(); n];
    let mut m_rows = vec![Vec::new(); n];
    let mut big = 0;
    for (&[i, j], &[o1, o2]) in mesh.edges().iter().zip(mesh.edge_opposites()) {
        let opp: &[usize] = if o2 == NO_VERTEX { &[o1] } else { &[o1, o2] };
        let (w, m) = edge_weights(p, i, j, opp, &mut big);
        s_rows[i].push((j, w));
        s_rows[j].push((i, w));
        m_rows[i].push((j, m));
        m_rows[j].push((i, m));
    }
    warn_big_cot(big);
    (
        with_diagonal(s_rows, OperatorKind::Stiffness),
        with_diagonal(m_rows, OperatorKind::Mass),
    )
}

/// Cotangent stiffness matrix. Off-diagonals are `-(cot a + cot b)/2` over
/// the angles opposite the edge (one angle on a boundary edge); rows sum to
/// zero.
pub fn assemble_stiffness(mesh: &TriMesh) -> SparseOperator {
    assemble(mesh).0
}

/// Consistent mass matrix. Off-diagonals are the summed area of the faces
/// adjacent to the edge over 12; the diagonal is the row's off-diagonal sum,
/// so all entries add up to the surface area.
pub fn assemble_mass(mesh: &TriMesh) -> SparseOperator {
    assemble(mesh).1
}

/// Both operators in one pass.
pub fn assemble_operators(mesh: &TriMesh) -> (SparseOperator, SparseOperator) {
    assemble(mesh)
}

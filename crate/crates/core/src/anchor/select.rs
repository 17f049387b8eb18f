use super::correspondence::{AnchorSet, Correspondence};
use crate::error::{Error, Result};
use crate::geometry::SurfaceGraph;
use crate::qap::SparsityPattern;

/// Pairs `(i, phi(i))` whose distortion is strictly below `epsilon`.
pub fn select_anchors(distortion: &[f64], phi: &Correspondence, epsilon: f64) -> Result<AnchorSet> {
    if !(epsilon > 0.0) && epsilon != 0.0 {
        return Err(Error::InvalidInput(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    if distortion.len() != phi.n1() {
        return Err(Error::DimensionMismatch(format!(
            "{} distortion values for {} sources",
            distortion.len(),
            phi.n1()
        )));
    }
    let mut pairs = Vec::new();
    let mut scores = Vec::new();
    for (i, &d) in distortion.iter().enumerate() {
        if let Some(t) = phi.get(i) {
            if d < epsilon {
                pairs.push((i, t));
                scores.push(d);
            }
        }
    }
    Ok(AnchorSet {
        pairs,
        distortion: scores,
        epsilon,
    })
}

/// Sparsity pattern induced by anchors: a source in the `ring`-neighborhood
/// of one or more anchors may map into the union of the corresponding target
/// neighborhoods; anchors map only to their partner; every other source is
/// left out of the round.
pub fn build_pattern(
    anchors: &AnchorSet,
    g1: &SurfaceGraph,
    g2: &SurfaceGraph,
    ring: usize,
) -> Result<SparsityPattern> {
    if anchors.is_empty() {
        return Err(Error::InvalidInput(
            "cannot build a pattern without anchors".into(),
        ));
    }
    if ring == 0 {
        return Err(Error::InvalidInput(
            "sparsity ring depth must be at least 1".into(),
        ));
    }
    let (n1, n2) = (g1.n_vertices(), g2.n_vertices());
    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); n1];
    let mut in_region = vec![false; n1];
    for &(x, y) in &anchors.pairs {
        let src = g1.ring_members(x, ring);
        let dst = g2.ring_members(y, ring);
        for s in src {
            in_region[s] = true;
            targets[s].extend_from_slice(&dst);
        }
    }
    let rows: Vec<(usize, Vec<usize>)> = (0..n1)
        .filter(|&s| in_region[s])
        .map(|s| {
            let mut t = std::mem::take(&mut targets[s]);
            t.sort_unstable();
            t.dedup();
            (s, t)
        })
        .collect();
    SparsityPattern::new(n1, n2, &rows, &anchors.pairs)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::primitives::grid;
    use crate::geometry::Point;

    pub(crate) fn path(n: usize) -> SurfaceGraph {
        let pts: Vec<Point> = (0..n).map(|i| Point::new(i as f64, 0.0, 0.0)).collect();
        let edges: Vec<[usize; 2]> = (1..n).map(|i| [i - 1, i]).collect();
        SurfaceGraph::from_edges(&pts, &edges)
    }

    #[test]
    fn selection_threshold_is_strict() {
        let phi = Correspondence::identity(4);
        let a = select_anchors(&[0.0, 1.0, 0.5, f64::INFINITY], &phi, 1.0).unwrap();
        assert_eq!(a.pairs, vec![(0, 0), (2, 2)]);
        let all = select_anchors(&[0.0, 1.0, 0.5, 7.0], &phi, f64::INFINITY).unwrap();
        assert_eq!(all.len(), 4);
        let exact = select_anchors(&[0.0, 1.0, 0.0, 7.0], &phi, 0.0).unwrap();
        assert!(exact.is_empty());
    }

    #[test]
    fn single_anchor_pattern() {
        let mesh = grid(5, 5);
        let g = mesh.graph();
        let anchors = AnchorSet {
            pairs: vec![(12, 12)],
            distortion: vec![0.0],
            epsilon: 1.0,
        };
        let p = build_pattern(&anchors, g, g, 1).unwrap();
        let ring = g.ring_members(12, 1);
        for s in 0..25 {
            if s == 12 {
                assert_eq!(p.row(s), &[12]);
            } else if ring.contains(&s) {
                assert_eq!(p.row(s), ring.as_slice());
            } else {
                assert!(!p.is_active(s));
            }
        }
    }

    #[test]
    fn overlapping_neighborhoods_take_the_union() {
        let g = &path(7);
        let anchors = AnchorSet {
            pairs: vec![(2, 1), (4, 5)],
            distortion: vec![0.0, 0.0],
            epsilon: 1.0,
        };
        let p = build_pattern(&anchors, g, g, 1).unwrap();
        assert_eq!(p.row(3), &[0, 1, 2, 4, 5, 6]);
    }
}

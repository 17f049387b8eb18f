//! Operators for raw point clouds.
//!
//! Every point gets its own small mesh: an adaptive nearest-neighbor set is
//! projected to its principal tangent plane, triangulated there, and the
//! triangles touching the point contribute the row of that point exactly as
//! mesh triangles would. Rows are then symmetrized. The union of all local
//! edges is the cloud's graph for rings and geodesics.

mod delaunay;
mod knn;
mod local_mesh;

pub use delaunay::delaunay;
pub use knn::{adaptive_knn, AdaptiveKnnParams, LocalFrame};
pub use local_mesh::{build_local_mesh, LocalMesh};

use log::warn;
use rayon::prelude::*;

use crate::anchor::Surface;
use crate::descriptors::{
    edge_weights, ordered_sum, warn_big_cot, with_diagonal, OperatorKind, SparseOperator,
};
use crate::error::Result;
use crate::geometry::spatial::KdTree;
use crate::geometry::{PointCloud, SurfaceGraph};

/// Operators and graph of a point cloud.
#[derive(Debug, Clone)]
pub struct CloudOperators {
    pub stiffness: SparseOperator,
    pub mass: SparseOperator,
    pub graph: SurfaceGraph,
    /// Points whose neighborhood could not be triangulated; their own rows
    /// are empty before symmetrization.
    pub skipped: Vec<usize>,
    /// Points that hit the minimum neighborhood size before becoming flat.
    pub flagged: Vec<usize>,
}

struct Row {
    stiff: Vec<(usize, f64)>,
    mass: Vec<(usize, f64)>,
    skipped: bool,
    flagged: bool,
    big_cot: usize,
}

fn local_row(
    points: &[crate::geometry::Point],
    tree: &KdTree,
    i: usize,
    params: &AdaptiveKnnParams,
) -> Result<Row> {
    let frame = adaptive_knn(points, tree, i, params)?;
    let lm = match build_local_mesh(points, &frame) {
        Ok(lm) => lm,
        Err(_) => {
            return Ok(Row {
                stiff: Vec::new(),
                mass: Vec::new(),
                skipped: true,
                flagged: frame.flagged,
                big_cot: 0,
            })
        }
    };
    // neighbor -> opposite vertices across the edge (i, neighbor)
    let mut opp: Vec<(usize, usize)> = Vec::new();
    for t in lm.global_triangles() {
        let k = t
            .iter()
            .position(|&v| v == i)
            .expect("star triangles contain the center");
        let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
        opp.push((a, b));
        opp.push((b, a));
    }
    opp.sort_unstable();
    let mut stiff = Vec::new();
    let mut mass = Vec::new();
    let mut big_cot = 0;
    let mut s = 0;
    while s < opp.len() {
        let j = opp[s].0;
        let mut e = s;
        while e < opp.len() && opp[e].0 == j {
            e += 1;
        }
        let others: Vec<usize> = opp[s..e].iter().map(|x| x.1).collect();
        let (w, m) = edge_weights(points, i.min(j), i.max(j), &others, &mut big_cot);
        stiff.push((j, w));
        mass.push((j, m));
        s = e;
    }
    Ok(Row {
        stiff,
        mass,
        skipped: false,
        flagged: frame.flagged,
        big_cot,
    })
}

/// `(A + A^T) / 2` of sparse off-diagonal rows, columns sorted.
fn symmetrize(rows: &[Vec<(usize, f64)>]) -> Vec<Vec<(usize, f64)>> {
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            out[i].push((j, 0.5 * v));
            out[j].push((i, 0.5 * v));
        }
    }
    for row in &mut out {
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for &(j, v) in row.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        *row = merged;
    }
    out
}

/// Stiffness and mass of a cloud from per-point local meshes.
///
/// Stiffness is symmetrized and re-centered so rows sum to zero. Mass
/// off-diagonals are symmetrized; the mass diagonal is each point's own
/// local row sum. When the local stars agree with a global triangulation
/// (e.g. a flat Delaunay lattice) the result is bit-identical to mesh
/// assembly.
pub fn assemble_cloud_operators(
    cloud: &PointCloud,
    params: &AdaptiveKnnParams,
) -> Result<CloudOperators> {
    let points = cloud.points();
    let n = points.len();
    let tree = KdTree::new(points);
    let rows: Vec<Row> = (0..n)
        .into_par_iter()
        .map(|i| local_row(points, &tree, i, params))
        .collect::<Result<_>>()?;
    warn_big_cot(rows.iter().map(|r| r.big_cot).sum());
    let skipped: Vec<usize> = (0..n).filter(|&i| rows[i].skipped).collect();
    let flagged: Vec<usize> = (0..n).filter(|&i| rows[i].flagged).collect();
    if skipped.len() * 20 > n {
        warn!(
            "cloud assembly skipped {} of {n} points: {:?}",
            skipped.len(),
            skipped
        );
    }
    if !flagged.is_empty() {
        warn!(
            "{} points stopped at the minimum neighborhood size before becoming flat",
            flagged.len()
        );
    }

    let s_rows: Vec<Vec<(usize, f64)>> = rows.iter().map(|r| r.stiff.clone()).collect();
    let stiffness = with_diagonal(symmetrize(&s_rows), OperatorKind::Stiffness);

    let m_local: Vec<Vec<(usize, f64)>> = rows.iter().map(|r| r.mass.clone()).collect();
    let mut diag: Vec<f64> = m_local
        .iter()
        .map(|r| ordered_sum(r.iter().map(|e| e.1)))
        .collect();
    let assembled: Vec<f64> = (0..n)
        .filter(|&i| !rows[i].skipped)
        .map(|i| diag[i])
        .collect();
    let fallback = if assembled.is_empty() {
        0.0
    } else {
        assembled.iter().sum::<f64>() / assembled.len() as f64
    };
    for &i in &skipped {
        diag[i] = fallback;
    }
    let mut m_rows = symmetrize(&m_local);
    for (i, row) in m_rows.iter_mut().enumerate() {
        let at = row.partition_point(|e| e.0 < i);
        row.insert(at, (i, diag[i]));
    }
    let mass = SparseOperator::from_rows(n, OperatorKind::Mass, m_rows);

    let mut edges: Vec<[usize; 2]> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| r.stiff.iter().map(move |&(j, _)| [i.min(j), i.max(j)]))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let graph = SurfaceGraph::from_edges(points, &edges);
    Ok(CloudOperators {
        stiffness,
        mass,
        graph,
        skipped,
        flagged,
    })
}

impl Surface {
    /// Surface of a point cloud through local meshing.
    pub fn from_cloud(cloud: &PointCloud, params: &AdaptiveKnnParams) -> Result<Surface> {
        let ops = assemble_cloud_operators(cloud, params)?;
        Surface::from_parts(cloud.points().to_vec(), ops.graph, ops.stiffness, ops.mass)
    }
}

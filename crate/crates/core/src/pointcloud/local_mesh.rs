use super::delaunay::delaunay;
use super::knn::LocalFrame;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Star of a point in the Delaunay triangulation of its projected
/// neighborhood.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMesh {
    pub center: usize,
    /// Global ids; `vertices[0]` is the center.
    pub vertices: Vec<usize>,
    /// Center-incident triangles as indices into `vertices`,
    /// counter-clockwise in the tangent plane.
    pub triangles: Vec<[usize; 3]>,
}

impl LocalMesh {
    /// Triangles in global ids.
    pub fn global_triangles(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        self.triangles.iter().map(|t| t.map(|k| self.vertices[k]))
    }
}

/// Flat in 3D: twice the area below `1e-10` of the longest squared edge.
/// Such triangles appear on the hull of a projected neighborhood when
/// collinear points pick up rounding in the projection.
fn is_sliver(points: &[Point], t: &[usize; 3]) -> bool {
    let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
    let longest = (b - a)
        .norm_squared()
        .max((c - b).norm_squared())
        .max((a - c).norm_squared());
    (b - a).cross(&(c - a)).norm() < 1e-10 * longest
}

/// Projects the frame's neighborhood to its tangent plane and keeps the
/// Delaunay triangles that touch the center. Points are inserted by
/// increasing distance from the center. Degenerate slivers are dropped.
pub fn build_local_mesh(points: &[Point], frame: &LocalFrame) -> Result<LocalMesh> {
    if frame.neighbors.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "point {} has {} neighbors, a local mesh needs 3",
            frame.center,
            frame.neighbors.len()
        )));
    }
    let center = points[frame.center];
    let mut vertices = Vec::with_capacity(frame.neighbors.len() + 1);
    vertices.push(frame.center);
    vertices.extend_from_slice(&frame.neighbors);
    let projected: Vec<[f64; 2]> = vertices
        .iter()
        .map(|&v| frame.project(&center, &points[v]))
        .collect();
    let triangles: Vec<[usize; 3]> = delaunay(&projected)
        .into_iter()
        .filter(|t| t.contains(&0) && !is_sliver(points, &t.map(|k| vertices[k])))
        .collect();
    if triangles.is_empty() {
        return Err(Error::InvalidInput(format!(
            "projected neighborhood of point {} is collinear",
            frame.center
        )));
    }
    Ok(LocalMesh {
        center: frame.center,
        vertices,
        triangles,
    })
}

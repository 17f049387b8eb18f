//! Surface representations and the edge-graph queries every other module
//! builds on.
//!
//! A [`TriMesh`] is validated at construction: indices in range, no repeated
//! vertex within a face, no near-zero-area faces and no edge shared by more
//! than two faces. Its vertex adjacency is exposed as a [`SurfaceGraph`],
//! which is also what point clouds produce after local meshing, so ring
//! neighborhoods and geodesic distances work the same way for both inputs.
//!
//! Geodesic distances are shortest paths on the edge graph with Euclidean
//! edge weights (Dijkstra). Unreachable vertices are at `f64::INFINITY`.

mod graph;
pub mod io;
pub mod primitives;
pub mod spatial;

pub use graph::{DijkstraScratch, RingSet, SurfaceGraph};

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// A 3D position.
pub type Point = Vector3<f64>;

/// Marker for a missing opposite vertex (boundary edge).
pub const NO_VERTEX: usize = usize::MAX;

/// Indexed triangle surface.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    /// Unique edges `(i, j)` with `i < j`, sorted lexicographically.
    edges: Vec<[usize; 2]>,
    /// Opposite vertices of every edge; the second slot is [`NO_VERTEX`] on
    /// boundary edges. Stored in increasing vertex order when both exist.
    opposite: Vec<[usize; 2]>,
    graph: SurfaceGraph,
}

impl TriMesh {
    /// Builds and validates a mesh. Vertex order is preserved.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        for (f, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {f} references a vertex outside 0..{n}"
                )));
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::InvalidMesh(format!("face {f} repeats a vertex")));
            }
        }

        let mut half: Vec<([usize; 2], usize)> = Vec::with_capacity(3 * triangles.len());
        for t in &triangles {
            for k in 0..3 {
                let (a, b, o) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                half.push(([a.min(b), a.max(b)], o));
            }
        }
        half.sort_unstable();

        let mut edges = Vec::new();
        let mut opposite = Vec::new();
        let mut i = 0;
        while i < half.len() {
            let e = half[i].0;
            let mut j = i;
            while j < half.len() && half[j].0 == e {
                j += 1;
            }
            match j - i {
                1 => opposite.push([half[i].1, NO_VERTEX]),
                2 => opposite.push([half[i].1, half[i + 1].1]),
                k => {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({}, {}) is shared by {k} faces",
                        e[0], e[1]
                    )))
                }
            }
            edges.push(e);
            i = j;
        }

        if !edges.is_empty() {
            let mean = edges
                .iter()
                .map(|&[a, b]| (vertices[a] - vertices[b]).norm())
                .sum::<f64>()
                / edges.len() as f64;
            let min_area = 1e-12 * mean * mean;
            let faces: Vec<usize> = triangles
                .iter()
                .enumerate()
                .filter(|(_, t)| {
                    triangle_area(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]) <= min_area
                })
                .map(|(f, _)| f)
                .collect();
            if !faces.is_empty() {
                return Err(Error::DegenerateFaces { faces });
            }
        }

        let graph = SurfaceGraph::from_edges(&vertices, &edges);
        Ok(TriMesh {
            vertices,
            triangles,
            edges,
            opposite,
            graph,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Unique undirected edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Opposite vertices per edge, aligned with [`TriMesh::edges`].
    pub fn edge_opposites(&self) -> &[[usize; 2]] {
        &self.opposite
    }

    pub fn boundary_edges(&self) -> Vec<[usize; 2]> {
        self.edges
            .iter()
            .zip(&self.opposite)
            .filter(|(_, o)| o[1] == NO_VERTEX)
            .map(|(e, _)| *e)
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.opposite.iter().all(|o| o[1] != NO_VERTEX)
    }

    pub fn graph(&self) -> &SurfaceGraph {
        &self.graph
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                triangle_area(
                    &self.vertices[t[0]],
                    &self.vertices[t[1]],
                    &self.vertices[t[2]],
                )
            })
            .sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.graph.mean_edge_length()
    }

    /// Breadth-first hop ball around `center`. See [`SurfaceGraph::ring`].
    pub fn vertex_ring(&self, center: usize, depth: usize) -> Result<RingSet> {
        self.graph.ring(center, depth)
    }

    /// Edge-graph shortest-path distances from `source`, sorted by vertex id.
    /// Unreachable vertices, and vertices beyond `cutoff` when given, are
    /// omitted.
    pub fn geodesic_distances(&self, source: usize, cutoff: Option<f64>) -> Vec<(usize, f64)> {
        self.graph.geodesic_distances(source, cutoff)
    }

    pub fn geodesic_diameter(&self, samples: usize) -> f64 {
        self.graph.diameter(samples)
    }

    /// Returns a copy with every vertex mapped through `f`.
    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Result<TriMesh> {
        TriMesh::new(
            self.vertices.iter().map(f).collect(),
            self.triangles.clone(),
        )
    }
}

/// Unordered point set.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Point>,
}

impl PointCloud {
    /// Rejects clouds with two points closer than `1e-12` times the bounding
    /// box diagonal.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty point cloud".into()));
        }
        let (lo, hi) = bounding_box(&points);
        let tol = 1e-12 * (hi - lo).norm().max(f64::MIN_POSITIVE);
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                if points[b].x - points[a].x > tol {
                    break;
                }
                if (points[a] - points[b]).norm() <= tol {
                    return Err(Error::InvalidInput(format!(
                        "points {} and {} coincide",
                        a.min(b),
                        a.max(b)
                    )));
                }
            }
        }
        Ok(PointCloud { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }
}

pub(crate) fn bounding_box(points: &[Point]) -> (Point, Point) {
    let mut lo = Point::repeat(f64::INFINITY);
    let mut hi = Point::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> TriMesh {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
        ];
        TriMesh::new(v, vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]]).unwrap()
    }

    #[test]
    fn tetrahedron_is_closed() {
        let m = tetra();
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.edges().len(), 6);
        assert!(m.boundary_edges().is_empty());
        assert!(m.is_closed());
    }

    #[test]
    fn single_triangle_has_three_boundary_edges() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        let m = TriMesh::new(v, vec![[0, 1, 2]]).unwrap();
        assert_eq!(m.boundary_edges().len(), 3);
    }

    #[test]
    fn rejects_zero_area_face() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(2.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        match TriMesh::new(v, vec![[0, 1, 3], [0, 1, 2]]) {
            Err(Error::DegenerateFaces { faces }) => assert_eq!(faces, vec![1]),
            other => panic!("expected degenerate-face error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_indices_and_repeats() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        assert!(TriMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(TriMesh::new(v, vec![[0, 1, 1]]).is_err());
    }

    #[test]
    fn rejects_nonmanifold_edge() {
        let v = vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
            Point::new(0.0, -1.0, 0.0),
            Point::new(0.0, 0.0, 1.0),
        ];
        let err = TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn cloud_rejects_duplicates() {
        let p = Point::new(0.5, 0.25, 1.0);
        assert!(PointCloud::new(vec![p, Point::zeros(), p]).is_err());
        assert!(PointCloud::new(vec![p, Point::zeros()]).is_ok());
    }
}

use crate::descriptors::{assemble_operators, SparseOperator};
use crate::error::{Error, Result};
use crate::geometry::{Point, SurfaceGraph, TriMesh};

/// Everything the matching loop needs from one input: positions, the edge
/// graph for rings and geodesics, and the two operators. Meshes keep their
/// triangles so spectral post-processing stays available.
#[derive(Debug, Clone)]
pub struct Surface {
    points: Vec<Point>,
    graph: SurfaceGraph,
    stiffness: SparseOperator,
    mass: SparseOperator,
    mesh: Option<TriMesh>,
}

impl Surface {
    pub fn from_mesh(mesh: TriMesh) -> Self {
        let (stiffness, mass) = assemble_operators(&mesh);
        Surface {
            points: mesh.vertices().to_vec(),
            graph: mesh.graph().clone(),
            stiffness,
            mass,
            mesh: Some(mesh),
        }
    }

    /// Assembles a surface from precomputed parts (point-cloud path).
    pub fn from_parts(
        points: Vec<Point>,
        graph: SurfaceGraph,
        stiffness: SparseOperator,
        mass: SparseOperator,
    ) -> Result<Self> {
        let n = points.len();
        if graph.n_vertices() != n || stiffness.n() != n || mass.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} points, graph {}, stiffness {}, mass {}",
                graph.n_vertices(),
                stiffness.n(),
                mass.n()
            )));
        }
        Ok(Surface {
            points,
            graph,
            stiffness,
            mass,
            mesh: None,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn graph(&self) -> &SurfaceGraph {
        &self.graph
    }

    pub fn stiffness(&self) -> &SparseOperator {
        &self.stiffness
    }

    pub fn mass(&self) -> &SparseOperator {
        &self.mass
    }

    pub fn mesh(&self) -> Option<&TriMesh> {
        self.mesh.as_ref()
    }

    pub fn mean_edge_length(&self) -> f64 {
        self.graph.mean_edge_length()
    }
}

//! Cotangent stiffness and consistent mass on small meshes, and the
//! identities they satisfy.

use sparse_qap::descriptors::assemble_operators;
use sparse_qap::geometry::primitives::icosphere;
use sparse_qap::geometry::{Point, TriMesh};

fn main() -> sparse_qap::Result<()> {
    // unit square split along its diagonal
    let square = TriMesh::new(
        vec![
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(1.0, 1.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )?;
    let (s, m) = assemble_operators(&square);
    println!("stiffness of the unit square:\n{}", s.to_dense());
    println!("mass of the unit square:\n{}", m.to_dense());
    println!("mass total {} (area 1)", m.total());

    let sphere = icosphere(3);
    let (s, m) = assemble_operators(&sphere);
    let ones = vec![1.0; sphere.n_vertices()];
    let worst_row = s.mul_vec(&ones).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    println!(
        "icosphere: {} vertices, nnz {}, max |S 1| {worst_row:.1e}, asymmetry {:.1e}, mass total {:.5} (mesh area {:.5})",
        sphere.n_vertices(),
        s.nnz(),
        s.asymmetry(),
        m.total(),
        sphere.area()
    );

    let path = std::env::temp_dir().join("square_stiffness.mtx");
    std::fs::write(&path, assemble_operators(&square).0.to_matrix_market())
        .expect("temp dir is writable");
    println!("wrote {}", path.display());
    Ok(())
}

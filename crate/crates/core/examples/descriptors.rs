//! Per-vertex signatures: the SHOT-like local descriptor (rotation
//! invariant) and geodesic distances to a few far-apart anchors.

use nalgebra::{Rotation3, Unit, Vector3};
use sparse_qap::anchor::farthest_subset;
use sparse_qap::descriptors::{geodesic_signature, shot_like_descriptor, ShotParams};
use sparse_qap::geometry::primitives::bumpy_torus;

fn main() -> sparse_qap::Result<()> {
    let mesh = bumpy_torus(40, 25, 2);
    let params = ShotParams::with_radius(3.0 * mesh.mean_edge_length());
    let a = shot_like_descriptor(mesh.vertices(), &params)?;
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(1.0, 1.0, 0.0)), 2.0);
    let turned: Vec<_> = mesh.vertices().iter().map(|p| rot * p).collect();
    let b = shot_like_descriptor(&turned, &params)?;
    let drift = a
        .data()
        .iter()
        .zip(b.data())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    println!(
        "shot-like: {} values per vertex, largest change under rotation {drift:.1e}",
        a.dim()
    );

    let all: Vec<usize> = (0..mesh.n_vertices()).collect();
    let anchors = farthest_subset(mesh.graph(), &all, 8);
    let sig = geodesic_signature(mesh.graph(), &anchors)?;
    println!("geodesic signature to anchors {anchors:?}");
    println!("vertex 0: {:.3?}", sig.get(0));
    Ok(())
}

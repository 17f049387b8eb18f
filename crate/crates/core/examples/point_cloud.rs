//! Operators for a raw point cloud from per-point local meshes, compared
//! with the mesh operators on a flat lattice, then used for matching.
//!
//!     cargo run --release --example point_cloud -- 3000

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use sparse_qap::anchor::{run_pipeline, PipelineConfig, Surface};
use sparse_qap::descriptors::assemble_operators;
use sparse_qap::eval::{
    geodesic_error, reference_diameter, synth_cloud_pair, ErrorReport, SynthSpec,
};
use sparse_qap::geometry::primitives::{sphere_cloud, triangular_lattice};
use sparse_qap::geometry::spatial::KdTree;
use sparse_qap::geometry::PointCloud;
use sparse_qap::pointcloud::{adaptive_knn, assemble_cloud_operators, AdaptiveKnnParams};

fn main() -> sparse_qap::Result<()> {
    env_logger::init();
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(2000);
    let params = AdaptiveKnnParams::default();

    let lattice = triangular_lattice(12, 10, 0.5);
    let (s, _) = assemble_operators(&lattice);
    let ops = assemble_cloud_operators(&PointCloud::new(lattice.vertices().to_vec())?, &params)?;
    let same = ops.stiffness.entries().eq(s.entries());
    println!("flat lattice: cloud stiffness equals mesh stiffness: {same}");

    let cloud = sphere_cloud(n, 5);
    let tree = KdTree::new(cloud.points());
    let sizes: Vec<usize> = (0..cloud.len())
        .step_by(cloud.len() / 10)
        .map(|i| adaptive_knn(cloud.points(), &tree, i, &params).map(|f| f.neighbors.len() + 1))
        .collect::<Result<_, _>>()?;
    println!("sphere with {n} points, sample neighborhood sizes {sizes:?}");

    let spec = SynthSpec {
        motion: Isometry3::from_parts(
            Translation3::new(0.3, 0.0, -1.0),
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), 0.8),
        ),
        permutation_seed: Some(2),
        ..Default::default()
    };
    let (moved, gt) = synth_cloud_pair(&cloud, &spec)?;
    let src = Surface::from_cloud(&cloud, &params)?;
    let dst = Surface::from_cloud(&moved, &params)?;
    let out = run_pipeline(&src, &dst, &PipelineConfig::default(), None)?;
    let diam = reference_diameter(dst.graph());
    let report = ErrorReport::new(geodesic_error(&out.map, &gt, dst.graph(), diam)?, &[0.02]);
    println!(
        "matched: {:.1}% of points within error 0.02",
        100.0 * report.fraction_within(0.02)
    );
    Ok(())
}

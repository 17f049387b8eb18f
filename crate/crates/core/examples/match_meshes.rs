//! Match a bumpy torus to a rotated, relabeled copy of itself and report
//! how the anchor set grows over the outer iterations.
//!
//!     cargo run --release --example match_meshes -- 60 40

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use sparse_qap::anchor::{run_pipeline, PipelineConfig, Surface};
use sparse_qap::eval::{
    default_thresholds, geodesic_error, reference_diameter, synth_pair, ErrorReport, SynthSpec,
};
use sparse_qap::geometry::primitives::bumpy_torus;

fn main() -> sparse_qap::Result<()> {
    env_logger::init();
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let (nu, nv) = (
        args.first().copied().unwrap_or(40),
        args.get(1).copied().unwrap_or(25),
    );

    let mesh = bumpy_torus(nu, nv, 3);
    let spec = SynthSpec {
        motion: Isometry3::from_parts(
            Translation3::new(2.0, -1.0, 0.5),
            UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 1.1),
        ),
        permutation_seed: Some(7),
        ..Default::default()
    };
    let (moved, gt) = synth_pair(&mesh, &spec)?;
    let (src, dst) = (Surface::from_mesh(mesh), Surface::from_mesh(moved));
    println!("{} vertices on each side", src.n_vertices());

    let out = run_pipeline(&src, &dst, &PipelineConfig::default(), None)?;
    for r in &out.log {
        println!(
            "iter {}  eps {:.1}  anchors {:5}  objective {:.3e}  {:.2}s",
            r.iter, r.epsilon, r.num_anchors, r.objective, r.seconds
        );
    }

    let diam = reference_diameter(dst.graph());
    let report = ErrorReport::new(
        geodesic_error(&out.map, &gt, dst.graph(), diam)?,
        &default_thresholds(),
    );
    let exact = report
        .per_vertex_error
        .iter()
        .flatten()
        .filter(|&&e| e == 0.0)
        .count();
    println!(
        "exact matches {exact}/{}  mean error {:.2e}  within 0.05: {:.1}%",
        report.evaluated,
        report.mean,
        100.0 * report.fraction_within(0.05)
    );
    Ok(())
}

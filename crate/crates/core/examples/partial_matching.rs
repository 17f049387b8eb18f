//! Missing data: a geodesic patch matched into the full shape, and two
//! copies with faces deleted independently on each side.
//!
//!     cargo run --release --example partial_matching

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};
use sparse_qap::anchor::{run_pipeline, PipelineConfig, Surface};
use sparse_qap::eval::{
    default_thresholds, geodesic_error, reference_diameter, synth_pair, ErrorReport, GroundTruth,
    Perturbation, SynthSpec,
};
use sparse_qap::geometry::primitives::bumpy_torus;

fn report(label: &str, src: &Surface, dst: &Surface, gt: &GroundTruth) -> sparse_qap::Result<()> {
    let out = run_pipeline(src, dst, &PipelineConfig::default(), None)?;
    let diam = reference_diameter(dst.graph());
    let r = ErrorReport::new(
        geodesic_error(&out.map, gt, dst.graph(), diam)?,
        &default_thresholds(),
    );
    println!(
        "{label}: {} vs {} vertices, mean error {:.4}, within 0.05: {:.1}%",
        src.n_vertices(),
        dst.n_vertices(),
        r.mean,
        100.0 * r.fraction_within(0.05)
    );
    Ok(())
}

fn main() -> sparse_qap::Result<()> {
    env_logger::init();
    let mesh = bumpy_torus(80, 50, 3);
    let motion = Isometry3::from_parts(
        Translation3::new(1.0, 1.0, 0.0),
        UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.5),
    );

    let crop = SynthSpec {
        motion,
        permutation_seed: Some(1),
        perturbation: Perturbation::CropBall {
            center: 0,
            radius: 0.3,
        },
        seed: 0,
    };
    let (patch, to_patch) = synth_pair(&mesh, &crop)?;
    report(
        "patch into full shape",
        &Surface::from_mesh(patch),
        &Surface::from_mesh(mesh.clone()),
        &to_patch.inverse()?,
    )?;

    let side = |seed, motion, perm| SynthSpec {
        motion,
        permutation_seed: perm,
        perturbation: Perturbation::DeleteFaces { percent: 10.0 },
        seed,
    };
    let (a, gt_a) = synth_pair(&mesh, &side(11, Isometry3::identity(), None))?;
    let (b, gt_b) = synth_pair(&mesh, &side(12, motion, Some(2)))?;
    let gt = gt_a.inverse()?.then(&gt_b)?;
    report(
        "10% faces deleted on each side",
        &Surface::from_mesh(a),
        &Surface::from_mesh(b),
        &gt,
    )?;
    Ok(())
}

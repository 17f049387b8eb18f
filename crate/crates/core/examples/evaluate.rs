//! Geodesic error and local distortion of increasingly corrupted maps, with
//! CDF curves written as CSV and SVG.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_qap::anchor::{Correspondence, Surface};
use sparse_qap::eval::{
    cdf_csv, default_thresholds, distortion_report, geodesic_error, line_plot, reference_diameter,
    synth_pair, ErrorReport, Series, SynthSpec,
};
use sparse_qap::geometry::primitives::bumpy_torus;

fn main() -> sparse_qap::Result<()> {
    let mesh = bumpy_torus(40, 25, 1);
    let (copy, gt) = synth_pair(
        &mesh,
        &SynthSpec {
            permutation_seed: Some(4),
            ..Default::default()
        },
    )?;
    let (src, dst) = (Surface::from_mesh(mesh), Surface::from_mesh(copy));
    let n = src.n_vertices();
    let truth: Vec<usize> = gt
        .map
        .as_slice()
        .iter()
        .map(|t| t.expect("rigid copy is total"))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let diam = reference_diameter(dst.graph());
    let mut series = Vec::new();
    let mut curves = Vec::new();
    let mut targets = truth.clone();
    let mut done = 0;
    for pct in [0usize, 5, 10, 20] {
        // nested corruption: each level adds to the previous one
        let upto = n * pct / 100;
        for &s in &order[done..upto] {
            targets[s] = rng.random_range(0..n);
        }
        done = upto;
        let phi = Correspondence::from_targets(&targets, n)?;
        let r = ErrorReport::new(
            geodesic_error(&phi, &gt, dst.graph(), diam)?,
            &default_thresholds(),
        );
        let d = distortion_report(&phi, &src, &dst, 2)?;
        println!(
            "{pct:2}% corrupted: mean error {:.4}, mean distortion {:.4}",
            r.mean, d.mean
        );
        series.push(Series::new(format!("{pct}%"), r.cdf.clone()));
        curves.push((format!("{pct}pct"), r.cdf));
    }

    let dir = std::env::temp_dir();
    let named: Vec<(&str, &[(f64, f64)])> = curves
        .iter()
        .map(|(l, c)| (l.as_str(), c.as_slice()))
        .collect();
    std::fs::write(dir.join("cdf.csv"), cdf_csv(&named)?).expect("temp dir is writable");
    std::fs::write(
        dir.join("cdf.svg"),
        line_plot(
            &series,
            "Corrupted maps",
            "geodesic error",
            "fraction",
            false,
        ),
    )
    .expect("temp dir is writable");
    println!("wrote cdf.csv and cdf.svg to {}", dir.display());
    Ok(())
}

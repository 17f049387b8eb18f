//! Laplace-Beltrami spectrum of a unit icosphere against the analytic
//! sphere eigenvalues l(l+1), and heat kernel signatures.

use sparse_qap::descriptors::LaplaceSpectrum;
use sparse_qap::geometry::primitives::icosphere;

fn main() -> sparse_qap::Result<()> {
    let mesh = icosphere(3);
    let spec = LaplaceSpectrum::of_mesh(&mesh, 16)?;
    println!("{} vertices", mesh.n_vertices());
    let mut k = 0;
    for l in 0..4usize {
        let shell = &spec.eigenvalues[k..k + 2 * l + 1];
        let exact = (l * (l + 1)) as f64;
        println!("l = {l}: exact {exact:4}, computed {shell:.4?}");
        k += 2 * l + 1;
    }
    for t in [0.01, 0.1, 1.0] {
        let h = spec.hks(&[t])?;
        let (lo, hi) = h
            .data()
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        println!("hks at t = {t}: range [{lo:.4}, {hi:.4}]");
    }
    Ok(())
}

mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use sparse_qap::descriptors::{assemble_operators, LaplaceSpectrum, SparseOperator};
use sparse_qap::geometry::primitives::{bumpy_torus, grid, icosphere};
use sparse_qap::geometry::{PointCloud, TriMesh};
use sparse_qap::pointcloud::{assemble_cloud_operators, AdaptiveKnnParams};

use common::*;

fn relabel(mesh: &TriMesh, perm: &[usize]) -> TriMesh {
    // perm[old] = new
    let mut verts = vec![mesh.vertices()[0]; mesh.n_vertices()];
    for (old, &new) in perm.iter().enumerate() {
        verts[new] = mesh.vertices()[old];
    }
    let faces = mesh
        .triangles()
        .iter()
        .map(|f| f.map(|v| perm[v]))
        .collect();
    TriMesh::new(verts, faces).unwrap()
}

fn rel_diff(a: &SparseOperator, b: &SparseOperator) -> f64 {
    let (da, db) = (a.to_dense(), b.to_dense());
    (&da - &db).amax() / da.amax()
}

fn small_mesh(kind: u8, seed: u64) -> TriMesh {
    match kind % 3 {
        0 => jittered_sphere(1, seed),
        1 => bumpy_torus(9 + (seed % 4) as usize, 6 + (seed % 3) as usize, seed),
        _ => grid(4 + (seed % 3) as usize, 5),
    }
}

#[test]
fn geodesics_agree_with_floyd_warshall() {
    for (k, seed) in [(0u8, 1u64), (1, 2), (2, 3)] {
        let mesh = small_mesh(k, seed);
        let all = floyd_warshall(&mesh);
        for s in 0..mesh.n_vertices() {
            let mut d = vec![f64::INFINITY; mesh.n_vertices()];
            for (v, x) in mesh.geodesic_distances(s, None) {
                d[v] = x;
            }
            for t in 0..mesh.n_vertices() {
                assert!((d[t] - all[s][t]).abs() <= 1e-12 * all[s][t].max(1.0));
            }
        }
    }
}

#[test]
fn stiffness_is_positive_semidefinite_on_closed_meshes() {
    for mesh in [jittered_sphere(2, 4), bumpy_torus(14, 9, 5)] {
        let (s, _) = assemble_operators(&mesh);
        let ev = nalgebra::SymmetricEigen::new(s.to_dense()).eigenvalues;
        let mut sorted: Vec<f64> = ev.iter().copied().collect();
        sorted.sort_by(f64::total_cmp);
        assert!(sorted[0] >= -1e-10, "{}", sorted[0]);
        // connected: the kernel is one-dimensional
        assert!(sorted[1] > 1e-6);
    }
}

#[test]
fn mass_total_is_the_surface_area() {
    for mesh in [jittered_sphere(2, 9), bumpy_torus(20, 12, 1), grid(6, 4)] {
        let (_, m) = assemble_operators(&mesh);
        assert!((m.total() - mesh.area()).abs() < 1e-12 * mesh.area());
    }
}

#[test]
fn matrix_market_roundtrip_is_exact() {
    let (s, m) = assemble_operators(&bumpy_torus(12, 8, 3));
    for op in [s, m] {
        let back = SparseOperator::from_matrix_market(&op.to_matrix_market()).unwrap();
        assert_eq!(back.to_dense(), op.to_dense());
    }
}

#[test]
fn cloud_and_mesh_spectra_agree_on_a_dense_sphere() {
    let mesh = icosphere(4);
    let cloud = PointCloud::new(mesh.vertices().to_vec()).unwrap();
    let ops = assemble_cloud_operators(&cloud, &AdaptiveKnnParams::default()).unwrap();
    let a = LaplaceSpectrum::of_mesh(&mesh, 10).unwrap();
    let b = LaplaceSpectrum::of_operators(&ops.stiffness, &ops.mass, 10).unwrap();
    assert!(a.eigenvalues[0].abs() < 1e-8 && b.eigenvalues[0].abs() < 1e-8);
    for k in 1..10 {
        let rel = (a.eigenvalues[k] - b.eigenvalues[k]).abs() / a.eigenvalues[k];
        assert!(
            rel < 0.1,
            "eigenvalue {k}: mesh {} cloud {}",
            a.eigenvalues[k],
            b.eigenvalues[k]
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_commute_with_rigid_motion(kind in 0u8..3, seed in 0u64..1000) {
        let mesh = small_mesh(kind, seed);
        let motion = random_motion(&mut rng(seed));
        let moved = mesh.map_vertices(|p| motion * p).unwrap();
        let (s1, m1) = assemble_operators(&mesh);
        let (s2, m2) = assemble_operators(&moved);
        prop_assert!(rel_diff(&s1, &s2) < 1e-10);
        prop_assert!(rel_diff(&m1, &m2) < 1e-10);
    }

    #[test]
    fn relabeling_conjugates_operators_exactly(kind in 0u8..3, seed in 0u64..1000) {
        let mesh = small_mesh(kind, seed);
        let mut perm: Vec<usize> = (0..mesh.n_vertices()).collect();
        perm.shuffle(&mut rng(seed));
        let (s1, m1) = assemble_operators(&mesh);
        let (s2, m2) = assemble_operators(&relabel(&mesh, &perm));
        let p = DMatrix::from_fn(perm.len(), perm.len(), |i, j| f64::from(u8::from(perm[j] == i)));
        prop_assert_eq!(s2.to_dense(), s1.permuted(&perm).to_dense());
        prop_assert_eq!(m2.to_dense(), m1.permuted(&perm).to_dense());
        prop_assert!((&p * s1.to_dense() * p.transpose() - s2.to_dense()).amax() == 0.0);
    }

    #[test]
    fn geodesics_are_symmetric_and_metric(kind in 0u8..3, seed in 0u64..1000) {
        let mesh = small_mesh(kind, seed);
        let n = mesh.n_vertices();
        let d: Vec<Vec<f64>> = (0..n)
            .map(|s| {
                let mut row = vec![f64::INFINITY; n];
                for (v, x) in mesh.geodesic_distances(s, None) {
                    row[v] = x;
                }
                row
            })
            .collect();
        let mut r = rng(seed);
        for _ in 0..200 {
            let [a, b, c] = [0; 3].map(|_| rand::Rng::random_range(&mut r, 0..n));
            prop_assert!((d[a][b] - d[b][a]).abs() <= 1e-12 * d[a][b].max(1.0));
            prop_assert!(d[a][c] <= d[a][b] + d[b][c] + 1e-12);
        }
    }

    #[test]
    fn geodesics_are_invariant_under_rigid_motion(kind in 0u8..3, seed in 0u64..1000) {
        let mesh = small_mesh(kind, seed);
        let motion = random_motion(&mut rng(seed + 1));
        let moved = mesh.map_vertices(|p| motion * p).unwrap();
        for s in [0, mesh.n_vertices() / 2] {
            let a = mesh.geodesic_distances(s, None);
            let b = moved.geodesic_distances(s, None);
            let (mut a, mut b) = (a, b);
            a.sort_by_key(|e| e.0);
            b.sort_by_key(|e| e.0);
            for ((va, xa), (vb, xb)) in a.iter().zip(&b) {
                prop_assert_eq!(va, vb);
                prop_assert!((xa - xb).abs() <= 1e-10 * xa.max(1e-300));
            }
        }
    }

    #[test]
    fn rings_are_nested_hop_balls(kind in 0u8..3, seed in 0u64..1000, depth in 1usize..5) {
        let mesh = small_mesh(kind, seed);
        let center = (seed as usize) % mesh.n_vertices();
        let h = hops(&mesh, center);
        let ring = mesh.vertex_ring(center, depth).unwrap();
        let inner = if depth > 1 { Some(mesh.vertex_ring(center, depth - 1).unwrap()) } else { None };
        prop_assert!(ring.contains(center));
        for v in 0..mesh.n_vertices() {
            prop_assert_eq!(ring.contains(v), h[v] <= depth);
            if let Some(inner) = &inner {
                prop_assert!(!inner.contains(v) || ring.contains(v));
            }
        }
        // membership does not depend on the vertex order
        let mut perm: Vec<usize> = (0..mesh.n_vertices()).collect();
        perm.shuffle(&mut rng(seed));
        let other = relabel(&mesh, &perm);
        let ring2 = other.vertex_ring(perm[center], depth).unwrap();
        for v in 0..mesh.n_vertices() {
            prop_assert_eq!(ring.contains(v), ring2.contains(perm[v]));
        }
    }

    #[test]
    fn cloud_operators_are_valid(seed in 0u64..1000) {
        let cloud = sparse_qap::geometry::primitives::sphere_cloud(600, seed);
        let ops = assemble_cloud_operators(&cloud, &AdaptiveKnnParams::default()).unwrap();
        prop_assert_eq!(ops.stiffness.asymmetry(), 0.0);
        prop_assert_eq!(ops.mass.asymmetry(), 0.0);
        let ones = vec![1.0; cloud.len()];
        let scale = ops.stiffness.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!(ops.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-10 * scale));
        prop_assert!(ops.mass.entries().all(|(_, _, v)| v >= 0.0));
    }
}

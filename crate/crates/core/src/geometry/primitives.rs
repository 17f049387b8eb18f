//! Procedural test surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Point, PointCloud, TriMesh};

/// Unit icosphere after `level` loop subdivisions (12, 42, 162, 642, 2562,
/// ... vertices).
pub fn icosphere(level: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces).expect("icosphere is a valid mesh")
}

/// Closed torus on a `nu x nv` grid (`nu * nv` vertices) with seeded smooth
/// bumps along the normal, so that no two regions look alike.
pub fn bumpy_torus(nu: usize, nv: usize, seed: u64) -> TriMesh {
    assert!(nu >= 3 && nv >= 3);
    let (major, minor) = (1.0, 0.42);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<(f64, f64, f64, f64)> = (0..14)
        .map(|_| {
            (
                rng.random::<f64>() * 2.0 * PI,
                rng.random::<f64>() * 2.0 * PI,
                (rng.random::<f64>() - 0.5) * 0.5 * minor,
                0.35 + 0.4 * rng.random::<f64>(),
            )
        })
        .collect();
    let periodic = |a: f64, b: f64| {
        let d = (a - b).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };

    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let h: f64 = bumps
                .iter()
                .map(|&(bu, bv, amp, w)| {
                    let du = periodic(u, bu) * major;
                    let dv = periodic(v, bv) * minor * 2.0;
                    amp * (-(du * du + dv * dv) / (2.0 * w * w)).exp()
                })
                .sum();
            let r = minor + h;
            verts.push(Point::new(
                (major + r * v.cos()) * u.cos(),
                (major + r * v.cos()) * u.sin(),
                r * v.sin(),
            ));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(verts, faces).expect("torus is a valid mesh")
}

/// Flat `nx x ny` vertex grid on `[0, nx-1] x [0, ny-1]` (unit spacing),
/// each square split along the same diagonal. Interior vertices have
/// valence 6. Vertex `(i, j)` has id `j * nx + i`.
pub fn grid(nx: usize, ny: usize) -> TriMesh {
    let verts: Vec<Point> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| Point::new(i as f64, j as f64, 0.0)))
        .collect();
    let id = |i: usize, j: usize| j * nx + i;
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(verts, faces).expect("grid is a valid mesh")
}

/// Parallelogram patch of the equilateral triangular lattice in the plane
/// `z = 0`, spacing `h`. This triangulation is the unique Delaunay
/// triangulation of its vertices.
pub fn triangular_lattice(nx: usize, ny: usize, h: f64) -> TriMesh {
    let s3 = 3f64.sqrt() / 2.0;
    let verts: Vec<Point> = (0..ny)
        .flat_map(|j| {
            (0..nx)
                .map(move |i| Point::new(h * (i as f64 + 0.5 * j as f64), h * s3 * j as f64, 0.0))
        })
        .collect();
    let id = |i: usize, j: usize| j * nx + i;
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            faces.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
            faces.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(verts, faces).expect("lattice is a valid mesh")
}

/// `n` points drawn uniformly on the unit sphere.
pub fn sphere_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
            let phi = 2.0 * PI * rng.random::<f64>();
            let r = (1.0 - z * z).max(0.0).sqrt();
            Point::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect();
    PointCloud::new(points).expect("random sphere samples are distinct")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts() {
        let m = icosphere(2);
        assert_eq!(m.n_vertices(), 162);
        assert!(m.is_closed());
        assert_eq!(icosphere(4).n_vertices(), 2562);
    }

    #[test]
    fn torus_is_closed_genus_one() {
        let m = bumpy_torus(20, 12, 1);
        assert_eq!(m.n_vertices(), 240);
        assert!(m.is_closed());
        // Euler characteristic 0
        assert_eq!(m.n_vertices() + m.triangles().len(), m.edges().len());
    }

    #[test]
    fn lattice_is_flat_and_regular() {
        let m = triangular_lattice(5, 4, 1.0);
        for [a, b] in m.edges() {
            assert!(((m.vertices()[*a] - m.vertices()[*b]).norm() - 1.0).abs() < 1e-12);
        }
    }
}

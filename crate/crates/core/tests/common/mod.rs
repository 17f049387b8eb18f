//! Shared fixtures and brute-force oracles for the integration tests.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Isometry3, Translation3, UnitQuaternion, Vector3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_qap::descriptors::{OperatorKind, SparseOperator};
use sparse_qap::eval::{synth_pair, GroundTruth, SynthSpec};
use sparse_qap::geometry::{Point, TriMesh};
use sparse_qap::qap::{Projector, QapProblem, SparsityPattern, TransportPlan};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_motion(rng: &mut impl Rng) -> Isometry3<f64> {
    let axis = Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.1..1.0),
    );
    Isometry3::from_parts(
        Translation3::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        ),
        UnitQuaternion::from_axis_angle(
            &nalgebra::Unit::new_normalize(axis),
            rng.random_range(0.1..3.0),
        ),
    )
}

/// Rigidly moved, relabeled copy of `mesh` with its ground truth.
pub fn rigid_pair(mesh: &TriMesh, seed: u64) -> (TriMesh, GroundTruth) {
    let spec = SynthSpec {
        motion: random_motion(&mut rng(seed)),
        permutation_seed: Some(seed),
        ..Default::default()
    };
    synth_pair(mesh, &spec).expect("rigid copy")
}

/// Closed mesh with jittered vertex positions, so no two triangles share a
/// shape by accident.
pub fn jittered_sphere(level: usize, seed: u64) -> TriMesh {
    let base = sparse_qap::geometry::primitives::icosphere(level);
    let mut r = rng(seed);
    let verts: Vec<Point> = base
        .vertices()
        .iter()
        .map(|p| p * r.random_range(0.9..1.1))
        .collect();
    TriMesh::new(verts, base.triangles().to_vec()).expect("jitter keeps faces valid")
}

/// Latitude-longitude sphere: two poles and `rings x segments` vertices.
pub fn uv_sphere(rings: usize, segments: usize) -> TriMesh {
    let mut v = vec![Point::new(0.0, 0.0, 1.0)];
    for i in 1..=rings {
        let th = std::f64::consts::PI * i as f64 / (rings + 1) as f64;
        for j in 0..segments {
            let ph = std::f64::consts::TAU * j as f64 / segments as f64;
            v.push(Point::new(
                th.sin() * ph.cos(),
                th.sin() * ph.sin(),
                th.cos(),
            ));
        }
    }
    v.push(Point::new(0.0, 0.0, -1.0));
    let south = v.len() - 1;
    let id = |i: usize, j: usize| 1 + i * segments + j % segments;
    let mut f = Vec::new();
    for j in 0..segments {
        f.push([0, id(0, j), id(0, j + 1)]);
        f.push([south, id(rings - 1, j + 1), id(rings - 1, j)]);
    }
    for i in 0..rings - 1 {
        for j in 0..segments {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(v, f).expect("uv sphere is valid")
}

/// All-pairs edge-graph distances by Floyd-Warshall.
pub fn floyd_warshall(mesh: &TriMesh) -> Vec<Vec<f64>> {
    let n = mesh.n_vertices();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &[a, b] in mesh.edges() {
        let w = (mesh.vertices()[a] - mesh.vertices()[b]).norm();
        d[a][b] = w;
        d[b][a] = w;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Hop counts from `center` by breadth-first search.
pub fn hops(mesh: &TriMesh, center: usize) -> Vec<usize> {
    let n = mesh.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for &[a, b] in mesh.edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut h = vec![usize::MAX; n];
    h[center] = 0;
    let mut q = VecDeque::from([center]);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if h[w] == usize::MAX {
                h[w] = h[v] + 1;
                q.push_back(w);
            }
        }
    }
    h
}

pub fn random_symmetric(
    n: usize,
    rng: &mut impl Rng,
    kind: OperatorKind,
    density: f64,
) -> SparseOperator {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if i == j || rng.random::<f64>() < density {
                let v = rng.random_range(-1.0..1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    SparseOperator::from_dense(&m, kind)
}

/// Random pattern with some anchors; every column keeps at least one entry.
pub fn random_pattern(
    n1: usize,
    n2: usize,
    rng: &mut impl Rng,
    density: f64,
    n_anchors: usize,
) -> SparsityPattern {
    let mut sources: Vec<usize> = (0..n1).collect();
    sources.shuffle(rng);
    let mut targets: Vec<usize> = (0..n2).collect();
    targets.shuffle(rng);
    let anchors: Vec<(usize, usize)> = sources
        .iter()
        .zip(&targets)
        .take(n_anchors)
        .map(|(&s, &t)| (s, t))
        .collect();
    let rows: Vec<(usize, Vec<usize>)> = (0..n1)
        .map(|s| {
            let mut r: Vec<usize> = (0..n2).filter(|_| rng.random::<f64>() < density).collect();
            r.push(s % n2);
            (s, r)
        })
        .collect();
    SparsityPattern::new(n1, n2, &rows, &anchors).expect("every row has an entry")
}

/// Equality-constrained least squares `min |x - y|^2` over the free entries
/// of the pattern subject to unit row sums and the given column sums, solved
/// through the KKT normal equations `A A^T lambda = A y - b`.
pub fn kkt_projection(y: &TransportPlan, col_targets: &[Option<f64>]) -> DMatrix<f64> {
    let p = y.pattern();
    let (n1, n2) = (p.n1(), p.n2());
    let entries: Vec<(usize, usize)> = p.entries().collect();
    let free: Vec<usize> = (0..entries.len())
        .filter(|&k| !p.is_fixed_row(entries[k].0))
        .collect();
    let mut fixed_col = vec![0.0; n2];
    for &(s, t) in &entries {
        if p.is_fixed_row(s) {
            fixed_col[t] += 1.0;
        }
    }
    let mut a_rows: Vec<Vec<f64>> = Vec::new();
    let mut b = Vec::new();
    for s in 0..n1 {
        let row: Vec<f64> = free
            .iter()
            .map(|&k| f64::from(u8::from(entries[k].0 == s)))
            .collect();
        if row.iter().any(|&v| v != 0.0) {
            a_rows.push(row);
            b.push(1.0);
        }
    }
    for t in 0..n2 {
        let row: Vec<f64> = free
            .iter()
            .map(|&k| f64::from(u8::from(entries[k].1 == t)))
            .collect();
        if let Some(c) = col_targets[t] {
            if row.iter().any(|&v| v != 0.0) {
                a_rows.push(row);
                b.push(c - fixed_col[t]);
            }
        }
    }
    let a = DMatrix::from_fn(a_rows.len(), free.len(), |i, j| a_rows[i][j]);
    let yv = DVector::from_iterator(free.len(), free.iter().map(|&k| y.values()[k]));
    let rhs = &a * &yv - DVector::from_vec(b);
    // A A^T is singular (one redundant marginal per connected block), so
    // invert it on its range through an eigendecomposition
    let eig = nalgebra::SymmetricEigen::new(&a * a.transpose());
    let top = eig.eigenvalues.amax();
    let mut lambda = DVector::zeros(rhs.len());
    for (k, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > 1e-10 * top {
            let v = eig.eigenvectors.column(k);
            lambda += v * (v.dot(&rhs) / ev);
        }
    }
    let x = yv - a.transpose() * lambda;
    let mut d = DMatrix::zeros(n1, n2);
    for &(s, t) in &entries {
        if p.is_fixed_row(s) {
            d[(s, t)] = 1.0;
        }
    }
    for (i, &k) in free.iter().enumerate() {
        let (s, t) = entries[k];
        d[(s, t)] = x[i];
    }
    d
}

pub fn dense_objective(p: &QapProblem, d: &DMatrix<f64>) -> f64 {
    let (s1, s2, m1, m2) = (
        p.s1.to_dense(),
        p.s2.to_dense(),
        p.m1.to_dense(),
        p.m2.to_dense(),
    );
    0.5 * (&s1 * d - d * &s2).norm_squared() + 0.5 * p.mu * (&m1 * d - d * &m2).norm_squared()
}

pub fn random_plan(pattern: &Arc<SparsityPattern>, rng: &mut impl Rng) -> TransportPlan {
    let vals = (0..pattern.nnz())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    TransportPlan::new(pattern.clone(), vals).expect("sizes agree")
}

pub fn projector(pattern: &SparsityPattern) -> Projector {
    Projector::new(pattern)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Fresh scratch directory under the system temp dir.
pub fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

mod common;

use rand::seq::SliceRandom;
use rand::Rng;
use sparse_qap::anchor::{
    build_pattern, local_distortion, postprocess, run_pipeline, select_anchors, AnchorSet, Correspondence, InitMode,
    PipelineConfig, PostprocessParams, Surface,
};
use sparse_qap::descriptors::assemble_mass;
use sparse_qap::eval::{distortion_report, distortion_thresholds, geodesic_error, reference_diameter};
use sparse_qap::geometry::primitives::{bumpy_torus, grid};

use common::*;

/// Ground-truth targets of a rigid pair as a plain vector.
fn truth(gt: &sparse_qap::eval::GroundTruth) -> Vec<usize> {
    gt.map.as_slice().iter().map(|t| t.unwrap()).collect()
}

#[test]
fn grid_distortion_matches_a_direct_evaluation() {
    let mesh = grid(5, 5);
    let n = 25;
    // hand-built map: swap two interior vertices, send a corner to the
    // center and shift the top row by one
    let mut targets: Vec<usize> = (0..n).collect();
    targets.swap(6, 18);
    targets[0] = 12;
    for i in 20..24 {
        targets[i] = i + 1;
    }
    let phi = Correspondence::from_targets(&targets, n).unwrap();
    let mass = assemble_mass(&mesh).diagonal();
    let d = floyd_warshall(&mesh);
    for ring in [1, 2, 3] {
        let got = local_distortion(&phi, mesh.graph(), mesh.graph(), &mass, ring).unwrap();
        for i in 0..n {
            let h = hops(&mesh, i);
            let ball: Vec<usize> = (0..n).filter(|&j| j != i && h[j] <= ring).collect();
            let gamma = ball.iter().map(|&j| d[i][j]).fold(0.0f64, f64::max);
            let (mut num, mut den) = (0.0, 0.0);
            for &j in &ball {
                num += mass[j] * (d[i][j] - d[targets[i]][targets[j]]).abs() / gamma;
                den += mass[j];
            }
            let want = num / den;
            assert!((got[i] - want).abs() <= 1e-12, "ring {ring} vertex {i}: {} vs {want}", got[i]);
        }
    }
    // a vertex whose ball the map leaves alone scores zero
    let got = local_distortion(&phi, mesh.graph(), mesh.graph(), &mass, 1).unwrap();
    assert_eq!(got[14], 0.0);
    assert!(got[6] > 0.0 && got[18] > 0.0);
}

#[test]
fn anchor_selection_limits() {
    let mesh = bumpy_torus(20, 12, 2);
    let surf = Surface::from_mesh(mesh);
    let n = surf.n_vertices();
    let mut targets: Vec<usize> = (0..n).collect();
    targets.swap(0, n / 2);
    let phi = Correspondence::from_targets(&targets, n).unwrap();
    let w = surf.mass().diagonal();
    let dist = local_distortion(&phi, surf.graph(), surf.graph(), &w, 2).unwrap();
    assert_eq!(select_anchors(&dist, &phi, f64::INFINITY).unwrap().len(), n);
    let exact = select_anchors(&dist, &phi, 0.0).unwrap();
    assert!(exact.is_empty());
    let tiny = select_anchors(&dist, &phi, 1e-300).unwrap();
    assert_eq!(tiny.len(), dist.iter().filter(|&&d| d == 0.0).count());
    assert!(!tiny.pairs.iter().any(|&(s, _)| s == 0 || s == n / 2));
}

#[test]
fn corrupted_sources_are_not_anchors() {
    let mesh = bumpy_torus(40, 25, 4);
    let (moved, gt) = rigid_pair(&mesh, 3);
    let (src, dst) = (Surface::from_mesh(mesh), Surface::from_mesh(moved));
    let n = src.n_vertices();
    let mut targets = truth(&gt);
    let mut order: Vec<usize> = (0..n).collect();
    let mut r = rng(10);
    order.shuffle(&mut r);
    let corrupted = &order[..n / 10];
    for &s in corrupted {
        let mut t = r.random_range(0..n);
        while t == targets[s] {
            t = r.random_range(0..n);
        }
        targets[s] = t;
    }
    let phi = Correspondence::from_targets(&targets, n).unwrap();
    let dist = local_distortion(&phi, src.graph(), dst.graph(), &src.mass().diagonal(), 2).unwrap();
    let anchors = select_anchors(&dist, &phi, 1.0).unwrap();
    let chosen: std::collections::HashSet<usize> = anchors.sources().collect();
    let mut high = 0;
    for &s in corrupted {
        if dist[s] > 1.0 {
            high += 1;
            assert!(!chosen.contains(&s));
        }
    }
    // almost every corrupted source is far enough off to be caught
    assert!(high as f64 >= 0.9 * corrupted.len() as f64, "{high} of {}", corrupted.len());
    for &(s, t) in &anchors.pairs {
        assert!(dist[s] < 1.0);
        assert_eq!(phi.get(s), Some(t));
    }
}

#[test]
fn nested_corruption_raises_distortion() {
    let mesh = bumpy_torus(40, 25, 6);
    let (moved, gt) = rigid_pair(&mesh, 8);
    let (src, dst) = (Surface::from_mesh(mesh), Surface::from_mesh(moved));
    let n = src.n_vertices();
    let mut targets = truth(&gt);
    let mut r = rng(1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let diam = reference_diameter(dst.graph());
    let thresholds = distortion_thresholds();
    let mut prev: Option<(f64, Vec<f64>, Vec<Option<f64>>)> = None;
    let mut done = 0;
    for pct in [0, 5, 10, 20] {
        let upto = n * pct / 100;
        for &s in &order[done..upto] {
            targets[s] = r.random_range(0..n);
        }
        done = upto;
        let phi = Correspondence::from_targets(&targets, n).unwrap();
        let rep = distortion_report(&phi, &src, &dst, 2).unwrap();
        let err = geodesic_error(&phi, &gt, dst.graph(), diam).unwrap();
        if pct == 0 {
            assert!(rep.values.iter().all(|&v| v.abs() <= 1e-10));
        }
        let cdf: Vec<f64> = rep.cdf.iter().map(|c| c.1).collect();
        assert_eq!(cdf.len(), thresholds.len());
        if let Some((mean, prev_cdf, prev_err)) = &prev {
            assert!(rep.mean > *mean, "{pct}%: {} <= {mean}", rep.mean);
            // errors grow pointwise, and the distortion CDF drops everywhere
            for (a, b) in prev_err.iter().zip(&err) {
                assert!(b.unwrap() >= a.unwrap());
            }
            for (a, b) in prev_cdf.iter().zip(&cdf) {
                assert!(b <= a);
            }
        }
        prev = Some((rep.mean, cdf, err));
    }
}

#[test]
fn pattern_rows_are_bounded_by_local_constants() {
    let mesh = bumpy_torus(40, 25, 9);
    let (moved, gt) = rigid_pair(&mesh, 2);
    let (src, dst) = (Surface::from_mesh(mesh), Surface::from_mesh(moved));
    let n = src.n_vertices();
    let targets = truth(&gt);
    let ring = 4;
    for step in [1usize, 3, 7] {
        let pairs: Vec<(usize, usize)> = (0..n).step_by(step).map(|s| (s, targets[s])).collect();
        let anchors = AnchorSet {
            distortion: vec![0.0; pairs.len()],
            pairs,
            epsilon: 1.0,
        };
        let pattern = build_pattern(&anchors, src.graph(), dst.graph(), ring).unwrap();
        let max_target_ring = (0..n).map(|t| dst.graph().ring(t, ring).unwrap().members.len()).max().unwrap();
        let mut multiplicity = vec![0usize; n];
        for &(x, _) in &anchors.pairs {
            for s in src.graph().ring(x, ring).unwrap().members {
                multiplicity[s] += 1;
            }
        }
        let bound = max_target_ring * multiplicity.iter().max().unwrap();
        assert!(pattern.max_row_len() <= bound);
        // anchored rows hold only their partner
        for &(s, t) in &anchors.pairs {
            assert_eq!(pattern.row(s), &[t]);
        }
    }
}

#[test]
fn postprocess_keeps_anchors_and_completes_the_map() {
    let mesh = bumpy_torus(30, 20, 1);
    let surf = Surface::from_mesh(mesh);
    let n = surf.n_vertices();
    let pairs: Vec<(usize, usize)> = (0..n).step_by(5).map(|s| (s, s)).collect();
    let anchors = AnchorSet {
        distortion: vec![0.0; pairs.len()],
        pairs,
        epsilon: 1.0,
    };
    let map = postprocess(&anchors, &surf, &surf, &PostprocessParams::default()).unwrap();
    assert!(map.is_total());
    for s in 0..n {
        assert_eq!(map.get(s), Some(s));
    }
}

fn pipeline_errors(src: &Surface, dst: &Surface, gt: &sparse_qap::eval::GroundTruth, cfg: &PipelineConfig) -> Vec<f64> {
    let out = run_pipeline(src, dst, cfg, None).unwrap();
    assert!(out.map.is_total());
    for &(s, t) in &out.anchors.pairs {
        assert_eq!(out.map.get(s), Some(t));
    }
    let diam = reference_diameter(dst.graph());
    geodesic_error(&out.map, gt, dst.graph(), diam).unwrap().into_iter().map(|e| e.unwrap()).collect()
}

#[test]
fn pipeline_is_deterministic_and_total() {
    let mesh = bumpy_torus(30, 20, 2);
    let (moved, gt) = rigid_pair(&mesh, 4);
    let (src, dst) = (Surface::from_mesh(mesh), Surface::from_mesh(moved));
    let cfg = PipelineConfig {
        init: InitMode::Random,
        seed: 7,
        ..Default::default()
    };
    let a = run_pipeline(&src, &dst, &cfg, None).unwrap();
    let b = run_pipeline(&src, &dst, &cfg, None).unwrap();
    assert_eq!(a.map, b.map);
    assert_eq!(a.anchors, b.anchors);
    assert_eq!(a.log.iter().map(|r| r.objective.to_bits()).collect::<Vec<_>>(), b.log.iter().map(|r| r.objective.to_bits()).collect::<Vec<_>>());
    assert!(a.map.is_total());
    let _ = gt;
}

#[test]
fn final_error_ignores_extra_rigid_motion() {
    let mesh = bumpy_torus(30, 20, 5);
    let (moved, gt) = rigid_pair(&mesh, 6);
    let cfg = PipelineConfig::default();
    let base = pipeline_errors(&Surface::from_mesh(mesh.clone()), &Surface::from_mesh(moved.clone()), &gt, &cfg);
    let mut r = rng(99);
    for which in 0..2 {
        let motion = random_motion(&mut r);
        let (a, b) = if which == 0 {
            (mesh.map_vertices(|p| motion * p).unwrap(), moved.clone())
        } else {
            (mesh.clone(), moved.map_vertices(|p| motion * p).unwrap())
        };
        let errs = pipeline_errors(&Surface::from_mesh(a), &Surface::from_mesh(b), &gt, &cfg);
        for (x, y) in base.iter().zip(&errs) {
            assert!((x - y).abs() <= 1e-10, "{x} vs {y}");
        }
    }
}

#[test]
fn identity_start_on_identical_meshes_is_fixed() {
    let surf = Surface::from_mesh(bumpy_torus(24, 16, 3));
    let n = surf.n_vertices();
    let cfg = PipelineConfig {
        init: InitMode::Provided,
        ..Default::default()
    };
    let out = run_pipeline(&surf, &surf, &cfg, Some(&Correspondence::identity(n))).unwrap();
    assert_eq!(out.map, Correspondence::identity(n));
    assert_eq!(out.log[0].num_anchors, n);
}

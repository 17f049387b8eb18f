mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use sparse_qap::anchor::Correspondence;
use sparse_qap::descriptors::OperatorKind;
use sparse_qap::qap::{
    extract_map, solve, Projector, QapProblem, SolverParams, SparsityPattern, TransportPlan,
};

use common::*;

/// Every permutation of `0..n` by Heap's algorithm.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut out = vec![a.clone()];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

#[test]
fn heap_enumerates_every_permutation() {
    let mut all = permutations(5);
    assert_eq!(all.len(), 120);
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 120);
}

#[test]
fn projection_of_two_identity_on_full_two_by_two() {
    let pattern = Arc::new(SparsityPattern::full(2, 2));
    let y = TransportPlan::from_fn(pattern.clone(), |s, t| if s == t { 2.0 } else { 0.0 });
    let d = Projector::new(&pattern).project(&y).unwrap().to_dense();
    let want = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, 1.5]);
    assert!(max_abs_diff(&d, &want) < 1e-12);
}

#[test]
fn rectangular_full_pattern_columns_get_ratio() {
    let mut r = rng(5);
    for (n1, n2) in [(4, 7), (9, 12), (3, 10)] {
        let pattern = Arc::new(SparsityPattern::full(n1, n2));
        let d = Projector::new(&pattern)
            .project(&random_plan(&pattern, &mut r))
            .unwrap();
        for s in d.row_sums() {
            assert!((s - 1.0).abs() < 1e-9);
        }
        for c in d.col_sums() {
            assert!((c - n1 as f64 / n2 as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn single_free_entry_gradient_is_the_directional_derivative() {
    let mut r = rng(17);
    let n = 5;
    let (s1, s2) = (
        random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.5),
        random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.5),
    );
    let (m1, m2) = (
        random_symmetric(n, &mut r, OperatorKind::Mass, 0.5),
        random_symmetric(n, &mut r, OperatorKind::Mass, 0.5),
    );
    let prob = QapProblem::new(&s1, &s2, &m1, &m2, 0.5).unwrap();
    // rows 0..3 anchored, row 4 with the single free entry (4, 2)
    let anchors = [(0, 0), (1, 1), (2, 3), (3, 4)];
    let pattern = Arc::new(SparsityPattern::new(n, n, &[(4, vec![2])], &anchors).unwrap());
    let x = 0.3;
    let plan =
        |v: f64| TransportPlan::from_fn(pattern.clone(), |s, _| if s == 4 { v } else { 1.0 });
    let g = prob.gradient(&plan(x)).unwrap();
    let free = pattern.find(4, 2).unwrap();
    // the objective is quadratic in x: a central difference is exact up to rounding
    let h = 1e-3;
    let fd =
        (prob.objective(&plan(x + h)).unwrap() - prob.objective(&plan(x - h)).unwrap()) / (2.0 * h);
    assert!(
        (g.values()[free] - fd).abs() <= 1e-9 * fd.abs().max(1.0),
        "{} vs {fd}",
        g.values()[free]
    );
}

#[test]
fn zero_objective_start_returns_immediately() {
    let mut r = rng(2);
    let n = 6;
    let s1 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.4);
    let m1 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.4);
    let perm = [2, 0, 1, 5, 3, 4];
    let (s2, m2) = (s1.permuted(&perm), m1.permuted(&perm));
    let prob = QapProblem::new(&s1, &s2, &m1, &m2, 1.0).unwrap();
    let pattern = Arc::new(SparsityPattern::full(n, n));
    let d0 = TransportPlan::one_hot(
        pattern.clone(),
        &Correspondence::from_targets(&perm, n).unwrap(),
    );
    let out = solve(
        &prob,
        &Projector::new(&pattern),
        d0.clone(),
        &SolverParams::default(),
    )
    .unwrap();
    assert_eq!(out.objective, 0.0);
    assert_eq!(out.plan.values(), d0.values());
    assert!(out.log.len() <= 1);
}

#[test]
fn conjugated_instance_converges_from_uniform() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let n = 8;
        let s1 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.5);
        let m1 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.5);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let (s2, m2) = (s1.permuted(&perm), m1.permuted(&perm));
        let prob = QapProblem::new(&s1, &s2, &m1, &m2, 1.0).unwrap();
        let pattern = Arc::new(SparsityPattern::full(n, n));
        let d0 = TransportPlan::from_fn(pattern.clone(), |_, _| 1.0 / n as f64);
        let f0 = prob.objective(&d0).unwrap();
        let params = SolverParams {
            max_iters: 200,
            tol: 0.0,
            ..Default::default()
        };
        let out = solve(&prob, &Projector::new(&pattern), d0, &params).unwrap();
        assert!(
            out.objective < 1e-6 * f0,
            "seed {seed}: {} vs {f0}",
            out.objective
        );
        // the returned objective is the lowest one logged
        let lowest = out
            .log
            .iter()
            .map(|r| r.objective)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(out.objective, lowest);
    }
}

#[test]
fn relaxation_lower_bounds_every_permutation() {
    let mut r = rng(31);
    for n in [5, 6, 7] {
        let s1 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.5);
        let s2 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.5);
        let m1 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.5);
        let m2 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.5);
        let prob = QapProblem::new(&s1, &s2, &m1, &m2, 1.0).unwrap();
        let pattern = Arc::new(SparsityPattern::full(n, n));
        let d0 = TransportPlan::from_fn(pattern.clone(), |_, _| 1.0 / n as f64);
        let params = SolverParams {
            step0: 1.0,
            max_iters: 3000,
            tol: 0.0,
        };
        let relaxed = solve(&prob, &Projector::new(&pattern), d0, &params).unwrap();
        let best_perm = permutations(n)
            .into_iter()
            .map(|p| {
                let d = TransportPlan::one_hot(
                    pattern.clone(),
                    &Correspondence::from_targets(&p, n).unwrap(),
                );
                prob.objective(&d).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        let extracted = extract_map(&relaxed.plan);
        if extracted.is_total() {
            let d = TransportPlan::one_hot(pattern.clone(), &extracted);
            assert!(prob.objective(&d).unwrap() >= relaxed.objective);
        }
        assert!(
            best_perm >= relaxed.objective * (1.0 - 1e-9),
            "n {n}: {best_perm} < {}",
            relaxed.objective
        );
    }
}

#[test]
fn anchored_rows_survive_solve_and_extraction() {
    let mut r = rng(4);
    for _ in 0..10 {
        let n = 9;
        let s1 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.4);
        let s2 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.4);
        let m1 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.4);
        let m2 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.4);
        let prob = QapProblem::new(&s1, &s2, &m1, &m2, 1.0).unwrap();
        let pattern = Arc::new(random_pattern(n, n, &mut r, 0.6, 3));
        let projector = Projector::new(&pattern);
        let d0 = projector.project(&random_plan(&pattern, &mut r)).unwrap();
        let params = SolverParams {
            step0: 0.5,
            ..Default::default()
        };
        let out = solve(&prob, &projector, d0, &params).unwrap();
        let map = extract_map(&out.plan);
        for s in 0..n {
            if let Some(t) = pattern.anchor(s) {
                assert_eq!(map.get(s), Some(t));
            }
        }
        assert!(projector.marginal_residual(&out.plan) < 1e-9);
    }
}

fn instance(seed: u64, n: usize, sparse: bool) -> (Arc<SparsityPattern>, TransportPlan) {
    let mut r = rng(seed);
    let pattern = Arc::new(if sparse {
        let anchors = r.random_range(0..3);
        let density = r.random_range(0.3..0.9);
        random_pattern(n, n, &mut r, density, anchors)
    } else {
        SparsityPattern::full(n, n)
    });
    let y = random_plan(&pattern, &mut r);
    (pattern, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_matches_the_kkt_oracle(seed in any::<u64>(), n1 in 2usize..=12, n2 in 2usize..=12, sparse in any::<bool>()) {
        let mut r = rng(seed);
        let pattern = Arc::new(if sparse {
            let a = r.random_range(0..n1.min(n2).min(3));
            let density = r.random_range(0.2..0.9);
            random_pattern(n1, n2, &mut r, density, a)
        } else {
            SparsityPattern::full(n1, n2)
        });
        let y = random_plan(&pattern, &mut r);
        let projector = Projector::new(&pattern);
        let d = projector.project(&y).unwrap();
        let want = kkt_projection(&y, projector.column_targets());
        prop_assert!(max_abs_diff(&d.to_dense(), &want) < 1e-8, "{}", max_abs_diff(&d.to_dense(), &want));
        prop_assert!(projector.marginal_residual(&d) < 1e-9);
        let again = projector.project(&d).unwrap();
        prop_assert!(max_abs_diff(&again.to_dense(), &d.to_dense()) < 1e-10);
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), sparse in any::<bool>()) {
        let n = 8;
        let (pattern, d) = instance(seed, n, sparse);
        let mut r = rng(seed ^ 0x5eed);
        let s1 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.5);
        let s2 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.5);
        let m1 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.5);
        let m2 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.5);
        let prob = QapProblem::new(&s1, &s2, &m1, &m2, r.random_range(0.1..10.0)).unwrap();
        let g = prob.gradient(&d).unwrap();
        let scale = g.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let h = 1e-5;
        for k in 0..pattern.nnz() {
            let mut plus = d.clone();
            plus.values_mut()[k] += h;
            let mut minus = d.clone();
            minus.values_mut()[k] -= h;
            let fd = (prob.objective(&plus).unwrap() - prob.objective(&minus).unwrap()) / (2.0 * h);
            let rel = (g.values()[k] - fd).abs() / g.values()[k].abs().max(1e-3 * scale);
            prop_assert!(rel < 1e-5, "entry {k}: {} vs {fd}", g.values()[k]);
        }
    }

    #[test]
    fn objective_and_gradient_match_the_dense_oracle(seed in any::<u64>(), sparse in any::<bool>()) {
        let n = 8;
        let (pattern, d) = instance(seed, n, sparse);
        let mut r = rng(seed ^ 0xdead);
        let s1 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.4);
        let s2 = random_symmetric(n, &mut r, OperatorKind::Stiffness, 0.4);
        let m1 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.4);
        let m2 = random_symmetric(n, &mut r, OperatorKind::Mass, 0.4);
        let mu = r.random_range(0.0..5.0);
        let prob = QapProblem::new(&s1, &s2, &m1, &m2, mu).unwrap();
        let dd = d.to_dense();
        let f = prob.objective(&d).unwrap();
        let want = dense_objective(&prob, &dd);
        prop_assert!((f - want).abs() <= 1e-12 * want.max(1.0));
        let (a, b, c, e) = (s1.to_dense(), s2.to_dense(), m1.to_dense(), m2.to_dense());
        let rs = &a * &dd - &dd * &b;
        let rm = &c * &dd - &dd * &e;
        let dense_grad = &a * &rs - &rs * &b + mu * (&c * &rm - &rm * &e);
        let g = prob.gradient(&d).unwrap();
        for ((s, t), v) in pattern.entries().zip(g.values()) {
            prop_assert!((v - dense_grad[(s, t)]).abs() <= 1e-12 * dense_grad.amax().max(1.0));
        }
    }

    #[test]
    fn projection_is_identity_on_feasible_plans(seed in any::<u64>(), n in 2usize..=10) {
        let (pattern, y) = instance(seed, n, true);
        let projector = Projector::new(&pattern);
        let feasible = projector.project(&y).unwrap();
        let again = projector.project(&feasible).unwrap();
        prop_assert!(max_abs_diff(&again.to_dense(), &feasible.to_dense()) < 1e-10);
    }

    #[test]
    fn extraction_picks_the_first_row_maximum(seed in any::<u64>(), n in 2usize..=9) {
        let (pattern, y) = instance(seed, n, true);
        let map = extract_map(&y);
        for s in 0..n {
            let row: Vec<(usize, f64)> = pattern.row(s).iter().map(|&t| (t, y.get(s, t))).collect();
            if row.is_empty() {
                prop_assert_eq!(map.get(s), None);
                continue;
            }
            let best = row.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
            let first = row.iter().find(|e| e.1 == best).unwrap().0;
            prop_assert_eq!(map.get(s), Some(first));
        }
    }
}

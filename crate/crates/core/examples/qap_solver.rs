//! The relaxed quadratic assignment solver on a mesh and a relabeled copy:
//! start from a plan near the true permutation and watch the objective.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparse_qap::anchor::Correspondence;
use sparse_qap::descriptors::assemble_operators;
use sparse_qap::geometry::primitives::icosphere;
use sparse_qap::qap::{
    extract_map, solve, Projector, QapProblem, SolverParams, SparsityPattern, TransportPlan,
};

fn main() -> sparse_qap::Result<()> {
    let mesh = icosphere(1);
    let n = mesh.n_vertices();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let (s1, m1) = assemble_operators(&mesh);
    let (s2, m2) = (s1.permuted(&perm), m1.permuted(&perm));

    let problem = QapProblem::new(&s1, &s2, &m1, &m2, 1.0)?;
    let pattern = Arc::new(SparsityPattern::full(n, n));
    let projector = Projector::new(&pattern);
    let truth = Correspondence::from_targets(&perm, n)?;
    // blend of the true permutation and the uniform plan
    let d0 = TransportPlan::from_fn(pattern.clone(), |s, t| {
        0.6 * f64::from(u8::from(perm[s] == t)) + 0.4 / n as f64
    });
    println!(
        "objective at the truth {:.3e}",
        problem.objective(&TransportPlan::one_hot(pattern.clone(), &truth))?
    );

    let params = SolverParams {
        max_iters: 200,
        tol: 1e-12,
        ..Default::default()
    };
    let out = solve(&problem, &projector, d0, &params)?;
    for r in out.log.iter().step_by(20) {
        println!(
            "iter {:3}  objective {:.3e}  step {:.2e}  residual {:.1e}",
            r.iter, r.objective, r.step, r.residual
        );
    }
    let map = extract_map(&out.plan);
    let exact = (0..n).filter(|&s| map.get(s) == Some(perm[s])).count();
    println!(
        "final objective {:.3e}, {exact}/{n} rows recover the permutation",
        out.objective
    );
    Ok(())
}

//! Euclidean projection onto plans with unit row sums and fixed column sums
//! under a sparsity pattern with one anchored pair.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_qap::qap::{Projector, SparsityPattern, TransportPlan};

fn main() -> sparse_qap::Result<()> {
    let rng = std::cell::RefCell::new(ChaCha8Rng::seed_from_u64(1));
    let rows: Vec<(usize, Vec<usize>)> = (1..6).map(|s| (s, vec![s - 1, s, (s + 1) % 6])).collect();
    let pattern = Arc::new(SparsityPattern::new(6, 6, &rows, &[(0, 0)])?);
    let y = TransportPlan::from_fn(pattern.clone(), |_, _| {
        rng.borrow_mut().random_range(-1.0..1.0)
    });

    let projector = Projector::new(&pattern);
    let d = projector.project(&y)?;
    println!("projected plan:\n{}", d.to_dense());
    println!("row sums    {:?}", d.row_sums());
    println!("column sums {:?}", d.col_sums());
    println!("targets     {:?}", projector.column_targets());
    println!("residual    {:.1e}", projector.marginal_residual(&d));

    let again = projector.project(&d)?;
    let moved = d
        .values()
        .iter()
        .zip(again.values())
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    println!("second projection moves entries by at most {moved:.1e}");
    Ok(())
}

use log::info;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::correspondence::Correspondence;
use super::nn::nearest_both;
use super::surface::Surface;
use crate::descriptors::{shot_like_descriptor, ShotParams};
use crate::error::Result;

/// Seeded random map: a permutation when both sides have the same size,
/// otherwise an independent uniform target per source.
pub fn random_init(n1: usize, n2: usize, seed: u64) -> Correspondence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets: Vec<usize> = if n1 == n2 {
        let mut p: Vec<usize> = (0..n2).collect();
        p.shuffle(&mut rng);
        p
    } else {
        (0..n1).map(|_| rng.random_range(0..n2)).collect()
    };
    Correspondence::from_targets(&targets, n2).expect("targets drawn in range")
}

/// Mutual nearest neighbors in shot-like descriptor space. The descriptor
/// radius is `radius_factor` times the mean edge length of the two inputs.
/// Sources without a mutual partner get a seeded random target.
pub fn shot_like_init(
    src: &Surface,
    dst: &Surface,
    radius_factor: f64,
    seed: u64,
) -> Result<Correspondence> {
    let radius = radius_factor * 0.5 * (src.mean_edge_length() + dst.mean_edge_length());
    let params = ShotParams::with_radius(radius);
    let d1 = shot_like_descriptor(src.points(), &params)?;
    let d2 = shot_like_descriptor(dst.points(), &params)?;
    let (fwd, back) = nearest_both(d1.data(), d2.data(), params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n2 = dst.n_vertices();
    let mut mutual = 0usize;
    let targets: Vec<usize> = fwd
        .iter()
        .enumerate()
        .map(|(s, &t)| {
            if back[t] == s {
                mutual += 1;
                t
            } else {
                rng.random_range(0..n2)
            }
        })
        .collect();
    info!(
        "shot-like init: {mutual} of {} sources have a mutual match",
        targets.len()
    );
    Correspondence::from_targets(&targets, n2)
}

use log::warn;
use rayon::prelude::*;

use super::correspondence::Correspondence;
use crate::error::{Error, Result};
use crate::geometry::{DijkstraScratch, SurfaceGraph};

/// Local distortion of `phi` at every source vertex.
///
/// For source `i` with ball `B` (hop ring of depth `ring_depth`, `i`
/// excluded), the score is the `weights`-weighted mean over mapped `j` in `B`
/// of `|d1(i, j) - d2(phi(i), phi(j))| / gamma`, where `gamma` is the largest
/// `d1(i, j)` in the ball and distances are edge-graph geodesics.
/// Unmapped centers, empty balls and balls with no mapped member score
/// `INFINITY`.
pub fn local_distortion(
    phi: &Correspondence,
    g1: &SurfaceGraph,
    g2: &SurfaceGraph,
    weights: &[f64],
    ring_depth: usize,
) -> Result<Vec<f64>> {
    let n1 = g1.n_vertices();
    if phi.n1() != n1 || phi.n2() != g2.n_vertices() || weights.len() != n1 {
        return Err(Error::DimensionMismatch(format!(
            "map is {}->{}, surfaces have {} and {} vertices, {} weights",
            phi.n1(),
            phi.n2(),
            n1,
            g2.n_vertices(),
            weights.len()
        )));
    }
    if ring_depth == 0 {
        return Err(Error::InvalidInput(
            "distortion ring depth must be at least 1".into(),
        ));
    }
    let n2 = g2.n_vertices();
    let scores: Vec<(f64, bool)> = (0..n1)
        .into_par_iter()
        .map_init(
            || (DijkstraScratch::new(n1), DijkstraScratch::new(n2)),
            |(sc1, sc2), i| {
                let Some(ti) = phi.get(i) else {
                    return (f64::INFINITY, false);
                };
                let ball: Vec<usize> = g1
                    .ring_members(i, ring_depth)
                    .into_iter()
                    .filter(|&j| j != i)
                    .collect();
                if ball.is_empty() {
                    return (f64::INFINITY, false);
                }
                let d1 = sc1.distances_to(g1, i, &ball);
                let gamma = d1.iter().cloned().fold(0.0, f64::max);
                let mapped: Vec<(usize, f64, usize)> = ball
                    .iter()
                    .zip(&d1)
                    .filter_map(|(&j, &d)| phi.get(j).map(|t| (j, d, t)))
                    .collect();
                if mapped.is_empty() || !(gamma > 0.0) {
                    return (f64::INFINITY, true);
                }
                let targets: Vec<usize> = mapped.iter().map(|m| m.2).collect();
                let d2 = sc2.distances_to(g2, ti, &targets);
                let (mut num, mut den) = (0.0, 0.0);
                for (&(j, dj, _), &e) in mapped.iter().zip(&d2) {
                    num += weights[j] * (dj - e).abs() / gamma;
                    den += weights[j];
                }
                if den > 0.0 {
                    (num / den, false)
                } else {
                    (f64::INFINITY, true)
                }
            },
        )
        .collect();
    let flagged = scores.iter().filter(|s| s.1).count();
    if flagged > 0 {
        warn!("local distortion: {flagged} vertices have no mapped ball member");
    }
    Ok(scores.into_iter().map(|s| s.0).collect())
}

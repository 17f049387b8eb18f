//! Simplified SHOT-style local descriptor: a repeatable local reference
//! frame, a spatial grid of sectors around the point, and per sector a
//! histogram of normal agreement with the center.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;

use super::signature::{PointSignature, SignatureKind};
use crate::error::{Error, Result};
use crate::geometry::spatial::KdTree;
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotParams {
    pub radius: f64,
    pub azimuth_sectors: usize,
    pub elevation_sectors: usize,
    pub radial_shells: usize,
    pub hist_bins: usize,
}

impl ShotParams {
    pub fn with_radius(radius: f64) -> Self {
        ShotParams {
            radius,
            azimuth_sectors: 8,
            elevation_sectors: 2,
            radial_shells: 2,
            hist_bins: 11,
        }
    }

    pub fn len(&self) -> usize {
        self.azimuth_sectors * self.elevation_sectors * self.radial_shells * self.hist_bins
    }
}

/// Orthonormal frame `[x, y, z]` (rows) from the distance-weighted covariance
/// of the neighbors around `p`. `None` when there are too few neighbors to
/// span a plane.
fn local_frame(
    points: &[Point],
    p: &Point,
    nbrs: &[(usize, f64)],
    radius: f64,
) -> Option<Matrix3<f64>> {
    let mut cov = Matrix3::zeros();
    let mut wsum = 0.0;
    for &(q, d) in nbrs {
        let w = radius - d;
        let o = points[q] - p;
        cov += w * o * o.transpose();
        wsum += w;
    }
    if nbrs.len() < 3 || !(wsum > 0.0) {
        return None;
    }
    cov /= wsum;
    let eig = SymmetricEigen::new(cov);
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut x: Point = eig.eigenvectors.column(idx[0]).into();
    let mut z: Point = eig.eigenvectors.column(idx[2]).into();
    // point the axes toward the weighted majority of offsets
    let side = |axis: &Point| -> f64 {
        nbrs.iter()
            .map(|&(q, d)| (radius - d) * (points[q] - p).dot(axis))
            .sum()
    };
    if side(&x) < 0.0 {
        x = -x;
    }
    if side(&z) < 0.0 {
        z = -z;
    }
    let y = z.cross(&x);
    Some(Matrix3::from_rows(&[
        x.transpose(),
        y.transpose(),
        z.transpose(),
    ]))
}

/// Linear interpolation of `pos` (in bin units, centers at `k + 0.5`)
/// between the two nearest bins; clamped at the ends unless `circular`.
fn soft_bins(pos: f64, bins: usize, circular: bool) -> [(usize, f64); 2] {
    let c = pos - 0.5;
    let lo = c.floor();
    let frac = c - lo;
    let lo = lo as isize;
    let wrap = |k: isize| -> Option<usize> {
        if circular {
            Some(k.rem_euclid(bins as isize) as usize)
        } else if k < 0 || k >= bins as isize {
            None
        } else {
            Some(k as usize)
        }
    };
    match (wrap(lo), wrap(lo + 1)) {
        (Some(a), Some(b)) => [(a, 1.0 - frac), (b, frac)],
        (None, Some(b)) => [(b, 1.0), (b, 0.0)],
        (Some(a), None) => [(a, 1.0), (a, 0.0)],
        (None, None) => unreachable!("position outside every bin"),
    }
}

/// Descriptors for every point. Neighborhoods are Euclidean balls of
/// `params.radius`. Points whose neighborhood cannot support a frame get the
/// zero descriptor.
pub fn shot_like_descriptor(points: &[Point], params: &ShotParams) -> Result<PointSignature> {
    if !(params.radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "descriptor radius must be positive, got {}",
            params.radius
        )));
    }
    let r = params.radius;
    let tree = KdTree::new(points);
    let neighborhoods: Vec<Vec<(usize, f64)>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            tree.within(p, r)
                .into_iter()
                .filter(|&(q, d)| q != i && d < r)
                .collect()
        })
        .collect();
    let frames: Vec<Option<Matrix3<f64>>> = points
        .par_iter()
        .zip(&neighborhoods)
        .map(|(p, nb)| local_frame(points, p, nb, r))
        .collect();

    let (na, ne, nr, nh) = (
        params.azimuth_sectors,
        params.elevation_sectors,
        params.radial_shells,
        params.hist_bins,
    );
    let len = params.len();
    let descs: Vec<Vec<f64>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut h = vec![0.0; len];
            let Some(frame) = frames[i] else {
                return h;
            };
            let nz = frame.row(2).transpose();
            for &(q, d) in &neighborhoods[i] {
                let l = frame * (points[q] - points[i]);
                let cos = match frames[q] {
                    Some(fq) => fq.row(2).transpose().dot(&nz).abs().min(1.0),
                    None => continue,
                };
                let az = l.y.atan2(l.x).rem_euclid(2.0 * PI) / (2.0 * PI) * na as f64;
                let el = (l.z.atan2(l.x.hypot(l.y)) + PI / 2.0) / PI * ne as f64;
                let rad = d / r * nr as f64;
                let hb = cos * nh as f64;
                for (ai, aw) in soft_bins(az, na, true) {
                    for (ei, ew) in soft_bins(el, ne, false) {
                        for (ri, rw) in soft_bins(rad, nr, false) {
                            for (hi, hw) in soft_bins(hb, nh, false) {
                                h[((ri * ne + ei) * na + ai) * nh + hi] += aw * ew * rw * hw;
                            }
                        }
                    }
                }
            }
            let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                h.iter_mut().for_each(|v| *v /= norm);
            }
            h
        })
        .collect();

    let empty = frames.iter().filter(|f| f.is_none()).count();
    if empty > 0 {
        warn!("shot descriptor: {empty} points have too few neighbors within radius {r}; zero descriptors");
    }
    Ok(PointSignature::new(
        len,
        descs.concat(),
        SignatureKind::ShotLike,
        format!("radius={r} azimuth={na} elevation={ne} radial={nr} bins={nh}"),
    ))
}

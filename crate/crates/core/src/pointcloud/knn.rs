use nalgebra::{Matrix3, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::spatial::KdTree;
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveKnnParams {
    /// Initial neighborhood size, the center included.
    pub k0: usize,
    /// Flatness threshold on `lambda3 / lambda1`.
    pub ratio: f64,
    /// Furthest points dropped per shrink step.
    pub shrink: usize,
    /// Smallest neighborhood size, the center included.
    pub k_min: usize,
}

impl Default for AdaptiveKnnParams {
    fn default() -> Self {
        AdaptiveKnnParams {
            k0: 200,
            ratio: 0.05,
            shrink: 6,
            k_min: 12,
        }
    }
}

/// Neighborhood of one point with its principal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrame {
    pub center: usize,
    /// Neighbor ids by increasing distance, center excluded.
    pub neighbors: Vec<usize>,
    /// Orthonormal tangent basis and normal.
    pub tangent: [Point; 2],
    pub normal: Point,
    /// Covariance eigenvalues, decreasing.
    pub eigenvalues: [f64; 3],
    /// Stopped at `k_min` without reaching the flatness threshold.
    pub flagged: bool,
}

impl LocalFrame {
    pub fn flatness(&self) -> f64 {
        self.eigenvalues[2] / self.eigenvalues[0]
    }

    /// Tangent-plane coordinates of `p` relative to the center.
    pub fn project(&self, center: &Point, p: &Point) -> [f64; 2] {
        let d = p - center;
        [d.dot(&self.tangent[0]), d.dot(&self.tangent[1])]
    }
}

/// Covariance of the points about their mean, divided by the count.
fn covariance(points: &[Point], ids: &[usize]) -> Matrix3<f64> {
    let k = ids.len() as f64;
    let mean = ids.iter().fold(Point::zeros(), |acc, &i| acc + points[i]) / k;
    let mut cov = Matrix3::zeros();
    for &i in ids {
        let d = points[i] - mean;
        cov += d * d.transpose();
    }
    cov / k
}

/// Eigenvalues (decreasing, clamped at zero) and matching unit vectors.
fn principal_axes(cov: Matrix3<f64>) -> ([f64; 3], [Point; 3]) {
    let eig = SymmetricEigen::new(cov);
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.map(|k| eig.eigenvalues[k].max(0.0));
    let vecs = order.map(|k| eig.eigenvectors.column(k).into_owned());
    (vals, vecs)
}

/// Shrinks the `k0`-nearest neighborhood of point `i` by `shrink` furthest
/// points at a time until its covariance is flat enough or would fall below
/// `k_min` points.
pub fn adaptive_knn(
    points: &[Point],
    tree: &KdTree,
    i: usize,
    params: &AdaptiveKnnParams,
) -> Result<LocalFrame> {
    let n = points.len();
    if params.k_min < 4 || params.k0 < params.k_min || params.shrink == 0 || !(params.ratio > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bad adaptive-knn parameters {params:?}"
        )));
    }
    if n <= params.k_min {
        return Err(Error::InvalidInput(format!(
            "cloud has {n} points, adaptive knn needs more than {}",
            params.k_min
        )));
    }
    if i >= n {
        return Err(Error::BadIndex(format!("point {i} out of range 0..{n}")));
    }
    // the query point itself comes back first, at distance zero
    let mut ids: Vec<usize> = tree
        .knn(&points[i], params.k0.min(n))
        .into_iter()
        .map(|e| e.0)
        .collect();
    if ids[0] != i {
        let at = ids.iter().position(|&q| q == i).unwrap_or(ids.len() - 1);
        ids.remove(at);
        ids.insert(0, i);
    }
    let (mut vals, mut vecs);
    let mut flagged = false;
    loop {
        (vals, vecs) = principal_axes(covariance(points, &ids));
        if !(vals[0] > 0.0) {
            return Err(Error::InvalidInput(format!(
                "neighborhood of point {i} is degenerate"
            )));
        }
        if vals[2] / vals[0] < params.ratio {
            break;
        }
        if ids.len() < params.k_min + params.shrink {
            flagged = true;
            break;
        }
        ids.truncate(ids.len() - params.shrink);
    }
    let normal = vecs[2].normalize();
    let t0 = (vecs[0] - normal * normal.dot(&vecs[0])).normalize();
    let t1 = normal.cross(&t0);
    Ok(LocalFrame {
        center: i,
        neighbors: ids[1..].to_vec(),
        tangent: [t0, t1],
        normal,
        eigenvalues: vals,
        flagged,
    })
}

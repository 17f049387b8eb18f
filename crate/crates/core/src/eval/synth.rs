use nalgebra::Isometry3;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{reference_diameter, GroundTruth, Provenance};
use crate::anchor::Correspondence;
use crate::error::{Error, Result};
use crate::geometry::{Point, PointCloud, TriMesh};

/// Smallest connected piece a perturbation may leave behind.
pub const MIN_FRAGMENT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    /// Removes this percentage of faces at random, then any vertex left
    /// without a face.
    DeleteFaces {
        percent: f64,
    },
    /// Keeps the geodesic ball around `center` whose radius is a fraction
    /// of the geodesic diameter; faces need all three corners inside.
    CropBall {
        center: usize,
        radius: f64,
    },
    /// Gaussian offsets per coordinate, sigma as a fraction of the mean
    /// edge length.
    Noise {
        sigma: f64,
    },
}

/// How to derive the second shape from the first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub motion: Isometry3<f64>,
    /// `None` keeps vertex order.
    pub permutation_seed: Option<u64>,
    pub perturbation: Perturbation,
    /// Drives deletion and noise.
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            motion: Isometry3::identity(),
            permutation_seed: None,
            perturbation: Perturbation::None,
            seed: 0,
        }
    }
}

fn relabeling(n: usize, seed: Option<u64>) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    if let Some(s) = seed {
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
    }
    perm
}

fn check_fragments(mesh: &TriMesh) -> Result<()> {
    let labels = mesh.graph().components();
    let mut sizes = vec![0usize; labels.iter().max().map_or(0, |m| m + 1)];
    for &l in &labels {
        sizes[l] += 1;
    }
    match sizes.iter().min() {
        Some(&size) if size < MIN_FRAGMENT => Err(Error::Fragmented {
            size,
            min: MIN_FRAGMENT,
        }),
        None => Err(Error::Fragmented {
            size: 0,
            min: MIN_FRAGMENT,
        }),
        _ => Ok(()),
    }
}

/// Rigidly moved, relabeled and optionally perturbed copy of `mesh`, with
/// the ground truth from `mesh` vertices to the copy. Removed vertices map
/// to nothing.
pub fn synth_pair(mesh: &TriMesh, spec: &SynthSpec) -> Result<(TriMesh, GroundTruth)> {
    let n = mesh.n_vertices();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut keep_face = vec![true; mesh.triangles().len()];
    let mut offsets: Option<Vec<Point>> = None;
    match spec.perturbation {
        Perturbation::None => {}
        Perturbation::DeleteFaces { percent } => {
            if !(0.0..50.0).contains(&percent) {
                return Err(Error::InvalidInput(format!(
                    "face deletion must be in [0, 50) percent, got {percent}"
                )));
            }
            let f = keep_face.len();
            let mut order: Vec<usize> = (0..f).collect();
            order.shuffle(&mut rng);
            let k = (percent / 100.0 * f as f64).round() as usize;
            for &i in &order[..k] {
                keep_face[i] = false;
            }
        }
        Perturbation::CropBall { center, radius } => {
            if center >= n {
                return Err(Error::BadIndex(format!(
                    "crop center {center} out of range 0..{n}"
                )));
            }
            if !(radius > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "crop radius must be positive, got {radius}"
                )));
            }
            let r = radius * reference_diameter(mesh.graph());
            let mut inside = vec![false; n];
            for (v, _) in mesh.geodesic_distances(center, Some(r)) {
                inside[v] = true;
            }
            for (k, t) in mesh.triangles().iter().enumerate() {
                keep_face[k] = t.iter().all(|&v| inside[v]);
            }
        }
        Perturbation::Noise { sigma } => {
            if !(sigma >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "noise sigma must be non-negative, got {sigma}"
                )));
            }
            let normal = Normal::new(0.0, sigma * mesh.mean_edge_length())
                .map_err(|e| Error::InvalidInput(format!("noise sigma: {e}")))?;
            offsets = Some(
                (0..n)
                    .map(|_| {
                        Point::new(
                            normal.sample(&mut rng),
                            normal.sample(&mut rng),
                            normal.sample(&mut rng),
                        )
                    })
                    .collect(),
            );
        }
    }

    let mut used = vec![false; n];
    for (t, _) in mesh.triangles().iter().zip(&keep_face).filter(|p| *p.1) {
        for &v in t {
            used[v] = true;
        }
    }
    let survivors: Vec<usize> = (0..n).filter(|&v| used[v]).collect();
    let perm = relabeling(survivors.len(), spec.permutation_seed);
    let mut image = vec![None; n];
    for (k, &v) in survivors.iter().enumerate() {
        image[v] = Some(perm[k]);
    }
    let mut points = vec![Point::zeros(); survivors.len()];
    for &v in &survivors {
        let mut p = mesh.vertices()[v];
        if let Some(o) = &offsets {
            p += o[v];
        }
        points[image[v].unwrap()] = spec.motion.transform_point(&p.into()).coords;
    }
    let triangles: Vec<[usize; 3]> = mesh
        .triangles()
        .iter()
        .zip(&keep_face)
        .filter(|p| *p.1)
        .map(|(t, _)| t.map(|v| image[v].unwrap()))
        .collect();
    let out = TriMesh::new(points, triangles)?;
    if !matches!(
        spec.perturbation,
        Perturbation::None | Perturbation::Noise { .. }
    ) {
        check_fragments(&out)?;
    }
    let n2 = out.n_vertices();
    Ok((
        out,
        GroundTruth::new(Correspondence::new(image, n2)?, Provenance::Synthetic),
    ))
}

/// Cloud counterpart of [`synth_pair`]: rigid motion, relabeling and
/// optional noise (sigma as a fraction of the mean nearest-neighbor
/// spacing). Deletion and cropping are mesh-only.
pub fn synth_cloud_pair(cloud: &PointCloud, spec: &SynthSpec) -> Result<(PointCloud, GroundTruth)> {
    let n = cloud.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = match spec.perturbation {
        Perturbation::None => None,
        Perturbation::Noise { sigma } => {
            let tree = crate::geometry::spatial::KdTree::new(cloud.points());
            let spacing = cloud
                .points()
                .iter()
                .map(|p| tree.knn(p, 2)[1].1)
                .sum::<f64>()
                / n as f64;
            Some(
                Normal::new(0.0, sigma * spacing)
                    .map_err(|e| Error::InvalidInput(format!("noise sigma: {e}")))?,
            )
        }
        other => return Err(Error::InvalidInput(format!("{other:?} needs a mesh"))),
    };
    let perm = relabeling(n, spec.permutation_seed);
    let mut points = vec![Point::zeros(); n];
    for (v, p) in cloud.points().iter().enumerate() {
        let mut p = *p;
        if let Some(d) = &noise {
            p += Point::new(d.sample(&mut rng), d.sample(&mut rng), d.sample(&mut rng));
        }
        points[perm[v]] = spec.motion.transform_point(&p.into()).coords;
    }
    let gt = GroundTruth::new(
        Correspondence::from_targets(&perm, n)?,
        Provenance::Synthetic,
    );
    Ok((PointCloud::new(points)?, gt))
}

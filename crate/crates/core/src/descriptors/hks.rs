use faer::{Mat, Side};
use nalgebra::DMatrix;
use rayon::prelude::*;

use super::assemble::assemble_operators;
use super::signature::{PointSignature, SignatureKind};
use super::sparse::SparseOperator;
use crate::error::{Error, Result};
use crate::geometry::TriMesh;

/// Largest vertex count accepted by the dense eigen-solve.
pub const HKS_MAX_VERTICES: usize = 6000;

/// Smallest eigenpairs of `S psi = lambda M psi` with `M` lumped to a
/// diagonal. Eigenvectors are orthonormal in the lumped inner product.
#[derive(Debug, Clone)]
pub struct LaplaceSpectrum {
    pub eigenvalues: Vec<f64>,
    /// `n x k`, column `k` is the eigenfunction of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    /// Lumped vertex areas (mass row sums).
    pub lumped_mass: Vec<f64>,
}

impl LaplaceSpectrum {
    pub fn of_mesh(mesh: &TriMesh, num_eigs: usize) -> Result<Self> {
        let (s, m) = assemble_operators(mesh);
        Self::of_operators(&s, &m, num_eigs)
    }

    pub fn of_operators(s: &SparseOperator, m: &SparseOperator, num_eigs: usize) -> Result<Self> {
        let n = s.n();
        if n != m.n() {
            return Err(Error::DimensionMismatch(format!(
                "stiffness is {n}x{n}, mass is {0}x{0}",
                m.n()
            )));
        }
        if n > HKS_MAX_VERTICES {
            return Err(Error::HksSizeLimit {
                n,
                limit: HKS_MAX_VERTICES,
            });
        }
        if num_eigs == 0 || num_eigs > n {
            return Err(Error::InvalidInput(format!(
                "num_eigs must be in 1..={n}, got {num_eigs}"
            )));
        }
        let lumped = m.row_sums();
        if let Some(i) = lumped.iter().position(|&a| !(a > 0.0)) {
            return Err(Error::Eigen(format!("vertex {i} has no mass")));
        }
        let inv_sqrt: Vec<f64> = lumped.iter().map(|a| 1.0 / a.sqrt()).collect();
        let mut a = Mat::<f64>::zeros(n, n);
        for (i, j, v) in s.entries() {
            if i >= j {
                a[(i, j)] = v * inv_sqrt[i] * inv_sqrt[j];
            }
        }
        let eig = a
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("symmetric eigen-solve failed: {e:?}")))?;
        let vals = eig.S();
        let u = eig.U();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| vals[x].total_cmp(&vals[y]).then(x.cmp(&y)));
        order.truncate(num_eigs);
        let eigenvalues: Vec<f64> = order.iter().map(|&k| vals[k]).collect();
        let mut vecs = DMatrix::zeros(n, num_eigs);
        for (c, &k) in order.iter().enumerate() {
            // fixed sign: largest-magnitude entry positive
            let mut imax = 0;
            for i in 0..n {
                if u[(i, k)].abs() > u[(imax, k)].abs() {
                    imax = i;
                }
            }
            let sign = if u[(imax, k)] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                vecs[(i, c)] = sign * u[(i, k)] * inv_sqrt[i];
            }
        }
        Ok(LaplaceSpectrum {
            eigenvalues,
            eigenvectors: vecs,
            lumped_mass: lumped,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// Truncated heat kernel `sum_k exp(-lambda_k t) psi_k(x) psi_k(y)`.
    pub fn kernel(&self, x: usize, y: usize, t: f64) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                (-l.max(0.0) * t).exp() * self.eigenvectors[(x, k)] * self.eigenvectors[(y, k)]
            })
            .sum()
    }

    /// Heat kernel signature `H(x, x, t)` for each time in `times`.
    pub fn hks(&self, times: &[f64]) -> Result<PointSignature> {
        check_times(times)?;
        let n = self.n_vertices();
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|x| times.iter().map(move |&t| self.kernel(x, x, t)))
            .collect();
        Ok(PointSignature::new(
            times.len(),
            data,
            SignatureKind::Hks,
            format!("num_eigs={} t={times:?}", self.eigenvalues.len()),
        ))
    }

    /// `H(x, anchor_i, t)` for every vertex `x`, one coordinate per anchor.
    pub fn hks_cross(&self, anchors: &[usize], t: f64) -> Result<PointSignature> {
        check_times(&[t])?;
        let n = self.n_vertices();
        if anchors.is_empty() {
            return Err(Error::InvalidInput(
                "hks_cross needs at least one anchor".into(),
            ));
        }
        if let Some(&a) = anchors.iter().find(|&&a| a >= n) {
            return Err(Error::BadIndex(format!("anchor {a} out of range 0..{n}")));
        }
        let k = self.eigenvalues.len();
        let decay: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| (-l.max(0.0) * t).exp())
            .collect();
        // weighted anchor rows: w[a][k] = exp(-l_k t) psi_k(a)
        let weighted: Vec<Vec<f64>> = anchors
            .iter()
            .map(|&a| {
                (0..k)
                    .map(|j| decay[j] * self.eigenvectors[(a, j)])
                    .collect()
            })
            .collect();
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|x| {
                let row: Vec<f64> = (0..k).map(|j| self.eigenvectors[(x, j)]).collect();
                weighted
                    .iter()
                    .map(move |w| w.iter().zip(&row).map(|(a, b)| a * b).sum::<f64>())
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(PointSignature::new(
            anchors.len(),
            data,
            SignatureKind::Hks,
            format!("cross anchors={} num_eigs={k} t={t}", anchors.len()),
        ))
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "diffusion times must be positive, got {times:?}"
        )));
    }
    Ok(())
}

/// Heat kernel signature at a single diffusion time.
pub fn hks(mesh: &TriMesh, num_eigs: usize, t: f64) -> Result<PointSignature> {
    LaplaceSpectrum::of_mesh(mesh, num_eigs)?.hks(&[t])
}

/// Heat kernel between each vertex and each anchor.
pub fn hks_cross(
    mesh: &TriMesh,
    anchors: &[usize],
    num_eigs: usize,
    t: f64,
) -> Result<PointSignature> {
    LaplaceSpectrum::of_mesh(mesh, num_eigs)?.hks_cross(anchors, t)
}

//! Accuracy measurement against ground truth, the distortion-based
//! unsupervised score, synthetic pair generation and plot output.

mod svg;
mod synth;

pub use svg::{line_plot, Series};
pub use synth::{synth_cloud_pair, synth_pair, Perturbation, SynthSpec, MIN_FRAGMENT};

use std::path::Path;

use rayon::prelude::*;

use crate::anchor::{local_distortion, Correspondence, Surface};
use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, write_text};
use crate::geometry::{DijkstraScratch, SurfaceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Synthetic,
    File,
}

/// True target of every source. Sources without a counterpart (deleted or
/// cropped away) are unmapped and excluded from evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub map: Correspondence,
    pub provenance: Provenance,
}

impl GroundTruth {
    pub fn new(map: Correspondence, provenance: Provenance) -> Self {
        GroundTruth { map, provenance }
    }

    /// Reads the `source_index,target_index` CSV; `-1` marks a source with
    /// no counterpart.
    pub fn read_csv(path: impl AsRef<Path>, n1: Option<usize>, n2: Option<usize>) -> Result<Self> {
        Ok(GroundTruth::new(
            Correspondence::read_csv(path, n1, n2)?,
            Provenance::File,
        ))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.map.write_csv(path)
    }

    /// Reverse direction. Requires an injective map.
    pub fn inverse(&self) -> Result<GroundTruth> {
        let mut inv = vec![None; self.map.n2()];
        for (s, t) in self.map.as_slice().iter().enumerate() {
            if let Some(t) = *t {
                if inv[t].is_some() {
                    return Err(Error::InvalidInput(format!(
                        "ground truth is not injective at target {t}"
                    )));
                }
                inv[t] = Some(s);
            }
        }
        Ok(GroundTruth::new(
            Correspondence::new(inv, self.map.n1())?,
            self.provenance,
        ))
    }

    /// `other` after `self`: source of `self` to target of `other`.
    pub fn then(&self, other: &GroundTruth) -> Result<GroundTruth> {
        if self.map.n2() != other.map.n1() {
            return Err(Error::DimensionMismatch(format!(
                "cannot chain a map into {} vertices with one from {}",
                self.map.n2(),
                other.map.n1()
            )));
        }
        let map = self
            .map
            .as_slice()
            .iter()
            .map(|t| t.and_then(|t| other.map.get(t)))
            .collect();
        Ok(GroundTruth::new(
            Correspondence::new(map, other.map.n2())?,
            self.provenance,
        ))
    }
}

/// Diameter used to normalize errors: exact up to 2000 vertices, sampled
/// with 64 farthest-point sources above.
pub fn reference_diameter(graph: &SurfaceGraph) -> f64 {
    let n = graph.n_vertices();
    graph.diameter(if n <= 2000 { n } else { 64 })
}

/// Geodesic distance between predicted and true target over the target
/// diameter, for every source with a true target. Unmapped predictions and
/// unreachable pairs score `INFINITY`; sources without a true target are
/// `None`.
pub fn geodesic_error(
    phi: &Correspondence,
    gt: &GroundTruth,
    target: &SurfaceGraph,
    diameter: f64,
) -> Result<Vec<Option<f64>>> {
    let n2 = target.n_vertices();
    if phi.n1() != gt.map.n1() || phi.n2() != n2 || gt.map.n2() != n2 {
        return Err(Error::DimensionMismatch(format!(
            "map {}->{}, ground truth {}->{}, target {n2}",
            phi.n1(),
            phi.n2(),
            gt.map.n1(),
            gt.map.n2()
        )));
    }
    if !(diameter > 0.0) {
        return Err(Error::InvalidInput(format!(
            "diameter must be positive, got {diameter}"
        )));
    }
    Ok((0..phi.n1())
        .into_par_iter()
        .map_init(
            || DijkstraScratch::new(n2),
            |sc, s| {
                let truth = gt.map.get(s)?;
                Some(match phi.get(s) {
                    None => f64::INFINITY,
                    Some(p) if p == truth => 0.0,
                    Some(p) => sc.distances_to(target, truth, &[p])[0] / diameter,
                })
            },
        )
        .collect())
}

/// `n` evenly spaced thresholds on `[0, max]`.
pub fn threshold_grid(max: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0; n];
    }
    (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
}

/// Default error grid: 100 thresholds on `[0, 0.25]`.
pub fn default_thresholds() -> Vec<f64> {
    threshold_grid(0.25, 100)
}

/// Fraction of values at or below each threshold. Non-finite values never
/// count as below.
pub fn error_cdf(errors: &[f64], thresholds: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = errors.len().max(1) as f64;
    thresholds
        .iter()
        .map(|&t| (t, sorted.partition_point(|&e| e <= t) as f64 / n))
        .collect()
}

fn mean_median(values: &[f64]) -> (f64, f64) {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    v.sort_by(f64::total_cmp);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let m = v.len() / 2;
    let median = if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    };
    (mean, median)
}

/// Accuracy of one map.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `None` for sources without a true target.
    pub per_vertex_error: Vec<Option<f64>>,
    pub cdf: Vec<(f64, f64)>,
    /// Over finite errors.
    pub mean: f64,
    pub median: f64,
    pub evaluated: usize,
    /// Evaluated sources with infinite error.
    pub unreachable: usize,
    pub distortion: Option<DistortionReport>,
}

impl ErrorReport {
    pub fn new(per_vertex_error: Vec<Option<f64>>, thresholds: &[f64]) -> Self {
        let evaluated: Vec<f64> = per_vertex_error.iter().flatten().copied().collect();
        let (mean, median) = mean_median(&evaluated);
        ErrorReport {
            cdf: error_cdf(&evaluated, thresholds),
            mean,
            median,
            evaluated: evaluated.len(),
            unreachable: evaluated.iter().filter(|e| !e.is_finite()).count(),
            per_vertex_error,
            distortion: None,
        }
    }

    /// Fraction of evaluated sources with error at most `t`.
    pub fn fraction_within(&self, t: f64) -> f64 {
        let ok = self
            .per_vertex_error
            .iter()
            .flatten()
            .filter(|&&e| e <= t)
            .count();
        ok as f64 / self.evaluated.max(1) as f64
    }

    /// Per-vertex CSV: `source_index,error` plus `distortion` when present.
    /// Sources without a true target have an empty error field.
    pub fn errors_csv(&self) -> String {
        let with_d = self.distortion.is_some();
        let mut s = String::from(if with_d {
            "source_index,error,distortion\n"
        } else {
            "source_index,error\n"
        });
        for (i, e) in self.per_vertex_error.iter().enumerate() {
            s.push_str(&i.to_string());
            s.push(',');
            if let Some(e) = e {
                s.push_str(&fmt_f64(*e));
            }
            if let Some(d) = &self.distortion {
                s.push(',');
                s.push_str(&fmt_f64(d.values[i]));
            }
            s.push('\n');
        }
        s
    }

    pub fn write_errors_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path, &self.errors_csv())
    }
}

/// CSV of one or more CDF curves sharing thresholds: `threshold,<name>...`.
pub fn cdf_csv(series: &[(&str, &[(f64, f64)])]) -> Result<String> {
    let Some(first) = series.first() else {
        return Err(Error::InvalidInput("no curves to write".into()));
    };
    if series
        .iter()
        .any(|s| s.1.len() != first.1.len() || s.1.iter().zip(first.1).any(|(a, b)| a.0 != b.0))
    {
        return Err(Error::InvalidInput(
            "curves use different thresholds".into(),
        ));
    }
    let mut s = String::from("threshold");
    for (name, _) in series {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for k in 0..first.1.len() {
        s.push_str(&fmt_f64(first.1[k].0));
        for (_, c) in series {
            s.push(',');
            s.push_str(&fmt_f64(c[k].1));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Local distortion of a map and its CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionReport {
    pub values: Vec<f64>,
    pub cdf: Vec<(f64, f64)>,
    pub mean: f64,
}

/// Distortion grid: 100 thresholds on `[0, 1]`.
pub fn distortion_thresholds() -> Vec<f64> {
    threshold_grid(1.0, 100)
}

pub fn distortion_report(
    phi: &Correspondence,
    src: &Surface,
    dst: &Surface,
    ring_depth: usize,
) -> Result<DistortionReport> {
    let values = local_distortion(
        phi,
        src.graph(),
        dst.graph(),
        &src.mass().diagonal(),
        ring_depth,
    )?;
    let (mean, _) = mean_median(&values);
    Ok(DistortionReport {
        cdf: error_cdf(&values, &distortion_thresholds()),
        mean,
        values,
    })
}

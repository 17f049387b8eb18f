use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, write_text};
use crate::geometry::{DijkstraScratch, SurfaceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignatureKind {
    ShotLike,
    Hks,
    GeodesicSig,
}

impl SignatureKind {
    pub fn name(self) -> &'static str {
        match self {
            SignatureKind::ShotLike => "shot_like",
            SignatureKind::Hks => "hks",
            SignatureKind::GeodesicSig => "geodesic_sig",
        }
    }
}

/// Fixed-length descriptor per vertex, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSignature {
    len: usize,
    data: Vec<f64>,
    pub kind: SignatureKind,
    /// Human-readable record of the parameters that produced it.
    pub params: String,
}

impl PointSignature {
    pub fn new(len: usize, data: Vec<f64>, kind: SignatureKind, params: String) -> Self {
        assert!(len > 0 && data.len() % len == 0);
        PointSignature {
            len,
            data,
            kind,
            params,
        }
    }

    pub fn n_points(&self) -> usize {
        self.data.len() / self.len
    }

    /// Descriptor length.
    pub fn dim(&self) -> usize {
        self.len
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.len..(i + 1) * self.len]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("vertex");
        for k in 0..self.len {
            let _ = write!(s, ",d{k}");
        }
        s.push('\n');
        for i in 0..self.n_points() {
            let _ = write!(s, "{i}");
            for &v in self.get(i) {
                s.push(',');
                s.push_str(&fmt_f64(v));
            }
            s.push('\n');
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path, &self.to_csv())
    }
}

/// Graph distances from every vertex to each anchor, divided by `scale`.
/// Unreachable anchors give `INFINITY` and a warning.
pub fn geodesic_signature_scaled(
    graph: &SurfaceGraph,
    anchors: &[usize],
    scale: f64,
) -> Result<PointSignature> {
    if anchors.is_empty() {
        return Err(Error::InvalidInput(
            "geodesic signature needs at least one anchor".into(),
        ));
    }
    let n = graph.n_vertices();
    if let Some(&a) = anchors.iter().find(|&&a| a >= n) {
        return Err(Error::BadIndex(format!("anchor {a} out of range 0..{n}")));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "signature scale must be positive, got {scale}"
        )));
    }
    let k = anchors.len();
    let columns: Vec<Vec<f64>> = anchors
        .par_iter()
        .map_init(
            || DijkstraScratch::new(n),
            |scratch, &a| {
                let mut d = vec![0.0; n];
                scratch.distances_into(graph, a, &mut d);
                d
            },
        )
        .collect();
    let mut data = vec![0.0; n * k];
    let mut unreachable = 0usize;
    for (c, col) in columns.iter().enumerate() {
        for (v, &d) in col.iter().enumerate() {
            if d.is_infinite() {
                unreachable += 1;
            }
            data[v * k + c] = d / scale;
        }
    }
    if unreachable > 0 {
        warn!("geodesic signature: {unreachable} vertex-anchor pairs are unreachable");
    }
    Ok(PointSignature::new(
        k,
        data,
        SignatureKind::GeodesicSig,
        format!("anchors={k} scale={scale}"),
    ))
}

/// Geodesic signature normalized by the graph diameter (exact below 2000
/// vertices, sampled above).
pub fn geodesic_signature(graph: &SurfaceGraph, anchors: &[usize]) -> Result<PointSignature> {
    let n = graph.n_vertices();
    let samples = if n <= 2000 { n } else { 64 };
    let diam = graph.diameter(samples);
    geodesic_signature_scaled(graph, anchors, if diam > 0.0 { diam } else { 1.0 })
}

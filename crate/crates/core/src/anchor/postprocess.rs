use super::correspondence::{AnchorSet, Correspondence};
use super::nn::nearest;
use super::surface::Surface;
use crate::descriptors::{
    geodesic_signature_scaled, LaplaceSpectrum, PointSignature, HKS_MAX_VERTICES,
};
use crate::error::{Error, Result};
use crate::geometry::{DijkstraScratch, SurfaceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostprocessMode {
    Hks,
    GeodesicSig,
}

impl PostprocessMode {
    pub fn name(self) -> &'static str {
        match self {
            PostprocessMode::Hks => "hks",
            PostprocessMode::GeodesicSig => "geodesic_sig",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hks" => Some(PostprocessMode::Hks),
            "geodesic_sig" => Some(PostprocessMode::GeodesicSig),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostprocessParams {
    pub mode: PostprocessMode,
    /// At most this many anchors (farthest-point subset) define the
    /// signature coordinates.
    pub signature_anchors: usize,
    pub hks_eigs: usize,
    pub hks_time: f64,
}

impl Default for PostprocessParams {
    fn default() -> Self {
        PostprocessParams {
            mode: PostprocessMode::GeodesicSig,
            signature_anchors: 100,
            hks_eigs: 300,
            hks_time: 50.0,
        }
    }
}

/// Farthest-point subset of `anchors` (positions into the list) under graph
/// geodesics, starting from the first anchor.
pub fn farthest_subset(graph: &SurfaceGraph, anchors: &[usize], k: usize) -> Vec<usize> {
    if anchors.len() <= k {
        return (0..anchors.len()).collect();
    }
    let n = graph.n_vertices();
    let mut scratch = DijkstraScratch::new(n);
    let mut dist = vec![0.0; n];
    let mut nearest_chosen = vec![f64::INFINITY; anchors.len()];
    let mut chosen = vec![0usize];
    while chosen.len() < k {
        scratch.distances_into(graph, anchors[*chosen.last().unwrap()], &mut dist);
        for (m, &a) in nearest_chosen.iter_mut().zip(anchors) {
            *m = m.min(dist[a]);
        }
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &m) in nearest_chosen.iter().enumerate() {
            // unreachable anchors count as infinitely far and get picked first
            if m > best.0 {
                best = (m, i);
            }
        }
        if best.0 <= 0.0 {
            break;
        }
        chosen.push(best.1);
    }
    chosen
}

fn hks_signatures(
    src: &Surface,
    dst: &Surface,
    a1: &[usize],
    a2: &[usize],
    p: &PostprocessParams,
) -> Result<(PointSignature, PointSignature)> {
    let mut out = Vec::new();
    for (surf, anchors) in [(src, a1), (dst, a2)] {
        let mesh = surf
            .mesh()
            .ok_or_else(|| Error::HksUnsupported("input is a point cloud".into()))?;
        if mesh.n_vertices() > HKS_MAX_VERTICES {
            return Err(Error::HksSizeLimit {
                n: mesh.n_vertices(),
                limit: HKS_MAX_VERTICES,
            });
        }
        if !mesh.is_closed() {
            return Err(Error::HksUnsupported("mesh has boundary edges".into()));
        }
        let spec = LaplaceSpectrum::of_operators(
            surf.stiffness(),
            surf.mass(),
            p.hks_eigs.min(mesh.n_vertices()),
        )?;
        out.push(spec.hks_cross(anchors, p.hks_time)?);
    }
    let b = out.pop().unwrap();
    Ok((out.pop().unwrap(), b))
}

/// Completes a map from anchors: every non-anchor source takes the target
/// nearest to it in signature space, anchors pass through.
pub fn postprocess(
    anchors: &AnchorSet,
    src: &Surface,
    dst: &Surface,
    params: &PostprocessParams,
) -> Result<Correspondence> {
    if anchors.is_empty() {
        return Err(Error::InvalidInput(
            "post-processing needs at least one anchor pair".into(),
        ));
    }
    if params.signature_anchors == 0 {
        return Err(Error::InvalidInput(
            "signature_anchors must be positive".into(),
        ));
    }
    let (n1, n2) = (src.n_vertices(), dst.n_vertices());
    let sources: Vec<usize> = anchors.sources().collect();
    let picks = farthest_subset(src.graph(), &sources, params.signature_anchors);
    let a1: Vec<usize> = picks.iter().map(|&i| anchors.pairs[i].0).collect();
    let a2: Vec<usize> = picks.iter().map(|&i| anchors.pairs[i].1).collect();

    let (sig1, sig2) = match params.mode {
        PostprocessMode::GeodesicSig => {
            // a common scale keeps partial inputs comparable
            let samples = if n1 <= 2000 { n1 } else { 64 };
            let scale = src.graph().diameter(samples);
            let scale = if scale > 0.0 && scale.is_finite() {
                scale
            } else {
                1.0
            };
            (
                geodesic_signature_scaled(src.graph(), &a1, scale)?,
                geodesic_signature_scaled(dst.graph(), &a2, scale)?,
            )
        }
        PostprocessMode::Hks => hks_signatures(src, dst, &a1, &a2, params)?,
    };

    let mut map: Vec<Option<usize>> = vec![None; n1];
    for &(s, t) in &anchors.pairs {
        map[s] = Some(t);
    }
    let free: Vec<usize> = (0..n1).filter(|&s| map[s].is_none()).collect();
    let dim = sig1.dim();
    let mut rows = Vec::with_capacity(free.len() * dim);
    for &s in &free {
        rows.extend_from_slice(sig1.get(s));
    }
    for (&s, t) in free.iter().zip(nearest(&rows, sig2.data(), dim)) {
        map[s] = Some(t);
    }
    Correspondence::new(map, n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{grid, icosphere};

    fn anchors_of(pairs: Vec<(usize, usize)>) -> AnchorSet {
        let k = pairs.len();
        AnchorSet {
            pairs,
            distortion: vec![0.0; k],
            epsilon: 1.0,
        }
    }

    #[test]
    fn identical_surfaces_give_identity() {
        let s = Surface::from_mesh(grid(9, 7));
        let a = anchors_of(vec![(0, 0), (8, 8), (62, 62), (30, 30)]);
        let map = postprocess(&a, &s, &s, &PostprocessParams::default()).unwrap();
        for i in 0..s.n_vertices() {
            assert_eq!(map.get(i), Some(i));
        }
    }

    #[test]
    fn all_anchors_pass_through() {
        let s = Surface::from_mesh(grid(4, 4));
        let pairs: Vec<(usize, usize)> = (0..16).map(|i| (i, 15 - i)).collect();
        let map = postprocess(
            &anchors_of(pairs.clone()),
            &s,
            &s,
            &PostprocessParams::default(),
        )
        .unwrap();
        for (a, b) in pairs {
            assert_eq!(map.get(a), Some(b));
        }
    }

    #[test]
    fn hks_rejects_open_meshes() {
        let s = Surface::from_mesh(grid(5, 5));
        let p = PostprocessParams {
            mode: PostprocessMode::Hks,
            ..Default::default()
        };
        let err = postprocess(&anchors_of(vec![(0, 0)]), &s, &s, &p).unwrap_err();
        assert_eq!(err.class(), "descriptors.hks_unsupported");
    }

    #[test]
    fn hks_mode_on_closed_mesh() {
        let s = Surface::from_mesh(icosphere(2));
        let p = PostprocessParams {
            mode: PostprocessMode::Hks,
            hks_eigs: 60,
            hks_time: 0.05,
            ..Default::default()
        };
        let a = anchors_of(vec![(0, 0), (5, 5), (40, 40), (100, 100)]);
        let map = postprocess(&a, &s, &s, &p).unwrap();
        assert!(map.is_total());
        let exact = (0..s.n_vertices())
            .filter(|&i| map.get(i) == Some(i))
            .count();
        assert_eq!(exact, s.n_vertices());
    }

    #[test]
    fn farthest_subset_spreads_out() {
        let g = crate::anchor::select::tests::path(10);
        let anchors: Vec<usize> = (0..10).collect();
        let picks = farthest_subset(&g, &anchors, 3);
        assert_eq!(picks, vec![0, 9, 4]);
    }
}

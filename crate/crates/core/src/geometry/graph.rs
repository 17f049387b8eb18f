use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::Point;
use crate::error::{Error, Result};

/// Weighted vertex adjacency in compressed row form. Edge weights are
/// Euclidean edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    lengths: Vec<f64>,
}

/// Vertices within `depth` edge hops of `center`, sorted by id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSet {
    pub center: usize,
    pub depth: usize,
    pub members: Vec<usize>,
}

impl RingSet {
    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

impl SurfaceGraph {
    /// Builds the graph from undirected edges. Duplicate edges are merged.
    pub fn from_edges(points: &[Point], edges: &[[usize; 2]]) -> Self {
        let n = points.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &[a, b] in edges {
            if a == b {
                continue;
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut lengths = Vec::new();
        offsets.push(0);
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &w in list.iter() {
                targets.push(w);
                lengths.push((points[v] - points[w]).norm());
            }
            offsets.push(targets.len());
        }
        SurfaceGraph {
            offsets,
            targets,
            lengths,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Neighbors of `v` in increasing id order.
    pub fn neighbor_ids(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .copied()
            .zip(self.lengths[r].iter().copied())
    }

    /// Undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = [usize; 2]> + '_ {
        (0..self.n_vertices()).flat_map(move |v| {
            self.neighbor_ids(v)
                .iter()
                .filter(move |&&w| w > v)
                .map(move |&w| [v, w])
        })
    }

    pub fn mean_edge_length(&self) -> f64 {
        if self.lengths.is_empty() {
            0.0
        } else {
            self.lengths.iter().sum::<f64>() / self.lengths.len() as f64
        }
    }

    /// Breadth-first ball of radius `depth` hops around `center`, center
    /// included. `depth` must be at least 1.
    pub fn ring(&self, center: usize, depth: usize) -> Result<RingSet> {
        if depth == 0 {
            return Err(Error::InvalidInput("ring depth must be at least 1".into()));
        }
        if center >= self.n_vertices() {
            return Err(Error::BadIndex(format!("vertex {center} out of range")));
        }
        Ok(RingSet {
            center,
            depth,
            members: self.ring_members(center, depth),
        })
    }

    pub(crate) fn ring_members(&self, center: usize, depth: usize) -> Vec<usize> {
        let mut hops = std::collections::HashMap::new();
        hops.insert(center, 0usize);
        let mut queue = VecDeque::from([center]);
        while let Some(v) = queue.pop_front() {
            let h = hops[&v];
            if h == depth {
                continue;
            }
            for &w in self.neighbor_ids(v) {
                if let std::collections::hash_map::Entry::Vacant(e) = hops.entry(w) {
                    e.insert(h + 1);
                    queue.push_back(w);
                }
            }
        }
        let mut members: Vec<usize> = hops.into_keys().collect();
        members.sort_unstable();
        members
    }

    /// Dense shortest-path distances from `source`; `INFINITY` where
    /// unreachable.
    pub fn distances(&self, source: usize) -> Vec<f64> {
        let mut scratch = DijkstraScratch::new(self.n_vertices());
        scratch.run(self, source, f64::INFINITY, None);
        scratch.dist.clone()
    }

    /// Distances from `source` as `(vertex, distance)` pairs sorted by vertex,
    /// omitting unreachable vertices and, when `cutoff` is given, vertices
    /// farther than it.
    pub fn geodesic_distances(&self, source: usize, cutoff: Option<f64>) -> Vec<(usize, f64)> {
        let mut scratch = DijkstraScratch::new(self.n_vertices());
        scratch.run(self, source, cutoff.unwrap_or(f64::INFINITY), None);
        let mut out: Vec<(usize, f64)> = scratch
            .settled
            .iter()
            .map(|&v| (v, scratch.dist[v]))
            .collect();
        out.sort_unstable_by_key(|p| p.0);
        out
    }

    /// Lower bound on the edge-graph diameter from farthest-point sampling.
    ///
    /// The first source is the far end of a double sweep from vertex 0; each
    /// further source is the vertex farthest from all previous sources.
    /// With `samples == n` every vertex is a source and the result is exact.
    /// Unreachable pairs are ignored.
    pub fn diameter(&self, samples: usize) -> f64 {
        let n = self.n_vertices();
        if n == 0 {
            return 0.0;
        }
        let samples = samples.clamp(1, n);
        let mut scratch = DijkstraScratch::new(n);
        scratch.run(self, 0, f64::INFINITY, None);
        let mut source = farthest_finite(&scratch.dist).0;

        let mut min_dist = vec![f64::INFINITY; n];
        let mut used = vec![false; n];
        let mut best = 0.0f64;
        for _ in 0..samples {
            used[source] = true;
            scratch.run(self, source, f64::INFINITY, None);
            best = best.max(farthest_finite(&scratch.dist).1);
            for (m, &d) in min_dist.iter_mut().zip(&scratch.dist) {
                *m = m.min(d);
            }
            // Next source: farthest from the chosen set; unreached vertices
            // (other components) come first.
            let mut next = None;
            let mut next_d = f64::NEG_INFINITY;
            for v in 0..n {
                if !used[v] && min_dist[v] > next_d {
                    next_d = min_dist[v];
                    next = Some(v);
                }
            }
            match next {
                Some(v) => source = v,
                None => break,
            }
        }
        best
    }

    /// Connected-component label per vertex, labels numbered by first vertex.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n_vertices();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in self.neighbor_ids(v) {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

fn farthest_finite(dist: &[f64]) -> (usize, f64) {
    let mut best = (0, 0.0);
    for (v, &d) in dist.iter().enumerate() {
        if d.is_finite() && d > best.1 {
            best = (v, d);
        }
    }
    best
}

#[derive(Debug, Copy, Clone, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, vertex)
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable Dijkstra state. Resetting costs only the vertices touched by the
/// previous run, so many truncated searches on a large graph stay cheap.
#[derive(Debug, Clone)]
pub struct DijkstraScratch {
    dist: Vec<f64>,
    done: Vec<bool>,
    touched: Vec<usize>,
    settled: Vec<usize>,
    heap: BinaryHeap<HeapItem>,
    wanted: Vec<bool>,
}

impl DijkstraScratch {
    pub fn new(n: usize) -> Self {
        DijkstraScratch {
            dist: vec![f64::INFINITY; n],
            done: vec![false; n],
            touched: Vec::new(),
            settled: Vec::new(),
            heap: BinaryHeap::new(),
            wanted: vec![false; n],
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
            self.done[v] = false;
        }
        self.touched.clear();
        self.settled.clear();
        self.heap.clear();
    }

    /// Runs Dijkstra from `source`, settling vertices up to distance
    /// `cutoff`. When `targets` is given the search stops as soon as all of
    /// them are settled.
    fn run(&mut self, graph: &SurfaceGraph, source: usize, cutoff: f64, targets: Option<&[usize]>) {
        self.reset();
        let mut remaining = 0usize;
        if let Some(ts) = targets {
            for &t in ts {
                if !self.wanted[t] {
                    self.wanted[t] = true;
                    remaining += 1;
                }
            }
        }
        self.dist[source] = 0.0;
        self.touched.push(source);
        self.heap.push(HeapItem {
            dist: 0.0,
            vertex: source,
        });
        while let Some(HeapItem { dist, vertex }) = self.heap.pop() {
            if self.done[vertex] {
                continue;
            }
            if dist > cutoff {
                break;
            }
            self.done[vertex] = true;
            self.settled.push(vertex);
            if targets.is_some() && self.wanted[vertex] {
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            for (w, len) in graph.neighbors(vertex) {
                let nd = dist + len;
                if nd < self.dist[w] {
                    if self.dist[w] == f64::INFINITY {
                        self.touched.push(w);
                    }
                    self.dist[w] = nd;
                    self.heap.push(HeapItem {
                        dist: nd,
                        vertex: w,
                    });
                }
            }
        }
        if let Some(ts) = targets {
            for &t in ts {
                self.wanted[t] = false;
            }
        }
    }

    /// Exact distances from `source` to each of `targets` (`INFINITY` when
    /// unreachable), stopping early once all are settled.
    pub fn distances_to(
        &mut self,
        graph: &SurfaceGraph,
        source: usize,
        targets: &[usize],
    ) -> Vec<f64> {
        self.run(graph, source, f64::INFINITY, Some(targets));
        targets
            .iter()
            .map(|&t| {
                if self.done[t] {
                    self.dist[t]
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }

    /// Full single-source distances written into `out`.
    pub fn distances_into(&mut self, graph: &SurfaceGraph, source: usize, out: &mut [f64]) {
        self.run(graph, source, f64::INFINITY, None);
        out.copy_from_slice(&self.dist);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> SurfaceGraph {
        let pts: Vec<Point> = (0..n).map(|i| Point::new(i as f64, 0.0, 0.0)).collect();
        let edges: Vec<[usize; 2]> = (0..n - 1).map(|i| [i, i + 1]).collect();
        SurfaceGraph::from_edges(&pts, &edges)
    }

    #[test]
    fn chain_distances() {
        let g = path(4);
        let d = g.distances(0);
        assert_eq!(d[3], 3.0);
        assert_eq!(d[0], 0.0);
        assert_eq!(g.diameter(4), 3.0);
        assert_eq!(g.diameter(1), 3.0);
    }

    #[test]
    fn cutoff_omits_far_vertices() {
        let g = path(6);
        let d = g.geodesic_distances(0, Some(2.5));
        assert_eq!(d, vec![(0, 0.0), (1, 1.0), (2, 2.0)]);
    }

    #[test]
    fn disconnected_is_infinite() {
        let pts: Vec<Point> = (0..4).map(|i| Point::new(i as f64, 0.0, 0.0)).collect();
        let g = SurfaceGraph::from_edges(&pts, &[[0, 1], [2, 3]]);
        assert!(g.distances(0)[2].is_infinite());
        assert_eq!(g.components(), vec![0, 0, 1, 1]);
        assert_eq!(g.diameter(4), 1.0);
    }

    #[test]
    fn ring_depth_zero_rejected() {
        assert!(path(3).ring(1, 0).is_err());
        assert_eq!(path(5).ring(2, 1).unwrap().members, vec![1, 2, 3]);
        assert_eq!(path(5).ring(0, 10).unwrap().members, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn early_exit_matches_full_run() {
        let g = path(10);
        let mut s = DijkstraScratch::new(10);
        assert_eq!(s.distances_to(&g, 4, &[1, 9, 4]), vec![3.0, 5.0, 0.0]);
        assert_eq!(s.distances_to(&g, 0, &[9]), vec![9.0]);
    }
}

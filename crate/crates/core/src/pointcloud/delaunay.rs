//! Incremental (Bowyer-Watson) Delaunay triangulation in the plane with
//! exact orientation and in-circle predicates.
//!
//! The hull is closed off with ghost triangles `[a, b, GHOST]`, one per hull
//! edge, oriented so that the outside lies to the left of `a -> b`. A ghost
//! is in conflict with a new point that lies strictly outside its edge, or
//! on the open edge itself. This keeps the cavity star-shaped for points
//! outside the current hull without any bounding super-triangle.

use robust::{incircle, orient2d, Coord};

const GHOST: usize = usize::MAX;

fn c(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

#[derive(Clone, Copy)]
struct Tri {
    v: [usize; 3],
    /// Circumcircle `(cx, cy, r^2)` used as a cheap rejection test, when the
    /// triangle is well-shaped enough for it to be trusted.
    circle: Option<(f64, f64, f64)>,
}

fn circumcircle(a: [f64; 2], b: [f64; 2], cc: [f64; 2]) -> Option<(f64, f64, f64)> {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (cc[0] - a[0], cc[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let scale = (bx * bx + by * by) * (cx * cx + cy * cy);
    if !(d.abs() > 1e-4 * scale.sqrt()) {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    Some((a[0] + ux, a[1] + uy, ux * ux + uy * uy))
}

fn in_conflict(pts: &[[f64; 2]], t: &Tri, p: [f64; 2]) -> bool {
    let [a, b, g] = t.v;
    if g == GHOST {
        let o = orient2d(c(pts[a]), c(pts[b]), c(p));
        if o > 0.0 {
            return true;
        }
        if o < 0.0 {
            return false;
        }
        // collinear: conflict only strictly inside the segment
        let (pa, pb) = (pts[a], pts[b]);
        let t = (p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1]);
        let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
        return t > 0.0 && t < len2;
    }
    if let Some((cx, cy, r2)) = t.circle {
        let d2 = (p[0] - cx).powi(2) + (p[1] - cy).powi(2);
        if d2 > r2 * (1.0 + 1e-6) {
            return false;
        }
    }
    incircle(c(pts[a]), c(pts[b]), c(pts[g]), c(p)) > 0.0
}

/// Delaunay triangles (counter-clockwise) of `pts`, inserted in the given
/// order. Exact duplicates are skipped. Returns an empty list when all
/// points are collinear.
pub fn delaunay(pts: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let n = pts.len();
    if n < 3 {
        return Vec::new();
    }
    let Some(i1) = (1..n).find(|&k| pts[k] != pts[0]) else {
        return Vec::new();
    };
    let Some(i2) = (1..n).find(|&k| orient2d(c(pts[0]), c(pts[i1]), c(pts[k])) != 0.0) else {
        return Vec::new();
    };
    let (a, mut b, mut cc) = (0, i1, i2);
    if orient2d(c(pts[a]), c(pts[b]), c(pts[cc])) < 0.0 {
        std::mem::swap(&mut b, &mut cc);
    }
    let mut tris: Vec<Option<Tri>> = Vec::new();
    let mut free: Vec<usize> = Vec::new();
    let push = |tris: &mut Vec<Option<Tri>>, free: &mut Vec<usize>, v: [usize; 3]| {
        let circle = if v[2] == GHOST {
            None
        } else {
            circumcircle(pts[v[0]], pts[v[1]], pts[v[2]])
        };
        let t = Some(Tri { v, circle });
        match free.pop() {
            Some(k) => tris[k] = t,
            None => tris.push(t),
        }
    };
    push(&mut tris, &mut free, [a, b, cc]);
    push(&mut tris, &mut free, [b, a, GHOST]);
    push(&mut tris, &mut free, [cc, b, GHOST]);
    push(&mut tris, &mut free, [a, cc, GHOST]);

    let mut inserted = vec![a, b, cc];
    let mut bad: Vec<usize> = Vec::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    for k in 1..n {
        if k == i1 || k == i2 {
            continue;
        }
        let p = pts[k];
        if inserted.iter().any(|&q| pts[q] == p) {
            continue;
        }
        bad.clear();
        for (idx, t) in tris.iter().enumerate() {
            if let Some(t) = t {
                if in_conflict(pts, t, p) {
                    bad.push(idx);
                }
            }
        }
        edges.clear();
        for &idx in &bad {
            let v = tris[idx].unwrap().v;
            for e in 0..3 {
                edges.push([v[e], v[(e + 1) % 3]]);
            }
        }
        let boundary: Vec<[usize; 2]> = edges
            .iter()
            .filter(|e| !edges.contains(&[e[1], e[0]]))
            .copied()
            .collect();
        for &idx in &bad {
            tris[idx] = None;
            free.push(idx);
        }
        for [u, v] in boundary {
            let tri = if u == GHOST {
                [v, k, GHOST]
            } else if v == GHOST {
                [k, u, GHOST]
            } else {
                [u, v, k]
            };
            push(&mut tris, &mut free, tri);
        }
        inserted.push(k);
    }
    let mut out: Vec<[usize; 3]> = tris
        .into_iter()
        .flatten()
        .filter(|t| t.v[2] != GHOST)
        .map(|t| t.v)
        .collect();
    out.sort_unstable();
    out
}

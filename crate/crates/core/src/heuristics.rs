//! Primal heuristics: Delaunay and value-greedy triangulations, flip edges
//! and the compact model restricted to a triangulation plus its flips.

use std::collections::HashMap;
use std::time::Duration;

use num_bigint::BigInt;

use crate::compact::{build_compact, extract_faces, solve_compact, CompactStatus};
use crate::error::Result;
use crate::geometry::{EdgeId, Point, PointSet};
use crate::instance::Instance;
use crate::partition::{Incumbent, Source};
use crate::polygon::ConvexPolygon;

/// Time cap of the restricted compact solve.
pub const RESTRICTED_CAP: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    /// Edge indices, ascending.
    pub edges: Vec<usize>,
    /// Canonical triangles, sorted.
    pub triangles: Vec<ConvexPolygon>,
    /// For each edge in `edges`, the triangles on its sides (one for hull
    /// edges).
    pub adjacency: HashMap<usize, Vec<usize>>,
}

impl Triangulation {
    pub fn from_edges(inst: &Instance, edges: &[usize]) -> Result<Self> {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        edges.dedup();
        let ids: Vec<EdgeId> = edges.iter().map(|&e| inst.edge(e)).collect();
        let triangles = extract_faces(&inst.ps, &inst.table, &ids)?;
        let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in tri.edges() {
                adjacency.entry(e.index(inst.n())).or_default().push(t);
            }
        }
        Ok(Triangulation {
            edges,
            triangles,
            adjacency,
        })
    }

    pub fn incumbent(&self, source: Source) -> Incumbent {
        Incumbent::new(self.triangles.clone(), source)
    }
}

/// Sign of the in-circle determinant for CCW `(a, b, c)`: positive when `d`
/// lies strictly inside the circumcircle.
pub fn incircle(a: Point, b: Point, c: Point, d: Point) -> i32 {
    let small = [a, b, c]
        .iter()
        .all(|p| (p.x - d.x).abs() < 1 << 28 && (p.y - d.y).abs() < 1 << 28);
    if small {
        let row = |p: Point| {
            let (x, y) = ((p.x - d.x) as i128, (p.y - d.y) as i128);
            (x, y, x * x + y * y)
        };
        let (ax, ay, al) = row(a);
        let (bx, by, bl) = row(b);
        let (cx, cy, cl) = row(c);
        let det = ax * (by * cl - bl * cy) - ay * (bx * cl - bl * cx) + al * (bx * cy - by * cx);
        det.signum() as i32
    } else {
        let row = |p: Point| {
            let (x, y) = (BigInt::from(p.x - d.x), BigInt::from(p.y - d.y));
            let l = &x * &x + &y * &y;
            (x, y, l)
        };
        let (ax, ay, al) = row(a);
        let (bx, by, bl) = row(b);
        let (cx, cy, cl) = row(c);
        let det = &ax * (&by * &cl - &bl * &cy) - &ay * (&bx * &cl - &bl * &cx) + &al * (&bx * &cy - &by * &cx);
        match det.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }
}

/// Triangle mesh keyed by directed edge: `(a, b) -> c` for CCW triangle
/// `(a, b, c)`.
struct Mesh {
    opp: HashMap<(usize, usize), usize>,
}

impl Mesh {
    fn add(&mut self, a: usize, b: usize, c: usize) {
        self.opp.insert((a, b), c);
        self.opp.insert((b, c), a);
        self.opp.insert((c, a), b);
    }

    fn remove(&mut self, a: usize, b: usize, c: usize) {
        self.opp.remove(&(a, b));
        self.opp.remove(&(b, c));
        self.opp.remove(&(c, a));
    }

    /// Flips `(a, b)` if its quadrilateral violates the empty-circle rule.
    /// Cocircular quadrilaterals keep the diagonal at the smallest index.
    fn legalize(&mut self, ps: &PointSet, a: usize, b: usize, stack: &mut Vec<(usize, usize)>) {
        let (Some(&c), Some(&d)) = (self.opp.get(&(a, b)), self.opp.get(&(b, a))) else {
            return;
        };
        let s = incircle(ps.point(a), ps.point(b), ps.point(c), ps.point(d));
        let lowest = a.min(b).min(c).min(d);
        let flip = s > 0 || (s == 0 && lowest != a && lowest != b);
        if !flip {
            return;
        }
        self.remove(a, b, c);
        self.remove(b, a, d);
        self.add(a, d, c);
        self.add(d, b, c);
        stack.extend([(a, d), (d, b), (b, c), (c, a)]);
    }
}

/// Delaunay triangulation by lexicographic incremental insertion and
/// Lawson flips.
pub fn delaunay(inst: &Instance) -> Triangulation {
    let ps = &inst.ps;
    let n = ps.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ps.point(i));
    let (p0, p1, p2) = (order[0], order[1], order[2]);
    let mut mesh = Mesh { opp: HashMap::new() };
    let mut hull = if ps.convex(p0, p1, p2) { vec![p0, p1, p2] } else { vec![p0, p2, p1] };
    mesh.add(hull[0], hull[1], hull[2]);
    let mut stack = Vec::new();
    for &p in &order[3..] {
        // The new point is lexicographically largest, so it is outside the
        // hull and the visible edges form one contiguous chain.
        let h = hull.len();
        let visible: Vec<bool> = (0..h).map(|t| !ps.convex(hull[t], hull[(t + 1) % h], p)).collect();
        let first = (0..h).find(|&t| visible[t] && !visible[(t + h - 1) % h]).expect("point outside hull");
        let mut t = first;
        let mut new_hull = Vec::with_capacity(h + 1);
        while visible[t % h] {
            let (u, v) = (hull[t % h], hull[(t + 1) % h]);
            mesh.add(u, p, v);
            stack.push((u, v));
            t += 1;
        }
        let last = t % h;
        // Keep hull[last] .. hull[first] and put p between.
        let mut s = last;
        loop {
            new_hull.push(hull[s]);
            if s == first {
                break;
            }
            s = (s + 1) % h;
        }
        new_hull.push(p);
        hull = new_hull;
        while let Some((a, b)) = stack.pop() {
            mesh.legalize(ps, a, b, &mut stack);
        }
    }
    let mut edges: Vec<usize> = mesh.opp.keys().map(|&(a, b)| inst.edge_index(a, b)).collect();
    edges.sort_unstable();
    edges.dedup();
    Triangulation::from_edges(inst, &edges).expect("Delaunay mesh is a triangulation")
}

/// Inserts edges by descending value (ties by edge index), skipping edges
/// that cross an inserted one.
pub fn greedy_triangulation(inst: &Instance, values: &[f64]) -> Triangulation {
    let mut order: Vec<usize> = (0..inst.edge_count()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut blocked = vec![false; inst.edge_count()];
    let mut edges = Vec::new();
    for e in order {
        if blocked[e] {
            continue;
        }
        edges.push(e);
        for &f in inst.crossings.crossing(e) {
            blocked[f as usize] = true;
        }
    }
    Triangulation::from_edges(inst, &edges).expect("maximal plane graph is a triangulation")
}

/// Opposite diagonals of interior edges whose two triangles form a convex
/// quadrilateral.
pub fn flip_edges(inst: &Instance, t: &Triangulation) -> Vec<usize> {
    let mut out = Vec::new();
    for &e in &t.edges {
        let Some(tris) = t.adjacency.get(&e) else { continue };
        if tris.len() != 2 {
            continue;
        }
        let (a, b) = inst.edge(e).endpoints();
        let third = |tri: &ConvexPolygon| {
            tri.vertices()
                .iter()
                .map(|&v| v as usize)
                .find(|&v| v != a && v != b)
                .unwrap()
        };
        let (c, d) = (third(&t.triangles[tris[0]]), third(&t.triangles[tris[1]]));
        // The flip is valid exactly when segment cd crosses ab.
        if inst.crossings.crosses(e, inst.edge_index(c, d)) {
            out.push(inst.edge_index(c, d));
        }
    }
    out.sort_unstable();
    out
}

/// Optimal partition using only triangulation and flip edges, by the
/// compact model. Returns the triangulation itself if the time cap hits
/// before an improvement is proven.
pub fn restricted_mcpp(inst: &Instance, t: &Triangulation, cap: Duration) -> (Incumbent, bool) {
    let mut allowed = t.edges.clone();
    allowed.extend(flip_edges(inst, t));
    let mut model = build_compact(inst, &allowed);
    let sol = solve_compact(&mut model, Some(cap), Some(t.edges.clone()));
    let ids: Vec<EdgeId> = sol.edges.iter().map(|&e| inst.edge(e)).collect();
    match extract_faces(&inst.ps, &inst.table, &ids) {
        Ok(faces) => (Incumbent::new(faces, Source::LpHeuristic), sol.status == CompactStatus::Optimal),
        Err(_) => (t.incumbent(Source::LpHeuristic), false),
    }
}

/// Restricted solve over all edges; exact for small instances.
pub fn restricted_over(inst: &Instance, allowed: &[usize], cap: Duration) -> Option<Vec<ConvexPolygon>> {
    let mut model = build_compact(inst, allowed);
    let sol = solve_compact(&mut model, Some(cap), None);
    if sol.status != CompactStatus::Optimal {
        return None;
    }
    let ids: Vec<EdgeId> = sol.edges.iter().map(|&e| inst.edge(e)).collect();
    extract_faces(&inst.ps, &inst.table, &ids).ok()
}

//! Edge-based compact model with a small LP branch-and-bound.
//!
//! One binary per allowed edge, minimising the edge count. Hull edges are
//! fixed, every interior vertex has degree at least three and every open
//! half-plane bounded by a line through an interior vertex `i` and another
//! point `j` contains an edge at `i` (the angular rows). Crossing pairs are
//! separated as cuts. The face count of an edge set is `edges - n + 1`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::{angular_cmp, EdgeId, Point, PointSet};
use crate::instance::Instance;
use crate::lp::{write_lp, Column, LpModel, LpStatus, NewRow, Relation, Row, Simplex};
use crate::polygon::{canonical_key, is_empty_convex, ConvexPolygon, EmptyTriangleTable};

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CompactModel<'a> {
    inst: &'a Instance,
    /// Allowed edge indices, ascending; column `c` is `allowed[c]`.
    allowed: Vec<usize>,
    col_of: Vec<Option<usize>>,
    lp: Simplex,
    cuts: HashSet<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactStatus {
    Optimal,
    TimeCap,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct CompactSolution {
    /// Edge indices of the best edge set found.
    pub edges: Vec<usize>,
    pub status: CompactStatus,
    /// Root LP value in edges.
    pub root_bound: f64,
    pub nodes: usize,
}

impl CompactSolution {
    pub fn faces(&self, n: usize) -> usize {
        self.edges.len() + 1 - n
    }
}

/// Builds the model over `allowed` (edge indices; hull edges are added if
/// missing).
pub fn build_compact<'a>(inst: &'a Instance, allowed: &[usize]) -> CompactModel<'a> {
    let n = inst.n();
    let mut allowed: Vec<usize> = allowed.iter().copied().chain(inst.hull_edges()).collect();
    allowed.sort_unstable();
    allowed.dedup();
    let mut col_of = vec![None; inst.edge_count()];
    for (c, &e) in allowed.iter().enumerate() {
        col_of[e] = Some(c);
    }

    let mut model = LpModel::new();
    let mut entries: Vec<Vec<(u32, f64)>> = vec![Vec::new(); allowed.len()];
    for i in inst.interior_points() {
        let incident: Vec<usize> = (0..n).filter(|&j| j != i && col_of[inst.edge_index(i, j)].is_some()).collect();
        for &j in &incident {
            // Allowed neighbours strictly left of i -> j.
            let support: Vec<usize> = incident
                .iter()
                .copied()
                .filter(|&k| k != j && inst.ps.convex(i, j, k))
                .collect();
            if support.is_empty() {
                continue;
            }
            let r = model.add_row(Row::new(Relation::Ge, 1.0).named(format!("ang_{i}_{j}"))) as u32;
            for k in support {
                entries[col_of[inst.edge_index(i, k)].unwrap()].push((r, 1.0));
            }
        }
        let r = model.add_row(Row::new(Relation::Ge, 3.0).named(format!("deg_{i}"))) as u32;
        for &j in &incident {
            entries[col_of[inst.edge_index(i, j)].unwrap()].push((r, 1.0));
        }
    }
    for (c, &e) in allowed.iter().enumerate() {
        let lo = if inst.is_hull_edge(e) { 1.0 } else { 0.0 };
        let (i, j) = inst.edge(e).endpoints();
        model.add_column(Column::new(1.0, lo, 1.0, std::mem::take(&mut entries[c])).named(format!("x_{i}_{j}")));
    }
    CompactModel {
        inst,
        allowed,
        col_of,
        lp: Simplex::new(model),
        cuts: HashSet::new(),
    }
}

impl<'a> CompactModel<'a> {
    pub fn allowed(&self) -> &[usize] {
        &self.allowed
    }

    pub fn export_lp(&self) -> String {
        write_lp(self.lp.model())
    }

    pub fn model(&self) -> &LpModel {
        self.lp.model()
    }

    /// Adds `x_e + x_f <= 1` for every allowed crossing pair violated by `x`.
    fn separate_crossings(&mut self, x: &[f64]) -> usize {
        let mut rows = Vec::new();
        for (c, &e) in self.allowed.iter().enumerate() {
            if x[c] <= INT_TOL {
                continue;
            }
            for &f in self.inst.crossings.crossing(e) {
                let f = f as usize;
                if f <= e {
                    continue;
                }
                let Some(d) = self.col_of[f] else { continue };
                if x[c] + x[d] > 1.0 + INT_TOL && self.cuts.insert((e as u32, f as u32)) {
                    let (a, b) = self.inst.edge(e).endpoints();
                    let (p, q) = self.inst.edge(f).endpoints();
                    rows.push(NewRow {
                        row: Row::new(Relation::Le, 1.0).named(format!("cross_{a}_{b}_{p}_{q}")),
                        entries: vec![(c as u32, 1.0), (d as u32, 1.0)],
                    });
                }
            }
        }
        let k = rows.len();
        if k > 0 {
            self.lp.add_rows(rows);
        }
        k
    }

    fn apply_fixings(&mut self, fix: &[(usize, bool)]) {
        for (c, &e) in self.allowed.iter().enumerate() {
            let lo = if self.inst.is_hull_edge(e) { 1.0 } else { 0.0 };
            if self.lp.bounds(c) != (lo, 1.0) {
                self.lp.set_bounds(c, lo, 1.0);
            }
        }
        for &(c, v) in fix {
            let b = if v { 1.0 } else { 0.0 };
            self.lp.set_bounds(c, b, b);
        }
    }

    /// Solves the node LP with crossing separation. Returns the value and
    /// the column values, or `None` when infeasible.
    fn solve_node(&mut self, fix: &[(usize, bool)]) -> Option<(f64, Vec<f64>)> {
        self.apply_fixings(fix);
        loop {
            let sol = self.lp.solve();
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return None,
                s => panic!("compact relaxation ended with {s:?}"),
            }
            if self.separate_crossings(&sol.x) == 0 {
                return Some((sol.objective, sol.x));
            }
        }
    }

    /// Root LP value in edges (crossing rows separated to completion).
    pub fn root_bound(&mut self) -> Option<f64> {
        self.solve_node(&[]).map(|(v, _)| v)
    }
}

struct OpenNode {
    bound: f64,
    order: usize,
    fix: Vec<(usize, bool)>,
}

impl PartialEq for OpenNode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenNode {}
impl PartialOrd for OpenNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenNode {
    // Max-heap: smallest bound first, newest node first on ties.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| self.order.cmp(&other.order))
    }
}

/// Exact branch-and-bound. `start` is an optional feasible edge set used as
/// the initial incumbent.
pub fn solve_compact(model: &mut CompactModel<'_>, cap: Option<Duration>, start: Option<Vec<usize>>) -> CompactSolution {
    let t0 = Instant::now();
    let mut best: Option<Vec<usize>> = start;
    let mut best_val = best.as_ref().map_or(f64::INFINITY, |b| b.len() as f64);
    let mut heap = BinaryHeap::new();
    let mut nodes = 0;
    let mut order = 0;
    let mut root_bound = f64::NAN;
    heap.push(OpenNode {
        bound: f64::NEG_INFINITY,
        order,
        fix: Vec::new(),
    });
    let mut timed_out = false;
    while let Some(node) = heap.pop() {
        if (node.bound - INT_TOL).ceil() >= best_val {
            continue;
        }
        if cap.is_some_and(|c| t0.elapsed() > c) {
            timed_out = true;
            break;
        }
        nodes += 1;
        let Some((val, x)) = model.solve_node(&node.fix) else {
            continue;
        };
        if nodes == 1 {
            root_bound = val;
        }
        if (val - INT_TOL).ceil() >= best_val {
            continue;
        }
        let frac = x
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > INT_TOL && v < 1.0 - INT_TOL)
            .min_by(|a, b| (a.1 - 0.5).abs().total_cmp(&(b.1 - 0.5).abs()).then(a.0.cmp(&b.0)));
        match frac {
            None => {
                let edges: Vec<usize> = x
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0.5)
                    .map(|(c, _)| model.allowed[c])
                    .collect();
                best_val = edges.len() as f64;
                best = Some(edges);
            }
            Some((c, _)) => {
                for v in [true, false] {
                    order += 1;
                    let mut fix = node.fix.clone();
                    fix.push((c, v));
                    if v {
                        // Crossing allowed edges cannot be present.
                        let e = model.allowed[c];
                        for &f in model.inst.crossings.crossing(e) {
                            if let Some(d) = model.col_of[f as usize] {
                                if !fix.iter().any(|&(g, _)| g == d) {
                                    fix.push((d, false));
                                }
                            }
                        }
                    }
                    heap.push(OpenNode {
                        bound: val,
                        order,
                        fix,
                    });
                }
            }
        }
    }
    let status = match (&best, timed_out) {
        (_, true) => CompactStatus::TimeCap,
        (None, false) => CompactStatus::Infeasible,
        (Some(_), false) => CompactStatus::Optimal,
    };
    CompactSolution {
        edges: best.unwrap_or_default(),
        status,
        root_bound,
        nodes,
    }
}

/// Bounded faces of the plane graph on `edges`, as canonical polygons.
/// Fails if a face is not an empty convex polygon.
pub fn extract_faces(ps: &PointSet, table: &EmptyTriangleTable, edges: &[EdgeId]) -> Result<Vec<ConvexPolygon>> {
    let n = ps.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        let (a, b) = e.endpoints();
        adj[a].push(b);
        adj[b].push(a);
    }
    for (v, list) in adj.iter_mut().enumerate() {
        let c = ps.point(v);
        let up = Point::new(c.x, c.y + 1);
        list.sort_by(|&a, &b| angular_cmp(c, up, ps.point(a), ps.point(b)));
        list.dedup();
    }
    let slot = |v: usize, u: usize, adj: &Vec<Vec<usize>>| adj[v].iter().position(|&w| w == u).unwrap();
    let mut used: Vec<Vec<bool>> = adj.iter().map(|l| vec![false; l.len()]).collect();
    let mut faces = Vec::new();
    for u0 in 0..n {
        for s0 in 0..adj[u0].len() {
            if used[u0][s0] {
                continue;
            }
            let mut cycle = Vec::new();
            let (mut u, mut s) = (u0, s0);
            while !used[u][s] {
                used[u][s] = true;
                cycle.push(u);
                let v = adj[u][s];
                // Next outgoing edge at v: clockwise neighbour of u.
                let back = slot(v, u, &adj);
                let deg = adj[v].len();
                s = (back + deg - 1) % deg;
                u = v;
            }
            let pts: Vec<Point> = cycle.iter().map(|&v| ps.point(v)).collect();
            if crate::geometry::twice_polygon_area(&pts) <= 0 {
                continue;
            }
            if !is_empty_convex(&cycle, ps, table) {
                return Err(Error::InvalidPartition(format!("face {cycle:?} is not an empty convex polygon")));
            }
            faces.push(canonical_key(&cycle, ps));
        }
    }
    faces.sort_unstable();
    Ok(faces)
}

//! Restricted master problem over polygon and edge columns.
//!
//! Column layout: the `E` edge variables come first (column `e` is edge index
//! `e`), polygon columns follow in insertion order. Row layout: the `W` wedge
//! rows, then the `E` linking rows, then degree cuts in separation order.
//!
//! A linking row reads `sum_{p : e in p} u_p - 2 x_e = 0`. Hull edges bound a
//! single polygon in any partition, so their coefficient is `-1` and the edge
//! variable is fixed to one.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::lp::{write_lp, Column, LpModel, LpStatus, NewRow, Relation, Row, Simplex};
use crate::polygon::ConvexPolygon;

/// Violation threshold for degree cuts.
pub const DEGREE_CUT_MARGIN: f64 = 0.1;

/// Duals split by row family.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector {
    /// Per wedge.
    pub alpha: Vec<f64>,
    /// Per edge (linking rows).
    pub beta: Vec<f64>,
    /// Per degree cut, in cut order.
    pub gamma: Vec<f64>,
}

impl DualVector {
    pub fn zeros(wedges: usize, edges: usize, cuts: usize) -> Self {
        DualVector {
            alpha: vec![0.0; wedges],
            beta: vec![0.0; edges],
            gamma: vec![0.0; cuts],
        }
    }

    /// Sum of absolute values over the polygon-relevant families.
    pub fn l1_alpha_beta(&self) -> f64 {
        self.alpha.iter().chain(&self.beta).map(|v| v.abs()).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Relaxation {
    pub status: LpStatus,
    /// Objective value; infinite unless optimal.
    pub z: f64,
    /// Optimal duals, or phase-one duals when infeasible.
    pub duals: DualVector,
    /// Edge values by edge index.
    pub x: Vec<f64>,
    /// Polygon values by polygon column order.
    pub u: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    Added(usize),
    Duplicate,
}

#[derive(Debug, Clone)]
pub struct RmpState {
    inst: Arc<Instance>,
    lp: Simplex,
    registry: HashMap<ConvexPolygon, usize>,
    polygons: Vec<ConvexPolygon>,
    cut_vertices: Vec<usize>,
    has_cut: Vec<bool>,
}

fn edge_name(inst: &Instance, e: usize) -> String {
    let (i, j) = inst.edge(e).endpoints();
    format!("x_{i}_{j}")
}

fn polygon_name(p: &ConvexPolygon) -> String {
    let mut s = String::from("u");
    for v in p.vertices() {
        s.push('_');
        s.push_str(&v.to_string());
    }
    s
}

impl RmpState {
    /// Builds the master with the given initial polygons, which must include
    /// every empty triangle.
    pub fn new(inst: Arc<Instance>, initial: &[ConvexPolygon]) -> Result<Self> {
        let triangles = inst.table.triangles(&inst.ps);
        {
            let have: std::collections::HashSet<&ConvexPolygon> = initial.iter().collect();
            if !triangles.iter().all(|t| have.contains(t)) {
                return Err(Error::MissingTriangles);
            }
        }
        let w = inst.wedges.len();
        let e_count = inst.edge_count();
        let mut model = LpModel::new();
        for g in 0..w {
            let id = inst.wedges.wedge(g);
            model.add_row(Row::new(Relation::Eq, 1.0).named(format!("w_{}_{}", id.owner, id.slot)));
        }
        for e in 0..e_count {
            let (i, j) = inst.edge(e).endpoints();
            model.add_row(Row::new(Relation::Eq, 0.0).named(format!("link_{i}_{j}")));
        }
        for e in 0..e_count {
            let hull = inst.is_hull_edge(e);
            let coef = if hull { -1.0 } else { -2.0 };
            let lo = if hull { 1.0 } else { 0.0 };
            model.add_column(Column::new(0.0, lo, 1.0, vec![((w + e) as u32, coef)]).named(edge_name(&inst, e)));
        }
        let mut rmp = RmpState {
            lp: Simplex::new(model),
            inst,
            registry: HashMap::new(),
            polygons: Vec::new(),
            cut_vertices: Vec::new(),
            has_cut: Vec::new(),
        };
        rmp.has_cut = vec![false; rmp.inst.n()];
        rmp.add_polygon_columns(initial.iter().cloned());
        Ok(rmp)
    }

    /// Master seeded with every empty triangle plus `extra`.
    pub fn with_triangles(inst: Arc<Instance>, extra: &[ConvexPolygon]) -> Self {
        let mut seed = inst.table.triangles(&inst.ps);
        seed.extend(extra.iter().cloned());
        Self::new(inst, &seed).expect("triangles are present by construction")
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.inst
    }

    pub fn lp(&self) -> &Simplex {
        &self.lp
    }

    pub fn lp_mut(&mut self) -> &mut Simplex {
        &mut self.lp
    }

    pub fn model(&self) -> &LpModel {
        self.lp.model()
    }

    pub fn export_lp(&self) -> String {
        write_lp(self.lp.model())
    }

    pub fn num_wedge_rows(&self) -> usize {
        self.inst.wedges.len()
    }

    pub fn num_edges(&self) -> usize {
        self.inst.edge_count()
    }

    pub fn polygons(&self) -> &[ConvexPolygon] {
        &self.polygons
    }

    pub fn contains(&self, p: &ConvexPolygon) -> bool {
        self.registry.contains_key(p)
    }

    pub fn cut_vertices(&self) -> &[usize] {
        &self.cut_vertices
    }

    fn polygon_column(&self, p: &ConvexPolygon) -> Column {
        let w = self.num_wedge_rows();
        let verts = p.vertex_indices();
        let mut entries: Vec<(u32, f64)> = self
            .inst
            .wedges
            .wedges_of_polygon(&verts)
            .into_iter()
            .map(|g| (g as u32, 1.0))
            .collect();
        for e in p.edges() {
            entries.push(((w + e.index(self.inst.n())) as u32, 1.0));
        }
        Column::new(1.0, 0.0, f64::INFINITY, entries).named(polygon_name(p))
    }

    pub fn add_polygon_column(&mut self, p: ConvexPolygon) -> AddOutcome {
        match self.add_polygon_columns(std::iter::once(p)) {
            0 => AddOutcome::Duplicate,
            _ => AddOutcome::Added(self.polygons.len() - 1),
        }
    }

    /// Adds the polygons not yet present; returns how many were new.
    pub fn add_polygon_columns(&mut self, ps: impl IntoIterator<Item = ConvexPolygon>) -> usize {
        let mut cols = Vec::new();
        for p in ps {
            if self.registry.contains_key(&p) {
                continue;
            }
            cols.push(self.polygon_column(&p));
            self.registry.insert(p.clone(), self.polygons.len());
            self.polygons.push(p);
        }
        let added = cols.len();
        if added > 0 {
            self.lp.add_columns(cols);
        }
        added
    }

    pub fn edge_bounds(&self, e: usize) -> (f64, f64) {
        self.lp.bounds(e)
    }

    pub fn set_edge_bounds(&mut self, e: usize, lo: f64, hi: f64) {
        if self.lp.bounds(e) != (lo, hi) {
            self.lp.set_bounds(e, lo, hi);
        }
    }

    pub fn solve_relaxation(&mut self) -> Relaxation {
        let sol = self.lp.solve();
        let w = self.num_wedge_rows();
        let e = self.num_edges();
        let duals = DualVector {
            alpha: sol.duals[..w].to_vec(),
            beta: sol.duals[w..w + e].to_vec(),
            gamma: sol.duals[w + e..].to_vec(),
        };
        Relaxation {
            status: sol.status,
            z: if sol.status == LpStatus::Optimal { sol.objective } else { f64::INFINITY },
            duals,
            x: sol.x[..e].to_vec(),
            u: sol.x[e..].to_vec(),
            iterations: sol.iterations,
        }
    }

    /// Adds `sum_j x_ij >= 3` for each interior point whose current degree is
    /// below `3 - DEGREE_CUT_MARGIN` and which has no cut yet.
    pub fn separate_degree_cuts(&mut self, x: &[f64]) -> usize {
        let n = self.inst.n();
        let violated: Vec<usize> = self
            .inst
            .interior_points()
            .filter(|&i| !self.has_cut[i])
            .filter(|&i| {
                let degree: f64 = (0..n).filter(|&j| j != i).map(|j| x[self.inst.edge_index(i, j)]).sum();
                degree < 3.0 - DEGREE_CUT_MARGIN
            })
            .collect();
        self.add_degree_cuts(&violated)
    }

    /// Adds the degree cut of each listed interior point that has none yet.
    pub fn add_degree_cuts(&mut self, vertices: &[usize]) -> usize {
        let n = self.inst.n();
        let mut rows = Vec::new();
        for &i in vertices {
            if self.has_cut[i] || self.inst.is_hull_vertex(i) {
                continue;
            }
            let entries = (0..n)
                .filter(|&j| j != i)
                .map(|j| (self.inst.edge_index(i, j) as u32, 1.0))
                .collect();
            rows.push(NewRow {
                row: Row::new(Relation::Ge, 3.0).named(format!("deg_{i}")),
                entries,
            });
            self.has_cut[i] = true;
            self.cut_vertices.push(i);
        }
        let count = rows.len();
        if count > 0 {
            self.lp.add_rows(rows);
        }
        count
    }

    /// Reduced cost of edge column `e` under `duals`.
    pub fn edge_reduced_cost(&self, e: usize, duals: &DualVector) -> f64 {
        let coef = if self.inst.is_hull_edge(e) { -1.0 } else { -2.0 };
        let (i, j) = self.inst.edge(e).endpoints();
        let mut d = -coef * duals.beta[e];
        for (t, &v) in self.cut_vertices.iter().enumerate() {
            if v == i || v == j {
                d -= duals.gamma[t];
            }
        }
        d
    }

    /// Lagrangian value of the non-polygon part: the master objective with
    /// all rows dualised by `duals` and the polygon columns left out. Adding
    /// `c * sum(u)` for the minimum polygon reduced cost `c <= 0` gives a
    /// valid lower bound on the node relaxation for any duals with
    /// non-negative cut components.
    pub fn lagrangian_value(&self, duals: &DualVector) -> f64 {
        let mut v: f64 = duals.alpha.iter().sum::<f64>() + 3.0 * duals.gamma.iter().sum::<f64>();
        for e in 0..self.num_edges() {
            let d = self.edge_reduced_cost(e, duals);
            let (lo, hi) = self.lp.bounds(e);
            v += if d >= 0.0 { d * lo } else { d * hi };
        }
        v
    }
}

/// `1 - alpha(wedges of p) - beta(edges of p)` computed from scratch.
pub fn polygon_reduced_cost(inst: &Instance, p: &ConvexPolygon, duals: &DualVector) -> f64 {
    let verts = p.vertex_indices();
    let a: f64 = inst.wedges.wedges_of_polygon(&verts).into_iter().map(|g| duals.alpha[g]).sum();
    let b: f64 = p.edges().map(|e| duals.beta[e.index(inst.n())]).sum();
    1.0 - a - b
}

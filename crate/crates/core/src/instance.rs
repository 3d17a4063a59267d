//! Precomputed geometric structures shared by every solver component.

use crate::geometry::{convex_hull, crossing_pairs, edge_count, Crossings, EdgeId, PointSet};
use crate::polygon::{EmptyTriangleTable, SweepOrders};
use crate::wedge::WedgeIndex;

#[derive(Debug, Clone)]
pub struct Instance {
    pub ps: PointSet,
    pub wedges: WedgeIndex,
    pub table: EmptyTriangleTable,
    pub sweep: SweepOrders,
    pub crossings: Crossings,
    /// Hull vertices in CCW order from the lexicographically smallest point.
    pub hull: Vec<usize>,
    on_hull: Vec<bool>,
    hull_edge: Vec<bool>,
}

impl Instance {
    pub fn new(ps: PointSet) -> Self {
        let n = ps.len();
        let hull = convex_hull(&ps);
        let mut on_hull = vec![false; n];
        let mut hull_edge = vec![false; edge_count(n)];
        for (t, &h) in hull.iter().enumerate() {
            on_hull[h] = true;
            hull_edge[EdgeId::new(h, hull[(t + 1) % hull.len()]).index(n)] = true;
        }
        Instance {
            wedges: WedgeIndex::build(&ps),
            table: EmptyTriangleTable::build(&ps),
            sweep: SweepOrders::build(&ps),
            crossings: crossing_pairs(&ps),
            hull,
            on_hull,
            hull_edge,
            ps,
        }
    }

    pub fn n(&self) -> usize {
        self.ps.len()
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.n())
    }

    #[inline]
    pub fn edge_index(&self, a: usize, b: usize) -> usize {
        EdgeId::new(a, b).index(self.n())
    }

    pub fn edge(&self, idx: usize) -> EdgeId {
        EdgeId::from_index(idx, self.n())
    }

    pub fn is_hull_vertex(&self, i: usize) -> bool {
        self.on_hull[i]
    }

    #[inline]
    pub fn is_hull_edge(&self, e: usize) -> bool {
        self.hull_edge[e]
    }

    pub fn interior_points(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(|&i| !self.on_hull[i])
    }

    pub fn hull_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edge_count()).filter(|&e| self.hull_edge[e])
    }

    /// Twice the area of the convex hull.
    pub fn hull_twice_area(&self) -> i128 {
        let pts: Vec<_> = self.hull.iter().map(|&h| self.ps.point(h)).collect();
        crate::geometry::twice_polygon_area(&pts)
    }
}

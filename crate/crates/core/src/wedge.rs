//! Wedges: the arrangement faces incident to each input point.
//!
//! Around a point `i` the other `n - 1` points are sorted CCW starting at the
//! ray pointing straight up. Consecutive rays bound exactly one face incident
//! to `i`; that face is the wedge between them. At hull vertices the sector
//! outside the hull angle is skipped, and the order is rotated so the first
//! ray follows that gap. Wedge ranges at hull vertices therefore never wrap.

use serde::{Deserialize, Serialize};

use crate::geometry::{ccw_order, convex_hull, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WedgeId {
    pub owner: u32,
    pub slot: u32,
    pub global: u32,
}

/// A run of consecutive wedge slots at one vertex. At interior vertices the
/// run may wrap past the last slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotRange {
    pub owner: usize,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
pub struct WedgeIndex {
    n: usize,
    on_hull: Vec<bool>,
    /// Rotated CCW neighbour order per vertex, row-major `n x (n-1)`.
    order: Vec<u32>,
    /// Position of `j` in the order around `i`, row-major `n x n`.
    pos: Vec<u32>,
    offset: Vec<usize>,
    total: usize,
}

impl WedgeIndex {
    pub fn build(ps: &PointSet) -> Self {
        let n = ps.len();
        let mut on_hull = vec![false; n];
        for h in convex_hull(ps) {
            on_hull[h] = true;
        }
        let mut order = Vec::with_capacity(n * (n - 1));
        let mut pos = vec![u32::MAX; n * n];
        let mut offset = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            let (mut ring, minus) = ccw_order(i, ps.reference_above(i), ps);
            ring.extend(minus);
            if on_hull[i] {
                // The single reflex gap (a, b) lies outside the hull angle.
                let m = ring.len();
                let gap = (0..m)
                    .find(|&s| {
                        let a = ring[s];
                        let b = ring[(s + 1) % m];
                        !ps.convex(i, a, b)
                    })
                    .expect("hull vertex without an exterior gap");
                ring.rotate_left((gap + 1) % m);
            }
            for (s, &j) in ring.iter().enumerate() {
                pos[i * n + j] = s as u32;
            }
            order.extend(ring.iter().map(|&j| j as u32));
            offset.push(total);
            total += if on_hull[i] { n - 2 } else { n - 1 };
        }
        offset.push(total);
        WedgeIndex {
            n,
            on_hull,
            order,
            pos,
            offset,
            total,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total wedge count W.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn is_hull(&self, i: usize) -> bool {
        self.on_hull[i]
    }

    pub fn wedge_count(&self, i: usize) -> usize {
        self.offset[i + 1] - self.offset[i]
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offset[i]
    }

    /// Neighbours of `i` in wedge order.
    pub fn ring(&self, i: usize) -> &[u32] {
        let m = self.n - 1;
        &self.order[i * m..(i + 1) * m]
    }

    /// Position of `j` in the ring around `i`.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> usize {
        self.pos[i * self.n + j] as usize
    }

    pub fn wedge(&self, global: usize) -> WedgeId {
        let owner = match self.offset.binary_search(&global) {
            Ok(mut k) => {
                // Skip owners with no wedges (never happens for n >= 3).
                while self.offset[k + 1] == global {
                    k += 1;
                }
                k
            }
            Err(k) => k - 1,
        };
        WedgeId {
            owner: owner as u32,
            slot: (global - self.offset[owner]) as u32,
            global: global as u32,
        }
    }

    /// The two rays (neighbour indices) bounding a wedge.
    pub fn wedge_rays(&self, w: WedgeId) -> (usize, usize) {
        let ring = self.ring(w.owner as usize);
        let s = w.slot as usize;
        (ring[s] as usize, ring[(s + 1) % ring.len()] as usize)
    }

    pub fn wedges(&self) -> impl Iterator<Item = WedgeId> + '_ {
        (0..self.total).map(move |g| self.wedge(g))
    }

    /// Slots at `v` inside the corner whose boundary runs CCW from the ray
    /// `v -> next` to the ray `v -> prev` (the interior angle of a CCW polygon
    /// with neighbours `prev`, `next` at `v`).
    #[inline]
    pub fn corner_range(&self, v: usize, next: usize, prev: usize) -> SlotRange {
        let m = self.n - 1;
        let a = self.position(v, next);
        let b = self.position(v, prev);
        SlotRange {
            owner: v,
            start: a,
            len: (b + m - a) % m,
        }
    }

    /// Wedge ranges covered by the empty triangle `(k, l, m)`, one per vertex,
    /// in CCW vertex order starting at the smallest index.
    pub fn wedge_ranges_of_triangle(&self, ps: &PointSet, k: usize, l: usize, m: usize) -> [SlotRange; 3] {
        let (a, b, c) = if ps.convex(k, l, m) { (k, l, m) } else { (k, m, l) };
        debug_assert!(
            (0..ps.len())
                .filter(|&p| p != a && p != b && p != c)
                .all(|p| !(ps.convex(a, b, p) && ps.convex(b, c, p) && ps.convex(c, a, p))),
            "triangle ({a}, {b}, {c}) is not empty"
        );
        let mut r = [
            self.corner_range(a, b, c),
            self.corner_range(b, c, a),
            self.corner_range(c, a, b),
        ];
        let first = (0..3).min_by_key(|&i| r[i].owner).unwrap();
        r.rotate_left(first);
        r
    }

    /// Global ids of the wedges in a slot range.
    pub fn range_globals(&self, r: SlotRange) -> impl Iterator<Item = usize> + '_ {
        let m = self.n - 1;
        let base = self.offset[r.owner];
        (0..r.len).map(move |t| base + (r.start + t) % m)
    }

    /// Global ids of the wedges covered by a convex polygon given in CCW order.
    pub fn wedges_of_polygon(&self, vertices: &[usize]) -> Vec<usize> {
        let t = vertices.len();
        let mut out = Vec::new();
        for idx in 0..t {
            let v = vertices[idx];
            let next = vertices[(idx + 1) % t];
            let prev = vertices[(idx + t - 1) % t];
            out.extend(self.range_globals(self.corner_range(v, next, prev)));
        }
        out.sort_unstable();
        out
    }

    /// Number of wedges a CCW convex polygon covers, without materialising them.
    pub fn covered_count(&self, vertices: &[usize]) -> usize {
        let t = vertices.len();
        (0..t)
            .map(|idx| {
                self.corner_range(vertices[idx], vertices[(idx + 1) % t], vertices[(idx + t - 1) % t])
                    .len
            })
            .sum()
    }
}

//! Empty convex polygons: emptiness queries, canonical form and exhaustive
//! enumeration of the polygon universe.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angular_cmp, convex_hull, EdgeId, Point, PointSet};
use crate::par;

/// Default cap on the number of enumerated polygons.
pub const DEFAULT_POLYGON_CAP: usize = 5_000_000;

/// Empty convex polygon, vertices CCW with the smallest index first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<u32>,
}

impl ConvexPolygon {
    /// Wraps an already canonical vertex list.
    pub fn from_canonical(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.len() >= 3);
        debug_assert!(vertices.iter().all(|&v| v >= vertices[0]));
        ConvexPolygon { vertices }
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn vertex_indices(&self) -> Vec<usize> {
        self.vertices.iter().map(|&v| v as usize).collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        let t = self.vertices.len();
        (0..t).map(move |i| EdgeId::new(self.vertices[i] as usize, self.vertices[(i + 1) % t] as usize))
    }

    pub fn has_edge(&self, e: EdgeId) -> bool {
        self.edges().any(|f| f == e)
    }

    pub fn points(&self, ps: &PointSet) -> Vec<Point> {
        self.vertices.iter().map(|&v| ps.point(v as usize)).collect()
    }
}

impl fmt::Display for ConvexPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Canonical form of a convex polygon given in either orientation and any
/// rotation: CCW, rotated so the smallest index comes first.
pub fn canonical_key(vertices: &[usize], ps: &PointSet) -> ConvexPolygon {
    let mut v: Vec<u32> = vertices.iter().map(|&x| x as u32).collect();
    let pts: Vec<Point> = vertices.iter().map(|&i| ps.point(i)).collect();
    if crate::geometry::twice_polygon_area(&pts) < 0 {
        v.reverse();
    }
    let first = (0..v.len()).min_by_key(|&i| v[i]).unwrap();
    v.rotate_left(first);
    ConvexPolygon { vertices: v }
}

/// Bit table answering "is triangle (k, l, m) empty" for any vertex order.
#[derive(Debug, Clone)]
pub struct EmptyTriangleTable {
    n: usize,
    bits: Vec<u64>,
}

impl EmptyTriangleTable {
    /// Builds the table in O(n^3) from below-segment counts.
    ///
    /// Points are ordered lexicographically, which acts as an infinitesimal
    /// rotation making all abscissae distinct. For `a < b < c` in that order
    /// the number of points inside the triangle is a signed combination of
    /// the counts of points strictly between and strictly below each side.
    pub fn build(ps: &PointSet) -> Self {
        let n = ps.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| ps.point(i));
        // below[a * n + c]: points strictly between a and c (lex order) and
        // strictly below the segment, for rank(a) < rank(c).
        let below: Vec<Vec<u32>> = par::map_range(n, |ra| {
            let a = order[ra];
            let mut row = vec![0u32; n];
            for rc in ra + 1..n {
                let c = order[rc];
                row[c] = (ra + 1..rc)
                    .filter(|&rb| !ps.convex(a, c, order[rb]))
                    .count() as u32;
            }
            row
        });
        let mut table = EmptyTriangleTable {
            n,
            bits: vec![0; (n * n * n).div_ceil(64)],
        };
        for ra in 0..n {
            let a = order[ra];
            for rb in ra + 1..n {
                let b = order[rb];
                for &c in &order[rb + 1..] {
                    let ac = below[ra][c] as i64;
                    let ab = below[ra][b] as i64;
                    let bc = below[rb][c] as i64;
                    let inside = if ps.convex(a, c, b) {
                        ab + bc - ac
                    } else {
                        ac - ab - bc - 1
                    };
                    debug_assert!(inside >= 0);
                    if inside == 0 {
                        table.set_all(a, b, c);
                    }
                }
            }
        }
        table
    }

    /// Reference construction by direct point-in-triangle scans.
    pub fn build_naive(ps: &PointSet) -> Self {
        let n = ps.len();
        let mut table = EmptyTriangleTable {
            n,
            bits: vec![0; (n * n * n).div_ceil(64)],
        };
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if triangle_is_empty_scan(ps, a, b, c) {
                        table.set_all(a, b, c);
                    }
                }
            }
        }
        table
    }

    fn set_all(&mut self, a: usize, b: usize, c: usize) {
        for (x, y, z) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            let bit = (x * self.n + y) * self.n + z;
            self.bits[bit / 64] |= 1 << (bit % 64);
        }
    }

    #[inline]
    pub fn is_empty(&self, k: usize, l: usize, m: usize) -> bool {
        let bit = (k * self.n + l) * self.n + m;
        self.bits[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of empty triangles (unordered).
    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 6
    }

    /// All empty triangles as canonical polygons, ordered by vertex triple.
    pub fn triangles(&self, ps: &PointSet) -> Vec<ConvexPolygon> {
        let n = self.n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if self.is_empty(a, b, c) {
                        out.push(canonical_key(&[a, b, c], ps));
                    }
                }
            }
        }
        out
    }
}

/// Whether no point of `ps` lies strictly inside triangle `(a, b, c)`.
pub fn triangle_is_empty_scan(ps: &PointSet, a: usize, b: usize, c: usize) -> bool {
    let (a, b, c) = if ps.convex(a, b, c) { (a, b, c) } else { (a, c, b) };
    (0..ps.len())
        .filter(|&p| p != a && p != b && p != c)
        .all(|p| !(ps.convex(a, b, p) && ps.convex(b, c, p) && ps.convex(c, a, p)))
}

/// Whether the vertex sequence is a CCW strictly convex polygon with no input
/// point in its interior.
pub fn is_empty_convex(vertices: &[usize], ps: &PointSet, table: &EmptyTriangleTable) -> bool {
    let t = vertices.len();
    if t < 3 {
        return false;
    }
    let mut seen = vertices.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != t {
        return false;
    }
    // Same cyclic sequence as the hull of the vertex set: convex position and
    // CCW, which rules out self-crossing orders with only left turns.
    let sub = PointSet::new(vertices.iter().map(|&v| ps.point(v)).collect())
        .expect("subset of a validated point set");
    let hull = convex_hull(&sub);
    if hull.len() != t {
        return false;
    }
    let start = hull[0];
    if (0..t).any(|i| hull[i] != (start + i) % t) {
        return false;
    }
    (1..t - 1).all(|i| table.is_empty(vertices[0], vertices[i], vertices[i + 1]))
}

/// For each point `k`, the lexicographically greater points sorted CCW
/// around `k` starting from the downward direction. A convex polygon whose
/// lexicographically least vertex is `k` lists its other vertices in this
/// order.
#[derive(Debug, Clone)]
pub struct SweepOrders {
    n: usize,
    lists: Vec<Vec<u32>>,
    rank: Vec<u32>,
}

impl SweepOrders {
    pub fn build(ps: &PointSet) -> Self {
        let n = ps.len();
        let mut lists = Vec::with_capacity(n);
        let mut rank = vec![u32::MAX; n * n];
        for k in 0..n {
            let pk = ps.point(k);
            let down = Point::new(pk.x, pk.y - 1);
            let mut l: Vec<u32> = (0..n)
                .filter(|&j| ps.point(j) > pk)
                .map(|j| j as u32)
                .collect();
            l.sort_by(|&a, &b| angular_cmp(pk, down, ps.point(a as usize), ps.point(b as usize)));
            for (r, &j) in l.iter().enumerate() {
                rank[k * n + j as usize] = r as u32;
            }
            lists.push(l);
        }
        SweepOrders { n, lists, rank }
    }

    #[inline]
    pub fn list(&self, k: usize) -> &[u32] {
        &self.lists[k]
    }

    /// Rank of `j` in the list of `k`, or `u32::MAX` when `j` is not in it.
    #[inline]
    pub fn rank(&self, k: usize, j: usize) -> u32 {
        self.rank[k * self.n + j]
    }
}

/// Enumerates every empty convex polygon exactly once, canonical form.
///
/// Chains are grown from their lexicographically least vertex in sweep order,
/// the same state space the pricing recurrence walks. Fails with
/// `CapExceeded` once more than `limit` polygons exist.
pub fn enumerate_polyset(
    ps: &PointSet,
    table: &EmptyTriangleTable,
    limit: usize,
) -> Result<Vec<ConvexPolygon>> {
    let sweep = SweepOrders::build(ps);
    let parts: Vec<Option<Vec<ConvexPolygon>>> = par::map_range(ps.len(), |k| {
        let mut out = Vec::new();
        let mut chain = vec![k as u32];
        let list = sweep.list(k);
        for (r1, &v1) in list.iter().enumerate() {
            chain.push(v1);
            for &v2 in &list[r1 + 1..] {
                if !table.is_empty(k, v1 as usize, v2 as usize) {
                    continue;
                }
                chain.push(v2);
                if !extend_chain(ps, table, &sweep, &mut chain, &mut out, limit) {
                    return None;
                }
                chain.pop();
            }
            chain.pop();
        }
        Some(out)
    });
    let mut all = Vec::new();
    for part in parts {
        let part = part.ok_or(Error::CapExceeded(limit))?;
        all.extend(part);
        if all.len() > limit {
            return Err(Error::CapExceeded(limit));
        }
    }
    all.sort_unstable();
    Ok(all)
}

fn extend_chain(
    ps: &PointSet,
    table: &EmptyTriangleTable,
    sweep: &SweepOrders,
    chain: &mut Vec<u32>,
    out: &mut Vec<ConvexPolygon>,
    limit: usize,
) -> bool {
    let verts: Vec<usize> = chain.iter().map(|&v| v as usize).collect();
    out.push(canonical_key(&verts, ps));
    if out.len() > limit {
        return false;
    }
    let k = chain[0] as usize;
    let t = chain.len();
    let (o, l) = (chain[t - 2] as usize, chain[t - 1] as usize);
    let rl = sweep.rank(k, l) as usize;
    for &m in &sweep.list(k)[rl + 1..] {
        let m = m as usize;
        if ps.convex(o, l, m) && table.is_empty(k, l, m) {
            chain.push(m as u32);
            if !extend_chain(ps, table, sweep, chain, out, limit) {
                return false;
            }
            chain.pop();
        }
    }
    true
}

//! Brute-force ground truth for tiny instances.
//!
//! Nothing here uses the sweep orders, the pricing recurrence or the wedge
//! ranges: polygons come from subset enumeration, wedge coverage from cone
//! tests, and arrangement faces from exact rational geometry.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, twice_polygon_area, Point, PointSet};
use crate::instance::Instance;
use crate::polygon::{canonical_key, ConvexPolygon};

pub const OPTIMUM_CAP: usize = 14;
pub const ARRANGEMENT_CAP: usize = 8;

fn strictly_inside_convex(ps: &PointSet, ccw: &[usize], p: usize) -> bool {
    let t = ccw.len();
    (0..t).all(|i| ps.convex(ccw[i], ccw[(i + 1) % t], p))
}

/// Every empty convex polygon, by checking each vertex subset.
pub fn polygons_by_subsets(ps: &PointSet) -> Vec<ConvexPolygon> {
    let n = ps.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() < 3 {
            continue;
        }
        let verts: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let sub = PointSet::new_unchecked(verts.iter().map(|&v| ps.point(v)).collect());
        let hull = convex_hull(&sub);
        if hull.len() != verts.len() {
            continue;
        }
        let ccw: Vec<usize> = hull.iter().map(|&h| verts[h]).collect();
        if (0..n).any(|p| mask >> p & 1 == 0 && strictly_inside_convex(ps, &ccw, p)) {
            continue;
        }
        out.push(canonical_key(&ccw, ps));
    }
    out.sort_unstable();
    out
}

/// Whether `p` lies in the closed cone at `apex` spanned CCW from `from` to
/// `to` (opening angle below pi).
fn in_cone(ps: &PointSet, apex: usize, from: usize, to: usize, p: usize) -> bool {
    use crate::geometry::Orientation::*;
    ps.orient(apex, from, p) != Negative && ps.orient(apex, p, to) != Negative
}

/// Global ids of the wedges covered by `poly`, found by cone tests against
/// the wedge rays.
pub fn covered_wedges_by_cones(inst: &Instance, poly: &ConvexPolygon) -> Vec<usize> {
    let v = poly.vertex_indices();
    let t = v.len();
    let mut out = Vec::new();
    for w in inst.wedges.wedges() {
        let owner = w.owner as usize;
        let Some(idx) = v.iter().position(|&x| x == owner) else { continue };
        let next = v[(idx + 1) % t];
        let prev = v[(idx + t - 1) % t];
        let (a, b) = inst.wedges.wedge_rays(w);
        if in_cone(&inst.ps, owner, next, prev, a) && in_cone(&inst.ps, owner, next, prev, b) {
            out.push(w.global as usize);
        }
    }
    out
}

type Bits = Vec<u64>;

fn bits_of(ids: &[usize], words: usize) -> Bits {
    let mut b = vec![0u64; words];
    for &i in ids {
        b[i / 64] |= 1 << (i % 64);
    }
    b
}

struct Search<'a> {
    cover: &'a [Bits],
    by_wedge: &'a [Vec<usize>],
    max_cover: usize,
    total: usize,
    best: usize,
    best_set: Vec<usize>,
    chosen: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, covered: &mut Bits, count: usize) {
        let Some(w) = (0..self.total).find(|&w| covered[w / 64] >> (w % 64) & 1 == 0) else {
            if self.chosen.len() < self.best {
                self.best = self.chosen.len();
                self.best_set = self.chosen.clone();
            }
            return;
        };
        let left = self.total - count;
        let need = left.div_ceil(self.max_cover);
        if self.chosen.len() + need >= self.best {
            return;
        }
        for &p in &self.by_wedge[w] {
            let c = &self.cover[p];
            if c.iter().zip(covered.iter()).any(|(a, b)| a & b != 0) {
                continue;
            }
            let add: usize = c.iter().map(|x| x.count_ones() as usize).sum();
            for (a, b) in covered.iter_mut().zip(c) {
                *a |= b;
            }
            self.chosen.push(p);
            self.run(covered, count + add);
            self.chosen.pop();
            for (a, b) in covered.iter_mut().zip(c) {
                *a &= !b;
            }
        }
    }
}

/// Exact optimum by exact cover of the wedges, for `n <= OPTIMUM_CAP`.
pub fn brute_force_optimum(inst: &Instance) -> Result<(usize, Vec<ConvexPolygon>)> {
    let n = inst.n();
    if n > OPTIMUM_CAP {
        return Err(Error::CapExceeded(OPTIMUM_CAP));
    }
    let polys = polygons_by_subsets(&inst.ps);
    let total = inst.wedges.len();
    let words = total.div_ceil(64);
    let covers: Vec<Vec<usize>> = polys.iter().map(|p| covered_wedges_by_cones(inst, p)).collect();
    let cover: Vec<Bits> = covers.iter().map(|c| bits_of(c, words)).collect();
    let mut by_wedge = vec![Vec::new(); total];
    for (p, c) in covers.iter().enumerate() {
        for &w in c {
            by_wedge[w].push(p);
        }
    }
    // Larger polygons first finds good solutions early.
    for list in &mut by_wedge {
        list.sort_by_key(|&p| (std::cmp::Reverse(covers[p].len()), p));
    }
    let h = inst.hull.len();
    let mut s = Search {
        cover: &cover,
        by_wedge: &by_wedge,
        max_cover: covers.iter().map(Vec::len).max().unwrap_or(1),
        total,
        best: 2 * (n - h) + h - 1,
        best_set: Vec::new(),
        chosen: Vec::new(),
    };
    let mut covered = vec![0u64; words];
    s.run(&mut covered, 0);
    let partition: Vec<ConvexPolygon> = s.best_set.iter().map(|&p| polys[p].clone()).collect();
    let area: i128 = partition.iter().map(|p| twice_polygon_area(&p.points(&inst.ps))).sum();
    if area != inst.hull_twice_area() {
        return Err(Error::InvalidPartition("oracle partition misses area".into()));
    }
    let mut partition = partition;
    partition.sort_unstable();
    Ok((s.best, partition))
}

pub type RPoint = (BigRational, BigRational);

#[derive(Debug, Clone)]
pub struct ArrangementFace {
    /// Boundary vertices, CCW.
    pub boundary: Vec<RPoint>,
    /// Input points on the boundary.
    pub incident: Vec<usize>,
    /// A point strictly inside the face.
    pub sample: RPoint,
}

#[derive(Debug, Clone)]
pub struct Arrangement {
    pub vertices: usize,
    pub edges: usize,
    /// Bounded faces.
    pub faces: Vec<ArrangementFace>,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn rpoint(p: Point) -> RPoint {
    (rat(p.x), rat(p.y))
}

fn rcross(o: &RPoint, a: &RPoint, b: &RPoint) -> BigRational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

/// Angular order of direction vectors starting at the positive x axis.
fn dir_cmp(a: &RPoint, b: &RPoint) -> std::cmp::Ordering {
    let half = |d: &RPoint| -> u8 {
        if d.1.is_positive() || (d.1.is_zero() && d.0.is_positive()) {
            0
        } else {
            1
        }
    };
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    let c = &a.0 * &b.1 - &a.1 * &b.0;
    if c.is_positive() {
        std::cmp::Ordering::Less
    } else if c.is_negative() {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Equal
    }
}

/// Bounded faces of the arrangement of all segments, for `n <= ARRANGEMENT_CAP`.
pub fn brute_force_arrangement_faces(ps: &PointSet) -> Result<Arrangement> {
    let n = ps.len();
    if n > ARRANGEMENT_CAP {
        return Err(Error::CapExceeded(ARRANGEMENT_CAP));
    }
    let segs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut verts: Vec<RPoint> = (0..n).map(|i| rpoint(ps.point(i))).collect();
    let find_or_add = |verts: &mut Vec<RPoint>, p: RPoint| -> usize {
        if let Some(i) = verts.iter().position(|q| *q == p) {
            i
        } else {
            verts.push(p);
            verts.len() - 1
        }
    };
    // Points on each segment, by parameter along it.
    let mut on_seg: Vec<Vec<(BigRational, usize)>> = segs.iter().map(|&(i, j)| vec![(rat(0), i), (rat(1), j)]).collect();
    for a in 0..segs.len() {
        for b in a + 1..segs.len() {
            let (p, q) = (rpoint(ps.point(segs[a].0)), rpoint(ps.point(segs[a].1)));
            let (r, s) = (rpoint(ps.point(segs[b].0)), rpoint(ps.point(segs[b].1)));
            let d1 = (&q.0 - &p.0, &q.1 - &p.1);
            let d2 = (&s.0 - &r.0, &s.1 - &r.1);
            let den = &d1.0 * &d2.1 - &d1.1 * &d2.0;
            if den.is_zero() {
                continue;
            }
            let w = (&r.0 - &p.0, &r.1 - &p.1);
            let t = (&w.0 * &d2.1 - &w.1 * &d2.0) / &den;
            let u = (&w.0 * &d1.1 - &w.1 * &d1.0) / &den;
            let zero = rat(0);
            let one = rat(1);
            if t > zero && t < one && u > zero && u < one {
                let x = (&p.0 + &t * &d1.0, &p.1 + &t * &d1.1);
                let id = find_or_add(&mut verts, x);
                on_seg[a].push((t, id));
                on_seg[b].push((u, id));
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for list in &mut on_seg {
        list.sort_by(|a, b| a.0.cmp(&b.0));
        for w in list.windows(2) {
            let (a, b) = (w[0].1, w[1].1);
            edges.push((a.min(b), a.max(b)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let nv = verts.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for (v, list) in adj.iter_mut().enumerate() {
        let o = verts[v].clone();
        list.sort_by(|&a, &b| {
            let da = (&verts[a].0 - &o.0, &verts[a].1 - &o.1);
            let db = (&verts[b].0 - &o.0, &verts[b].1 - &o.1);
            dir_cmp(&da, &db)
        });
    }
    let mut used: Vec<Vec<bool>> = adj.iter().map(|l| vec![false; l.len()]).collect();
    let mut faces = Vec::new();
    let mut total_faces = 0;
    for u0 in 0..nv {
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
                let back = adj[v].iter().position(|&w| w == u).unwrap();
                let deg = adj[v].len();
                s = (back + deg - 1) % deg;
                u = v;
            }
            total_faces += 1;
            let pts: Vec<RPoint> = cycle.iter().map(|&v| verts[v].clone()).collect();
            let mut area = rat(0);
            for i in 0..pts.len() {
                let (a, b) = (&pts[i], &pts[(i + 1) % pts.len()]);
                area += &a.0 * &b.1 - &b.0 * &a.1;
            }
            if !area.is_positive() {
                continue;
            }
            // Faces are convex; the centroid of three consecutive corners
            // lies inside.
            let k = pts.len();
            let three = rat(3);
            let mut sample = None;
            for i in 0..k {
                let (a, b, c) = (&pts[i], &pts[(i + 1) % k], &pts[(i + 2) % k]);
                if rcross(a, b, c).is_positive() {
                    sample = Some(((&a.0 + &b.0 + &c.0) / &three, (&a.1 + &b.1 + &c.1) / &three));
                    break;
                }
            }
            let mut incident: Vec<usize> = cycle.iter().copied().filter(|&v| v < n).collect();
            incident.sort_unstable();
            faces.push(ArrangementFace {
                boundary: pts,
                incident,
                sample: sample.expect("bounded face with positive area has a convex corner"),
            });
        }
    }
    // Euler on the connected plane graph, outer face included.
    if nv as i64 - edges.len() as i64 + total_faces as i64 != 2 {
        return Err(Error::InvalidPartition("arrangement fails the Euler check".into()));
    }
    Ok(Arrangement {
        vertices: nv,
        edges: edges.len(),
        faces,
    })
}

/// Whether the rational point lies strictly inside the CCW convex polygon.
pub fn sample_inside(ps: &PointSet, poly: &ConvexPolygon, s: &RPoint) -> bool {
    let v = poly.vertex_indices();
    let t = v.len();
    (0..t).all(|i| rcross(&rpoint(ps.point(v[i])), &rpoint(ps.point(v[(i + 1) % t])), s).is_positive())
}

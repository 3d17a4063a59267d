//! Exact integer predicates and orderings over planar point sets.
//!
//! Every predicate reduces to the sign of a 2x2 determinant. Coordinates are
//! capped at 2^30 in magnitude, so differences fit in 32 bits and products in
//! 64 bits; the determinant is evaluated in `i128` regardless.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest accepted coordinate magnitude.
pub const COORD_LIMIT: i64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Negative,
    Zero,
    Positive,
}

impl Orientation {
    pub fn is_positive(self) -> bool {
        self == Orientation::Positive
    }

    fn from_sign(v: i128) -> Self {
        match v.cmp(&0) {
            Ordering::Less => Orientation::Negative,
            Ordering::Equal => Orientation::Zero,
            Ordering::Greater => Orientation::Positive,
        }
    }
}

impl std::ops::Neg for Orientation {
    type Output = Orientation;
    fn neg(self) -> Orientation {
        match self {
            Orientation::Negative => Orientation::Positive,
            Orientation::Zero => Orientation::Zero,
            Orientation::Positive => Orientation::Negative,
        }
    }
}

#[inline]
fn cross(o: Point, a: Point, b: Point) -> i128 {
    let ax = (a.x - o.x) as i128;
    let ay = (a.y - o.y) as i128;
    let bx = (b.x - o.x) as i128;
    let by = (b.y - o.y) as i128;
    ax * by - ay * bx
}

/// Sign of the turn k -> l -> m, i.e. of (l - k) x (m - l).
#[inline]
pub fn orientation(k: Point, l: Point, m: Point) -> Orientation {
    Orientation::from_sign(cross(k, l, m))
}

/// `true` when k -> l -> m is a strict left turn.
#[inline]
pub fn convex(k: Point, l: Point, m: Point) -> bool {
    cross(k, l, m) > 0
}

/// Twice the signed area of the triangle.
#[inline]
pub fn twice_area(a: Point, b: Point, c: Point) -> i128 {
    cross(a, b, c)
}

/// Twice the signed area of a polygon given in vertex order.
pub fn twice_polygon_area(pts: &[Point]) -> i128 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            a.x as i128 * b.y as i128 - b.x as i128 * a.y as i128
        })
        .sum()
}

/// Unordered pair of point indices, stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub i: u32,
    pub j: u32,
}

impl EdgeId {
    pub fn new(a: usize, b: usize) -> Self {
        assert_ne!(a, b, "degenerate edge");
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        EdgeId {
            i: i as u32,
            j: j as u32,
        }
    }

    pub fn endpoints(self) -> (usize, usize) {
        (self.i as usize, self.j as usize)
    }

    pub fn has_endpoint(self, v: usize) -> bool {
        self.i as usize == v || self.j as usize == v
    }

    /// Dense index in `0..n(n-1)/2`, ordered lexicographically by `(i, j)`.
    pub fn index(self, n: usize) -> usize {
        let (i, j) = self.endpoints();
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn from_index(idx: usize, n: usize) -> Self {
        let mut i = 0;
        let mut start = 0;
        loop {
            let row = n - i - 1;
            if idx < start + row {
                return EdgeId::new(i, i + 1 + idx - start);
            }
            start += row;
            i += 1;
        }
    }
}

pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Validated point set: at least three distinct points, no three collinear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        validate_general_position(&points)?;
        Ok(PointSet { points })
    }

    /// Skips validation; only for callers that know the input is degenerate
    /// in ways the operation at hand tolerates.
    #[doc(hidden)]
    pub fn new_unchecked(points: Vec<Point>) -> Self {
        PointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    #[inline]
    pub fn orient(&self, k: usize, l: usize, m: usize) -> Orientation {
        orientation(self.points[k], self.points[l], self.points[m])
    }

    #[inline]
    pub fn convex(&self, k: usize, l: usize, m: usize) -> bool {
        convex(self.points[k], self.points[l], self.points[m])
    }

    pub fn y_max(&self) -> i64 {
        self.points.iter().map(|p| p.y).max().unwrap_or(0)
    }

    /// The reference point `(x_i, y_max + 1)` straight above point `i`.
    pub fn reference_above(&self, i: usize) -> Point {
        Point::new(self.points[i].x, self.y_max() + 1)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| EdgeId::new(i, j)))
    }
}

/// Checks distinctness, coordinate range and general position.
///
/// Returns the lexicographically first collinear index triple, if any.
pub fn validate_general_position(points: &[Point]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints(points.len()));
    }
    for p in points {
        for c in [p.x, p.y] {
            if c.abs() > COORD_LIMIT {
                return Err(Error::CoordinateOutOfRange(c));
            }
        }
    }
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            if points[i] == points[j] {
                return Err(Error::DuplicatePoint(i, j));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if orientation(points[i], points[j], points[k]) == Orientation::Zero {
                    return Err(Error::GeneralPositionViolation(i, j, k));
                }
            }
        }
    }
    Ok(())
}

/// Convex hull vertex indices in CCW order, starting at the lexicographically
/// least point.
pub fn convex_hull(ps: &PointSet) -> Vec<usize> {
    let pts = ps.points();
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by_key(|&i| (pts[i].x, pts[i].y));
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && !convex(pts[lower[lower.len() - 2]], pts[lower[lower.len() - 1]], pts[i])
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && !convex(pts[upper[upper.len() - 2]], pts[upper[upper.len() - 1]], pts[i])
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Per-point hull membership.
pub fn hull_mask(ps: &PointSet) -> Vec<bool> {
    let mut mask = vec![false; ps.len()];
    for i in convex_hull(ps) {
        mask[i] = true;
    }
    mask
}

/// Angular comparison of `a` and `b` around `center`, measured CCW from the
/// direction `reference - center`. Angles are taken in `[0, 2pi)`.
pub fn angular_cmp(center: Point, reference: Point, a: Point, b: Point) -> Ordering {
    let half = |p: Point| -> u8 {
        let c = cross(center, reference, p);
        if c > 0 {
            0
        } else if c == 0 {
            let dot = (reference.x - center.x) as i128 * (p.x - center.x) as i128
                + (reference.y - center.y) as i128 * (p.y - center.y) as i128;
            if dot > 0 {
                0
            } else {
                1
            }
        } else {
            1
        }
    };
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    // Same half plane: a precedes b iff b is left of center -> a.
    match cross(center, a, b).cmp(&0) {
        Ordering::Greater => Ordering::Less,
        Ordering::Less => Ordering::Greater,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Points of `ps` other than `i`, sorted CCW around `i` starting at the ray
/// `i -> q`, split into the non-negatively oriented prefix and the rest.
pub fn ccw_order(i: usize, q: Point, ps: &PointSet) -> (Vec<usize>, Vec<usize>) {
    let c = ps.point(i);
    let mut others: Vec<usize> = (0..ps.len()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| angular_cmp(c, q, ps.point(a), ps.point(b)).then(a.cmp(&b)));
    let split = others
        .iter()
        .position(|&j| orientation(c, q, ps.point(j)) == Orientation::Negative)
        .unwrap_or(others.len());
    let minus = others.split_off(split);
    (others, minus)
}

/// Whether two segments cross at a point interior to both.
pub fn segments_cross(e1: EdgeId, e2: EdgeId, ps: &PointSet) -> bool {
    let (a, b) = e1.endpoints();
    let (c, d) = e2.endpoints();
    if a == c || a == d || b == c || b == d {
        return false;
    }
    let (pa, pb, pc, pd) = (ps.point(a), ps.point(b), ps.point(c), ps.point(d));
    let s1 = cross(pa, pb, pc).signum() * cross(pa, pb, pd).signum();
    let s2 = cross(pc, pd, pa).signum() * cross(pc, pd, pb).signum();
    s1 < 0 && s2 < 0
}

/// Crossing structure of the complete geometric graph, indexed by dense edge
/// index.
#[derive(Debug, Clone)]
pub struct Crossings {
    n: usize,
    lists: Vec<Vec<u32>>,
}

impl Crossings {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dense indices of edges crossing edge `e`, ascending.
    pub fn crossing(&self, e: usize) -> &[u32] {
        &self.lists[e]
    }

    pub fn count(&self, e: usize) -> usize {
        self.lists[e].len()
    }

    pub fn crosses(&self, e: usize, f: usize) -> bool {
        self.lists[e].binary_search(&(f as u32)).is_ok()
    }

    pub fn is_uncrossed(&self, e: usize) -> bool {
        self.lists[e].is_empty()
    }

    /// Number of unordered crossing pairs.
    pub fn pair_count(&self) -> usize {
        self.lists.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn pairs(&self) -> impl Iterator<Item = (EdgeId, EdgeId)> + '_ {
        self.lists.iter().enumerate().flat_map(move |(e, l)| {
            l.iter()
                .filter(move |&&f| (f as usize) > e)
                .map(move |&f| (EdgeId::from_index(e, self.n), EdgeId::from_index(f as usize, self.n)))
        })
    }
}

/// All properly crossing edge pairs (the set S^C), by pairwise scan.
pub fn crossing_pairs(ps: &PointSet) -> Crossings {
    let n = ps.len();
    let edges: Vec<EdgeId> = ps.edges().collect();
    let mut lists = vec![Vec::new(); edges.len()];
    for (a, &ea) in edges.iter().enumerate() {
        for (b, &eb) in edges.iter().enumerate().skip(a + 1) {
            if segments_cross(ea, eb, ps) {
                lists[a].push(b as u32);
                lists[b].push(a as u32);
            }
        }
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    Crossings { n, lists }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(i64, i64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn square() -> PointSet {
        PointSet::new(pts(&[(0, 0), (10, 0), (10, 10), (0, 10)])).unwrap()
    }

    #[test]
    fn orientation_examples() {
        let p = |x, y| Point::new(x, y);
        assert_eq!(orientation(p(0, 0), p(1, 0), p(1, 1)), Orientation::Positive);
        assert_eq!(orientation(p(0, 0), p(1, 0), p(2, 0)), Orientation::Zero);
        assert_eq!(orientation(p(0, 0), p(1, 1), p(2, 0)), Orientation::Negative);
    }

    #[test]
    fn orientation_at_coordinate_limit() {
        let l = COORD_LIMIT;
        let a = Point::new(-l, -l);
        let b = Point::new(l, -l);
        let c = Point::new(l, l);
        assert_eq!(orientation(a, b, c), Orientation::Positive);
        assert_eq!(orientation(a, c, b), Orientation::Negative);
    }

    #[test]
    fn validation_examples() {
        assert!(validate_general_position(&pts(&[(0, 0), (2, 0), (1, 3)])).is_ok());
        assert_eq!(
            validate_general_position(&pts(&[(0, 0), (1, 0), (2, 0), (0, 5)])),
            Err(Error::GeneralPositionViolation(0, 1, 2))
        );
        assert_eq!(
            validate_general_position(&pts(&[(0, 0), (0, 0), (1, 3)])),
            Err(Error::DuplicatePoint(0, 1))
        );
        assert_eq!(
            validate_general_position(&pts(&[(0, 0), (1, 3)])),
            Err(Error::TooFewPoints(2))
        );
    }

    #[test]
    fn hull_examples() {
        assert_eq!(convex_hull(&square()), vec![0, 1, 2, 3]);
        let ps = PointSet::new(pts(&[(0, 0), (10, 0), (5, 9), (5, 3)])).unwrap();
        assert_eq!(convex_hull(&ps), vec![0, 1, 2]);
        let tri = PointSet::new(pts(&[(4, 0), (0, 0), (1, 3)])).unwrap();
        assert_eq!(convex_hull(&tri), vec![1, 0, 2]);
    }

    #[test]
    fn ccw_order_quadrants() {
        // The diagonal pairs are collinear with the centre, which the angular
        // sort tolerates since they fall in opposite half planes.
        let ps = PointSet::new_unchecked(pts(&[(0, 0), (-1, 1), (-1, -1), (1, -1), (1, 1)]));
        let (plus, minus) = ccw_order(0, Point::new(0, 100), &ps);
        assert_eq!(plus, vec![1, 2]);
        assert_eq!(minus, vec![3, 4]);
    }

    #[test]
    fn ccw_order_triangle() {
        let ps = PointSet::new(pts(&[(0, 0), (4, 0), (1, 3)])).unwrap();
        for i in 0..3 {
            let (plus, minus) = ccw_order(i, ps.reference_above(i), &ps);
            assert_eq!(plus.len() + minus.len(), 2);
        }
    }

    #[test]
    fn crossing_examples() {
        let sq = square();
        assert!(segments_cross(EdgeId::new(0, 2), EdgeId::new(1, 3), &sq));
        assert!(!segments_cross(EdgeId::new(0, 1), EdgeId::new(1, 2), &sq));
        assert!(!segments_cross(EdgeId::new(0, 1), EdgeId::new(2, 3), &sq));
        assert_eq!(crossing_pairs(&sq).pair_count(), 1);
        let tri = PointSet::new(pts(&[(0, 0), (4, 0), (1, 3)])).unwrap();
        assert_eq!(crossing_pairs(&tri).pair_count(), 0);
        let tri_in = PointSet::new(pts(&[(0, 0), (10, 0), (5, 9), (5, 3)])).unwrap();
        assert_eq!(crossing_pairs(&tri_in).pair_count(), 0);
    }

    #[test]
    fn edge_index_roundtrip() {
        let n = 9;
        for (k, e) in (0..n).flat_map(|i| (i + 1..n).map(move |j| EdgeId::new(i, j))).enumerate() {
            assert_eq!(e.index(n), k);
            assert_eq!(EdgeId::from_index(k, n), e);
        }
    }

    #[test]
    fn polygon_area() {
        let sq = square();
        assert_eq!(twice_polygon_area(sq.points()), 200);
    }
}

//! Column pricing by dynamic programming over last triangles.
//!
//! Fix the lexicographically smallest vertex `k` of a polygon. Its other
//! vertices appear in increasing angular order around `k` (the list `P_k`),
//! so the polygon is a fan of triangles `(k, v_i, v_{i+1})`. With
//! `D(k, l, m) = -alpha(corners of klm) - beta(lm)` the table
//!
//! ```text
//! B(k, l, m) = D(k, l, m) + min(-beta(kl), min_{o : convex(o, l, m)} B(k, o, l))
//! ```
//!
//! holds the best open chain ending in the edge `lm`, and the polygon closed
//! by `mk` has reduced cost `c + B(k, l, m) - beta(km)`. Fan diagonals never
//! contribute, so a penalised edge only affects polygons that use it on the
//! boundary.
//!
//! For fixed `(k, l)` the admissible predecessors `o` of a successor `m` form
//! a prefix of the points before `l` sorted by angle around `l`, and that
//! prefix grows with the angle of `m`. One circular walk of the ring around
//! `l` therefore serves all `m`, giving O(n) per pair and O(n^3) per round.

use crate::instance::Instance;
use crate::par::{self, Exec};
use crate::polygon::{canonical_key, ConvexPolygon};
use crate::wedge::{SlotRange, WedgeIndex};

/// Reduced costs at or above this are not reported.
pub const NEGATIVE_THRESHOLD: f64 = -1e-6;
/// Default number of columns returned per round.
pub const DEFAULT_COLUMN_CAP: usize = 200;

const START: u32 = u32::MAX;

/// Prefix sums of wedge duals around each vertex.
#[derive(Debug, Clone)]
pub struct DualRangeSummer {
    stride: usize,
    prefix: Vec<f64>,
}

impl DualRangeSummer {
    pub fn build(wi: &WedgeIndex, alpha: &[f64]) -> Self {
        let n = wi.n();
        let stride = n;
        let mut prefix = vec![0.0; n * stride];
        for i in 0..n {
            let base = wi.offset(i);
            let cnt = wi.wedge_count(i);
            let row = &mut prefix[i * stride..(i + 1) * stride];
            for s in 0..n - 1 {
                let a = if s < cnt { alpha[base + s] } else { 0.0 };
                row[s + 1] = row[s] + a;
            }
        }
        DualRangeSummer { stride, prefix }
    }

    #[inline]
    pub fn range_sum(&self, r: SlotRange) -> f64 {
        let m = self.stride - 1;
        let row = &self.prefix[r.owner * self.stride..(r.owner + 1) * self.stride];
        let end = r.start + r.len;
        if end <= m {
            row[end] - row[r.start]
        } else {
            row[m] - row[r.start] + row[end - m]
        }
    }

    /// Sum of `alpha` over the wedges of the CCW triangle `(a, b, c)`.
    #[inline]
    pub fn triangle_cover(&self, wi: &WedgeIndex, a: usize, b: usize, c: usize) -> f64 {
        self.range_sum(wi.corner_range(a, b, c))
            + self.range_sum(wi.corner_range(b, c, a))
            + self.range_sum(wi.corner_range(c, a, b))
    }
}

/// Penalty subtracted from the dual of a forbidden edge.
pub fn penalty(alpha: &[f64], beta: &[f64]) -> f64 {
    10.0 * (1.0 + alpha.iter().chain(beta).map(|v| v.abs()).sum::<f64>())
}

/// Edge duals with forbidden edges pushed down by the penalty.
pub fn effective_beta(alpha: &[f64], beta: &[f64], forbidden: &[bool]) -> Vec<f64> {
    if !forbidden.iter().any(|&f| f) {
        return beta.to_vec();
    }
    let m = penalty(alpha, beta);
    beta.iter()
        .zip(forbidden)
        .map(|(&b, &f)| if f { b - m } else { b })
        .collect()
}

/// Reduced-cost contribution of an empty triangle: minus its wedge duals,
/// minus its three edge duals, plus the penalty of each forbidden side.
pub fn triangle_delta(
    inst: &Instance,
    summer: &DualRangeSummer,
    beta: &[f64],
    forbidden: &[bool],
    k: usize,
    l: usize,
    m: usize,
) -> f64 {
    debug_assert!(inst.table.is_empty(k, l, m));
    let (a, b, c) = if inst.ps.convex(k, l, m) { (k, l, m) } else { (k, m, l) };
    let mut d = -summer.triangle_cover(&inst.wedges, a, b, c);
    let pen = if forbidden.iter().any(|&f| f) {
        penalty(&[], beta)
    } else {
        0.0
    };
    for (x, y) in [(a, b), (b, c), (c, a)] {
        let e = inst.edge_index(x, y);
        d -= beta[e];
        if forbidden.get(e).copied().unwrap_or(false) {
            d += pen;
        }
    }
    d
}

#[derive(Debug, Clone, Copy)]
pub struct PricingParams {
    /// Objective coefficient of a polygon column: 1 for ordinary pricing,
    /// 0 for Farkas pricing on an infeasible master.
    pub constant: f64,
    pub cap: usize,
    pub threshold: f64,
    pub exec: Exec,
}

impl Default for PricingParams {
    fn default() -> Self {
        PricingParams {
            constant: 1.0,
            cap: DEFAULT_COLUMN_CAP,
            threshold: NEGATIVE_THRESHOLD,
            exec: Exec::available(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedColumn {
    pub polygon: ConvexPolygon,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingOutcome {
    /// Best polygon per `(k, l)` below the threshold, most negative first.
    pub columns: Vec<PricedColumn>,
    /// Minimum reduced cost over every polygon, emitted or not.
    pub min_reduced_cost: f64,
}

/// DP table for one leftmost vertex, indexed by ranks in `P_k`.
pub(crate) struct RootTable {
    pub len: usize,
    pub value: Vec<f64>,
    pub back: Vec<u32>,
}

impl RootTable {
    /// Vertices of the chain ending in `(list[rl], list[rm])`, starting at `k`.
    fn chain(&self, list: &[u32], k: usize, rl: usize, rm: usize) -> Vec<usize> {
        let mut rev = vec![list[rm] as usize, list[rl] as usize];
        let (mut a, mut b) = (rl, rm);
        loop {
            let o = self.back[a * self.len + b];
            if o == START {
                break;
            }
            rev.push(list[o as usize] as usize);
            b = a;
            a = o as usize;
        }
        rev.push(k);
        rev.reverse();
        rev
    }
}

/// Fills the table for root `k` with a generic start term and triangle
/// term. `reference` switches to the quadratic scan over predecessors.
pub(crate) fn root_table(
    inst: &Instance,
    k: usize,
    start: impl Fn(usize) -> f64,
    delta: impl Fn(usize, usize) -> f64,
    reference: bool,
) -> RootTable {
    let list = inst.sweep.list(k);
    let len = list.len();
    let mut value = vec![f64::INFINITY; len * len];
    let mut back = vec![START; len * len];
    let ps = &inst.ps;
    let ring_len = inst.n() - 1;
    let mut os: Vec<u32> = Vec::with_capacity(len);
    let mut ms: Vec<u32> = Vec::with_capacity(len);
    for rl in 0..len {
        let l = list[rl] as usize;
        os.clear();
        ms.clear();
        if reference {
            os.extend((0..rl as u32).filter(|&ro| value[ro as usize * len + rl].is_finite()));
            ms.extend(((rl + 1) as u32..len as u32).filter(|&rm| inst.table.is_empty(k, l, list[rm as usize] as usize)));
        } else {
            let ring = inst.wedges.ring(l);
            let from = inst.wedges.position(l, k);
            for t in 1..ring_len {
                let j = ring[(from + t) % ring_len] as usize;
                let r = inst.sweep.rank(k, j);
                if r == u32::MAX {
                    continue;
                }
                let r = r as usize;
                if r < rl {
                    if value[r * len + rl].is_finite() {
                        os.push(r as u32);
                    }
                } else if inst.table.is_empty(k, l, j) {
                    ms.push(r as u32);
                }
            }
        }
        let base = start(l);
        let mut best = base;
        let mut best_o = START;
        let mut p = 0;
        for &rm in &ms {
            let m = list[rm as usize] as usize;
            if reference {
                best = base;
                best_o = START;
                for &ro in &os {
                    let o = list[ro as usize] as usize;
                    let v = value[ro as usize * len + rl];
                    if ps.convex(o, l, m) && v < best {
                        best = v;
                        best_o = ro;
                    }
                }
            } else {
                while p < os.len() {
                    let ro = os[p] as usize;
                    if !ps.convex(list[ro] as usize, l, m) {
                        break;
                    }
                    let v = value[ro * len + rl];
                    if v < best {
                        best = v;
                        best_o = ro as u32;
                    }
                    p += 1;
                }
            }
            let idx = rl * len + rm as usize;
            value[idx] = best + delta(l, m);
            back[idx] = best_o;
        }
    }
    RootTable { len, value, back }
}

struct RootResult {
    min: f64,
    columns: Vec<PricedColumn>,
}

fn price_root(
    inst: &Instance,
    summer: &DualRangeSummer,
    beta: &[f64],
    k: usize,
    params: &PricingParams,
    reference: bool,
) -> RootResult {
    let wi = &inst.wedges;
    let list = inst.sweep.list(k);
    let table = root_table(
        inst,
        k,
        |l| -beta[inst.edge_index(k, l)],
        |l, m| -summer.triangle_cover(wi, k, l, m) - beta[inst.edge_index(l, m)],
        reference,
    );
    let len = table.len;
    let mut min = f64::INFINITY;
    let mut columns = Vec::new();
    for rl in 0..len {
        let mut best = f64::INFINITY;
        let mut best_m = usize::MAX;
        for rm in rl + 1..len {
            let v = table.value[rl * len + rm];
            if !v.is_finite() {
                continue;
            }
            let m = list[rm] as usize;
            let rc = params.constant + v - beta[inst.edge_index(k, m)];
            if rc < best {
                best = rc;
                best_m = rm;
            }
        }
        min = min.min(best);
        if best < params.threshold {
            let verts = table.chain(list, k, rl, best_m);
            columns.push(PricedColumn {
                polygon: canonical_key(&verts, &inst.ps),
                reduced_cost: best,
            });
        }
    }
    RootResult { min, columns }
}

/// One pricing round. `forbidden` marks edges fixed to zero; polygons using
/// them on the boundary are penalised out of the result.
pub fn price(
    inst: &Instance,
    alpha: &[f64],
    beta: &[f64],
    forbidden: &[bool],
    params: &PricingParams,
) -> PricingOutcome {
    price_impl(inst, alpha, beta, forbidden, params, false)
}

/// Same round with a quadratic predecessor scan, for cross-checking.
pub fn price_reference(
    inst: &Instance,
    alpha: &[f64],
    beta: &[f64],
    forbidden: &[bool],
    params: &PricingParams,
) -> PricingOutcome {
    price_impl(inst, alpha, beta, forbidden, params, true)
}

fn price_impl(
    inst: &Instance,
    alpha: &[f64],
    beta: &[f64],
    forbidden: &[bool],
    params: &PricingParams,
    reference: bool,
) -> PricingOutcome {
    let summer = DualRangeSummer::build(&inst.wedges, alpha);
    let beta = effective_beta(alpha, beta, forbidden);
    let parts = par::map_range_with(params.exec, inst.n(), |k| {
        price_root(inst, &summer, &beta, k, params, reference)
    });
    let mut min = f64::INFINITY;
    let mut columns = Vec::new();
    for part in parts {
        min = min.min(part.min);
        columns.extend(part.columns);
    }
    columns.sort_by(|a, b| {
        a.reduced_cost
            .total_cmp(&b.reduced_cost)
            .then_with(|| a.polygon.cmp(&b.polygon))
    });
    columns.truncate(params.cap);
    PricingOutcome {
        columns,
        min_reduced_cost: min,
    }
}

/// Best value of the recurrence with a constant start term and a constant
/// triangle term, over all roots. With `start = 0` and `delta = -1` this is
/// minus the largest number of triangles in a fan, i.e. the vertex count of
/// the largest empty convex polygon minus two.
pub fn surrogate_minimum(inst: &Instance, start: f64, delta: f64) -> f64 {
    (0..inst.n())
        .map(|k| {
            let t = root_table(inst, k, |_| start, |_, _| delta, false);
            t.value.iter().copied().fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}

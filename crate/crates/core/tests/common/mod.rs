#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use mcpp::geometry::{twice_polygon_area, Orientation, PointSet};
use mcpp::instance::Instance;
use mcpp::io::generate_instance;
use mcpp::lp::LpStatus;
use mcpp::master::RmpState;
use mcpp::oracle::{covered_wedges_by_cones, polygons_by_subsets};
use mcpp::polygon::{canonical_key, triangle_is_empty_scan, ConvexPolygon};
use mcpp::search::{apply_branch, BnpNode, NodeRecord, SolveOutcome};

pub const COORDS: i64 = 10_000;

/// Instances whose root relaxation is fractional when the primal heuristics
/// are off, so the search has to branch.
pub const BRANCHING: &[(u64, usize)] = &[(12011, 11), (38011, 11), (15012, 12), (21012, 12), (29012, 12)];

pub fn instance(seed: u64, n: usize) -> PointSet {
    generate_instance(seed, n, COORDS).unwrap()
}

/// `count` instances with `n` drawn from `lo..=hi`, reproducible from `seed`.
pub fn suite(seed: u64, count: usize, lo: usize, hi: usize) -> Vec<PointSet> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(lo..=hi);
            instance(rng.gen(), n)
        })
        .collect()
}

pub fn f_n_bound(n: usize) -> usize {
    (10 * n - 18).div_ceil(7)
}

/// Validity by independent means: convex and empty by scanning all points,
/// canonical, wedges exactly covered by cone tests, and areas summing to the
/// hull. Returns a description of the first problem.
pub fn check_partition(inst: &Instance, polys: &[ConvexPolygon]) -> Result<(), String> {
    let ps = &inst.ps;
    let mut cover = vec![0u32; inst.wedges.len()];
    let mut area = 0i128;
    for p in polys {
        let v = p.vertex_indices();
        if v.len() < 3 {
            return Err(format!("{p:?} has fewer than 3 vertices"));
        }
        let t = v.len();
        for i in 0..t {
            if ps.orient(v[i], v[(i + 1) % t], v[(i + 2) % t]) != Orientation::Positive {
                return Err(format!("{p:?} is not strictly convex"));
            }
        }
        for i in 1..t - 1 {
            if !triangle_is_empty_scan(ps, v[0], v[i], v[i + 1]) {
                return Err(format!("{p:?} contains a point"));
            }
        }
        if canonical_key(&v, ps) != *p {
            return Err(format!("{p:?} is not canonical"));
        }
        area += twice_polygon_area(&p.points(ps));
        for g in covered_wedges_by_cones(inst, p) {
            cover[g] += 1;
        }
    }
    if let Some(g) = cover.iter().position(|&c| c != 1) {
        return Err(format!("wedge {g} covered {} times", cover[g]));
    }
    let hull: Vec<_> = inst.hull.iter().map(|&h| ps.point(h)).collect();
    if area != twice_polygon_area(&hull) {
        return Err("areas do not add up to the hull".into());
    }
    Ok(())
}

/// Rebuilds every audited node's fixings by replaying the branching
/// decisions from the root.
pub fn replay_fixings(inst: &Instance, audit: &[NodeRecord]) -> HashMap<usize, BnpNode> {
    let mut records: Vec<&NodeRecord> = audit.iter().collect();
    records.sort_by_key(|r| r.id);
    let mut nodes: HashMap<usize, BnpNode> = HashMap::new();
    for r in records {
        let node = match (r.parent, r.fixing) {
            (None, _) => BnpNode::root(),
            (Some(p), Some(f)) => {
                let Some(parent) = nodes.get(&p) else { continue };
                let e = inst.edge_index(f.edge[0], f.edge[1]);
                match apply_branch(inst, parent, e, f.value == 1, r.id) {
                    Ok(n) => n,
                    Err(_) => continue,
                }
            }
            (Some(_), None) => panic!("child record {} without a fixing", r.id),
        };
        nodes.insert(r.id, node);
    }
    nodes
}

/// LP value of the node with every empty convex polygon as a column and the
/// given degree cuts; `None` if infeasible.
pub fn full_node_lp(
    inst: &Arc<Instance>,
    polyset: &[ConvexPolygon],
    fixings: &BTreeMap<usize, bool>,
    cuts: &[usize],
) -> Option<f64> {
    let mut rmp = RmpState::new(inst.clone(), polyset).unwrap();
    for (&e, &v) in fixings {
        if inst.is_hull_edge(e) {
            continue;
        }
        let b = if v { 1.0 } else { 0.0 };
        rmp.set_edge_bounds(e, b, b);
    }
    rmp.add_degree_cuts(cuts);
    let rel = rmp.solve_relaxation();
    (rel.status == LpStatus::Optimal).then_some(rel.z)
}

pub fn all_polygons(ps: &PointSet) -> Vec<ConvexPolygon> {
    polygons_by_subsets(ps)
}

/// Solution JSON with the timing removed.
pub fn timeless_json(out: &SolveOutcome) -> String {
    let mut f = mcpp::io::solution_file(&out.incumbent, out.status, out.bound, &out.stats);
    f.stats.seconds = 0.0;
    serde_json::to_string(&f).unwrap()
}

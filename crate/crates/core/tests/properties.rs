mod common;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use common::*;
use mcpp::compact::{build_compact, solve_compact, CompactStatus};
use mcpp::geometry::{ccw_order, crossing_pairs, orientation, Orientation, Point, PointSet, COORD_LIMIT};
use mcpp::heuristics::{delaunay, greedy_triangulation, restricted_mcpp, RESTRICTED_CAP};
use mcpp::instance::Instance;
use mcpp::lp::{LpStatus, Relation};
use mcpp::master::{polygon_reduced_cost, DualVector, RmpState};
use mcpp::oracle::{
    brute_force_arrangement_faces, brute_force_optimum, covered_wedges_by_cones, sample_inside, RPoint,
};
use mcpp::par::Exec;
use mcpp::polygon::{enumerate_polyset, ConvexPolygon, DEFAULT_POLYGON_CAP};
use mcpp::pricing::{price, price_reference, triangle_delta, DualRangeSummer, PricingParams};

const TOL: f64 = 1e-9;

fn small(lo: usize, hi: usize) -> impl Strategy<Value = PointSet> {
    (any::<u64>(), lo..=hi).prop_map(|(seed, n)| instance(seed, n))
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig::with_cases(n)
}

fn random_duals(inst: &Instance, seed: u64) -> DualVector {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    DualVector {
        alpha: (0..inst.wedges.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
        beta: (0..inst.edge_count()).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
        gamma: Vec::new(),
    }
}

/// Reduced cost from cone-based wedge containment.
fn cone_reduced_cost(inst: &Instance, p: &ConvexPolygon, d: &DualVector) -> f64 {
    let a: f64 = covered_wedges_by_cones(inst, p).into_iter().map(|g| d.alpha[g]).sum();
    let b: f64 = p.edges().map(|e| d.beta[e.index(inst.n())]).sum();
    1.0 - a - b
}

fn sequential() -> PricingParams {
    PricingParams {
        exec: Exec::Sequential,
        ..PricingParams::default()
    }
}

// geometry

proptest! {
    #![proptest_config(cases(256))]

    #[test]
    fn orientation_is_antisymmetric_and_cyclic(
        k in (-COORD_LIMIT..=COORD_LIMIT, -COORD_LIMIT..=COORD_LIMIT),
        l in (-COORD_LIMIT..=COORD_LIMIT, -COORD_LIMIT..=COORD_LIMIT),
        m in (-COORD_LIMIT..=COORD_LIMIT, -COORD_LIMIT..=COORD_LIMIT),
    ) {
        let (k, l, m) = (Point::new(k.0, k.1), Point::new(l.0, l.1), Point::new(m.0, m.1));
        let flip = |o: Orientation| match o {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
            Orientation::Zero => Orientation::Zero,
        };
        prop_assert_eq!(orientation(k, l, m), flip(orientation(k, m, l)));
        prop_assert_eq!(orientation(k, l, m), orientation(l, m, k));
    }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn ccw_order_is_a_deterministic_permutation(ps in small(3, 14), i in 0usize..14) {
        let i = i % ps.len();
        let q = ps.reference_above(i);
        let (plus, minus) = ccw_order(i, q, &ps);
        let mut all: Vec<usize> = plus.iter().chain(&minus).copied().collect();
        prop_assert_eq!(ccw_order(i, q, &ps), (plus, minus));
        all.sort_unstable();
        prop_assert_eq!(all, (0..ps.len()).filter(|&j| j != i).collect::<Vec<_>>());
    }

    #[test]
    fn validated_sets_have_no_zero_orientation(ps in small(3, 12)) {
        let n = ps.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        prop_assert_ne!(ps.orient(a, b, c), Orientation::Zero);
                    }
                }
            }
        }
    }

    #[test]
    fn crossings_are_symmetric_and_disjoint(ps in small(4, 14)) {
        let cr = crossing_pairs(&ps);
        let n = ps.len();
        for e in 0..cr.n() {
            let id = mcpp::geometry::EdgeId::from_index(e, n);
            for &f in cr.crossing(e) {
                let f = f as usize;
                prop_assert!(cr.crosses(f, e));
                let (a, b) = mcpp::geometry::EdgeId::from_index(f, n).endpoints();
                prop_assert!(!id.has_endpoint(a) && !id.has_endpoint(b));
            }
        }
    }
}

// wedges

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn rcross(o: Point, a: Point, s: &RPoint) -> BigRational {
    rat(a.x - o.x) * (&s.1 - rat(o.y)) - rat(a.y - o.y) * (&s.0 - rat(o.x))
}

/// The wedge of `owner` whose open cone contains the sample point.
fn wedge_of_sample(inst: &Instance, owner: usize, s: &RPoint) -> Option<usize> {
    let o = inst.ps.point(owner);
    inst.wedges
        .wedges()
        .filter(|w| w.owner as usize == owner)
        .find(|&w| {
            let (a, b) = inst.wedges.wedge_rays(w);
            rcross(o, inst.ps.point(a), s).is_positive() && rcross(o, inst.ps.point(b), s).is_negative()
        })
        .map(|w| w.global as usize)
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn wedges_match_arrangement_faces(ps in small(3, 8)) {
        let inst = Instance::new(ps.clone());
        let arr = brute_force_arrangement_faces(&ps).unwrap();
        // Euler with the outer face
        prop_assert_eq!(arr.vertices as i64 - arr.edges as i64 + arr.faces.len() as i64 + 1, 2);
        let mut face_of: HashMap<usize, usize> = HashMap::new();
        for (f, face) in arr.faces.iter().enumerate() {
            for &i in &face.incident {
                let g = wedge_of_sample(&inst, i, &face.sample).expect("face sample lies in a wedge");
                prop_assert!(face_of.insert(g, f).is_none(), "two faces in wedge {}", g);
            }
        }
        prop_assert_eq!(face_of.len(), inst.wedges.len());
        let polys = all_polygons(&ps);
        for p in &polys {
            let by_range: BTreeSet<usize> = inst.wedges.wedges_of_polygon(&p.vertex_indices()).into_iter().collect();
            let by_sample: BTreeSet<usize> = face_of
                .iter()
                .filter(|&(_, &f)| sample_inside(&ps, p, &arr.faces[f].sample))
                .map(|(&g, _)| g)
                .collect();
            prop_assert_eq!(&by_range, &by_sample, "{:?}", p);
            // a wedge inside an empty polygon belongs to one of its vertices
            for face in arr.faces.iter().filter(|f| sample_inside(&ps, p, &f.sample)) {
                for &i in &face.incident {
                    prop_assert!(p.vertex_indices().contains(&i));
                }
            }
        }
    }

    #[test]
    fn partitions_cover_each_wedge_once(ps in small(3, 11), values_seed in any::<u64>()) {
        let inst = Instance::new(ps);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(values_seed);
        let values: Vec<f64> = (0..inst.edge_count()).map(|_| rng.gen()).collect();
        let (_, opt) = brute_force_optimum(&inst).unwrap();
        for polys in [delaunay(&inst).triangles, greedy_triangulation(&inst, &values).triangles, opt] {
            let mut cover = vec![0; inst.wedges.len()];
            let mut total = 0;
            for p in &polys {
                let v = p.vertex_indices();
                total += inst.wedges.covered_count(&v);
                for g in inst.wedges.wedges_of_polygon(&v) {
                    cover[g] += 1;
                }
            }
            prop_assert!(cover.iter().all(|&c| c == 1));
            prop_assert_eq!(total, inst.wedges.len());
        }
    }
}

// polygon catalogue

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn polyset_matches_subset_enumeration(ps in small(3, 10)) {
        let inst = Instance::new(ps.clone());
        let mut got = enumerate_polyset(&ps, &inst.table, DEFAULT_POLYGON_CAP).unwrap();
        got.sort_unstable();
        prop_assert_eq!(&got, &all_polygons(&ps));
        for p in &got {
            let v = p.vertex_indices();
            for i in 1..v.len() - 1 {
                prop_assert!(inst.table.is_empty(v[0], v[i], v[i + 1]));
            }
        }
    }

    #[test]
    fn triangle_table_is_symmetric(ps in small(3, 12)) {
        let inst = Instance::new(ps);
        let n = inst.n();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let t = inst.table.is_empty(a, b, c);
                    for (x, y, z) in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        prop_assert_eq!(inst.table.is_empty(x, y, z), t);
                    }
                    prop_assert_eq!(t, mcpp::polygon::triangle_is_empty_scan(&inst.ps, a, b, c));
                }
            }
        }
    }

    #[test]
    fn triangulations_have_the_euler_count(ps in small(3, 16), values_seed in any::<u64>()) {
        let inst = Instance::new(ps);
        let h = inst.hull.len();
        let i = inst.n() - h;
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(values_seed);
        let values: Vec<f64> = (0..inst.edge_count()).map(|_| rng.gen()).collect();
        let triangles = inst.table.triangles(&inst.ps);
        for t in [delaunay(&inst), greedy_triangulation(&inst, &values)] {
            prop_assert_eq!(t.triangles.len(), 2 * i + h - 2);
            for tri in &t.triangles {
                prop_assert!(triangles.contains(tri));
            }
            prop_assert!(check_partition(&inst, &t.triangles).is_ok());
        }
    }
}

// master

/// The integer point of a partition: polygon columns at 1, edges at 1 when
/// on the hull or shared by two polygons.
fn integer_point(rmp: &RmpState, chosen: &[ConvexPolygon]) -> Vec<f64> {
    let inst = rmp.instance();
    let e_count = inst.edge_count();
    let mut v = vec![0.0; e_count + rmp.polygons().len()];
    let mut uses = vec![0; e_count];
    for p in chosen {
        let t = rmp.polygons().iter().position(|q| q == p).unwrap();
        v[e_count + t] = 1.0;
        for e in p.edges() {
            uses[e.index(inst.n())] += 1;
        }
    }
    for e in 0..e_count {
        if inst.is_hull_edge(e) {
            assert_eq!(uses[e], 1);
            v[e] = 1.0;
        } else {
            assert!(uses[e] == 0 || uses[e] == 2, "edge used {} times", uses[e]);
            v[e] = (uses[e] / 2) as f64;
        }
    }
    v
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn optimal_partitions_satisfy_every_master_row(ps in small(4, 10)) {
        let inst = Arc::new(Instance::new(ps.clone()));
        let (_, opt) = brute_force_optimum(&inst).unwrap();
        let mut rmp = RmpState::new(inst.clone(), &all_polygons(&ps)).unwrap();
        let interior: Vec<usize> = inst.interior_points().collect();
        rmp.add_degree_cuts(&interior);
        let v = integer_point(&rmp, &opt);
        let model = rmp.model();
        let mut act = vec![0.0; model.rows.len()];
        for (j, col) in model.cols.iter().enumerate() {
            prop_assert!(v[j] >= col.lo - TOL && v[j] <= col.hi + TOL);
            for &(r, a) in &col.entries {
                act[r as usize] += a * v[j];
            }
        }
        for (row, a) in model.rows.iter().zip(&act) {
            let ok = match row.relation {
                Relation::Eq => (a - row.rhs).abs() < TOL,
                Relation::Ge => *a >= row.rhs - TOL,
                Relation::Le => *a <= row.rhs + TOL,
            };
            prop_assert!(ok, "row {:?} has activity {}", row.name, a);
        }
    }

    #[test]
    fn both_sides_of_an_edge_carry_equal_weight(ps in small(4, 10)) {
        let inst = Arc::new(Instance::new(ps.clone()));
        let mut rmp = RmpState::new(inst.clone(), &all_polygons(&ps)).unwrap();
        let rel = rmp.solve_relaxation();
        prop_assert_eq!(rel.status, LpStatus::Optimal);
        let mut left = vec![0.0; inst.edge_count()];
        let mut right = vec![0.0; inst.edge_count()];
        for (p, u) in rmp.polygons().iter().zip(&rel.u) {
            let v = p.vertex_indices();
            for e in p.edges() {
                let (i, j) = e.endpoints();
                let third = *v.iter().find(|&&w| w != i && w != j).unwrap();
                if inst.ps.orient(i, j, third) == Orientation::Positive {
                    left[e.index(inst.n())] += u;
                } else {
                    right[e.index(inst.n())] += u;
                }
            }
        }
        for e in (0..inst.edge_count()).filter(|&e| !inst.is_hull_edge(e)) {
            prop_assert!((left[e] - right[e]).abs() < 1e-6);
            prop_assert!((left[e] - rel.x[e]).abs() < 1e-6);
        }
    }

    #[test]
    fn interior_points_of_partitions_have_degree_three(ps in small(4, 11)) {
        let inst = Instance::new(ps);
        let (_, opt) = brute_force_optimum(&inst).unwrap();
        let mut edges = BTreeSet::new();
        for p in &opt {
            edges.extend(p.edges());
        }
        for i in inst.interior_points() {
            prop_assert!(edges.iter().filter(|e| e.has_endpoint(i)).count() >= 3);
        }
    }
}

// pricing

proptest! {
    #![proptest_config(cases(20))]

    #[test]
    fn pricing_minimum_matches_enumeration(ps in small(3, 10), seeds in prop::array::uniform4(any::<u64>())) {
        let inst = Instance::new(ps.clone());
        let polys = all_polygons(&ps);
        let none = vec![false; inst.edge_count()];
        for seed in seeds {
            let d = random_duals(&inst, seed);
            let want = polys.iter().map(|p| cone_reduced_cost(&inst, p, &d)).fold(f64::INFINITY, f64::min);
            let got = price(&inst, &d.alpha, &d.beta, &none, &sequential());
            prop_assert!((got.min_reduced_cost - want).abs() < TOL, "{} vs {}", got.min_reduced_cost, want);
            for c in &got.columns {
                prop_assert!((c.reduced_cost - polygon_reduced_cost(&inst, &c.polygon, &d)).abs() < TOL);
                prop_assert!(check_partition_member(&inst, &c.polygon));
            }
            let reference = price_reference(&inst, &d.alpha, &d.beta, &none, &sequential());
            prop_assert_eq!(&got, &reference);
        }
    }

    #[test]
    fn forbidden_edges_leave_the_minimum_of_allowed_polygons(ps in small(4, 9), seed in any::<u64>()) {
        let inst = Instance::new(ps.clone());
        let d = random_duals(&inst, seed);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed ^ 0x5eed);
        let forbidden: Vec<bool> = (0..inst.edge_count())
            .map(|e| !inst.is_hull_edge(e) && rng.gen_bool(0.3))
            .collect();
        let allowed = all_polygons(&ps)
            .into_iter()
            .filter(|p| p.edges().all(|e| !forbidden[e.index(inst.n())]));
        let want = allowed.map(|p| cone_reduced_cost(&inst, &p, &d)).fold(f64::INFINITY, f64::min);
        let got = price(&inst, &d.alpha, &d.beta, &forbidden, &sequential());
        if want.is_finite() {
            prop_assert!((got.min_reduced_cost - want).abs() < TOL);
        } else {
            // every polygon uses a forbidden edge and carries the penalty
            prop_assert!(got.min_reduced_cost > 1.0);
        }
        for c in &got.columns {
            prop_assert!(c.polygon.edges().all(|e| !forbidden[e.index(inst.n())]));
        }
    }

    #[test]
    fn triangle_deltas_match_contained_wedges(ps in small(3, 10), seed in any::<u64>()) {
        let inst = Instance::new(ps.clone());
        let d = random_duals(&inst, seed);
        let summer = DualRangeSummer::build(&inst.wedges, &d.alpha);
        let none = vec![false; inst.edge_count()];
        for t in inst.table.triangles(&ps) {
            let v = t.vertex_indices();
            let delta = triangle_delta(&inst, &summer, &d.beta, &none, v[0], v[1], v[2]);
            prop_assert!((delta - (cone_reduced_cost(&inst, &t, &d) - 1.0)).abs() < TOL);
        }
    }

    #[test]
    fn priced_columns_are_new_to_the_master(ps in small(5, 12)) {
        let inst = Arc::new(Instance::new(ps));
        let mut rmp = RmpState::with_triangles(inst.clone(), &[]);
        let rel = rmp.solve_relaxation();
        prop_assert_eq!(rel.status, LpStatus::Optimal);
        let none = vec![false; inst.edge_count()];
        let out = price(&inst, &rel.duals.alpha, &rel.duals.beta, &none, &sequential());
        for c in &out.columns {
            prop_assert!(!rmp.contains(&c.polygon));
            prop_assert!(c.reduced_cost < 0.0);
        }
    }
}

fn check_partition_member(inst: &Instance, p: &ConvexPolygon) -> bool {
    let v = p.vertex_indices();
    mcpp::polygon::canonical_key(&v, &inst.ps) == *p
        && (0..v.len()).all(|i| inst.ps.convex(v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]))
        && (1..v.len() - 1).all(|i| mcpp::polygon::triangle_is_empty_scan(&inst.ps, v[0], v[i], v[i + 1]))
}

// heuristics

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn heuristics_produce_valid_partitions(ps in small(4, 16), seed in any::<u64>()) {
        let inst = Arc::new(Instance::new(ps));
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let values: Vec<f64> = (0..inst.edge_count()).map(|_| rng.gen()).collect();
        for tri in [delaunay(&inst), greedy_triangulation(&inst, &values)] {
            let (inc, _) = restricted_mcpp(&inst, &tri, RESTRICTED_CAP);
            prop_assert!(check_partition(&inst, &inc.partition).is_ok());
            prop_assert!(inc.value <= tri.triangles.len());

            let mut rmp = RmpState::with_triangles(inst.clone(), &[]);
            let before = rmp.solve_relaxation().z;
            rmp.add_polygon_columns(inc.partition.iter().cloned());
            let after = rmp.solve_relaxation().z;
            prop_assert!(after <= before + 1e-9);
        }
    }
}

// compact model and oracle

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn compact_optimum_matches_oracle(ps in small(4, 10)) {
        let inst = Instance::new(ps.clone());
        let (want, _) = brute_force_optimum(&inst).unwrap();
        let all: Vec<usize> = (0..inst.edge_count()).collect();
        let mut model = build_compact(&inst, &all);
        let root_edges = model.root_bound().unwrap();
        let sol = solve_compact(&mut model, None, None);
        prop_assert_eq!(sol.status, CompactStatus::Optimal);
        prop_assert_eq!(sol.edges.len() + 1 - inst.n(), want);

        // reported only: the compact root bound is usually the weaker one
        let mut rmp = RmpState::new(Arc::new(inst.clone()), &all_polygons(&ps)).unwrap();
        let sp_root = rmp.solve_relaxation().z;
        let compact_faces = root_edges + 1.0 - inst.n() as f64;
        if compact_faces > sp_root + 1e-6 {
            eprintln!("compact root {compact_faces} above set-partition root {sp_root}");
        }
    }

    #[test]
    fn oracle_is_invariant_under_relabelling_and_rotation(ps in small(4, 10), seed in any::<u64>()) {
        let (want, _) = brute_force_optimum(&Instance::new(ps.clone())).unwrap();
        let mut pts = ps.points().to_vec();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        for i in (1..pts.len()).rev() {
            pts.swap(i, rng.gen_range(0..=i));
        }
        let shuffled = PointSet::new(pts.clone()).unwrap();
        prop_assert_eq!(brute_force_optimum(&Instance::new(shuffled)).unwrap().0, want);
        let rotated = PointSet::new(pts.iter().map(|p| Point::new(COORDS - p.y, p.x)).collect()).unwrap();
        prop_assert_eq!(brute_force_optimum(&Instance::new(rotated)).unwrap().0, want);
    }
}

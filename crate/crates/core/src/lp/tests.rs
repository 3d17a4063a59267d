use proptest::prelude::*;

use super::*;

fn col(cost: f64, lo: f64, hi: f64, entries: &[(u32, f64)]) -> Column {
    Column::new(cost, lo, hi, entries.to_vec())
}

/// Checks primal feasibility, dual sign feasibility, complementary slackness
/// and the duality gap of an optimal solution.
fn assert_kkt(model: &LpModel, sol: &LpSolution) {
    assert_eq!(sol.status, LpStatus::Optimal);
    let tol = 1e-6;
    let act = model.activities(&sol.x);
    for (i, row) in model.rows.iter().enumerate() {
        let slack = act[i] - row.rhs;
        match row.relation {
            Relation::Eq => assert!(slack.abs() <= tol, "row {i} slack {slack}"),
            Relation::Ge => {
                assert!(slack >= -tol, "row {i} slack {slack}");
                assert!(sol.duals[i] >= -tol, "row {i} dual {}", sol.duals[i]);
            }
            Relation::Le => {
                assert!(slack <= tol, "row {i} slack {slack}");
                assert!(sol.duals[i] <= tol, "row {i} dual {}", sol.duals[i]);
            }
        }
        assert!((sol.duals[i] * slack).abs() <= tol, "row {i} complementarity");
    }
    for (j, c) in model.cols.iter().enumerate() {
        let x = sol.x[j];
        assert!(x >= c.lo - tol && x <= c.hi + tol, "col {j} value {x}");
        let d = sol.reduced_cost(model, j);
        let at_lo = (x - c.lo).abs() <= tol;
        let at_hi = (x - c.hi).abs() <= tol;
        if !at_lo {
            assert!(d <= tol, "col {j} reduced cost {d} above lower bound");
        }
        if !at_hi {
            assert!(d >= -tol, "col {j} reduced cost {d} below upper bound");
        }
    }
    let dual = sol.dual_objective(model);
    assert!(dual <= sol.objective + tol, "weak duality {dual} > {}", sol.objective);
    assert!((dual - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()), "gap {dual} vs {}", sol.objective);
}

#[test]
fn single_variable_bounds() {
    let mut m = LpModel::new();
    m.add_row(Row::new(Relation::Ge, 3.0));
    m.add_row(Row::new(Relation::Le, 10.0));
    m.add_column(col(1.0, -INF, INF, &[(0, 1.0), (1, 1.0)]));
    let s = solve(&m, None);
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective - 3.0).abs() < 1e-9);
    assert!((s.duals[0] - 1.0).abs() < 1e-9);
    assert_kkt(&m, &s);
}

#[test]
fn infeasible_pair() {
    let mut m = LpModel::new();
    m.add_row(Row::new(Relation::Ge, 2.0));
    m.add_row(Row::new(Relation::Le, 1.0));
    m.add_column(col(1.0, -INF, INF, &[(0, 1.0), (1, 1.0)]));
    assert_eq!(solve(&m, None).status, LpStatus::Infeasible);
}

#[test]
fn unbounded_ray() {
    let mut m = LpModel::new();
    m.add_row(Row::new(Relation::Ge, 1.0));
    m.add_column(col(-1.0, 0.0, INF, &[(0, 1.0)]));
    assert_eq!(solve(&m, None).status, LpStatus::Unbounded);
}

/// Set partition over the 8 wedges of the unit square: two triangulations
/// (two triangles each) and the quadrilateral.
fn square_partition_lp() -> LpModel {
    let mut m = LpModel::new();
    for _ in 0..8 {
        m.add_row(Row::new(Relation::Eq, 1.0));
    }
    // Wedges: vertex 0 -> {0,1}, 1 -> {2,3}, 2 -> {4,5}, 3 -> {6,7}.
    // Diagonal 0-2 splits the corners at 0 and 2; diagonal 1-3 at 1 and 3.
    let t012 = [0u32, 2, 3, 4];
    let t023 = [1u32, 5, 6, 7];
    let t013 = [0u32, 1, 2, 6];
    let t123 = [3u32, 4, 5, 7];
    let quad = [0u32, 1, 2, 3, 4, 5, 6, 7];
    for w in [&t012[..], &t023[..], &t013[..], &t123[..], &quad[..]] {
        m.add_column(col(1.0, 0.0, INF, &w.iter().map(|&r| (r, 1.0)).collect::<Vec<_>>()));
    }
    m
}

#[test]
fn square_partition_root() {
    let m = square_partition_lp();
    let s = solve(&m, None);
    assert!((s.objective - 1.0).abs() < 1e-9);
    assert!((s.x[4] - 1.0).abs() < 1e-9);
    assert_kkt(&m, &s);
}

#[test]
fn adding_columns_lowers_objective() {
    let full = square_partition_lp();
    let mut m = full.clone();
    let quad = m.cols.pop().unwrap();
    let mut sx = Simplex::new(m.clone());
    let before = sx.solve();
    assert!((before.objective - 2.0).abs() < 1e-9);
    assert!(quad.cost - quad.entries.iter().map(|&(r, a)| before.duals[r as usize] * a).sum::<f64>() < 0.0);
    sx.add_columns(vec![quad.clone()]);
    let after = sx.solve();
    assert!((after.objective - 1.0).abs() < 1e-9);
    assert_kkt(sx.model(), &after);

    // Duplicates and empty columns change nothing.
    sx.add_columns(vec![quad, col(1.0, 0.0, INF, &[])]);
    let again = sx.solve();
    assert!((again.objective - after.objective).abs() < 1e-9);
    assert_kkt(sx.model(), &again);
}

#[test]
fn adding_rows_raises_objective() {
    let m = square_partition_lp();
    let mut sx = Simplex::new(m);
    let before = sx.solve().objective;
    // Forbid the quadrilateral with a cut u_quad <= 0.
    sx.add_rows(vec![NewRow {
        row: Row::new(Relation::Le, 0.0),
        entries: vec![(4, 1.0)],
    }]);
    let after = sx.solve();
    assert!(after.objective >= before - 1e-9);
    assert!((after.objective - 2.0).abs() < 1e-9);
    assert_kkt(sx.model(), &after);
    // A redundant row keeps the optimum.
    sx.add_rows(vec![NewRow {
        row: Row::new(Relation::Ge, 0.0),
        entries: vec![(0, 1.0), (1, 1.0)],
    }]);
    let again = sx.solve();
    assert!((again.objective - 2.0).abs() < 1e-9);
    assert_kkt(sx.model(), &again);
}

#[test]
fn fixing_bounds() {
    let m = square_partition_lp();
    let mut sx = Simplex::new(m);
    let free = sx.solve().objective;
    sx.set_bounds(0, 1.0, 1.0);
    let fixed = sx.solve();
    assert!((fixed.x[0] - 1.0).abs() < 1e-9);
    assert!((fixed.objective - 2.0).abs() < 1e-9);
    sx.set_bounds(4, 0.0, 0.0);
    sx.set_bounds(0, 0.0, 0.0);
    let s = sx.solve();
    assert!(s.x[0].abs() < 1e-9 && s.x[4].abs() < 1e-9);
    assert!((s.objective - 2.0).abs() < 1e-9);
    sx.set_bounds(0, 0.0, INF);
    sx.set_bounds(4, 0.0, INF);
    let relaxed = sx.solve();
    assert!(relaxed.objective <= fixed.objective + 1e-9);
    assert!((relaxed.objective - free).abs() < 1e-9);
}

#[test]
fn contradictory_fixing_is_infeasible() {
    let m = square_partition_lp();
    let mut sx = Simplex::new(m);
    sx.solve();
    sx.set_bounds(0, 1.0, 1.0);
    sx.set_bounds(2, 1.0, 1.0);
    let s = sx.solve();
    assert_eq!(s.status, LpStatus::Infeasible);
    // Phase-one duals certify that no completion exists among these columns.
    assert_eq!(s.duals.len(), 8);
}

#[test]
fn warm_start_reuses_basis() {
    let m = square_partition_lp();
    let mut sx = Simplex::new(m.clone());
    let cold = sx.solve();
    let warm = solve(&m, Some(&sx.basis()));
    assert!((cold.objective - warm.objective).abs() < 1e-12);
    assert!(warm.iterations <= cold.iterations);
}

#[test]
fn redundant_equalities_are_tolerated() {
    let mut m = LpModel::new();
    m.add_row(Row::new(Relation::Eq, 1.0));
    m.add_row(Row::new(Relation::Eq, 1.0));
    m.add_row(Row::new(Relation::Eq, 1.0));
    m.add_column(col(1.0, 0.0, INF, &[(0, 1.0), (1, 1.0), (2, 1.0)]));
    m.add_column(col(3.0, 0.0, INF, &[(0, 1.0), (1, 1.0), (2, 1.0)]));
    let s = solve(&m, None);
    assert!((s.objective - 1.0).abs() < 1e-9);
    assert_kkt(&m, &s);
}

#[test]
fn export_has_sections() {
    let mut m = square_partition_lp();
    m.cols[0].name = Some("u_t012".into());
    m.rows[0].name = Some("w0".into());
    let text = write_lp(&m);
    assert!(text.starts_with("Minimize\n obj: u_t012 + c1"));
    assert!(text.contains("Subject To\n w0: u_t012 + c2 + c4 = 1\n"));
    assert!(text.contains("Bounds\n"));
    assert!(text.trim_end().ends_with("End"));
}

#[test]
fn deterministic() {
    let m = square_partition_lp();
    let a = solve(&m, None);
    let b = solve(&m, None);
    assert_eq!(a.status, b.status);
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.x, b.x);
}

fn relation_strategy() -> impl Strategy<Value = Relation> {
    prop_oneof![Just(Relation::Eq), Just(Relation::Ge), Just(Relation::Le)]
}

/// Random LPs built around a known feasible point in a bounded box, so the
/// optimum exists.
fn feasible_lp() -> impl Strategy<Value = LpModel> {
    (1usize..7, 1usize..9).prop_flat_map(|(m, n)| {
        (
            proptest::collection::vec(proptest::collection::vec(-3i32..4, n), m),
            proptest::collection::vec(relation_strategy(), m),
            proptest::collection::vec(0i32..4, m),
            proptest::collection::vec(-5i32..6, n),
            proptest::collection::vec((0i32..3, 0i32..3, 0i32..3), n),
        )
            .prop_map(move |(a, rel, slack, cost, boxes)| {
                let mut model = LpModel::new();
                let x0: Vec<f64> = boxes.iter().map(|&(l, w, t)| l as f64 + (w.min(t)) as f64).collect();
                for i in 0..m {
                    let act: f64 = (0..n).map(|j| a[i][j] as f64 * x0[j]).sum();
                    let rhs = match rel[i] {
                        Relation::Eq => act,
                        Relation::Ge => act - slack[i] as f64,
                        Relation::Le => act + slack[i] as f64,
                    };
                    model.add_row(Row::new(rel[i], rhs));
                }
                for j in 0..n {
                    let (l, w, _) = boxes[j];
                    let entries: Vec<(u32, f64)> =
                        (0..m).filter(|&i| a[i][j] != 0).map(|i| (i as u32, a[i][j] as f64)).collect();
                    model.add_column(col(cost[j] as f64, l as f64, (l + w) as f64, &entries));
                }
                model
            })
    })
}

proptest! {
    #[test]
    fn random_feasible_lps_satisfy_kkt(model in feasible_lp()) {
        let s = solve(&model, None);
        assert_kkt(&model, &s);
    }

    #[test]
    fn tiny_refactor_interval_agrees(model in feasible_lp()) {
        let a = solve(&model, None);
        let mut sx = Simplex::new(model.clone());
        sx.set_refactor_interval(1);
        let b = sx.solve();
        prop_assert!((a.objective - b.objective).abs() <= 1e-7 * (1.0 + a.objective.abs()));
    }

    #[test]
    fn incremental_rows_match_cold_solve(model in feasible_lp()) {
        let m = model.num_rows();
        let half = m / 2;
        let mut first = LpModel::new();
        first.rows = model.rows[..half].to_vec();
        first.cols = model.cols.iter().map(|c| {
            let mut c = c.clone();
            c.entries.retain(|&(r, _)| (r as usize) < half);
            c
        }).collect();
        let mut sx = Simplex::new(first);
        let before = sx.solve();
        let new_rows: Vec<NewRow> = (half..m).map(|i| NewRow {
            row: model.rows[i].clone(),
            entries: model.cols.iter().enumerate().filter_map(|(j, c)| {
                c.entries.iter().find(|e| e.0 as usize == i).map(|e| (j as u32, e.1))
            }).collect(),
        }).collect();
        sx.add_rows(new_rows);
        let after = sx.solve();
        let cold = solve(&model, None);
        prop_assert!(after.objective >= before.objective - 1e-7);
        prop_assert!((after.objective - cold.objective).abs() <= 1e-7 * (1.0 + cold.objective.abs()));
        assert_kkt(sx.model(), &after);
    }

    #[test]
    fn warm_bound_changes_match_cold_solve(
        model in feasible_lp(),
        rounds in proptest::collection::vec(proptest::collection::vec((0usize..8, 0u8..3), 1..4), 1..5),
    ) {
        let mut sx = Simplex::new(model.clone());
        sx.set_refactor_interval(3);
        sx.solve();
        let n = model.num_cols();
        for round in rounds {
            let mut cold = sx.model().clone();
            for (j, mode) in round {
                let j = j % n;
                let (lo, hi) = (model.cols[j].lo, model.cols[j].hi);
                let (a, b) = match mode {
                    0 => (lo, lo),
                    1 => (hi, hi),
                    _ => (lo, hi),
                };
                sx.set_bounds(j, a, b);
                cold.cols[j].lo = a;
                cold.cols[j].hi = b;
            }
            let warm = sx.solve();
            let reference = solve(&cold, None);
            prop_assert_eq!(warm.status, reference.status);
            if warm.status == LpStatus::Optimal {
                assert_kkt(&cold, &warm);
                prop_assert!((warm.objective - reference.objective).abs() <= 1e-7 * (1.0 + reference.objective.abs()));
            }
        }
    }
}

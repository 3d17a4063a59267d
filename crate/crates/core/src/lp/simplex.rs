//! Bounded primal revised simplex on a sparse LU factorised basis.
//!
//! Every row `i` gets a logical variable `r_i = a_i x`, so the constraint
//! matrix is `[A | -I]` with right-hand side zero and the row relation moves
//! into the bounds of `r_i`. Infeasible bases are repaired by a composite
//! phase one that minimises the sum of bound violations of the basic
//! variables, which lets the same loop warm start after bound changes, new
//! rows and new columns.

use super::factor::Factor;
use super::{Column, LpModel, LpSolution, LpStatus, NewRow, Relation, Row, INF};

const FEAS_TOL: f64 = 1e-7;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

/// Basis statuses for structural columns and row logicals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub cols: Vec<VarStatus>,
    pub rows: Vec<VarStatus>,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    model: LpModel,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    status: Vec<VarStatus>,
    x: Vec<f64>,
    /// Basic variable per basis position.
    head: Vec<usize>,
    /// Basis position per variable, `usize::MAX` when nonbasic.
    where_basic: Vec<usize>,
    factor: Factor,
    factored: bool,
    pivots_since_refactor: usize,
    refactor_interval: usize,
    iteration_cap: Option<usize>,
    total_iterations: usize,
}

fn logical_bounds(row: &Row) -> (f64, f64) {
    match row.relation {
        Relation::Eq => (row.rhs, row.rhs),
        Relation::Ge => (row.rhs, INF),
        Relation::Le => (-INF, row.rhs),
    }
}

fn resting_status(lo: f64, hi: f64) -> (VarStatus, f64) {
    if lo.is_finite() {
        (VarStatus::AtLower, lo)
    } else if hi.is_finite() {
        (VarStatus::AtUpper, hi)
    } else {
        (VarStatus::Free, 0.0)
    }
}

impl Simplex {
    pub fn new(model: LpModel) -> Self {
        let n = model.cols.len();
        let m = model.rows.len();
        let mut s = Simplex {
            lo: Vec::with_capacity(n + m),
            hi: Vec::with_capacity(n + m),
            cost: Vec::with_capacity(n + m),
            status: Vec::with_capacity(n + m),
            x: Vec::with_capacity(n + m),
            head: (n..n + m).collect(),
            where_basic: Vec::new(),
            factor: Factor::default(),
            factored: false,
            pivots_since_refactor: 0,
            refactor_interval: 100,
            iteration_cap: None,
            total_iterations: 0,
            model,
        };
        for c in &s.model.cols {
            let (st, v) = resting_status(c.lo, c.hi);
            s.lo.push(c.lo);
            s.hi.push(c.hi);
            s.cost.push(c.cost);
            s.status.push(st);
            s.x.push(v);
        }
        for r in &s.model.rows {
            let (lo, hi) = logical_bounds(r);
            s.lo.push(lo);
            s.hi.push(hi);
            s.cost.push(0.0);
            s.status.push(VarStatus::Basic);
            s.x.push(0.0);
        }
        s.rebuild_where_basic();
        s
    }

    pub fn model(&self) -> &LpModel {
        &self.model
    }

    pub fn num_rows(&self) -> usize {
        self.model.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.model.cols.len()
    }

    /// Pivots between full reinversions of the basis.
    pub fn set_refactor_interval(&mut self, k: usize) {
        self.refactor_interval = k.max(1);
    }

    pub fn set_iteration_cap(&mut self, cap: Option<usize>) {
        self.iteration_cap = cap;
    }

    pub fn total_iterations(&self) -> usize {
        self.total_iterations
    }

    fn n_struct(&self) -> usize {
        self.model.cols.len()
    }

    fn rebuild_where_basic(&mut self) {
        self.where_basic = vec![usize::MAX; self.status.len()];
        for (p, &v) in self.head.iter().enumerate() {
            self.where_basic[v] = p;
        }
    }

    /// Visits the nonzeros of the constraint column of variable `v`.
    #[inline]
    fn for_column(&self, v: usize, mut f: impl FnMut(usize, f64)) {
        let n = self.n_struct();
        if v < n {
            for &(r, a) in &self.model.cols[v].entries {
                f(r as usize, a);
            }
        } else {
            f(v - n, -1.0);
        }
    }

    #[inline]
    fn dot_column(&self, v: usize, y: &[f64]) -> f64 {
        let n = self.n_struct();
        if v < n {
            self.model.cols[v].entries.iter().map(|&(r, a)| y[r as usize] * a).sum()
        } else {
            -y[v - n]
        }
    }

    /// `B^-1 a_v`.
    fn ftran(&self, v: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.num_rows()];
        self.for_column(v, |r, x| a[r] += x);
        self.factor.ftran(&mut a)
    }

    /// Row `p` of `B^-1`.
    fn binv_row(&self, p: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.num_rows()];
        e[p] = 1.0;
        self.factor.btran(&mut e)
    }

    /// Refactorises the basis. Columns that turn out dependent are dropped
    /// to a bound and replaced by logicals.
    fn refactor(&mut self) {
        let m = self.num_rows();
        let n = self.n_struct();
        let columns: Vec<Vec<(usize, f64)>> = self
            .head
            .iter()
            .map(|&v| {
                let mut c = Vec::new();
                self.for_column(v, |r, a| c.push((r, a)));
                c
            })
            .collect();
        let (factor, replaced) = Factor::new(m, &columns);
        self.factor = factor;
        for (p, row) in replaced {
            let v = self.head[p];
            let (st, val) = resting_status(self.lo[v], self.hi[v]);
            self.status[v] = st;
            self.x[v] = val;
            self.head[p] = n + row;
            self.status[n + row] = VarStatus::Basic;
        }
        self.rebuild_where_basic();
        self.recompute_basic_values();
        self.factored = true;
        self.pivots_since_refactor = 0;
    }

    fn recompute_basic_values(&mut self) {
        let m = self.num_rows();
        let mut rhs = vec![0.0; m];
        for v in 0..self.status.len() {
            if self.status[v] != VarStatus::Basic && self.x[v] != 0.0 {
                let xv = self.x[v];
                self.for_column(v, |r, a| rhs[r] -= a * xv);
            }
        }
        let xb = self.factor.ftran(&mut rhs);
        for p in 0..m {
            self.x[self.head[p]] = xb[p];
        }
    }

    fn phase_cost(&self, v: usize) -> f64 {
        let x = self.x[v];
        if x < self.lo[v] - FEAS_TOL {
            -1.0
        } else if x > self.hi[v] + FEAS_TOL {
            1.0
        } else {
            0.0
        }
    }

    fn basic_costs(&self, phase_one: bool) -> Vec<f64> {
        self.head
            .iter()
            .map(|&v| if phase_one { self.phase_cost(v) } else { self.cost[v] })
            .collect()
    }

    fn duals_for(&self, cb: &[f64]) -> Vec<f64> {
        self.factor.btran(&mut cb.to_vec())
    }

    fn is_primal_infeasible(&self) -> bool {
        self.head.iter().any(|&v| self.phase_cost(v) != 0.0)
    }

    pub fn basis(&self) -> Basis {
        let n = self.n_struct();
        Basis {
            cols: self.status[..n].to_vec(),
            rows: self.status[n..].to_vec(),
        }
    }

    /// Installs a basis hint. Mismatched dimensions are padded or truncated
    /// and the basis is repaired at the next solve.
    pub fn set_basis(&mut self, basis: &Basis) {
        let n = self.n_struct();
        let m = self.num_rows();
        for v in 0..n + m {
            let hinted = if v < n { basis.cols.get(v) } else { basis.rows.get(v - n) };
            let st = hinted.copied().unwrap_or(if v < n { VarStatus::AtLower } else { VarStatus::Basic });
            self.set_nonbasic_or_basic(v, st);
        }
        let mut head: Vec<usize> = (0..n + m).filter(|&v| self.status[v] == VarStatus::Basic).collect();
        if head.len() > m {
            // Demote surplus structurals, keeping logicals.
            let surplus = head.len() - m;
            let mut demote: Vec<usize> = head.iter().copied().filter(|&v| v < n).collect();
            demote.truncate(surplus);
            for &v in &demote {
                self.set_nonbasic_or_basic(v, VarStatus::AtLower);
            }
            head.retain(|v| !demote.contains(v));
        }
        if head.len() < m {
            for i in 0..m {
                if head.len() == m {
                    break;
                }
                if self.status[n + i] != VarStatus::Basic {
                    self.status[n + i] = VarStatus::Basic;
                    head.push(n + i);
                }
            }
        }
        self.head = head;
        self.factored = false;
    }

    fn set_nonbasic_or_basic(&mut self, v: usize, st: VarStatus) {
        let (lo, hi) = (self.lo[v], self.hi[v]);
        match st {
            VarStatus::Basic => self.status[v] = VarStatus::Basic,
            VarStatus::AtLower if lo.is_finite() => {
                self.status[v] = VarStatus::AtLower;
                self.x[v] = lo;
            }
            VarStatus::AtUpper if hi.is_finite() => {
                self.status[v] = VarStatus::AtUpper;
                self.x[v] = hi;
            }
            _ => {
                let (s, val) = resting_status(lo, hi);
                self.status[v] = s;
                self.x[v] = val;
            }
        }
    }

    /// Appends columns; they enter nonbasic at a finite bound.
    pub fn add_columns(&mut self, cols: Vec<Column>) -> std::ops::Range<usize> {
        let n = self.n_struct();
        let k = cols.len();
        let m = self.num_rows();
        debug_assert!(cols.iter().all(|c| c.entries.iter().all(|&(r, _)| (r as usize) < m)));
        let mut lo = Vec::with_capacity(k);
        let mut hi = Vec::with_capacity(k);
        let mut cost = Vec::with_capacity(k);
        let mut st = Vec::with_capacity(k);
        let mut xs = Vec::with_capacity(k);
        let mut shift = vec![0.0; m];
        let mut any_shift = false;
        for c in &cols {
            let (s, v) = resting_status(c.lo, c.hi);
            lo.push(c.lo);
            hi.push(c.hi);
            cost.push(c.cost);
            st.push(s);
            xs.push(v);
            if v != 0.0 {
                any_shift = true;
                for &(r, a) in &c.entries {
                    shift[r as usize] += a * v;
                }
            }
        }
        self.lo.splice(n..n, lo);
        self.hi.splice(n..n, hi);
        self.cost.splice(n..n, cost);
        self.status.splice(n..n, st);
        self.x.splice(n..n, xs);
        for v in &mut self.head {
            if *v >= n {
                *v += k;
            }
        }
        self.model.cols.extend(cols);
        self.rebuild_where_basic();
        if any_shift && self.factored {
            // x_B -= B^-1 (sum a_j x_j) for the new nonbasic values.
            let d = self.factor.ftran(&mut shift);
            for p in 0..m {
                let v = self.head[p];
                self.x[v] -= d[p];
            }
        }
        n..n + k
    }

    /// Appends rows; their logicals enter the basis.
    pub fn add_rows(&mut self, rows: Vec<NewRow>) -> std::ops::Range<usize> {
        let m = self.num_rows();
        let k = rows.len();
        let n = self.n_struct();
        let new_m = m + k;
        for (t, nr) in rows.iter().enumerate() {
            for &(c, a) in &nr.entries {
                self.model.cols[c as usize].entries.push(((m + t) as u32, a));
            }
        }
        // Logical values r = a_row . x.
        let mut new_vals = Vec::with_capacity(k);
        for nr in &rows {
            let v: f64 = nr.entries.iter().map(|&(c, a)| a * self.x[c as usize]).sum();
            new_vals.push(v);
        }
        // The basis grows by the new logicals; refactorise at the next solve.
        self.factored = false;
        for (t, nr) in rows.into_iter().enumerate() {
            let (lo, hi) = logical_bounds(&nr.row);
            self.lo.push(lo);
            self.hi.push(hi);
            self.cost.push(0.0);
            self.status.push(VarStatus::Basic);
            self.x.push(new_vals[t]);
            self.head.push(n + m + t);
            self.model.rows.push(nr.row);
        }
        self.rebuild_where_basic();
        m..new_m
    }

    pub fn bounds(&self, col: usize) -> (f64, f64) {
        (self.lo[col], self.hi[col])
    }

    /// Changes the bounds of a structural column.
    pub fn set_bounds(&mut self, col: usize, lo: f64, hi: f64) {
        assert!(lo <= hi, "inverted bounds");
        self.lo[col] = lo;
        self.hi[col] = hi;
        self.model.cols[col].lo = lo;
        self.model.cols[col].hi = hi;
        if self.status[col] == VarStatus::Basic {
            return;
        }
        let old = self.x[col];
        let (st, new) = match self.status[col] {
            VarStatus::AtUpper if hi.is_finite() => (VarStatus::AtUpper, hi),
            _ => resting_status(lo, hi),
        };
        self.status[col] = st;
        self.x[col] = new;
        let delta = new - old;
        if delta != 0.0 && self.factored {
            let alpha = self.ftran(col);
            for (p, &a) in alpha.iter().enumerate() {
                let v = self.head[p];
                self.x[v] -= a * delta;
            }
        }
    }

    fn iteration_limit(&self) -> usize {
        self.iteration_cap
            .unwrap_or_else(|| (50 * (self.status.len() + self.num_rows())).max(50_000))
    }

    pub fn solve(&mut self) -> LpSolution {
        let m = self.num_rows();
        if m == 0 {
            return self.solve_without_rows();
        }
        if !self.factored {
            self.refactor();
        }
        let limit = self.iteration_limit();
        self.run(limit)
    }

    fn run(&mut self, limit: usize) -> LpSolution {
        let m = self.num_rows();
        let n = self.n_struct();
        let bland_threshold = 10 * (m + n);
        let mut degenerate_run = 0usize;
        let mut iterations = 0usize;

        let mut phase_one = self.is_primal_infeasible();
        let mut cb = self.basic_costs(phase_one);
        let mut pi = self.duals_for(&cb);

        loop {
            if iterations >= limit {
                return self.finish(LpStatus::IterationLimit, pi, iterations);
            }
            if self.pivots_since_refactor >= self.refactor_interval {
                self.refactor();
                phase_one = self.is_primal_infeasible();
                cb = self.basic_costs(phase_one);
                pi = self.duals_for(&cb);
            }
            if phase_one && !self.is_primal_infeasible() {
                phase_one = false;
                cb = self.basic_costs(false);
                pi = self.duals_for(&cb);
            }
            let bland = degenerate_run > bland_threshold;

            // Pricing.
            let mut enter = usize::MAX;
            let mut enter_d = 0.0;
            let mut best = OPT_TOL;
            for v in 0..n + m {
                let st = self.status[v];
                if st == VarStatus::Basic || self.lo[v] == self.hi[v] {
                    continue;
                }
                let c = if phase_one { 0.0 } else { self.cost[v] };
                let d = c - self.dot_column(v, &pi);
                let score = match st {
                    VarStatus::AtLower => -d,
                    VarStatus::AtUpper => d,
                    VarStatus::Free => d.abs(),
                    VarStatus::Basic => unreachable!(),
                };
                if score > best {
                    enter = v;
                    enter_d = d;
                    best = score;
                    if bland {
                        break;
                    }
                }
            }
            if enter == usize::MAX {
                let status = if phase_one { LpStatus::Infeasible } else { LpStatus::Optimal };
                return self.finish(status, pi, iterations);
            }
            let dir = if enter_d < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(enter);

            // Harris two-pass ratio test.
            let mut theta_max = self.hi[enter] - self.lo[enter];
            for (p, &a) in alpha.iter().enumerate() {
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                if let Some(r) = self.ratio(p, -dir * a, true) {
                    theta_max = theta_max.min(r);
                }
            }
            if theta_max == INF {
                if phase_one {
                    // Cannot happen with a consistent phase-one objective.
                    self.refactor();
                    iterations += 1;
                    continue;
                }
                return self.finish(LpStatus::Unbounded, pi, iterations);
            }
            let mut leave = usize::MAX;
            let mut leave_ratio = INF;
            let mut leave_abs = 0.0;
            for (p, &a) in alpha.iter().enumerate() {
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                if let Some(r) = self.ratio(p, -dir * a, false) {
                    if r <= theta_max {
                        let better = if bland {
                            leave == usize::MAX || self.head[p] < self.head[leave]
                        } else {
                            a.abs() > leave_abs
                        };
                        if better {
                            leave = p;
                            leave_ratio = r.max(0.0);
                            leave_abs = a.abs();
                        }
                    }
                }
            }
            let range = self.hi[enter] - self.lo[enter];
            iterations += 1;
            self.total_iterations += 1;

            if leave == usize::MAX || range <= leave_ratio {
                // Bound flip of the entering variable.
                let step = range;
                self.x[enter] += dir * step;
                self.status[enter] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                for (p, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        let v = self.head[p];
                        self.x[v] -= dir * a * step;
                    }
                }
                degenerate_run = 0;
            } else {
                let step = leave_ratio;
                let lv = self.head[leave];
                let delta_leave = -dir * alpha[leave];
                // An infeasible basic leaves at the bound it was heading for.
                let to_lower = if self.x[lv] < self.lo[lv] - FEAS_TOL {
                    true
                } else if self.x[lv] > self.hi[lv] + FEAS_TOL {
                    false
                } else {
                    delta_leave < 0.0
                };
                self.x[enter] += dir * step;
                for (p, &a) in alpha.iter().enumerate() {
                    if a != 0.0 {
                        let v = self.head[p];
                        self.x[v] -= dir * a * step;
                    }
                }
                // Snap the leaving variable onto the bound it reached.
                if to_lower {
                    self.x[lv] = self.lo[lv];
                    self.status[lv] = VarStatus::AtLower;
                } else {
                    self.x[lv] = self.hi[lv];
                    self.status[lv] = VarStatus::AtUpper;
                }
                if !self.x[lv].is_finite() {
                    let (st, val) = resting_status(self.lo[lv], self.hi[lv]);
                    self.status[lv] = st;
                    self.x[lv] = val;
                }
                // pi' = pi + (d_q / alpha_r) rho_r, using the old row r.
                let row_r = self.binv_row(leave);
                let factor = enter_d / alpha[leave];
                for (t, &rv) in pi.iter_mut().zip(&row_r) {
                    *t += factor * rv;
                }
                self.factor.update(leave, &alpha);
                self.head[leave] = enter;
                self.where_basic[lv] = usize::MAX;
                self.where_basic[enter] = leave;
                self.status[enter] = VarStatus::Basic;
                cb[leave] = if phase_one { 0.0 } else { self.cost[enter] };
                self.pivots_since_refactor += 1;
                if step < DEGENERATE_STEP {
                    degenerate_run += 1;
                } else {
                    degenerate_run = 0;
                }
            }
            if phase_one {
                // Basics that became feasible change their phase-one cost.
                let mut delta = vec![0.0; m];
                let mut changed = false;
                for p in 0..m {
                    let c = self.phase_cost(self.head[p]);
                    if c != cb[p] {
                        delta[p] = c - cb[p];
                        cb[p] = c;
                        changed = true;
                    }
                }
                if changed {
                    for (t, d) in pi.iter_mut().zip(self.factor.btran(&mut delta)) {
                        *t += d;
                    }
                }
            }
        }
    }

    /// Step length until basic position `p` hits a bound when it moves at
    /// rate `delta` per unit step. `relaxed` widens feasible bounds by the
    /// feasibility tolerance (first Harris pass).
    #[inline]
    fn ratio(&self, p: usize, delta: f64, relaxed: bool) -> Option<f64> {
        let v = self.head[p];
        let x = self.x[v];
        let (lo, hi) = (self.lo[v], self.hi[v]);
        let tol = if relaxed { FEAS_TOL } else { 0.0 };
        if x < lo - FEAS_TOL {
            // Below its lower bound: limited only when moving up into range.
            return (delta > 0.0).then(|| (lo - x) / delta);
        }
        if x > hi + FEAS_TOL {
            return (delta < 0.0).then(|| (x - hi) / -delta);
        }
        if delta < 0.0 {
            lo.is_finite().then(|| ((x - lo + tol) / -delta).max(0.0))
        } else {
            hi.is_finite().then(|| ((hi - x + tol) / delta).max(0.0))
        }
    }

    fn finish(&self, status: LpStatus, duals: Vec<f64>, iterations: usize) -> LpSolution {
        let n = self.n_struct();
        let x: Vec<f64> = self.x[..n].to_vec();
        let objective = x.iter().zip(&self.cost[..n]).map(|(a, b)| a * b).sum();
        LpSolution {
            status,
            objective,
            x,
            duals,
            iterations,
        }
    }

    fn solve_without_rows(&mut self) -> LpSolution {
        let n = self.n_struct();
        for v in 0..n {
            let c = self.cost[v];
            let (lo, hi) = (self.lo[v], self.hi[v]);
            let target = if c > 0.0 {
                lo
            } else if c < 0.0 {
                hi
            } else if lo.is_finite() {
                lo
            } else if hi.is_finite() {
                hi
            } else {
                0.0
            };
            if !target.is_finite() {
                return self.finish(LpStatus::Unbounded, Vec::new(), 0);
            }
            self.x[v] = target;
            self.status[v] = if target == lo {
                VarStatus::AtLower
            } else if target == hi {
                VarStatus::AtUpper
            } else {
                VarStatus::Free
            };
        }
        self.finish(LpStatus::Optimal, Vec::new(), 0)
    }
}

//! Sparse LU factorisation of the basis with product-form updates.
//!
//! Elimination picks pivots by smallest active column count and, inside the
//! column, the sparsest acceptable row (threshold partial pivoting). Basis
//! changes after a factorisation are appended as eta columns.

const ABS_PIVOT_TOL: f64 = 1e-9;
const REL_PIVOT_TOL: f64 = 0.01;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Step {
    row: usize,
    pos: usize,
    pivot: f64,
    /// Multipliers `(row, l)`: row `row` was reduced by `l` times the pivot row.
    lower: Vec<(usize, f64)>,
    /// Remaining pivot-row entries `(pos, value)`.
    upper: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    others: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Factor {
    m: usize,
    steps: Vec<Step>,
    etas: Vec<Eta>,
}

/// Outcome of a factorisation: positions whose column was dependent, each
/// paired with a row whose logical should take its place.
pub type Replacements = Vec<(usize, usize)>;

impl Factor {
    /// Factorises the `m x m` matrix given by its columns (entries
    /// `(row, value)`). Dependent columns are replaced by `-e_row` for some
    /// unpivoted row; the pairs are returned.
    pub fn new(m: usize, columns: &[Vec<(usize, f64)>]) -> (Self, Replacements) {
        assert_eq!(columns.len(), m);
        let mut cols: Vec<Vec<(usize, f64)>> = columns
            .iter()
            .map(|c| {
                let mut c: Vec<(usize, f64)> = c.iter().copied().filter(|e| e.1 != 0.0).collect();
                c.sort_unstable_by_key(|e| e.0);
                // Merge duplicates.
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(c.len());
                for (r, v) in c {
                    match merged.last_mut() {
                        Some(last) if last.0 == r => last.1 += v,
                        _ => merged.push((r, v)),
                    }
                }
                merged
            })
            .collect();
        let mut row_pat: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, c) in cols.iter().enumerate() {
            for &(r, _) in c {
                row_pat[r].push(j);
            }
        }
        let mut row_count: Vec<usize> = row_pat.iter().map(Vec::len).collect();
        let mut col_active = vec![true; m];
        let mut row_active = vec![true; m];
        let mut steps = Vec::with_capacity(m);
        let mut dead_cols = Vec::new();
        let mut slot = vec![usize::MAX; m];

        let mut remaining = m;
        while remaining > 0 {
            let mut best_col = usize::MAX;
            let mut best_cnt = usize::MAX;
            for j in 0..m {
                if col_active[j] && cols[j].len() < best_cnt {
                    best_cnt = cols[j].len();
                    best_col = j;
                    if best_cnt <= 1 {
                        break;
                    }
                }
            }
            let c = best_col;
            remaining -= 1;
            col_active[c] = false;
            let cmax = cols[c].iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
            if cmax <= ABS_PIVOT_TOL {
                for &(r, _) in &cols[c] {
                    row_count[r] -= 1;
                }
                dead_cols.push(c);
                cols[c].clear();
                continue;
            }
            let mut r = usize::MAX;
            let mut r_cnt = usize::MAX;
            let mut r_abs = 0.0;
            for &(i, v) in &cols[c] {
                let a = v.abs();
                if a >= REL_PIVOT_TOL * cmax && (row_count[i] < r_cnt || (row_count[i] == r_cnt && a > r_abs)) {
                    r = i;
                    r_cnt = row_count[i];
                    r_abs = a;
                }
            }
            let col_c = std::mem::take(&mut cols[c]);
            let pivot = col_c.iter().find(|e| e.0 == r).unwrap().1;
            let lower: Vec<(usize, f64)> = col_c
                .iter()
                .filter(|e| e.0 != r)
                .map(|&(i, v)| (i, v / pivot))
                .collect();
            for &(i, _) in &col_c {
                row_count[i] -= 1;
            }
            row_active[r] = false;
            // Pivot row entries in other active columns.
            let mut upper = Vec::new();
            let pat = std::mem::take(&mut row_pat[r]);
            for &j in &pat {
                if !col_active[j] {
                    continue;
                }
                let Some(k) = cols[j].iter().position(|e| e.0 == r) else { continue };
                let v = cols[j].swap_remove(k).1;
                upper.push((j, v));
                if lower.is_empty() {
                    continue;
                }
                // cols[j] -= v * lower
                for (k, e) in cols[j].iter().enumerate() {
                    slot[e.0] = k;
                }
                for &(i, l) in &lower {
                    let s = slot[i];
                    if s != usize::MAX && s < cols[j].len() && cols[j][s].0 == i {
                        cols[j][s].1 -= l * v;
                    } else {
                        cols[j].push((i, -l * v));
                        row_pat[i].push(j);
                        row_count[i] += 1;
                    }
                }
                for e in cols[j].iter() {
                    slot[e.0] = usize::MAX;
                }
                let before = cols[j].len();
                cols[j].retain(|e| e.1.abs() > DROP_TOL);
                if cols[j].len() != before {
                    // Drop cancelled entries from the row patterns.
                    for &(i, _) in &lower {
                        if !cols[j].iter().any(|e| e.0 == i) {
                            row_count[i] = row_count[i].saturating_sub(1);
                            if let Some(q) = row_pat[i].iter().position(|&x| x == j) {
                                row_pat[i].swap_remove(q);
                            }
                        }
                    }
                }
            }
            steps.push(Step {
                row: r,
                pos: c,
                pivot,
                lower,
                upper,
            });
        }
        let mut free_rows: Vec<usize> = (0..m).filter(|&i| row_active[i]).collect();
        free_rows.sort_unstable();
        dead_cols.sort_unstable();
        debug_assert_eq!(free_rows.len(), dead_cols.len());
        let replacements: Replacements = dead_cols.iter().copied().zip(free_rows.iter().copied()).collect();
        if !replacements.is_empty() {
            let dead: std::collections::HashSet<usize> = dead_cols.iter().copied().collect();
            for s in &mut steps {
                s.upper.retain(|e| !dead.contains(&e.0));
            }
            for &(pos, row) in &replacements {
                steps.push(Step {
                    row,
                    pos,
                    pivot: -1.0,
                    lower: Vec::new(),
                    upper: Vec::new(),
                });
            }
        }
        (
            Factor {
                m,
                steps,
                etas: Vec::new(),
            },
            replacements,
        )
    }

    /// Solves `B x = a`; `a` is indexed by row, the result by position.
    pub fn ftran(&self, a: &mut [f64]) -> Vec<f64> {
        let m = self.m;
        for s in &self.steps {
            let b = a[s.row];
            if b != 0.0 {
                for &(i, l) in &s.lower {
                    a[i] -= l * b;
                }
            }
        }
        let mut x = vec![0.0; m];
        for s in self.steps.iter().rev() {
            let mut v = a[s.row];
            for &(j, u) in &s.upper {
                v -= u * x[j];
            }
            x[s.pos] = v / s.pivot;
        }
        for e in &self.etas {
            let xr = x[e.pos] / e.pivot;
            x[e.pos] = xr;
            if xr != 0.0 {
                for &(i, a) in &e.others {
                    x[i] -= a * xr;
                }
            }
        }
        x
    }

    /// Solves `y^T B = c^T`; `c` is indexed by position, the result by row.
    pub fn btran(&self, c: &mut [f64]) -> Vec<f64> {
        for e in self.etas.iter().rev() {
            let mut v = c[e.pos];
            for &(i, a) in &e.others {
                v -= a * c[i];
            }
            c[e.pos] = v / e.pivot;
        }
        let mut w = vec![0.0; self.m];
        for s in &self.steps {
            let v = c[s.pos] / s.pivot;
            w[s.row] = v;
            if v != 0.0 {
                for &(j, u) in &s.upper {
                    c[j] -= u * v;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let mut v = w[s.row];
            for &(i, l) in &s.lower {
                v -= l * w[i];
            }
            w[s.row] = v;
        }
        w
    }

    /// Records that position `pos` now holds a column whose ftran is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let others = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > DROP_TOL)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            others,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn dense_mul(cols: &[Vec<(usize, f64)>], x: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (j, c) in cols.iter().enumerate() {
            for &(r, v) in c {
                out[r] += v * x[j];
            }
        }
        out
    }

    fn random_sparse(rng: &mut Xoshiro256PlusPlus, m: usize) -> Vec<Vec<(usize, f64)>> {
        (0..m)
            .map(|j| {
                let mut c = vec![(j, rng.gen_range(1.0..3.0))];
                for _ in 0..rng.gen_range(0..4) {
                    c.push((rng.gen_range(0..m), rng.gen_range(-2.0..2.0)));
                }
                c
            })
            .collect()
    }

    #[test]
    fn solves_match_products() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        for _ in 0..30 {
            let m = rng.gen_range(1..40);
            let cols = random_sparse(&mut rng, m);
            let (f, rep) = Factor::new(m, &cols);
            if !rep.is_empty() {
                continue;
            }
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = f.ftran(&mut b.clone());
            let back = dense_mul(&cols, &x, m);
            for i in 0..m {
                assert!((back[i] - b[i]).abs() < 1e-8);
            }
            // y^T B = c^T  <=>  y . col_j = c_j
            let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = f.btran(&mut c.clone());
            for j in 0..m {
                let d: f64 = cols[j].iter().map(|&(r, v)| v * y[r]).sum();
                assert!((d - c[j]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn updates_track_column_swaps() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let m = 25;
        let mut cols = random_sparse(&mut rng, m);
        let (mut f, rep) = Factor::new(m, &cols);
        assert!(rep.is_empty());
        for _ in 0..15 {
            let pos = rng.gen_range(0..m);
            let new: Vec<(usize, f64)> = vec![(pos, 2.5), (rng.gen_range(0..m), 0.7)];
            let mut dense = vec![0.0; m];
            for &(r, v) in &new {
                dense[r] += v;
            }
            let alpha = f.ftran(&mut dense.clone());
            if alpha[pos].abs() < 1e-3 {
                continue;
            }
            f.update(pos, &alpha);
            cols[pos] = new;
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = f.ftran(&mut b.clone());
            let back = dense_mul(&cols, &x, m);
            for i in 0..m {
                assert!((back[i] - b[i]).abs() < 1e-7);
            }
            let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = f.btran(&mut c.clone());
            for j in 0..m {
                let d: f64 = cols[j].iter().map(|&(r, v)| v * y[r]).sum();
                assert!((d - c[j]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn dependent_columns_are_replaced() {
        // Columns 0 and 1 are parallel.
        let cols = vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 2.0), (1, 2.0)], vec![(2, 1.0)]];
        let (f, rep) = Factor::new(3, &cols);
        assert_eq!(rep.len(), 1);
        let (pos, row) = rep[0];
        let mut fixed = cols.clone();
        fixed[pos] = vec![(row, -1.0)];
        let b = vec![1.0, -2.0, 3.0];
        let x = f.ftran(&mut b.clone());
        let back = dense_mul(&fixed, &x, 3);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
    }
}

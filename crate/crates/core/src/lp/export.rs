//! CPLEX LP text export.

use std::fmt::Write;

use super::{LpModel, Relation};

fn col_name(model: &LpModel, j: usize) -> String {
    model.cols[j].name.clone().unwrap_or_else(|| format!("c{j}"))
}

fn row_name(model: &LpModel, i: usize) -> String {
    model.rows[i].name.clone().unwrap_or_else(|| format!("r{i}"))
}

// Readers cap line length, so long expressions continue on indented lines.
const WRAP: usize = 200;

fn term(out: &mut String, first: &mut bool, coef: f64, name: &str) {
    let line_start = out.rfind('\n').map_or(0, |p| p + 1);
    if out.len() - line_start > WRAP {
        out.push_str("\n ");
    }
    if *first {
        if coef < 0.0 {
            out.push_str(" -");
        }
        *first = false;
    } else {
        out.push_str(if coef < 0.0 { " -" } else { " +" });
    }
    let a = coef.abs();
    if a == 1.0 {
        let _ = write!(out, " {name}");
    } else {
        let _ = write!(out, " {a} {name}");
    }
}

/// Renders `model` in CPLEX LP format.
pub fn write_lp(model: &LpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (j, c) in model.cols.iter().enumerate() {
        if c.cost != 0.0 {
            term(&mut out, &mut first, c.cost, &col_name(model, j));
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.rows.len()];
    for (j, c) in model.cols.iter().enumerate() {
        for &(r, a) in &c.entries {
            rows[r as usize].push((j, a));
        }
    }
    for (i, row) in model.rows.iter().enumerate() {
        let _ = write!(out, " {}:", row_name(model, i));
        let mut first = true;
        for &(j, a) in &rows[i] {
            term(&mut out, &mut first, a, &col_name(model, j));
        }
        if first {
            out.push_str(" 0 c0");
        }
        let op = match row.relation {
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Le => "<=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }

    out.push_str("Bounds\n");
    for (j, c) in model.cols.iter().enumerate() {
        let name = col_name(model, j);
        match (c.lo.is_finite(), c.hi.is_finite()) {
            (true, true) if c.lo == c.hi => {
                let _ = writeln!(out, " {name} = {}", c.lo);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", c.lo, c.hi);
            }
            (true, false) => {
                if c.lo != 0.0 {
                    let _ = writeln!(out, " {name} >= {}", c.lo);
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", c.hi);
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    out.push_str("End\n");
    out
}

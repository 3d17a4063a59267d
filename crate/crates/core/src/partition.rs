//! Convex partitions and their validity test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::twice_polygon_area;
use crate::instance::Instance;
use crate::polygon::{canonical_key, is_empty_convex, ConvexPolygon};

/// Where an incumbent came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    DelaunayHeuristic,
    LpHeuristic,
    NodeIntegral,
    Oracle,
    Compact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Incumbent {
    pub partition: Vec<ConvexPolygon>,
    pub value: usize,
    pub source: Source,
}

impl Incumbent {
    pub fn new(mut partition: Vec<ConvexPolygon>, source: Source) -> Self {
        partition.sort_unstable();
        Incumbent {
            value: partition.len(),
            partition,
            source,
        }
    }
}

/// Checks that `polys` is a convex partition of the hull: every polygon is
/// canonical, convex and empty, every wedge is covered exactly once and the
/// areas add up to the hull area.
pub fn validate_partition(inst: &Instance, polys: &[ConvexPolygon]) -> Result<()> {
    let mut cover = vec![0u32; inst.wedges.len()];
    let mut area: i128 = 0;
    for p in polys {
        let v = p.vertex_indices();
        if !is_empty_convex(&v, &inst.ps, &inst.table) {
            return Err(Error::InvalidPartition(format!("{p} is not an empty convex polygon")));
        }
        if canonical_key(&v, &inst.ps) != *p {
            return Err(Error::InvalidPartition(format!("{p} is not canonical")));
        }
        area += twice_polygon_area(&p.points(&inst.ps));
        for g in inst.wedges.wedges_of_polygon(&v) {
            cover[g] += 1;
        }
    }
    if let Some(g) = cover.iter().position(|&c| c != 1) {
        let w = inst.wedges.wedge(g);
        return Err(Error::InvalidPartition(format!(
            "wedge {} of point {} covered {} times",
            w.slot, w.owner, cover[g]
        )));
    }
    if area != inst.hull_twice_area() {
        return Err(Error::InvalidPartition("areas do not add up to the hull".into()));
    }
    Ok(())
}

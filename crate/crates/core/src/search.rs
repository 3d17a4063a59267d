//! Branch-and-cut-and-price driver.
//!
//! Each node runs column generation on the shared master with the node's
//! edge fixings applied as bounds (and as pricing penalties for edges fixed
//! to zero), separates degree cuts until none are violated, then either
//! closes the node or branches on an edge variable. Open nodes are explored
//! best-bound first, diving into the `x_e = 1` child while it can still
//! improve on the incumbent.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::compact::{build_compact, extract_faces, solve_compact, CompactStatus};
use crate::error::{Error, Result};
use crate::geometry::{EdgeId, PointSet};
use crate::heuristics::{delaunay, greedy_triangulation, restricted_mcpp, RESTRICTED_CAP};
use crate::instance::Instance;
use crate::lp::LpStatus;
use crate::master::{DualVector, Relaxation, RmpState};
use crate::oracle::brute_force_optimum;
use crate::par::Exec;
use crate::partition::{validate_partition, Incumbent, Source};
use crate::polygon::{enumerate_polyset, ConvexPolygon, DEFAULT_POLYGON_CAP};
use crate::pricing::{price, PricingOutcome, PricingParams, DEFAULT_COLUMN_CAP, NEGATIVE_THRESHOLD};

/// Tolerance of every integrality rounding.
pub const CEIL_TOL: f64 = 1e-6;
/// Largest instance accepted by the full-enumeration mode.
pub const FULL_MODE_MAX_N: usize = 40;

pub fn ceil_tol(v: f64) -> f64 {
    (v - CEIL_TOL).ceil()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Branch-and-price with the pricing DP.
    Cg,
    /// Same search over the fully enumerated polygon set, no pricing.
    Full,
    /// Compact edge model.
    Compact,
    /// Exhaustive exact cover, small instances only.
    Oracle,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Cg => "cg",
            Mode::Full => "full",
            Mode::Compact => "compact",
            Mode::Oracle => "oracle",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cg" => Ok(Mode::Cg),
            "full" => Ok(Mode::Full),
            "compact" => Ok(Mode::Compact),
            "oracle" => Ok(Mode::Oracle),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub mode: Mode,
    pub time_limit: Option<Duration>,
    /// Wentges smoothing factor in `[0, 1)`.
    pub lambda: f64,
    /// Columns added per pricing round at most.
    pub column_cap: usize,
    /// Recorded for reproducibility; the search itself draws no random numbers.
    pub seed: u64,
    pub polygon_cap: usize,
    pub exec: Exec,
    pub degree_cuts: bool,
    pub heuristics: bool,
    /// Stop after this many processed nodes (reported as a time limit).
    pub node_limit: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mode: Mode::Cg,
            time_limit: None,
            lambda: 0.55,
            column_cap: DEFAULT_COLUMN_CAP,
            seed: 0,
            polygon_cap: DEFAULT_POLYGON_CAP,
            exec: Exec::available(),
            degree_cuts: true,
            heuristics: true,
            node_limit: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig(format!("smoothing factor {} outside [0, 1)", self.lambda)));
        }
        if self.column_cap == 0 {
            return Err(Error::InvalidConfig("column cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofStatus {
    Optimal,
    TimeLimit,
}

impl fmt::Display for ProofStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofStatus::Optimal => "optimal",
            ProofStatus::TimeLimit => "time-limit",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: usize,
    pub pricing_rounds: usize,
    pub farkas_rounds: usize,
    pub columns: usize,
    pub cuts: usize,
    pub lp_iterations: usize,
    pub early_stops: usize,
    pub mispricings: usize,
    pub max_depth: usize,
    /// Bound of the root node after its cut loop; `None` if it never finished.
    pub root_bound: Option<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnpNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Edge index to fixed value.
    pub fixings: BTreeMap<usize, bool>,
    /// The fixing that created this node.
    pub branch: Option<(usize, bool)>,
    pub bound: f64,
    pub depth: usize,
}

impl BnpNode {
    pub fn root() -> Self {
        BnpNode {
            id: 0,
            parent: None,
            fixings: BTreeMap::new(),
            branch: None,
            bound: 1.0,
            depth: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Integral,
    Branched,
    Pruned,
    Infeasible,
    /// Still open when the search stopped.
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixing {
    pub edge: [usize; 2],
    pub value: u8,
}

/// One audit-log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub fixing: Option<Fixing>,
    pub bound: f64,
    pub columns_added: usize,
    pub cuts_added: usize,
    pub status: NodeStatus,
}

/// Bounds seen in one pricing round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub node: usize,
    pub z: f64,
    pub min_reduced_cost: f64,
    pub kappa: f64,
    pub kappa_bound: f64,
    pub unit_bound: f64,
    /// Degree cuts in the master at the time (a prefix of the final list).
    pub cuts: usize,
    pub smoothed: bool,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub incumbent: Incumbent,
    pub status: ProofStatus,
    /// Global lower bound, rounded up; equals the value when optimal.
    pub bound: f64,
    pub stats: SolveStats,
    pub audit: Vec<NodeRecord>,
    pub iterations: Vec<IterationRecord>,
    /// `(global lower bound, incumbent value)` after each processed node.
    pub trace: Vec<(f64, usize)>,
    /// Degree-cut vertices in separation order.
    pub cut_vertices: Vec<usize>,
    /// Fractional nodes that showed no fractional edge.
    pub branching_failures: usize,
}

/// `(z + kappa * c, z / (1 - c))` for the minimum reduced cost `c <= 0`.
pub fn lagrangian_bounds(z: f64, min_rc: f64, kappa: f64) -> (f64, f64) {
    let c = min_rc.min(0.0);
    (z + kappa * c, z / (1.0 - c))
}

/// Column generation may stop once the master value and the unit bound
/// round up to the same integer.
pub fn early_stop(z: f64, unit_bound: f64) -> bool {
    ceil_tol(z) == ceil_tol(unit_bound)
}

fn mix(current: &[f64], best: &[f64], lambda: f64) -> Vec<f64> {
    current
        .iter()
        .enumerate()
        .map(|(i, &c)| match best.get(i) {
            Some(&b) => c + lambda * (b - c),
            None => c,
        })
        .collect()
}

/// Wentges smoothing towards the stability center `best`.
pub fn smooth_duals(current: &DualVector, best: Option<&DualVector>, lambda: f64) -> DualVector {
    match best {
        None => current.clone(),
        Some(b) => DualVector {
            alpha: mix(&current.alpha, &b.alpha, lambda),
            beta: mix(&current.beta, &b.beta, lambda),
            gamma: mix(&current.gamma, &b.gamma, lambda),
        },
    }
}

/// Distance from one half: 0 is most fractional.
pub fn frac(x: f64) -> f64 {
    (0.5 - x).abs()
}

pub fn is_fractional(x: f64) -> bool {
    frac(x) < 0.5 - CEIL_TOL
}

/// Branching rule on `(edge, value, crossings)` candidates: among fractional
/// ones within 0.1 of the most fractional, most crossings, then smallest
/// edge.
pub fn pick_branch_edge(candidates: impl IntoIterator<Item = (usize, f64, usize)>) -> Option<usize> {
    let cands: Vec<(usize, f64, usize)> = candidates.into_iter().filter(|c| is_fractional(c.1)).collect();
    let best = cands.iter().map(|c| frac(c.1)).fold(f64::INFINITY, f64::min);
    cands
        .iter()
        .filter(|c| frac(c.1) <= best + 0.1 + 1e-12)
        .min_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0)))
        .map(|c| c.0)
}

pub fn select_branch_edge(inst: &Instance, x: &[f64], fixings: &BTreeMap<usize, bool>) -> Result<usize> {
    let cands = (0..inst.edge_count())
        .filter(|&e| !inst.is_hull_edge(e) && !fixings.contains_key(&e))
        .map(|e| (e, x[e], inst.crossings.count(e)));
    pick_branch_edge(cands).ok_or(Error::NoFractionalEdge)
}

/// Child of `node` with edge `e` fixed to `value`; fixing to one also fixes
/// every crossing edge to zero. Hull edges count as fixed to one.
pub fn apply_branch(inst: &Instance, node: &BnpNode, e: usize, value: bool, id: usize) -> Result<BnpNode> {
    let conflict = || Error::ConflictingFixing(inst.edge(e));
    if inst.is_hull_edge(e) && !value {
        return Err(conflict());
    }
    if node.fixings.get(&e).is_some_and(|&v| v != value) {
        return Err(conflict());
    }
    let mut fixings = node.fixings.clone();
    fixings.insert(e, value);
    if value {
        for &f in inst.crossings.crossing(e) {
            let f = f as usize;
            if inst.is_hull_edge(f) || fixings.get(&f) == Some(&true) {
                return Err(conflict());
            }
            fixings.insert(f, false);
        }
    }
    Ok(BnpNode {
        id,
        parent: Some(node.id),
        fixings,
        branch: Some((e, value)),
        bound: node.bound,
        depth: node.depth + 1,
    })
}

/// Solves `ps` in the configured mode.
pub fn solve(ps: PointSet, config: &SolverConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let start = Instant::now();
    let inst = Arc::new(Instance::new(ps));
    let mut out = match config.mode {
        Mode::Cg | Mode::Full => Search::new(inst, config, start)?.run()?,
        Mode::Compact => solve_by_compact(&inst, config, start)?,
        Mode::Oracle => solve_by_oracle(&inst)?,
    };
    out.stats.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

fn trivial_outcome(incumbent: Incumbent, status: ProofStatus, bound: f64, nodes: usize) -> SolveOutcome {
    SolveOutcome {
        trace: vec![(bound, incumbent.value)],
        incumbent,
        status,
        bound,
        stats: SolveStats {
            nodes,
            ..SolveStats::default()
        },
        audit: Vec::new(),
        iterations: Vec::new(),
        cut_vertices: Vec::new(),
        branching_failures: 0,
    }
}

fn solve_by_oracle(inst: &Instance) -> Result<SolveOutcome> {
    let (value, partition) = brute_force_optimum(inst)?;
    Ok(trivial_outcome(
        Incumbent::new(partition, Source::Oracle),
        ProofStatus::Optimal,
        value as f64,
        1,
    ))
}

fn solve_by_compact(inst: &Instance, config: &SolverConfig, start: Instant) -> Result<SolveOutcome> {
    let all: Vec<usize> = (0..inst.edge_count()).collect();
    let tri = delaunay(inst);
    let mut model = build_compact(inst, &all);
    let remaining = config.time_limit.map(|t| t.saturating_sub(start.elapsed()));
    let sol = solve_compact(&mut model, remaining, Some(tri.edges.clone()));
    if sol.status == CompactStatus::Infeasible {
        return Err(Error::Numerical("compact model reported infeasible".into()));
    }
    let ids: Vec<EdgeId> = sol.edges.iter().map(|&e| inst.edge(e)).collect();
    let faces = extract_faces(&inst.ps, &inst.table, &ids)?;
    let incumbent = Incumbent::new(faces, Source::Compact);
    let n = inst.n() as f64;
    let (status, bound) = match sol.status {
        CompactStatus::Optimal => (ProofStatus::Optimal, incumbent.value as f64),
        _ => (ProofStatus::TimeLimit, (ceil_tol(sol.root_bound) + 1.0 - n).max(1.0)),
    };
    let mut out = trivial_outcome(incumbent, status, bound, sol.nodes);
    out.stats.root_bound = Some(sol.root_bound + 1.0 - n);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeOutcome {
    Integral(usize),
    Fractional(usize),
    Pruned,
    Infeasible,
    /// Time ran out while processing.
    Interrupted,
}

/// Heap entry: smallest bound first, then creation order.
struct Open(BnpNode);

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.bound.total_cmp(&self.0.bound).then(other.0.id.cmp(&self.0.id))
    }
}

struct Search<'c> {
    inst: Arc<Instance>,
    cfg: &'c SolverConfig,
    rmp: RmpState,
    pricing: bool,
    incumbent: Incumbent,
    stats: SolveStats,
    audit: Vec<NodeRecord>,
    iterations: Vec<IterationRecord>,
    trace: Vec<(f64, usize)>,
    branching_failures: usize,
    start: Instant,
    next_id: usize,
}

impl<'c> Search<'c> {
    fn new(inst: Arc<Instance>, cfg: &'c SolverConfig, start: Instant) -> Result<Self> {
        let tri = delaunay(&inst);
        let mut incumbent = tri.incumbent(Source::DelaunayHeuristic);
        if cfg.heuristics {
            let cap = RESTRICTED_CAP.min(cfg.time_limit.unwrap_or(RESTRICTED_CAP));
            let (better, _) = restricted_mcpp(&inst, &tri, cap);
            if better.value < incumbent.value {
                incumbent = Incumbent::new(better.partition, Source::DelaunayHeuristic);
            }
        }
        log::info!("initial incumbent {} from the Delaunay triangulation", incumbent.value);
        let mut rmp = RmpState::with_triangles(inst.clone(), &incumbent.partition);
        let pricing = cfg.mode == Mode::Cg;
        if !pricing {
            if inst.n() > FULL_MODE_MAX_N {
                return Err(Error::CapExceeded(FULL_MODE_MAX_N));
            }
            let all = enumerate_polyset(&inst.ps, &inst.table, cfg.polygon_cap)?;
            log::info!("full mode: {} polygons", all.len());
            rmp.add_polygon_columns(all);
        }
        Ok(Search {
            inst,
            cfg,
            rmp,
            pricing,
            incumbent,
            stats: SolveStats::default(),
            audit: Vec::new(),
            iterations: Vec::new(),
            trace: Vec::new(),
            branching_failures: 0,
            start,
            next_id: 1,
        })
    }

    fn out_of_time(&self) -> bool {
        self.cfg.time_limit.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn remaining(&self) -> Duration {
        match self.cfg.time_limit {
            Some(t) => t.saturating_sub(self.start.elapsed()),
            None => Duration::MAX,
        }
    }

    fn kappa(&self) -> f64 {
        self.incumbent.value as f64
    }

    fn prunable(&self, bound: f64) -> bool {
        ceil_tol(bound) >= self.kappa()
    }

    fn record(&mut self, node: &BnpNode, status: NodeStatus, columns: usize, cuts: usize) {
        let fixing = node.branch.map(|(e, v)| {
            let (i, j) = self.inst.edge(e).endpoints();
            Fixing {
                edge: [i, j],
                value: v as u8,
            }
        });
        self.audit.push(NodeRecord {
            id: node.id,
            parent: node.parent,
            fixing,
            bound: node.bound,
            columns_added: columns,
            cuts_added: cuts,
            status,
        });
    }

    fn run(mut self) -> Result<SolveOutcome> {
        let mut heap: BinaryHeap<Open> = BinaryHeap::new();
        let mut dive: Option<BnpNode> = None;
        let mut stopped = false;
        if self.incumbent.value > 1 {
            heap.push(Open(BnpNode::root()));
        } else {
            // One polygon meets the trivial bound: the root closes at once.
            let root = BnpNode::root();
            self.stats.nodes = 1;
            self.stats.root_bound = Some(1.0);
            self.record(&root, NodeStatus::Integral, 0, 0);
        }
        loop {
            let Some(mut node) = dive.take().or_else(|| heap.pop().map(|o| o.0)) else {
                break;
            };
            if self.prunable(node.bound) {
                self.record(&node, NodeStatus::Pruned, 0, 0);
                continue;
            }
            if self.out_of_time() || self.cfg.node_limit.is_some_and(|l| self.stats.nodes >= l) {
                heap.push(Open(node));
                stopped = true;
                break;
            }
            self.stats.nodes += 1;
            self.stats.max_depth = self.stats.max_depth.max(node.depth);
            let (outcome, columns, cuts) = self.process_node(&mut node)?;
            if node.id == 0 && outcome != NodeOutcome::Interrupted {
                self.stats.root_bound = Some(match outcome {
                    NodeOutcome::Integral(v) => v as f64,
                    _ => node.bound,
                });
            }
            match outcome {
                NodeOutcome::Integral(_) => self.record(&node, NodeStatus::Integral, columns, cuts),
                NodeOutcome::Pruned => self.record(&node, NodeStatus::Pruned, columns, cuts),
                NodeOutcome::Infeasible => self.record(&node, NodeStatus::Infeasible, columns, cuts),
                NodeOutcome::Interrupted => {
                    self.record(&node, NodeStatus::Open, columns, cuts);
                    heap.push(Open(node));
                    stopped = true;
                    break;
                }
                NodeOutcome::Fractional(e) => {
                    self.record(&node, NodeStatus::Branched, columns, cuts);
                    let one = self.child(&node, e, true);
                    let zero = self.child(&node, e, false);
                    if let Some(z) = zero {
                        heap.push(Open(z));
                    }
                    if let Some(o) = one {
                        if !self.prunable(o.bound) {
                            dive = Some(o);
                        } else {
                            heap.push(Open(o));
                        }
                    }
                }
            }
            let lb = self.global_bound(&heap, dive.as_ref());
            self.trace.push((lb, self.incumbent.value));
        }
        if stopped {
            for o in heap.iter() {
                if !self.audit.iter().any(|r| r.id == o.0.id) {
                    self.record(&o.0.clone(), NodeStatus::Open, 0, 0);
                }
            }
        }
        let status = if stopped { ProofStatus::TimeLimit } else { ProofStatus::Optimal };
        let bound = if stopped {
            self.global_bound(&heap, None)
        } else {
            self.kappa()
        };
        if self.trace.is_empty() {
            self.trace.push((bound, self.incumbent.value));
        }
        validate_partition(&self.inst, &self.incumbent.partition)?;
        log::info!(
            "{status}: value {} bound {bound} after {} nodes",
            self.incumbent.value,
            self.stats.nodes
        );
        Ok(SolveOutcome {
            incumbent: self.incumbent,
            status,
            bound,
            stats: self.stats,
            audit: self.audit,
            iterations: self.iterations,
            trace: self.trace,
            cut_vertices: self.rmp.cut_vertices().to_vec(),
            branching_failures: self.branching_failures,
        })
    }

    /// Creates a child; a conflicting one is logged as infeasible.
    fn child(&mut self, node: &BnpNode, e: usize, value: bool) -> Option<BnpNode> {
        let id = self.next_id;
        self.next_id += 1;
        match apply_branch(&self.inst, node, e, value, id) {
            Ok(c) => Some(c),
            Err(_) => {
                let dead = BnpNode {
                    id,
                    parent: Some(node.id),
                    fixings: node.fixings.clone(),
                    branch: Some((e, value)),
                    bound: node.bound,
                    depth: node.depth + 1,
                };
                self.record(&dead, NodeStatus::Infeasible, 0, 0);
                None
            }
        }
    }

    fn global_bound(&self, heap: &BinaryHeap<Open>, dive: Option<&BnpNode>) -> f64 {
        let open = heap.iter().map(|o| o.0.bound).chain(dive.map(|d| d.bound)).fold(f64::INFINITY, f64::min);
        ceil_tol(open).min(self.kappa())
    }

    fn apply_fixings(&mut self, node: &BnpNode) -> Vec<bool> {
        let mut forbidden = vec![false; self.inst.edge_count()];
        for e in 0..self.inst.edge_count() {
            if self.inst.is_hull_edge(e) {
                continue;
            }
            let (lo, hi) = match node.fixings.get(&e) {
                Some(true) => (1.0, 1.0),
                Some(false) => {
                    forbidden[e] = true;
                    (0.0, 0.0)
                }
                None => (0.0, 1.0),
            };
            self.rmp.set_edge_bounds(e, lo, hi);
        }
        forbidden
    }

    fn price_at(&self, duals: &DualVector, forbidden: &[bool], constant: f64) -> PricingOutcome {
        let params = PricingParams {
            constant,
            cap: self.cfg.column_cap,
            threshold: NEGATIVE_THRESHOLD,
            exec: self.cfg.exec,
        };
        price(&self.inst, &duals.alpha, &duals.beta, forbidden, &params)
    }

    fn fresh(&self, out: PricingOutcome) -> Vec<ConvexPolygon> {
        out.columns
            .into_iter()
            .map(|c| c.polygon)
            .filter(|p| !self.rmp.contains(p))
            .collect()
    }

    /// Bound bookkeeping for one pricing result; returns the unit bound.
    fn note_bounds(&mut self, node: &mut BnpNode, z: f64, duals: &DualVector, min_rc: f64, smoothed: bool) -> f64 {
        let l0 = self.rmp.lagrangian_value(duals);
        let kappa = self.kappa();
        let (kb, ub) = lagrangian_bounds(l0, min_rc, kappa);
        node.bound = node.bound.max(kb).max(ub);
        self.iterations.push(IterationRecord {
            node: node.id,
            z,
            min_reduced_cost: min_rc,
            kappa,
            kappa_bound: kb,
            unit_bound: ub,
            cuts: self.rmp.cut_vertices().len(),
            smoothed,
        });
        ub
    }

    /// Column generation to convergence (or early stop). `None` when the node
    /// is infeasible, pruned or out of time, with the outcome.
    fn column_generation(
        &mut self,
        node: &mut BnpNode,
        forbidden: &[bool],
        columns: &mut usize,
    ) -> Result<std::result::Result<Relaxation, NodeOutcome>> {
        let mut center: Option<(DualVector, f64)> = None;
        loop {
            if self.out_of_time() {
                return Ok(Err(NodeOutcome::Interrupted));
            }
            let rel = self.rmp.solve_relaxation();
            self.stats.lp_iterations += rel.iterations;
            match rel.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => {
                    if !self.pricing {
                        return Ok(Err(NodeOutcome::Infeasible));
                    }
                    let fresh = self.fresh(self.price_at(&rel.duals, forbidden, 0.0));
                    if fresh.is_empty() {
                        return Ok(Err(NodeOutcome::Infeasible));
                    }
                    self.stats.farkas_rounds += 1;
                    let added = self.rmp.add_polygon_columns(fresh);
                    *columns += added;
                    self.stats.columns += added;
                    continue;
                }
                s => return Err(Error::Numerical(format!("master LP ended with {s:?}"))),
            }
            if !self.pricing {
                node.bound = node.bound.max(rel.z);
                return Ok(if self.prunable(node.bound) { Err(NodeOutcome::Pruned) } else { Ok(rel) });
            }
            let smoothed = self.cfg.lambda > 0.0 && center.is_some();
            let duals = smooth_duals(&rel.duals, center.as_ref().map(|c| &c.0), self.cfg.lambda);
            let out = self.price_at(&duals, forbidden, 1.0);
            let min_rc = out.min_reduced_cost;
            let ub = self.note_bounds(node, rel.z, &duals, min_rc, smoothed);
            if center.as_ref().is_none_or(|c| ub > c.1) {
                center = Some((duals, ub));
            }
            let mut fresh = self.fresh(out);
            if fresh.is_empty() && smoothed {
                // Smoothed duals can hide negative columns; check the true ones.
                let out = self.price_at(&rel.duals, forbidden, 1.0);
                let min_rc = out.min_reduced_cost;
                let ub = self.note_bounds(node, rel.z, &rel.duals, min_rc, false);
                if center.as_ref().is_none_or(|c| ub > c.1) {
                    center = Some((rel.duals.clone(), ub));
                }
                fresh = self.fresh(out);
                if !fresh.is_empty() {
                    self.stats.mispricings += 1;
                }
            }
            if self.prunable(node.bound) {
                return Ok(Err(NodeOutcome::Pruned));
            }
            if fresh.is_empty() {
                node.bound = node.bound.max(rel.z);
                return Ok(if self.prunable(node.bound) { Err(NodeOutcome::Pruned) } else { Ok(rel) });
            }
            if early_stop(rel.z, node.bound) {
                self.stats.early_stops += 1;
                return Ok(Ok(rel));
            }
            self.stats.pricing_rounds += 1;
            let added = self.rmp.add_polygon_columns(fresh);
            *columns += added;
            self.stats.columns += added;
        }
    }

    fn process_node(&mut self, node: &mut BnpNode) -> Result<(NodeOutcome, usize, usize)> {
        let forbidden = self.apply_fixings(node);
        let mut columns = 0;
        let mut cuts = 0;
        let rel = loop {
            let rel = match self.column_generation(node, &forbidden, &mut columns)? {
                Ok(rel) => rel,
                Err(o) => return Ok((o, columns, cuts)),
            };
            let added = if self.cfg.degree_cuts {
                self.rmp.separate_degree_cuts(&rel.x)
            } else {
                0
            };
            if added == 0 {
                break rel;
            }
            cuts += added;
            self.stats.cuts += added;
        };
        if rel.u.iter().all(|&u| !is_fractional(u)) {
            let chosen: Vec<ConvexPolygon> = rel
                .u
                .iter()
                .zip(self.rmp.polygons())
                .filter(|(&u, _)| u > 0.5)
                .map(|(_, p)| p.clone())
                .collect();
            validate_partition(&self.inst, &chosen)?;
            let value = chosen.len();
            if value < self.incumbent.value {
                log::info!("node {}: integral solution {value}", node.id);
                self.incumbent = Incumbent::new(chosen, Source::NodeIntegral);
            }
            return Ok((NodeOutcome::Integral(value), columns, cuts));
        }
        if self.cfg.heuristics {
            self.node_heuristic(&rel.x);
            if self.prunable(node.bound) {
                return Ok((NodeOutcome::Pruned, columns, cuts));
            }
        }
        match select_branch_edge(&self.inst, &rel.x, &node.fixings) {
            Ok(e) => Ok((NodeOutcome::Fractional(e), columns, cuts)),
            Err(err) => {
                self.branching_failures += 1;
                log::error!("node {}: fractional polygons without a fractional edge", node.id);
                Err(err)
            }
        }
    }

    fn node_heuristic(&mut self, x: &[f64]) {
        let remaining = self.remaining();
        if remaining.is_zero() {
            return;
        }
        let tri = greedy_triangulation(&self.inst, x);
        let (found, _) = restricted_mcpp(&self.inst, &tri, RESTRICTED_CAP.min(remaining));
        self.rmp.add_polygon_columns(found.partition.iter().cloned());
        if found.value < self.incumbent.value {
            log::info!("heuristic incumbent {}", found.value);
            self.incumbent = found;
        }
    }
}

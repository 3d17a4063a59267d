//! Instance and solution formats, instance generation, SVG rendering and
//! batch runs.
//!
//! Instances come as plain text (`n` on the first line, then `x y` per
//! point) or as JSON `{"name": .., "points": [{"i": .., "x": .., "y": ..}]}`.
//! Coordinates are integers; JSON floats are refused unless rounding is
//! requested.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::compact::build_compact;
use crate::error::{Error, Result};
use crate::geometry::{orientation, validate_general_position, Orientation, Point, PointSet, COORD_LIMIT};
use crate::instance::Instance;
use crate::master::RmpState;
use crate::par::Exec;
use crate::partition::Incumbent;
use crate::search::{solve, Mode, NodeRecord, ProofStatus, SolveOutcome, SolveStats, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedInstance {
    pub name: String,
    pub points: PointSet,
}

fn parse_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Parses either format, detected by a leading `{`.
pub fn parse_instance(bytes: &[u8], round: bool) -> Result<NamedInstance> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_error(format!("byte {}", e.valid_up_to()), "not UTF-8"))?;
    if text.trim_start().starts_with('{') {
        parse_json(text, round)
    } else {
        parse_text(text)
    }
}

fn parse_text(text: &str) -> Result<NamedInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first, header) = lines.next().ok_or_else(|| parse_error("line 1", "empty input"))?;
    let n: usize = header
        .parse()
        .map_err(|_| parse_error(format!("line {first}"), format!("expected a point count, found {header:?}")))?;
    let mut points = Vec::with_capacity(n);
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_error(format!("line {no}"), "expected two integers"));
        }
        let coord = |s: &str| {
            s.parse::<i64>()
                .map_err(|_| parse_error(format!("line {no}"), format!("{s:?} is not an integer")))
        };
        points.push(Point::new(coord(fields[0])?, coord(fields[1])?));
    }
    if points.len() != n {
        return Err(parse_error(
            "end of input",
            format!("header announces {n} points, found {}", points.len()),
        ));
    }
    Ok(NamedInstance {
        name: String::new(),
        points: PointSet::new(points)?,
    })
}

fn json_coord(v: &Value, what: &str, idx: usize, round: bool) -> Result<i64> {
    let loc = || format!("points[{idx}].{what}");
    if let Some(i) = v.as_i64() {
        return Ok(i);
    }
    match v.as_f64() {
        Some(f) if round && f.is_finite() && f.abs() <= COORD_LIMIT as f64 => Ok(f.round() as i64),
        Some(f) if !round => Err(parse_error(loc(), format!("non-integer coordinate {f} (pass --round to accept)"))),
        _ => Err(parse_error(loc(), "expected a number")),
    }
}

fn parse_json(text: &str, round: bool) -> Result<NamedInstance> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| parse_error(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let name = doc.get("name").and_then(Value::as_str).unwrap_or("").to_string();
    let pts = doc
        .get("points")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_error("points", "missing points array"))?;
    let mut slots: Vec<Option<Point>> = vec![None; pts.len()];
    for (k, p) in pts.iter().enumerate() {
        let i = match p.get("i") {
            Some(v) => v
                .as_u64()
                .map(|i| i as usize)
                .ok_or_else(|| parse_error(format!("points[{k}].i"), "expected a non-negative integer"))?,
            None => k,
        };
        if i >= slots.len() || slots[i].is_some() {
            return Err(parse_error(format!("points[{k}].i"), format!("index {i} missing or repeated")));
        }
        let x = json_coord(p.get("x").unwrap_or(&Value::Null), "x", k, round)?;
        let y = json_coord(p.get("y").unwrap_or(&Value::Null), "y", k, round)?;
        slots[i] = Some(Point::new(x, y));
    }
    let points: Vec<Point> = slots.into_iter().map(|p| p.expect("indices form a permutation")).collect();
    Ok(NamedInstance {
        name,
        points: PointSet::new(points)?,
    })
}

pub fn write_instance_text(ps: &PointSet) -> String {
    let mut s = format!("{}\n", ps.len());
    for p in ps.points() {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    s
}

#[derive(Serialize)]
struct JsonPoint {
    i: usize,
    x: i64,
    y: i64,
}

#[derive(Serialize)]
struct JsonInstance<'a> {
    name: &'a str,
    points: Vec<JsonPoint>,
}

pub fn write_instance_json(name: &str, ps: &PointSet) -> String {
    let doc = JsonInstance {
        name,
        points: ps
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| JsonPoint { i, x: p.x, y: p.y })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serialises")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionStats {
    pub nodes: usize,
    pub pricing_rounds: usize,
    pub columns: usize,
    pub cuts: usize,
    pub seconds: f64,
}

impl From<&SolveStats> for SolutionStats {
    fn from(s: &SolveStats) -> Self {
        SolutionStats {
            nodes: s.nodes,
            pricing_rounds: s.pricing_rounds,
            columns: s.columns,
            cuts: s.cuts,
            seconds: s.seconds.max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub value: usize,
    pub bound: f64,
    pub status: String,
    pub polygons: Vec<Vec<usize>>,
    pub edges: Vec<[usize; 2]>,
    pub stats: SolutionStats,
}

/// Distinct polygon edges, sorted.
pub fn partition_edges(inc: &Incumbent) -> Vec<[usize; 2]> {
    let mut set = BTreeSet::new();
    for p in &inc.partition {
        for e in p.edges() {
            let (i, j) = e.endpoints();
            set.insert([i, j]);
        }
    }
    set.into_iter().collect()
}

pub fn solution_file(inc: &Incumbent, status: ProofStatus, bound: f64, stats: &SolveStats) -> SolutionFile {
    SolutionFile {
        value: inc.value,
        bound,
        status: status.to_string(),
        polygons: inc.partition.iter().map(|p| p.vertex_indices()).collect(),
        edges: partition_edges(inc),
        stats: stats.into(),
    }
}

pub fn write_solution(inc: &Incumbent, status: ProofStatus, bound: f64, stats: &SolveStats) -> String {
    let mut s = serde_json::to_string(&solution_file(inc, status, bound, stats)).expect("plain data serialises");
    s.push('\n');
    s
}

/// LP text of the root model for `mode`: the compact edge model, or else the
/// restricted master seeded with every empty triangle plus `extra`.
pub fn export_root_lp(ps: &PointSet, mode: Mode, extra: &[crate::polygon::ConvexPolygon]) -> String {
    let inst = Instance::new(ps.clone());
    match mode {
        Mode::Compact => {
            let all: Vec<usize> = (0..inst.edge_count()).collect();
            build_compact(&inst, &all).export_lp()
        }
        _ => RmpState::with_triangles(Arc::new(inst), extra).export_lp(),
    }
}

/// Audit log, one JSON object per line.
pub fn write_audit(records: &[NodeRecord], out: &mut impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

const FILLS: [&str; 8] = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5"];

/// SVG with one `face` polygon per partition polygon, one `edge` line per
/// distinct edge and one circle per point. The y axis points up.
pub fn render_svg(ps: &PointSet, inc: Option<&Incumbent>) -> String {
    let pts = ps.points();
    let (x0, x1) = (pts.iter().map(|p| p.x).min().unwrap(), pts.iter().map(|p| p.x).max().unwrap());
    let (y0, y1) = (pts.iter().map(|p| p.y).min().unwrap(), pts.iter().map(|p| p.y).max().unwrap());
    let w = (x1 - x0).max(1) as f64;
    let h = (y1 - y0).max(1) as f64;
    let mx = 0.05 * w;
    let my = 0.05 * h;
    let flip = |p: Point| (p.x as f64, (y1 + y0 - p.y) as f64);
    let r = 0.006 * w.max(h);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        x0 as f64 - mx,
        y0 as f64 - my,
        w + 2.0 * mx,
        h + 2.0 * my
    );
    if let Some(inc) = inc {
        for (t, poly) in inc.partition.iter().enumerate() {
            let coords: Vec<String> = poly
                .points(ps)
                .into_iter()
                .map(|p| {
                    let (x, y) = flip(p);
                    format!("{x},{y}")
                })
                .collect();
            let _ = writeln!(
                s,
                r#"  <polygon class="face" points="{}" fill="{}" fill-opacity="0.5" stroke="none"/>"#,
                coords.join(" "),
                FILLS[t % FILLS.len()]
            );
        }
        for [i, j] in partition_edges(inc) {
            let (ax, ay) = flip(ps.point(i));
            let (bx, by) = flip(ps.point(j));
            let _ = writeln!(
                s,
                r#"  <line class="edge" x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="black" stroke-width="{}"/>"#,
                r / 3.0
            );
        }
    }
    for p in pts {
        let (x, y) = flip(*p);
        let _ = writeln!(s, r#"  <circle class="point" cx="{x}" cy="{y}" r="{r}" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

/// `n` points with coordinates uniform in `[0, bound)`, redrawing any point
/// that repeats or is collinear with two earlier ones. The generator is
/// xoshiro256++ seeded through splitmix64.
pub fn generate_instance(seed: u64, n: usize, bound: i64) -> Result<PointSet> {
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    if !(2..=COORD_LIMIT).contains(&bound) {
        return Err(Error::InvalidConfig(format!("coordinate bound {bound} outside [2, 2^30]")));
    }
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut points: Vec<Point> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while points.len() < n {
        attempts += 1;
        if attempts > 1000 * n + 100_000 {
            return Err(Error::InvalidConfig(format!(
                "could not place {n} points in general position below {bound}"
            )));
        }
        let p = Point::new(rng.gen_range(0..bound), rng.gen_range(0..bound));
        if points.contains(&p) {
            continue;
        }
        let collinear = (0..points.len())
            .any(|i| (i + 1..points.len()).any(|j| orientation(points[i], points[j], p) == Orientation::Zero));
        if !collinear {
            points.push(p);
        }
    }
    validate_general_position(&points)?;
    PointSet::new(points)
}

/// One line of a batch stats stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub name: String,
    pub n: usize,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub status: String,
    pub nodes: usize,
    pub pricing_rounds: usize,
    pub columns: usize,
    pub cuts: usize,
    /// Process-wide peak resident size at the end of the run (0 if unknown).
    pub peak_mem_bytes: u64,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Peak resident set size of this process, from `/proc/self/status`.
pub fn peak_memory_bytes() -> u64 {
    std::fs::read_to_string("/proc/self/status")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("VmHWM:"))
                .and_then(|l| l.split_whitespace().nth(1))
                .and_then(|kb| kb.parse::<u64>().ok())
        })
        .map_or(0, |kb| kb * 1024)
}

/// Instance files in `dir` (`.txt`, `.json`, `.pts`), sorted by path.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("txt" | "json" | "pts")))
        .collect();
    files.sort();
    Ok(files)
}

pub fn run_file(path: &Path, config: &SolverConfig, round: bool) -> BatchRecord {
    let start = Instant::now();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("").to_string();
    let failed = |name: String, n: usize, e: Error| BatchRecord {
        name,
        n,
        mode: config.mode,
        value: None,
        bound: None,
        status: "error".into(),
        nodes: 0,
        pricing_rounds: 0,
        columns: 0,
        cuts: 0,
        peak_mem_bytes: peak_memory_bytes(),
        seconds: start.elapsed().as_secs_f64(),
        error: Some(e.to_string()),
    };
    let inst = match std::fs::read(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        .and_then(|b| parse_instance(&b, round))
    {
        Ok(i) => i,
        Err(e) => return failed(stem, 0, e),
    };
    let name = if inst.name.is_empty() { stem } else { inst.name.clone() };
    let n = inst.points.len();
    match solve(inst.points, config) {
        Ok(out) => batch_record(name, n, config.mode, &out),
        Err(e) => failed(name, n, e),
    }
}

fn batch_record(name: String, n: usize, mode: Mode, out: &SolveOutcome) -> BatchRecord {
    BatchRecord {
        name,
        n,
        mode,
        value: Some(out.incumbent.value),
        bound: Some(out.bound),
        status: out.status.to_string(),
        nodes: out.stats.nodes,
        pricing_rounds: out.stats.pricing_rounds,
        columns: out.stats.columns,
        cuts: out.stats.cuts,
        peak_mem_bytes: peak_memory_bytes(),
        seconds: out.stats.seconds,
        error: None,
    }
}

/// Solves every instance in `dir`, writing one JSON line per instance to
/// `out` as soon as it finishes. With `jobs > 1` (and the `parallel`
/// feature) instances run concurrently, each with its own solver state, and
/// lines appear in completion order. Returns the records in file order.
pub fn run_batch(
    dir: &Path,
    config: &SolverConfig,
    jobs: usize,
    round: bool,
    out: &mut (dyn Write + Send),
) -> Result<Vec<BatchRecord>> {
    let files = instance_files(dir)?;
    let sink = Mutex::new(out);
    let emit = |r: &BatchRecord| {
        let mut line = serde_json::to_string(r).expect("plain data serialises");
        line.push('\n');
        let mut w = sink.lock().unwrap_or_else(|e| e.into_inner());
        w.write_all(line.as_bytes()).and_then(|_| w.flush())
    };
    let run = |p: &PathBuf| {
        let r = run_file(p, config, round);
        emit(&r).map(|_| r)
    };
    let results: Vec<std::io::Result<BatchRecord>> = if jobs > 1 {
        run_parallel(&files, jobs, run)
    } else {
        files.iter().map(run).collect()
    };
    results
        .into_iter()
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::Io(e.to_string()))
}

#[cfg(feature = "parallel")]
fn run_parallel<T: Send>(files: &[PathBuf], jobs: usize, f: impl Fn(&PathBuf) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| files.par_iter().map(&f).collect()),
        Err(_) => crate::par::map_slice_with(Exec::Sequential, files, f),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<T: Send>(files: &[PathBuf], _jobs: usize, f: impl Fn(&PathBuf) -> T + Sync + Send) -> Vec<T> {
    crate::par::map_slice_with(Exec::Sequential, files, f)
}

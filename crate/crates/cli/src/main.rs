use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use mcpp::io::{
    export_root_lp, generate_instance, parse_instance, render_svg, run_batch, write_audit, write_instance_json,
    write_instance_text, write_solution,
};
use mcpp::par::Exec;
use mcpp::search::{solve, Mode, ProofStatus, SolverConfig};

#[derive(Parser)]
#[command(name = "mcpp", version, about = "Exact minimum convex partition of planar point sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Write a random instance in general position.
    Gen(GenArgs),
    /// Solve every instance in a directory, one stats line per instance.
    Batch(BatchArgs),
}

#[derive(Args)]
struct SolverOpts {
    #[arg(long, default_value = "cg")]
    mode: Mode,
    /// Wall-clock limit in seconds.
    #[arg(long = "time-limit", value_name = "S")]
    time_limit: Option<f64>,
    /// Dual smoothing factor in [0, 1).
    #[arg(long, default_value_t = 0.55)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Accept JSON coordinates given as floats by rounding them.
    #[arg(long)]
    round: bool,
    /// Keep every kernel on the calling thread.
    #[arg(long)]
    sequential: bool,
    /// Skip degree-cut separation.
    #[arg(long = "no-cuts")]
    no_cuts: bool,
}

impl SolverOpts {
    fn config(&self) -> Result<SolverConfig> {
        let time_limit = match self.time_limit {
            Some(s) if !(s.is_finite() && s >= 0.0) => bail!("time limit must be a non-negative number of seconds"),
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        let config = SolverConfig {
            mode: self.mode,
            time_limit,
            lambda: self.lambda,
            seed: self.seed,
            exec: if self.sequential { Exec::Sequential } else { Exec::available() },
            degree_cuts: !self.no_cuts,
            ..SolverConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    opts: SolverOpts,
    #[arg(long, value_name = "OUT")]
    svg: Option<PathBuf>,
    /// Solution JSON; printed to stdout when omitted.
    #[arg(long, value_name = "OUT")]
    json: Option<PathBuf>,
    /// Node audit log (JSON lines).
    #[arg(long, value_name = "OUT")]
    audit: Option<PathBuf>,
    /// Root LP model in LP text format.
    #[arg(long, value_name = "OUT")]
    lp: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coordinates are drawn from [0, B).
    #[arg(long, default_value_t = 10_000)]
    bound: i64,
    /// Output file; `.json` selects the JSON format. Stdout when omitted.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    dir: PathBuf,
    #[command(flatten)]
    opts: SolverOpts,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Instances solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn init_logging() {
    let level = std::env::var("MCP_LOG").unwrap_or_else(|_| "off".into());
    env_logger::Builder::new()
        .parse_filters(&level)
        .format_timestamp_millis()
        .init();
}

fn write_file(path: &PathBuf, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run_solve(args: SolveArgs) -> Result<ExitCode> {
    let config = args.opts.config()?;
    let bytes = fs::read(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let inst = parse_instance(&bytes, args.opts.round).with_context(|| args.file.display().to_string())?;
    info!("{} points, mode {}", inst.points.len(), config.mode);
    let out = solve(inst.points.clone(), &config)?;
    info!(
        "value {} bound {} after {} nodes in {:.2}s",
        out.incumbent.value, out.bound, out.stats.nodes, out.stats.seconds
    );
    let json = write_solution(&out.incumbent, out.status, out.bound, &out.stats);
    match &args.json {
        Some(p) => write_file(p, &json)?,
        None => print!("{json}"),
    }
    if let Some(p) = &args.svg {
        write_file(p, &render_svg(&inst.points, Some(&out.incumbent)))?;
    }
    if let Some(p) = &args.audit {
        let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        let mut w = BufWriter::new(f);
        write_audit(&out.audit, &mut w)?;
        w.flush()?;
    }
    if let Some(p) = &args.lp {
        write_file(p, &export_root_lp(&inst.points, config.mode, &out.incumbent.partition))?;
    }
    Ok(match out.status {
        ProofStatus::Optimal => ExitCode::SUCCESS,
        ProofStatus::TimeLimit => ExitCode::from(2),
    })
}

fn run_gen(args: GenArgs) -> Result<ExitCode> {
    let ps = generate_instance(args.seed, args.n, args.bound)?;
    match &args.output {
        Some(p) if p.extension().is_some_and(|e| e == "json") => {
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
            write_file(p, &write_instance_json(name, &ps))?;
        }
        Some(p) => write_file(p, &write_instance_text(&ps))?,
        None => print!("{}", write_instance_text(&ps)),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_batch_cmd(args: BatchArgs) -> Result<ExitCode> {
    let config = args.opts.config()?;
    let f = fs::File::create(&args.output).with_context(|| format!("creating {}", args.output.display()))?;
    let mut w = BufWriter::new(f);
    let records = run_batch(&args.dir, &config, args.jobs.max(1), args.opts.round, &mut w)?;
    w.flush()?;
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    let open = records.iter().filter(|r| r.status == "time-limit").count();
    info!("{} instances, {failed} failed, {open} hit the time limit", records.len());
    Ok(if failed > 0 {
        ExitCode::FAILURE
    } else if open > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    init_logging();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // 2 is reserved for runs stopped by the time limit
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Gen(a) => run_gen(a),
        Command::Batch(a) => run_batch_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

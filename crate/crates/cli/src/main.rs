//! `altproj`: generate, verify and plot the spiral sequence, run alternating
//! projections from JSON configs, and batch-check finite-union scenarios.
//!
//! Exit codes: 0 success, 1 failed check, 2 usage or config error, 3 I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod plot;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use altproj::counterexample::{self, Variant};
use altproj::finite_union::{self, BatchSummary, DEFAULT_MAX_ITER, DEFAULT_TOL};
use altproj::map_driver::{self, MapConfig, VerdictKind};
use altproj::numfmt::{sig17, to_json_writer};
use altproj::sequence;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "altproj", version, about = "Alternating projections and the spiral counterexample")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the first N points of the spiral sequence.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate x_0..x_horizon and run every sequence check.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        horizon: u64,
        /// Cap on the brute-force nearest-point check, which is quadratic.
        #[arg(long, default_value_t = 2000)]
        nearest_horizon: usize,
        /// Test hook: move x_N off the curve before checking.
        #[arg(long, hide = true, value_name = "N")]
        corrupt_record: Option<usize>,
    },
    /// Draw the first N sequence points with their construction circles as SVG.
    Plot {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run alternating projections from a JSON config and write the trace.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trace_out: PathBuf,
    },
    /// Check the finite-union convergence claim on seeded random scenarios.
    UnionBatch {
        /// Half-open range `START..END`.
        #[arg(long, value_parser = parse_range)]
        seeds: Range<u64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..=4))]
        dim: u64,
        /// Convex members per side.
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=4))]
        members: u64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// JSON-lines report.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the truncated counterexample sets as a run config started at x_0.
    ExportSets {
        /// Number of sequence points, x_0..x_{horizon-1}.
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        horizon: u64,
        #[arg(long, value_enum, default_value_t = VariantArg::Sphere)]
        variant: VariantArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Sphere,
    Disk,
}

fn parse_range(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected START..END, got {s:?}"))?;
    let start: u64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let end: u64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if start >= end {
        return Err(format!("empty seed range {start}..{end}"));
    }
    Ok(start..end)
}

#[derive(Debug)]
enum Failure {
    Check(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<altproj::Error> for Failure {
    fn from(e: altproj::Error) -> Self {
        use altproj::Error as E;
        match e {
            E::CheckFailed { .. }
            | E::NearestPropertyViolated(_)
            | E::CorollaryViolated(_)
            | E::BracketInvalid { .. }
            | E::TieEncountered { .. }
            | E::AtIteration { .. } => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("altproj: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Gen { n, format, out } => gen(n as usize, format, out.as_deref()),
        Command::Verify { horizon, nearest_horizon, corrupt_record } => {
            verify(horizon as usize, nearest_horizon, corrupt_record)
        }
        Command::Plot { n, out } => {
            let svg = plot::render(n as usize)?;
            let mut w = create(&out)?;
            w.write_all(svg.as_bytes()).and_then(|_| w.flush()).map_err(io_err(&out))
        }
        Command::Run { config, trace_out } => run(&config, &trace_out),
        Command::UnionBatch { seeds, dim, members, tol, max_iter, out } => {
            union_batch(seeds, dim as usize, members as usize, tol, max_iter, &out)
        }
        Command::ExportSets { horizon, variant, out } => export_sets(horizon as usize, variant, &out),
    }
}

fn gen(n: usize, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let report = sequence::generate(n)?;
    let write = |w: &mut dyn Write| -> io::Result<()> {
        match format {
            Format::Csv => sequence::write_csv(&report.records, &mut *w)?,
            Format::Json => {
                sequence::write_json(&report.records, &mut *w)?;
                writeln!(w)?;
            }
        }
        w.flush()
    };
    match out {
        Some(path) => write(&mut create(path)?).map_err(io_err(path)),
        None => write(&mut io::stdout().lock()).map_err(|e| Failure::Io(format!("stdout: {e}"))),
    }
}

fn verify(horizon: usize, nearest_horizon: usize, corrupt: Option<usize>) -> Result<(), Failure> {
    let mut report = sequence::generate(horizon + 1)?;
    if let Some(n) = corrupt {
        sequence::corrupt_record(&mut report, n, 1e-6)?;
    }
    let s = sequence::verify_report(&report, nearest_horizon.min(horizon))?;
    println!("records                 {}", s.records);
    println!("step identity residual  {}", sig17(s.step_identity));
    println!("half-angle residual     {} (scaled {}, ratio {})", sig17(s.half_angle.raw), sig17(s.half_angle.scaled), sig17(s.half_angle.ratio));
    println!("telescoping residual    {}", sig17(s.telescoping));
    println!("max delta (degrees)     {}", sig17(s.max_delta.to_degrees()));
    println!("circle gap residual     {}", sig17(s.max_sphere_gap_residual));
    if let Some(n) = s.nearest {
        println!("nearest-point margin    {} (circle lead {})", sig17(n.min_cloud_margin), sig17(n.min_sphere_margin));
    }
    if let Some(l) = s.limits {
        println!("tail eps                {}", sig17(l.eps_tail));
        println!("tail delta              {}", sig17(l.delta_tail));
        println!("largest angular gap     {}", sig17(l.circular_gap));
    }
    println!("all checks passed");
    Ok(())
}

fn read_config(path: &Path) -> Result<MapConfig, Failure> {
    let mut text = String::new();
    File::open(path).and_then(|mut f| f.read_to_string(&mut text)).map_err(io_err(path))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        Failure::Usage(format!("{}: at `{at}`: {}", path.display(), e.inner()))
    })
}

fn run(config: &Path, trace_out: &Path) -> Result<(), Failure> {
    let cfg = read_config(config)?;
    cfg.validate()?;
    let trace = map_driver::run(&cfg)?;
    let mut w = create(trace_out)?;
    to_json_writer(&mut w, &trace)
        .map_err(io::Error::other)
        .and_then(|_| w.flush())
        .map_err(io_err(trace_out))?;
    println!("iterations  {}", trace.verdict.iterations_used);
    println!("multivalued {}", trace.multivalued_events.len());
    match &trace.verdict.kind {
        VerdictKind::ConvergedToPoint { limit } => {
            let c: Vec<String> = limit.coords().iter().map(|&v| sig17(v)).collect();
            println!("verdict     converged_to_point [{}]", c.join(", "));
        }
        VerdictKind::ContinuumSuspected { ring_radius_estimate, angular_spread } => println!(
            "verdict     continuum_suspected (heuristic) ring radius {} angular spread {}",
            sig17(*ring_radius_estimate),
            sig17(*angular_spread)
        ),
        VerdictKind::BudgetExhausted => println!("verdict     budget_exhausted"),
    }
    Ok(())
}

fn union_batch(
    seeds: Range<u64>,
    dim: usize,
    members: usize,
    tol: f64,
    max_iter: usize,
    out: &Path,
) -> Result<(), Failure> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Failure::Usage("tol must be positive and max-iter at least 1".into()));
    }
    let verdicts = finite_union::run_batch(seeds, |_| (dim, members), tol, max_iter)?;
    let mut w = create(out)?;
    finite_union::write_jsonl(&verdicts, &mut w).and_then(|_| w.flush()).map_err(io_err(out))?;
    let s = BatchSummary::tally(&verdicts);
    println!("pass {} hypotheses_not_met {} fail {}", s.pass, s.hypotheses_not_met, s.fail);
    if s.fail > 0 {
        return Err(Failure::Check(format!("{} scenario(s) violate the convergence claim", s.fail)));
    }
    Ok(())
}

fn export_sets(horizon: usize, variant: VariantArg, out: &Path) -> Result<(), Failure> {
    let variant = match variant {
        VariantArg::Sphere => Variant::Sphere,
        VariantArg::Disk => Variant::Disk,
    };
    let sets = counterexample::build(horizon, variant)?;
    let pairs = sets.max_pairs_from(0);
    if pairs == 0 {
        return Err(Failure::Usage(format!("horizon {horizon} leaves no room for a single pair")));
    }
    let cfg = sets.config(sets.sequence().records[0].x.clone(), pairs);
    let mut w = create(out)?;
    to_json_writer(&mut w, &cfg)
        .map_err(io::Error::other)
        .and_then(|_| writeln!(w))
        .and_then(|_| w.flush())
        .map_err(io_err(out))
}

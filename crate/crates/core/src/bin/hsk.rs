use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hsk_core::bench::{bench, calibrate, write_rows, Algorithm, BenchConfig, CalibrateConfig};
use hsk_core::error::ErrorClass;
use hsk_core::gen::{
    gen_clustered, gen_index1d, gen_index2d, gen_opt_hard, gen_uniform, index2d_rings, HardInstanceSpec, Instance, Layout,
};
use hsk_core::io::{read_path, write_path, Format, IngestOptions};
use hsk_core::mult1d::Universe;
use hsk_core::objective::hinge_objective;
use hsk_core::optimize::{optimize_via_sketch, sgd_baseline, OptimizeConfig, SgdConfig};
use hsk_core::sketch::{AnySketch, BuildSpec, SketchBuilder};
use hsk_core::verify::{verify, Fault, VerifyConfig};
use hsk_core::{HskError, HyperplaneQuery, LabeledPoint, Power, Result};

#[derive(Parser)]
#[command(name = "hsk", version, about = "Hinge-objective sketches: build, query, optimize, benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic or adversarial stream.
    Gen(GenArgs),
    /// Build a sketch from a stream and save it.
    Build(BuildArgs),
    /// Query a saved sketch.
    Query(QueryArgs),
    /// Approximately minimize the regularized hinge objective.
    Optimize(OptimizeArgs),
    /// Space/error/runtime table as CSV.
    Bench(BenchArgs),
    /// Run the invariant and decoder suites.
    Verify(VerifyArgs),
    /// Sweep the streaming sampling constants.
    Calibrate(CalibrateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Uniform,
    Clustered,
    Index1d,
    Index2d,
    Opt,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Ball,
    Positive,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

#[derive(Clone, Copy, ValueEnum)]
enum UniverseArg {
    Integer,
    Real,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    Capacity,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Bin => Format::Bin,
        }
    }
}

#[derive(Args)]
struct Seed {
    /// Random seed.
    #[arg(long, env = "HSK_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Input {
    /// Stream path, `-` for stdin.
    #[arg(long, short)]
    input: PathBuf,
    /// Stream format; inferred from the extension when absent.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Reject points with larger norm; 0 disables the check.
    #[arg(long, default_value_t = 1.0)]
    norm_bound: f64,
    /// Skip bad rows (reported on stderr) instead of stopping.
    #[arg(long)]
    keep_going: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[command(flatten)]
    seed: Seed,
    #[arg(long, value_enum, default_value = "ball")]
    layout: LayoutArg,
    /// Label flip probability.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 4)]
    clusters: usize,
    #[arg(long, default_value_t = 0.1)]
    spread: f64,
    /// Bit string for index instances, e.g. `1011`.
    #[arg(long)]
    bits: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Angles of the planar index instance.
    #[arg(long, default_value_t = 8)]
    s: usize,
    /// Rings of the planar index instance; smallest separating count if absent.
    #[arg(long)]
    r: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Hard instance case: 1 adds the query point.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    case: u8,
    /// Output stream path, `-` for stdout.
    #[arg(long, short, default_value = "-")]
    out: PathBuf,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Metadata sidecar path; `<out>.json` by default when writing a file.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, short)]
    algorithm: hsk_core::optimize::Backend,
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    p: u8,
    /// Declared stream length; the number of points read when absent.
    #[arg(long)]
    n: Option<u64>,
    /// Universe bound W.
    #[arg(long, default_value_t = 1 << 20)]
    w: u64,
    #[arg(long, value_enum, default_value = "real")]
    universe: UniverseArg,
    #[command(flatten)]
    seed: Seed,
    #[arg(long, default_value_t = 8.0)]
    c1: f64,
    #[arg(long, default_value_t = 32.0)]
    c2: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// add1d domain half-width.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// add2d domain `[lo, hi]²`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    hi: f64,
    /// Sketch output path.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    sketch: PathBuf,
    /// One-dimensional query point: estimates `Σ max{0, q − x}^p`.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["theta", "b"])]
    q: Vec<f64>,
    /// Direction, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, requires = "b")]
    theta: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Backend name or `pegasos`.
    #[arg(long, short)]
    algorithm: Algorithm,
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Replica count (odd); grid default when absent.
    #[arg(long)]
    k: Option<usize>,
    #[command(flatten)]
    seed: Seed,
    /// Maximum grid size.
    #[arg(long, default_value_t = hsk_core::optimize::DEFAULT_GRID_BUDGET)]
    budget: u128,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "offline1d,mult1d,dyn1d,add1d,add2d,pegasos")]
    algorithms: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1")]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    p: u8,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    seeds: u64,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 1 << 20)]
    w: u64,
    #[command(flatten)]
    seed: Seed,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 4000)]
    n: usize,
    #[command(flatten)]
    seed: Seed,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, default_value_t = 1 << 20)]
    w: u64,
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    #[arg(long, default_value_t = 100)]
    queries: usize,
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.95)]
    target: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    c1: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    c2: Vec<f64>,
    #[command(flatten)]
    seed: Seed,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_VERIFY: u8 = 4;

enum Failure {
    Error(HskError),
    Verify,
}

impl From<HskError> for Failure {
    fn from(e: HskError) -> Self {
        Failure::Error(e)
    }
}

fn emit_error(kind: &str, message: String, code: u8) {
    let line = json!({ "error": kind, "message": message, "exit_code": code });
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| HskError::Format(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn power(p: u8) -> Power {
    if p == 2 {
        Power::Squared
    } else {
        Power::Linear
    }
}

fn load(input: &Input) -> Result<Vec<LabeledPoint>> {
    let opts = IngestOptions {
        norm_bound: (input.norm_bound > 0.0).then_some(input.norm_bound),
        dim: None,
        fail_fast: !input.keep_going,
    };
    let got = read_path(&input.input, input.format.map(Into::into), opts)?;
    for e in &got.errors {
        emit_error(e.error.kind(), format!("line {}: {}", e.line, e.error), EXIT_DATA);
    }
    if got.points.is_empty() {
        return Err(HskError::EmptyDataset);
    }
    Ok(got.points)
}

fn parse_bits(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(HskError::InvalidParameter {
                name: "bits",
                reason: format!("unexpected character {c:?}"),
            }),
        })
        .collect()
}

fn run_gen(a: GenArgs) -> Result<()> {
    let layout = match a.layout {
        LayoutArg::Ball => Layout::Ball,
        LayoutArg::Positive => Layout::Positive,
    };
    let bits = || parse_bits(a.bits.as_deref().unwrap_or(""));
    let mut inst: Instance = match a.kind {
        Kind::Uniform => gen_uniform(a.n, a.d, a.seed.seed, layout, a.noise)?,
        Kind::Clustered => gen_clustered(a.n, a.d, a.seed.seed, layout, a.clusters, a.spread, a.noise)?,
        Kind::Index1d => gen_index1d(&bits()?, a.epsilon, a.n)?,
        Kind::Index2d => gen_index2d(&bits()?, a.s, a.r.unwrap_or_else(|| index2d_rings(a.s)), a.n)?,
        Kind::Opt => gen_opt_hard(&HardInstanceSpec::new(a.delta, a.n, a.d, a.case == 1, a.seed.seed))?,
    };
    inst.meta.seed = a.seed.seed;
    write_path(&a.out, a.format.map(Into::into), &inst.points)?;
    let meta_path = a.meta.clone().or_else(|| {
        (a.out.as_os_str() != "-").then(|| {
            let mut p = a.out.clone().into_os_string();
            p.push(".json");
            PathBuf::from(p)
        })
    });
    if let Some(p) = meta_path {
        let body = serde_json::to_string_pretty(&inst.meta).map_err(|e| HskError::Format(e.to_string()))?;
        fs::write(p, body + "\n")?;
    }
    Ok(())
}

fn run_build(a: BuildArgs) -> Result<()> {
    let pts = load(&a.input)?;
    let mut spec = BuildSpec::new(a.algorithm, a.epsilon, a.n.unwrap_or(pts.len() as u64), a.seed.seed);
    spec.p = power(a.p);
    spec.w = a.w;
    spec.universe = match a.universe {
        UniverseArg::Integer => Universe::Integer,
        UniverseArg::Real => Universe::Real,
    };
    spec.c1 = a.c1;
    spec.c2 = a.c2;
    spec.c = a.c;
    spec.radius = a.radius;
    spec.lo = a.lo;
    spec.hi = a.hi;
    let mut b = SketchBuilder::new(&spec)?;
    for p in &pts {
        b.update(&p.x)?;
    }
    let s = b.finish()?;
    let bytes = s.to_bytes()?;
    fs::write(&a.out, &bytes)?;
    print_json(&json!({
        "algorithm": s.backend().name(),
        "n": s.len(),
        "space_words": s.space_words(),
        "bytes": bytes.len(),
        "out": a.out.display().to_string(),
    }))
}

fn run_query(a: QueryArgs) -> Result<()> {
    let s = AnySketch::from_bytes(&fs::read(&a.sketch)?)?;
    let mut queries: Vec<HyperplaneQuery> = a.q.iter().map(|&q| HyperplaneQuery::new(vec![1.0], q)).collect();
    if let (Some(theta), Some(b)) = (a.theta, a.b) {
        queries.push(HyperplaneQuery::new(theta, b));
    }
    if queries.is_empty() {
        return Err(HskError::InvalidParameter {
            name: "q",
            reason: "give --q or --theta with --b".into(),
        });
    }
    let rows = queries
        .iter()
        .map(|q| {
            let sum = s.query_sum(q)?;
            Ok(json!({
                "theta": q.theta,
                "b": q.b,
                "estimate_sum": sum,
                "estimate": if s.is_empty() { 0.0 } else { sum / s.len() as f64 },
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    print_json(&json!({ "algorithm": s.backend().name(), "n": s.len(), "queries": rows }))
}

fn run_optimize(a: OptimizeArgs) -> Result<()> {
    let pts = load(&a.input)?;
    let (theta, b, extra) = match a.algorithm {
        Algorithm::Pegasos => {
            let r = sgd_baseline(pts.clone(), &SgdConfig::new(a.lambda, a.epsilon, a.seed.seed))?;
            (r.theta.clone(), r.b, json!({ "capacity": r.capacity, "space_words": r.space_words }))
        }
        Algorithm::Sketch(backend) => {
            let mut cfg = OptimizeConfig::new(backend, a.lambda, a.epsilon, a.seed.seed);
            cfg.k = a.k;
            cfg.budget = a.budget;
            let r = optimize_via_sketch(&pts, &cfg)?;
            (
                r.theta.clone(),
                r.b,
                json!({
                    "value_hat": r.value,
                    "grid_size": r.grid_size,
                    "replicas": r.replicas,
                    "space_words": r.space_words,
                }),
            )
        }
    };
    let value = hinge_objective(&pts, &HyperplaneQuery::new(theta.clone(), b), a.lambda)?;
    let mut out = json!({
        "algorithm": a.algorithm.name(),
        "theta": theta,
        "b": b,
        "objective": value,
    });
    if let (Some(o), Some(e)) = (out.as_object_mut(), extra.as_object()) {
        o.extend(e.clone());
    }
    print_json(&out)
}

fn run_bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        algorithms: a.algorithms,
        epsilons: a.epsilons,
        p: power(a.p),
        n: a.n,
        seeds: a.seeds,
        queries: a.queries,
        lambda: a.lambda,
        w: a.w,
        seed: a.seed.seed,
        ..BenchConfig::default()
    };
    let rows = bench(&cfg)?;
    write_rows(std::io::stdout().lock(), &rows)
}

fn run_verify(a: VerifyArgs) -> std::result::Result<(), Failure> {
    let report = verify(&VerifyConfig {
        n: a.n,
        seed: a.seed.seed,
        fault: a.inject_fault.map(|FaultArg::Capacity| Fault::Capacity),
    });
    print_json(&serde_json::to_value(&report).map_err(|e| HskError::Format(e.to_string()))?)?;
    if report.passed() {
        Ok(())
    } else {
        for c in report.failures() {
            emit_error("verification", format!("{}: {}", c.name, c.detail), EXIT_VERIFY);
        }
        Err(Failure::Verify)
    }
}

fn run_calibrate(a: CalibrateArgs) -> Result<()> {
    let cfg = CalibrateConfig {
        epsilon: a.epsilon,
        n: a.n,
        w: a.w,
        seeds: a.seeds,
        queries: a.queries,
        kappa: a.kappa,
        target: a.target,
        c1: a.c1,
        c2: a.c2,
        seed: a.seed.seed,
    };
    let (rows, best) = calibrate(&cfg)?;
    print_json(&json!({ "rows": rows, "best": best.map(|i| &rows[i]) }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            emit_error("usage", e.to_string().trim().to_string(), EXIT_CONFIG);
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result: std::result::Result<(), Failure> = match cli.command {
        Command::Gen(a) => run_gen(a).map_err(Into::into),
        Command::Build(a) => run_build(a).map_err(Into::into),
        Command::Query(a) => run_query(a).map_err(Into::into),
        Command::Optimize(a) => run_optimize(a).map_err(Into::into),
        Command::Bench(a) => run_bench(a).map_err(Into::into),
        Command::Verify(a) => run_verify(a),
        Command::Calibrate(a) => run_calibrate(a).map_err(Into::into),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY),
        Err(Failure::Error(e)) => {
            let code = match e.class() {
                ErrorClass::Config => EXIT_CONFIG,
                ErrorClass::Data => EXIT_DATA,
            };
            emit_error(e.kind(), e.to_string(), code);
            ExitCode::from(code)
        }
    }
}

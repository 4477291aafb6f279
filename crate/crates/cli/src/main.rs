use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use floor_relu::bits::{oracle_extract, BitLocator, BlockExtractor, PointFitter};
use floor_relu::bounds::{bound_domain, bound_table, BoundRow, DEFAULT_GUARD_BITS};
use floor_relu::construct::{build_theorem1, build_theorem2, wrap_domain, BuildOptions, Certificate};
use floor_relu::io::{load_json, load_network, save_json, save_network, save_rows_csv, to_json_string};
use floor_relu::target::{lookup, registry, TargetFunction};
use floor_relu::verify::{
    check_certificate_with, exhaustive_bit_check, float_divergence_probe, memorization_demo, BitLevel, ErrorReport,
    Sampling, DEFAULT_RANDOM_POINTS,
};
use floor_relu::{AuditReport, BitString, Dyadic, Network};

#[derive(Parser)]
#[command(name = "floor-relu", version, about = "Build, evaluate and verify Floor-ReLU approximation networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct an approximant for a builtin target and write it with its certificate.
    Build(BuildArgs),
    /// Evaluate a saved network at given points.
    Eval(EvalArgs),
    /// Measure a saved network against its certificate; exits 1 on failure.
    Verify(VerifyArgs),
    /// Run a bit-extraction gadget, optionally checking it against the slicing oracle.
    Extract(ExtractArgs),
    /// Tabulate error bounds for a target over (N, L).
    Bounds(BoundsArgs),
    /// Memorize N^L random labels with one point fitter.
    Demo(DemoArgs),
    /// List points where binary64 evaluation departs from exact evaluation.
    Probe(ProbeArgs),
    /// List builtin targets.
    Targets,
}

#[derive(Args)]
struct TargetArgs {
    /// Builtin target, e.g. `mean`, `spike:alpha=1/2`, `const:value=1/3`.
    #[arg(long)]
    target: String,
    /// Input dimension.
    #[arg(long)]
    d: usize,
    /// Half-width of the domain [−M, M]^d, a power of two such as `1/2^3` or `4`.
    #[arg(long = "M")]
    m: Option<Dyadic>,
    #[arg(long, default_value_t = DEFAULT_GUARD_BITS)]
    guard_bits: u32,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long = "N")]
    n: u64,
    #[arg(long = "L")]
    l: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    theorem: u8,
    /// Network JSON output.
    #[arg(long)]
    out: PathBuf,
    /// Certificate JSON output.
    #[arg(long)]
    cert: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Exact,
    Float,
}

#[derive(Args)]
struct PointArgs {
    /// Comma-separated coordinates of one point; repeatable.
    #[arg(long = "x", value_delimiter = ';')]
    x: Vec<String>,
    /// Integer points A..=B (one-dimensional networks).
    #[arg(long, value_name = "A:B")]
    int_range: Option<String>,
    /// Grid with this many points per axis on the unit cube.
    #[arg(long)]
    grid: Option<u32>,
    /// Random points on the unit cube.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    net: PathBuf,
    #[command(flatten)]
    points: PointArgs,
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    mode: Backend,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    cert: PathBuf,
    /// Extra grid with this many points per axis.
    #[arg(long)]
    grid: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_RANDOM_POINTS)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report JSON output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-sample CSV output (x…, f, phi, abs_err).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Block,
    Locator,
    Fitter,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, value_enum)]
    mode: Level,
    #[arg(long = "N")]
    n: usize,
    /// Block length (block mode).
    #[arg(long = "J")]
    j: Option<u32>,
    /// Levels (locator and fitter modes).
    #[arg(long = "L")]
    l: Option<u32>,
    /// Input bit string; without it `--check` enumerates or samples strings.
    #[arg(long)]
    bits: Option<BitString>,
    /// Single block or bit index; all indices when omitted.
    #[arg(long)]
    index: Option<u64>,
    /// Compare every output with the slicing oracle; exits 1 on mismatch.
    #[arg(long)]
    check: bool,
    /// Largest number of strings to enumerate before sampling instead.
    #[arg(long, default_value_t = 1 << 16)]
    cap: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Save the gadget network built for `--bits`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long = "N", value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long = "L", value_delimiter = ',', required = true)]
    l: Vec<u64>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long = "L")]
    l: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    net: PathBuf,
    #[command(flatten)]
    points: PointArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // a closed pipe (e.g. `| head`) is not an error
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)?
    };
}

/// `Ok(false)` means a check ran and failed.
fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Build(a) => build(a),
        Command::Eval(a) => eval(a),
        Command::Verify(a) => verify(a),
        Command::Extract(a) => extract(a),
        Command::Bounds(a) => bounds(a),
        Command::Demo(a) => demo(a),
        Command::Probe(a) => probe(a),
        Command::Targets => {
            for t in registry() {
                out!("{:<8} {:<28} {:<32} {}", t.name, t.formula, t.parameters, t.modulus);
            }
            Ok(true)
        }
    }
}

fn emit<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => save_json(p, value).with_context(|| format!("writing {}", p.display())),
        None => {
            out!("{}", to_json_string(value)?);
            Ok(())
        }
    }
}

fn build(a: BuildArgs) -> Result<bool> {
    let t = &a.target;
    let opts = BuildOptions {
        guard_bits: t.guard_bits,
    };
    let f = lookup(&t.target, t.d, t.m.as_ref())?;
    let (net, cert) = match (&t.m, a.theorem) {
        (Some(m), th) => wrap_domain(f, m, th, a.n, a.l, &opts)?,
        (None, 1) => build_theorem1(&f, a.n, a.l, &opts)?,
        (None, _) => build_theorem2(&f, a.n, a.l, &opts)?,
    };
    save_network(&a.out, &net).with_context(|| format!("writing {}", a.out.display()))?;
    save_json(&a.cert, &cert).with_context(|| format!("writing {}", a.cert.display()))?;
    eprintln!(
        "built {}: width {}, depth {}, {} nonzero parameters, bound {}",
        cert.target,
        cert.audit.width,
        cert.audit.depth,
        cert.audit.nonzero_params,
        cert.bound.to_f64()
    );
    Ok(true)
}

fn parse_point(s: &str) -> Result<Vec<Dyadic>> {
    s.split(',')
        .map(|c| c.trim().parse::<Dyadic>().with_context(|| format!("bad coordinate {c:?}")))
        .collect()
}

fn collect_points(p: &PointArgs, d: usize) -> Result<Vec<Vec<Dyadic>>> {
    let mut pts: Vec<Vec<Dyadic>> = p.x.iter().map(|s| parse_point(s)).collect::<Result<_>>()?;
    if let Some(r) = &p.int_range {
        let (lo, hi) = r.split_once(':').context("--int-range expects A:B")?;
        let (lo, hi): (i64, i64) = (lo.trim().parse()?, hi.trim().parse()?);
        pts.extend((lo..=hi).map(|i| vec![Dyadic::from_int(i); d]));
    }
    if let Some(m) = p.grid {
        pts.extend(Sampling::Grid { per_axis: m }.points(d)?);
    }
    if let Some(count) = p.samples {
        pts.extend(Sampling::Random { count, seed: p.seed }.points(d)?);
    }
    if pts.is_empty() {
        bail!("no points given; use --x, --int-range, --grid or --samples");
    }
    if let Some(bad) = pts.iter().find(|x| x.len() != d) {
        bail!("point {bad:?} has {} coordinates, network expects {d}", bad.len());
    }
    Ok(pts)
}

fn eval(a: EvalArgs) -> Result<bool> {
    let net = load_network(&a.net).with_context(|| format!("reading {}", a.net.display()))?;
    for x in collect_points(&a.points, net.input_dim())? {
        let shown: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        let out: Vec<String> = match a.mode {
            Backend::Exact => net.eval_exact(&x)?.iter().map(|v| v.to_string()).collect(),
            Backend::Float => {
                let xf: Vec<f64> = x.iter().map(Dyadic::to_f64).collect();
                net.eval_float(&xf)?.iter().map(|v| format!("{v:e}")).collect()
            }
        };
        out!("{}\t{}", shown.join(","), out.join(","));
    }
    Ok(true)
}

#[derive(Serialize)]
struct VerifyReport {
    target: String,
    audit: AuditReport,
    audit_matches: bool,
    sizes_ok: bool,
    bound_recomputed: bool,
    error: ErrorReport,
    pass: bool,
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let net = load_network(&a.net).with_context(|| format!("reading {}", a.net.display()))?;
    let cert: Certificate = load_json(&a.cert).with_context(|| format!("reading {}", a.cert.display()))?;
    let f = lookup(&cert.target, cert.d, cert.domain_half_width.as_ref())?;
    if f.modulus() != &unscaled(&cert) {
        bail!("certificate modulus does not match builtin target {:?}", cert.target);
    }
    let (error, rows) = check_certificate_with(&net, &f, &cert, a.grid, a.samples, a.seed)?;
    let audit = net.audit();
    let report = VerifyReport {
        target: cert.target.clone(),
        audit,
        audit_matches: audit == cert.audit,
        sizes_ok: cert.sizes_ok(),
        bound_recomputed: cert.recompute_bound()? == cert.bound,
        pass: false,
        error,
    };
    let report = VerifyReport {
        pass: report.audit_matches && report.sizes_ok && report.bound_recomputed && report.error.pass,
        ..report
    };
    if let Some(p) = &a.csv {
        save_rows_csv(p, &rows, cert.d).with_context(|| format!("writing {}", p.display()))?;
    }
    emit(&report, a.report.as_deref())?;
    eprintln!(
        "{}: measured {} vs bound {} over {} points",
        if report.pass { "PASS" } else { "FAIL" },
        report.error.max_abs_error.to_f64(),
        report.error.bound.to_f64(),
        report.error.sample_count
    );
    Ok(report.pass)
}

/// The modulus the builtin declares before any domain scaling.
fn unscaled(cert: &Certificate) -> floor_relu::modulus::ModulusSpec {
    match (&cert.modulus, &cert.domain_half_width) {
        (floor_relu::modulus::ModulusSpec::Scaled { inner, .. }, Some(_)) => (**inner).clone(),
        (m, _) => m.clone(),
    }
}

#[derive(Serialize)]
struct ExtractLine {
    index: u64,
    output: String,
    oracle: String,
    ok: bool,
}

fn extract(a: ExtractArgs) -> Result<bool> {
    let size = match a.mode {
        Level::Block => a.j.context("block mode needs --J")?,
        Level::Locator | Level::Fitter => a.l.context("locator and fitter modes need --L")?,
    };
    let Some(bits) = a.bits else {
        if !a.check {
            bail!("give --bits, or --check to test all strings");
        }
        let level = match a.mode {
            Level::Block => BitLevel::Block,
            Level::Locator => BitLevel::Locator,
            Level::Fitter => BitLevel::Fitter,
        };
        let summary = exhaustive_bit_check(level, a.n, size, a.cap, a.seed)?;
        emit(&summary, None)?;
        return Ok(summary.pass());
    };
    let mut lines = Vec::new();
    match a.mode {
        Level::Block => {
            let g = BlockExtractor::build(a.n, size)?;
            save_gadget(a.out.as_deref(), &g.net)?;
            let j = size as usize;
            let indices: Vec<u64> = a.index.map_or_else(|| (1..=a.n as u64).collect(), |i| vec![i]);
            for i in indices {
                let out = g.extract(&bits, i as usize)?;
                let want = oracle_extract(&bits, (i as usize - 1) * j + 1, i as usize * j)?;
                lines.push(ExtractLine {
                    index: i,
                    ok: out == want,
                    output: out.to_string(),
                    oracle: want.to_string(),
                });
            }
        }
        Level::Locator | Level::Fitter => {
            let count = bits.len() as u64;
            let indices: Vec<u64> = a.index.map_or_else(|| (1..=count).collect(), |i| vec![i]);
            let locator = matches!(a.mode, Level::Locator).then(|| BitLocator::build(a.n, size)).transpose()?;
            let fitter = matches!(a.mode, Level::Fitter).then(|| PointFitter::build(a.n, size, &bits)).transpose()?;
            let net = locator.as_ref().map(|g| &g.net).or(fitter.as_ref().map(|g| &g.net));
            save_gadget(a.out.as_deref(), net.expect("one gadget is built"))?;
            for m in indices {
                let out = match (&locator, &fitter) {
                    (Some(g), _) => g.locate(&bits, m)?,
                    (_, Some(g)) => g.eval(m)?,
                    _ => unreachable!(),
                };
                let want = oracle_extract(&bits, m as usize, m as usize)?.bit(1);
                lines.push(ExtractLine {
                    index: m,
                    ok: out == want,
                    output: u8::from(out).to_string(),
                    oracle: u8::from(want).to_string(),
                });
            }
        }
    }
    for l in &lines {
        out!("{}\t{}", l.index, l.output);
    }
    let ok = lines.iter().all(|l| l.ok);
    if a.check {
        eprintln!("{}: {} outputs checked", if ok { "PASS" } else { "FAIL" }, lines.len());
        return Ok(ok);
    }
    Ok(true)
}

fn save_gadget(path: Option<&Path>, net: &Network) -> Result<()> {
    match path {
        Some(p) => save_network(p, net).with_context(|| format!("writing {}", p.display())),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct BoundsReport {
    target: String,
    d: usize,
    rows: Vec<BoundRow>,
    /// `N^{−√L}` bounds on [−M, M]^d, one per row, when `--M` is given.
    domain: Option<Vec<Dyadic>>,
}

fn bounds(a: BoundsArgs) -> Result<bool> {
    let t = &a.target;
    let f = lookup(&t.target, t.d, None)?;
    let rows = bound_table(f.modulus(), t.d, &a.n, &a.l, t.guard_bits)?;
    let domain = match &t.m {
        Some(m) => {
            let on_domain = lookup(&t.target, t.d, Some(m))?;
            Some(
                rows.iter()
                    .map(|r| bound_domain(on_domain.modulus(), t.d, m, r.n, r.l, t.guard_bits))
                    .collect::<Result<_, _>>()?,
            )
        }
        None => None,
    };
    emit(
        &BoundsReport {
            target: f.id(),
            d: t.d,
            rows,
            domain,
        },
        a.report.as_deref(),
    )?;
    Ok(true)
}

fn demo(a: DemoArgs) -> Result<bool> {
    let r = memorization_demo(a.n, a.l, a.seed)?;
    emit(&r, a.report.as_deref())?;
    Ok(r.all_exact)
}

fn probe(a: ProbeArgs) -> Result<bool> {
    let net = load_network(&a.net).with_context(|| format!("reading {}", a.net.display()))?;
    let pts = collect_points(&a.points, net.input_dim())?;
    let r = float_divergence_probe(&net, &pts)?;
    eprintln!("{} of {} points diverge", r.divergences.len(), r.points);
    emit(&r, a.report.as_deref())?;
    Ok(true)
}

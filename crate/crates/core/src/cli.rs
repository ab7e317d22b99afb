//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numeric failure
//! (the failure name is printed on standard error).

use std::f64::consts::{PI, TAU};
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::classify::{
    classify_parameter, find_critical_relation, find_second_relation, search_nearby, Classification, ClassifyBudget,
    ContinuationSettings, CriticalRelation, Verdict,
};
use crate::complex::{DEFAULT_ESCAPE_RADIUS, DEFAULT_MAX_ITER};
use crate::cycles::{find_cycles, gcd, CycleInfo};
use crate::dataset::{self, default_cycle, generate_orbits_dataset};
use crate::error::Error;
use crate::map::{orbit, CircleAngle, CriticalBranch, LiftPoint, Parameters};
use crate::raster::{render_dynamical_plane, render_parameter_plane, write_pgm, FateBudget, Region, RENDER_BUDGET};
use crate::rotation::{is_mode_locked, rotation_number, DEFAULT_ITERATIONS, DEFAULT_Q_MAX};

#[derive(Debug, Parser)]
#[command(
    name = "arnold-lab",
    version,
    about = "Dynamics of the Arnold family f(θ) = θ + α + b·sin θ"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print an orbit as CSV (step,theta).
    Orbit,
    /// Rotation number and mode locking (b ≤ 1).
    Rotation,
    /// List all cycles of period 1..=qmax.
    Cycles,
    /// Classify a parameter; one JSON line.
    Classify,
    /// Search near a parameter for a hyperbolic one.
    Search,
    /// Find a critical relation in an α bracket, optionally continued to a second one.
    Relation,
    /// Render the (α, b) parameter plane to PGM.
    RenderParam,
    /// Render the complex dynamical plane to PGM.
    RenderComplex,
    /// Generate the two-orbit perturbation dataset as CSV.
    Dataset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Branch {
    First,
    Second,
}

impl From<Branch> for CriticalBranch {
    fn from(b: Branch) -> Self {
        match b {
            Branch::First => CriticalBranch::First,
            Branch::Second => CriticalBranch::Second,
        }
    }
}

#[derive(Debug, clap::Args)]
struct Flags {
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Search radius.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Orbit length, rotation iterations, classification transient or escape budget.
    #[arg(long, global = true)]
    iters: Option<usize>,
    /// Largest period considered.
    #[arg(long, global = true)]
    qmax: Option<usize>,
    #[arg(long, global = true)]
    width: Option<usize>,
    #[arg(long, global = true)]
    height: Option<usize>,
    /// x0,x1,y0,y1
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_region)]
    region: Option<Region>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// lo,hi α bracket for the relation finder.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_bracket)]
    bracket: Option<(f64, f64)>,
    /// Critical point of the relation.
    #[arg(long, global = true, value_enum)]
    critical: Option<Branch>,
    /// Relation length n: fⁿ(f(c)) = c.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Critical point of a second relation to continue to.
    #[arg(long, global = true, value_enum)]
    critical2: Option<Branch>,
    /// Length of the second relation.
    #[arg(long, global = true)]
    n2: Option<usize>,
    /// Orbit start angle.
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta: Option<f64>,
}

fn parse_floats(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_region(s: &str) -> Result<Region, String> {
    let v = parse_floats(s, 4)?;
    Region::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s, 2)?;
    Ok((v[0], v[1]))
}

enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

/// Run the front end on `args` (including the program name) and return the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = cli
        .flags
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return 2;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: could not start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("Usage: arnold-lab <COMMAND> [OPTIONS]  (see --help)");
            2
        }
        Err(Failure::Numeric(Error::Io(e))) => {
            eprintln!("IoError: {e}");
            1
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("{}: {e}", e.name());
            3
        }
    }
}

/// Resolved settings, echoed to standard error before any work is done.
struct Echo(Vec<(&'static str, String)>);

impl Echo {
    fn new(command: &str) -> Self {
        Echo(vec![("command", command.to_string())])
    }

    fn add(&mut self, key: &'static str, value: impl ToString) {
        self.0.push((key, value.to_string()));
    }

    fn print(&self) {
        let line: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        eprintln!("config: {}", line.join(" "));
    }
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for this command")))
}

fn params(f: &Flags) -> Result<Parameters, Failure> {
    checked(require(f.alpha, "alpha")?, require(f.b, "b")?)
}

fn checked(alpha: f64, b: f64) -> Result<Parameters, Failure> {
    Parameters::new(alpha, b).map_err(|e| Failure::Usage(e.to_string()))
}

/// Standard output, or a file when --out is given.
fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(out: &Option<PathBuf>, lines: &[String]) -> Outcome {
    let mut w = sink(out)?;
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Outcome {
    let f = &cli.flags;
    match cli.command {
        Command::Orbit => cmd_orbit(f),
        Command::Rotation => cmd_rotation(f),
        Command::Cycles => cmd_cycles(f),
        Command::Classify => cmd_classify(f),
        Command::Search => cmd_search(f),
        Command::Relation => cmd_relation(f),
        Command::RenderParam => cmd_render_param(f),
        Command::RenderComplex => cmd_render_complex(f),
        Command::Dataset => cmd_dataset(f),
    }
}

fn cmd_orbit(f: &Flags) -> Outcome {
    let p = params(f)?;
    let n = f.iters.unwrap_or(100);
    let theta = f.theta.unwrap_or(0.0);
    let mut echo = Echo::new("orbit");
    echo.add("alpha", p.alpha());
    echo.add("b", p.b());
    echo.add("theta", theta);
    echo.add("iters", n);
    echo.print();
    let rec = orbit(&p, CircleAngle::new(theta), n, false);
    let mut lines = vec!["step,theta".to_string()];
    lines.extend(
        rec.angles
            .iter()
            .enumerate()
            .map(|(i, a)| format!("{i},{:.16e}", a.value())),
    );
    emit(&f.out, &lines)
}

fn cmd_rotation(f: &Flags) -> Outcome {
    let p = params(f)?;
    let n = f.iters.unwrap_or(DEFAULT_ITERATIONS);
    let q_max = f.qmax.unwrap_or(DEFAULT_Q_MAX);
    let theta = f.theta.unwrap_or(0.0);
    let mut echo = Echo::new("rotation");
    echo.add("alpha", p.alpha());
    echo.add("b", p.b());
    echo.add("theta", theta);
    echo.add("iters", n);
    echo.add("qmax", q_max);
    echo.print();
    let est = rotation_number(&p, LiftPoint(theta), n)?;
    let locked = is_mode_locked(&p, q_max)?;
    let v = json!({
        "alpha": p.alpha(),
        "b": p.b(),
        "rotation_number": est.value,
        "lift_mean": est.lift_mean,
        "iterations": est.iterations_used,
        "error_bound": est.error_bound,
        "locked": locked.map(|(pp, q)| json!({"p": pp, "q": q})),
    });
    emit(&f.out, &[v.to_string()])
}

fn cycle_json(c: &CycleInfo) -> Value {
    json!({
        "period": c.period,
        "winding": c.winding,
        "points": c.points.iter().map(|a| a.value()).collect::<Vec<_>>(),
        "multiplier": c.multiplier.value(),
        "log_abs_multiplier": c.multiplier.log_abs,
        "stability": format!("{:?}", c.stability),
        "residual": c.residual,
        "bisection_fallback": c.bisection_fallback,
    })
}

fn cmd_cycles(f: &Flags) -> Outcome {
    let p = params(f)?;
    let q_max = f.qmax.unwrap_or(4);
    if q_max == 0 {
        return Err(Failure::Usage("--qmax must be at least 1".into()));
    }
    let mut echo = Echo::new("cycles");
    echo.add("alpha", p.alpha());
    echo.add("b", p.b());
    echo.add("qmax", q_max);
    echo.print();
    let mut lines = Vec::new();
    for q in 1..=q_max {
        // F^q(x) − x lies within q(α ± b), so only these windings can close.
        let lo = (q as f64 * (p.alpha() - p.b()) / TAU).floor() as i64;
        let hi = (q as f64 * (p.alpha() + p.b()) / TAU).ceil() as i64;
        for w in lo..=hi {
            if q > 1 && gcd(w, q as i64) != 1 {
                continue;
            }
            for c in find_cycles(&p, q, w)? {
                lines.push(cycle_json(&c).to_string());
            }
        }
    }
    emit(&f.out, &lines)
}

fn classify_budget(f: &Flags, base: ClassifyBudget) -> ClassifyBudget {
    ClassifyBudget {
        transient: f.iters.unwrap_or(base.transient),
        q_max: f.qmax.unwrap_or(base.q_max),
        ..base
    }
}

fn echo_budget(echo: &mut Echo, b: &ClassifyBudget) {
    echo.add("iters", b.transient);
    echo.add("qmax", b.q_max);
    echo.add("tol", b.tol);
}

fn classification_json(p: &Parameters, c: &Classification) -> Value {
    let rotation = match c.verdict {
        Verdict::SubcriticalLocked { p, q } => json!({"p": p, "q": q}),
        _ => Value::Null,
    };
    json!({
        "alpha": p.alpha(),
        "b": p.b(),
        "verdict": c.verdict.name(),
        "rotation": rotation,
        "fates": c.fates.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>(),
        "cycles": c.cycles.iter().map(cycle_json).collect::<Vec<_>>(),
        "budget_used": c.budget_used,
    })
}

fn cmd_classify(f: &Flags) -> Outcome {
    let p = params(f)?;
    let budget = classify_budget(f, ClassifyBudget::default());
    let mut echo = Echo::new("classify");
    echo.add("alpha", p.alpha());
    echo.add("b", p.b());
    echo_budget(&mut echo, &budget);
    echo.print();
    let c = classify_parameter(&p, &budget);
    emit(&f.out, &[classification_json(&p, &c).to_string()])
}

fn cmd_search(f: &Flags) -> Outcome {
    let p = params(f)?;
    let eps = f.eps.unwrap_or(0.05);
    let seed = f.seed.unwrap_or(0);
    let samples = 200;
    let budget = classify_budget(f, ClassifyBudget::default());
    let mut echo = Echo::new("search");
    echo.add("alpha", p.alpha());
    echo.add("b", p.b());
    echo.add("eps", eps);
    echo.add("seed", seed);
    echo.add("samples", samples);
    echo_budget(&mut echo, &budget);
    echo.print();
    let r = search_nearby(&p, eps, samples, seed, &budget, |c| c.verdict == Verdict::Hyperbolic)?;
    let v = json!({
        "alpha": p.alpha(),
        "b": p.b(),
        "found": r.found.map(|q| json!({"alpha": q.alpha(), "b": q.b()})),
        "samples_tried": r.samples_tried,
        "distance": r.distance,
    });
    emit(&f.out, &[v.to_string()])?;
    if r.found.is_none() {
        return Err(Error::SearchFailed(format!(
            "no hyperbolic parameter within {eps} of {p} in {samples} samples"
        ))
        .into());
    }
    Ok(())
}

fn cmd_relation(f: &Flags) -> Outcome {
    // α comes from the bracket; --alpha is accepted but not needed.
    let p = checked(f.alpha.unwrap_or(0.0), require(f.b, "b")?)?;
    let bracket = f.bracket.unwrap_or((-PI, PI));
    let rel = CriticalRelation {
        which: f.critical.unwrap_or(Branch::First).into(),
        n: f.n.unwrap_or(1),
    };
    let mut echo = Echo::new("relation");
    echo.add("b", p.b());
    echo.add("bracket", format!("{},{}", bracket.0, bracket.1));
    echo.add("critical", format!("{:?}", rel.which));
    echo.add("n", rel.n);
    let second = match (f.critical2, f.n2) {
        (None, None) => None,
        (c, n) => Some(CriticalRelation {
            which: c.unwrap_or(Branch::Second).into(),
            n: require(n, "n2")?,
        }),
    };
    if let Some(r2) = second {
        echo.add("critical2", format!("{:?}", r2.which));
        echo.add("n2", r2.n);
    }
    echo.print();
    let hit = find_critical_relation(&p, rel, bracket)?;
    let mut lines = vec![json!({
        "alpha": hit.params.alpha(),
        "b": hit.params.b(),
        "residual": hit.residual,
        "cycle": cycle_json(&hit.cycle),
    })
    .to_string()];
    if let Some(r2) = second {
        let two = find_second_relation(&hit.params, rel, r2, &ContinuationSettings::default())?;
        lines.push(
            json!({
                "alpha": two.params.alpha(),
                "b": two.params.b(),
                "residual1": two.residual1,
                "residual2": two.residual2,
                "steps": two.steps,
                "verdict": two.classification.verdict.name(),
            })
            .to_string(),
        );
    }
    emit(&f.out, &lines)
}

fn require_out(f: &Flags) -> Result<&Path, Failure> {
    f.out
        .as_deref()
        .ok_or_else(|| Failure::Usage("--out is required for this command".into()))
}

fn cmd_render_param(f: &Flags) -> Outcome {
    let out = require_out(f)?;
    let region = f.region.unwrap_or(Region::FULL_PARAMETER_PLANE);
    let (w, h) = (f.width.unwrap_or(400), f.height.unwrap_or(400));
    let budget = classify_budget(f, RENDER_BUDGET);
    let mut echo = Echo::new("render-param");
    echo.add("region", region);
    echo.add("width", w);
    echo.add("height", h);
    echo_budget(&mut echo, &budget);
    echo.add("out", out.display());
    echo.print();
    let img = render_parameter_plane(&region, w, h, &budget)?;
    write_pgm(&img, out)?;
    Ok(())
}

fn cmd_render_complex(f: &Flags) -> Outcome {
    let out = require_out(f)?;
    let p = checked(f.alpha.unwrap_or(0.0), f.b.unwrap_or(1.0))?;
    let region = match f.region {
        Some(r) => r,
        None => Region::new(-3.0, 3.0, -3.0, 3.0)?,
    };
    let (w, h) = (f.width.unwrap_or(200), f.height.unwrap_or(200));
    let budget = FateBudget {
        max_iter: f.iters.unwrap_or(DEFAULT_MAX_ITER),
        escape_radius: DEFAULT_ESCAPE_RADIUS,
    };
    let mut echo = Echo::new("render-complex");
    echo.add("alpha", p.alpha());
    echo.add("b", p.b());
    echo.add("region", region);
    echo.add("width", w);
    echo.add("height", h);
    echo.add("iters", budget.max_iter);
    echo.add("escape_radius", budget.escape_radius);
    echo.add("out", out.display());
    echo.print();
    let img = render_dynamical_plane(&p, &region, w, h, &budget)?;
    write_pgm(&img, out)?;
    Ok(())
}

fn cmd_dataset(f: &Flags) -> Outcome {
    let out = require_out(f)?;
    let p = checked(
        f.alpha.unwrap_or(dataset::DEFAULT_ALPHA),
        f.b.unwrap_or(dataset::DEFAULT_B),
    )?;
    let seed = f.seed.unwrap_or(dataset::DEFAULT_SEED);
    let lengths = match f.iters {
        Some(n) => [n; 3],
        None => dataset::DEFAULT_LENGTHS,
    };
    let mut echo = Echo::new("dataset");
    echo.add("alpha", p.alpha());
    echo.add("b", p.b());
    echo.add(
        "offsets",
        format!("{},{}", dataset::DEFAULT_OFFSETS.0, dataset::DEFAULT_OFFSETS.1),
    );
    echo.add("lengths", format!("{},{},{}", lengths[0], lengths[1], lengths[2]));
    echo.add("seed", seed);
    echo.add("out", out.display());
    echo.print();
    let cycle = default_cycle(&p)?;
    let d = generate_orbits_dataset(&p, &cycle, dataset::DEFAULT_OFFSETS, lengths, seed)?;
    dataset::write_csv(&d, out)?;
    Ok(())
}

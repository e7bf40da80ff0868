use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpgraph::generate::{generate_hypercube, generate_path, HypercubeSpec, QueryRule, SeedRule};
use dpgraph::io::{
    parse_instance, parse_mechanism, serialize_instance, serialize_mechanism, Instance,
    MechanismFile,
};
use dpgraph::oracle::{
    enumerate_strongest_bounds_from, fixed_point_extension, DEFAULT_ENUMERATION_CAP,
};
use dpgraph::path::{optimal_path_closed_form, optimal_path_recurrence};
use dpgraph::propagate::strongest_bounds_from_naive;
use dpgraph::{
    boundary_set, extend_mechanism, strongest_bounds_from, verify_dp, verify_optimal, EpsilonSeq,
    Error, ExtendOptions, Label, Probability, Schedule, DEFAULT_TOLERANCE,
};

const EXIT_PARSE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NO_EXTENSION: u8 = 4;
const EXIT_VERIFICATION: u8 = 5;
const EXIT_INTERNAL: u8 = 10;

/// Heterogeneous differential privacy on dataset graphs.
#[derive(Parser)]
#[command(name = "dpgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal private extension of the instance's partial mechanism.
    Extend {
        #[arg(short, long)]
        input: PathBuf,
        /// Mechanism file to write; stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        tol: Tolerance,
        /// Use the linear-scan schedule instead of the priority queue.
        #[arg(long)]
        naive: bool,
    },
    /// Check every edge inequality of a mechanism; violations as CSV.
    Check {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        mechanism: PathBuf,
        #[command(flatten)]
        tol: Tolerance,
    },
    /// Print the boundary set, one id per line.
    Boundary {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Strongest bounds induced from one vertex, as CSV.
    Bounds {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        naive: bool,
    },
    /// Optimal path mechanism, closed form next to the recurrence, as CSV.
    Path {
        #[arg(long)]
        alpha: f64,
        /// Comma-separated edge budgets.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Vec<f64>,
    },
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Cross-check the extension and propagation against brute-force oracles.
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        /// Largest vertex count for path enumeration.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
        #[command(flatten)]
        tol: Tolerance,
    },
}

#[derive(Args)]
struct Tolerance {
    #[arg(long = "tolerance", default_value_t = DEFAULT_TOLERANCE)]
    value: f64,
}

#[derive(Subcommand)]
enum GenKind {
    /// Vertices {1,2}^n, edges between strings differing in one coordinate,
    /// labelled by majority.
    Hypercube {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Comma-separated budget per coordinate.
        #[arg(long, value_delimiter = ',')]
        coordinate_eps: Option<Vec<f64>>,
        /// Budget for one edge as `U,V,EPS`; repeatable.
        #[arg(long = "override", value_name = "U,V,EPS")]
        overrides: Vec<String>,
        /// Label for exact ties when n is even.
        #[arg(long)]
        ties: Option<u8>,
        #[arg(long, value_enum, default_value_t = Seeds::Rr)]
        seeds: Seeds,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Path v0 - … - vn seeded at v0, every vertex labelled 1.
    Path {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        /// Comma-separated budgets; a single value is used for every edge.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        eps: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Seeds {
    /// Randomized response at the smallest budget on the boundary.
    Rr,
    None,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Parse(_) => EXIT_PARSE,
            Error::Incompatible(_) | Error::NoDpCompletion(_) => EXIT_NO_EXTENSION,
            _ => EXIT_VALIDATION,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(EXIT_INTERNAL, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_INTERNAL, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Extend {
            input,
            output,
            tol,
            naive,
        } => extend(
            &input,
            output.as_deref(),
            check_tolerance(tol.value)?,
            naive,
        ),
        Command::Check {
            input,
            mechanism,
            tol,
        } => check(&input, &mechanism, check_tolerance(tol.value)?),
        Command::Boundary { input } => boundary(&input),
        Command::Bounds {
            input,
            source,
            alpha,
            naive,
        } => bounds(&input, &source, alpha, naive),
        Command::Path { alpha, eps } => path(alpha, &eps),
        Command::Gen { kind } => gen(kind),
        Command::Oracle { input, cap, tol } => oracle(&input, cap, check_tolerance(tol.value)?),
    }
}

fn check_tolerance(t: f64) -> Result<f64, Failure> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(Failure::new(
            EXIT_VALIDATION,
            format!("tolerance must be a finite non-negative number, got {t}"),
        ))
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn emit(output: Option<&Path>, text: &str) -> Outcome {
    match output {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv_out() -> csv::Writer<io::StdoutLock<'static>> {
    csv::Writer::from_writer(io::stdout().lock())
}

fn extend(input: &Path, output: Option<&Path>, tolerance: f64, naive: bool) -> Outcome {
    let inst = load_instance(input)?;
    let options = ExtendOptions {
        tolerance,
        schedule: if naive {
            Schedule::Naive
        } else {
            Schedule::Heap
        },
    };
    let partial = inst.partial_or_empty();
    let ext = match extend_mechanism(&inst.graph, &inst.query, &partial, &options) {
        Ok(ext) => ext,
        Err(Error::Incompatible(w)) => {
            eprintln!(
                "witness: u={} v={} bound={} actual={}",
                w.u,
                w.v,
                w.bound.get(),
                w.actual.get()
            );
            return Err(Failure::new(
                EXIT_NO_EXTENSION,
                "no epsilon-DP extension exists",
            ));
        }
        Err(e) => return Err(e.into()),
    };
    // the construction is private by design; a failure here is a bug
    if let Err(report) = verify_dp(&inst.graph, &ext.mechanism, tolerance) {
        return Err(Failure::new(
            EXIT_INTERNAL,
            format!("extension failed its own privacy check: {report}"),
        ));
    }
    let file = MechanismFile::from_extension(&inst.graph, &ext, tolerance);
    emit(output, &serialize_mechanism(&file))
}

fn check(input: &Path, mechanism: &Path, tolerance: f64) -> Outcome {
    let inst = load_instance(input)?;
    let mech = parse_mechanism(&read(mechanism)?)?.to_mechanism(&inst.graph)?;
    let mut out = csv_out();
    out.write_record(["u", "v", "inequality", "lhs", "rhs", "slack"])?;
    let result = verify_dp(&inst.graph, &mech, tolerance);
    if let Err(report) = &result {
        for r in &report.violations {
            out.write_record([
                r.u.clone(),
                r.v.clone(),
                r.inequality.tag().to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.slack.to_string(),
            ])?;
        }
    }
    out.flush()?;
    match result {
        Ok(()) => Ok(()),
        Err(report) => Err(Failure::new(
            EXIT_VERIFICATION,
            format!("{} violated inequalities", report.violations.len()),
        )),
    }
}

fn boundary(input: &Path) -> Outcome {
    let inst = load_instance(input)?;
    let mut text = String::new();
    for name in boundary_set(&inst.graph, &inst.query).names(&inst.graph) {
        text.push_str(name);
        text.push('\n');
    }
    emit(None, &text)
}

fn bounds(input: &Path, source: &str, alpha: f64, naive: bool) -> Outcome {
    let inst = load_instance(input)?;
    let g = &inst.graph;
    let s = g.index_of(source).map_err(Failure::from)?;
    let alpha = Probability::new(alpha)?;
    let map = if naive {
        strongest_bounds_from_naive(g, s, alpha)?
    } else {
        strongest_bounds_from(g, s, alpha)?
    };
    let mut out = csv_out();
    out.write_record(["vertex", "bound", "predecessor"])?;
    for v in 0..g.len() {
        let pred = match map.predecessor[v] {
            p if p == v => "",
            p => g.name(p),
        };
        out.write_record([g.name(v), &map.bounds[v].get().to_string(), pred])?;
    }
    out.flush()?;
    Ok(())
}

fn path(alpha: f64, eps: &[f64]) -> Outcome {
    let alpha = Probability::new(alpha)?;
    let seq = EpsilonSeq::new(eps)?;
    let closed = optimal_path_closed_form(alpha, &seq)?;
    let rec = optimal_path_recurrence(alpha, &seq);
    let mut out = csv_out();
    out.write_record(["index", "epsilon", "closed_form", "recurrence", "regime"])?;
    for i in 0..closed.values.len() {
        let (epsilon, regime) = if i == 0 {
            (String::new(), "")
        } else {
            (eps[i - 1].to_string(), closed.regime(i - 1).as_str())
        };
        out.write_record([
            i.to_string(),
            epsilon,
            closed.values[i].get().to_string(),
            rec.values[i].get().to_string(),
            regime.to_string(),
        ])?;
    }
    out.flush()?;
    match closed.tau {
        Some(t) => eprintln!("tau={t}"),
        None => eprintln!("tau=none"),
    }
    Ok(())
}

fn parse_override(text: &str) -> Result<(String, String, f64), Failure> {
    let bad = || {
        Failure::new(
            EXIT_VALIDATION,
            format!("override must look like U,V,EPS, got {text:?}"),
        )
    };
    let parts: Vec<&str> = text.split(',').collect();
    let [u, v, e] = parts.as_slice() else {
        return Err(bad());
    };
    let e: f64 = e.trim().parse().map_err(|_| bad())?;
    Ok((u.trim().to_string(), v.trim().to_string(), e))
}

fn gen(kind: GenKind) -> Outcome {
    match kind {
        GenKind::Hypercube {
            n,
            eps,
            coordinate_eps,
            overrides,
            ties,
            seeds,
            output,
        } => {
            let mut spec = HypercubeSpec::new(n, eps);
            spec.coordinate_eps = coordinate_eps;
            spec.overrides = overrides
                .iter()
                .map(|o| parse_override(o))
                .collect::<Result<_, _>>()?;
            spec.query_rule = match ties {
                None => QueryRule::Majority,
                Some(l) => QueryRule::MajorityTiesTo(Label::from_int(l.into())?),
            };
            spec.seeds = match seeds {
                Seeds::Rr => SeedRule::RandomizedResponse,
                Seeds::None => SeedRule::None,
            };
            let inst = generate_hypercube(&spec)?;
            emit(output.as_deref(), &serialize_instance(&inst))
        }
        GenKind::Path {
            n,
            alpha,
            eps,
            output,
        } => {
            let eps = if eps.len() == 1 { vec![eps[0]; n] } else { eps };
            let inst = generate_path(n, alpha, &eps)?;
            emit(output.as_deref(), &serialize_instance(&inst))
        }
    }
}

fn oracle(input: &Path, cap: usize, tolerance: f64) -> Outcome {
    let inst = load_instance(input)?;
    let g = &inst.graph;
    let partial = inst.partial_or_empty();
    let mut out = csv_out();
    out.write_record(["check", "status", "detail"])?;
    let mut failures = 0;
    let mut report = |out: &mut csv::Writer<_>, check: &str, ok: bool, detail: String| {
        if !ok {
            failures += 1;
        }
        out.write_record([check, if ok { "ok" } else { "mismatch" }, &detail])
    };

    let options = ExtendOptions {
        tolerance,
        ..ExtendOptions::default()
    };
    let ext = extend_mechanism(g, &inst.query, &partial, &options);
    let reference = fixed_point_extension(g, &inst.query, &partial, tolerance);
    match (&ext, &reference) {
        (Ok(ext), Ok(fp)) => {
            let worst = (0..g.len())
                .map(|v| (ext.mechanism.get(v).get() - fp.mechanism.get(v).get()).abs())
                .fold(0.0, f64::max);
            report(
                &mut out,
                "fixed_point",
                worst <= tolerance,
                format!("max deviation {worst:e} after {} sweeps", fp.sweeps),
            )?;
            let optimal = verify_optimal(g, &inst.query, &partial, &ext.mechanism, 1e-6, tolerance);
            let detail = match &optimal {
                Ok(()) => "no free vertex can improve".to_string(),
                Err(e) => e.to_string(),
            };
            report(&mut out, "optimality", optimal.is_ok(), detail)?;
        }
        (Err(a), Err(b)) if a.is_no_extension() && b.is_no_extension() => {
            report(
                &mut out,
                "fixed_point",
                true,
                "both refuse the instance".into(),
            )?;
        }
        (Err(e), _) if !e.is_no_extension() => return Err(e.clone().into()),
        (a, b) => {
            let describe = |r: Result<(), &Error>| match r {
                Ok(()) => "extends".to_string(),
                Err(e) => e.to_string(),
            };
            let detail = format!(
                "extension: {}; reference: {}",
                describe(a.as_ref().map(|_| ())),
                describe(b.as_ref().map(|_| ()))
            );
            report(&mut out, "fixed_point", false, detail)?;
        }
    }

    if g.len() <= cap {
        for (u, pu) in partial.seeds() {
            let fast = strongest_bounds_from(g, u, pu)?;
            let slow = enumerate_strongest_bounds_from(g, u, pu, cap)?;
            let worst = (0..g.len())
                .map(|v| (fast.bounds[v].get() - slow[v].bound.get()).abs())
                .fold(0.0, f64::max);
            report(
                &mut out,
                &format!("bounds_from:{}", g.name(u)),
                worst <= tolerance,
                format!("max deviation {worst:e}"),
            )?;
        }
    } else {
        report(
            &mut out,
            "bounds_from",
            true,
            format!("skipped: {} vertices exceed the cap of {cap}", g.len()),
        )?;
    }
    out.flush()?;
    if failures > 0 {
        return Err(Failure::new(
            EXIT_VERIFICATION,
            format!("{failures} oracle checks disagree"),
        ));
    }
    Ok(())
}

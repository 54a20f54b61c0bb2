//! Command-line front end for `bmquad`.
//!
//! `q` is entered as `"a,b,c"` for the diagonal form `ax² + by² + cz²`, or
//! `"a,b,c;d,e,f"` to add the cross terms `2d·xy + 2e·xz + 2f·yz`. The form
//! `−9x² + 2xy + 7y² + 2z²` is `"-9,7,2;1,0,0"` and `x² − 2y² + 64z²` is
//! `"1,-2,64"`. A full Gram matrix `"[[a,b],[b,c]]"` is also accepted.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use bmquad::arith::hilbert_symbol;
use bmquad::localsolve::SolubilityMode;
use bmquad::poly::{factor_over_q, parse_constant, parse_poly};
use bmquad::quadform::parse_quadratic_form;
use bmquad::search::search_integral_points;
use bmquad::{Error, Place};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use report::{analyze, parse_places, AnalysisInput, AnalysisReport, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;

/// The two worked examples reproduced by `reproduce-examples`:
/// name, q, p, S, central places.
pub const EXAMPLES: [(&str, &str, &str, &str, &str); 2] = [
    ("example1", "-9,7,2;1,0,0", "(2t^2-1)^2", "real", "real,2"),
    ("example2", "1,-2,64", "(2t^2+3)^2", "real", "real,2"),
];

/// Search bound used for the committed example reports.
pub const EXAMPLE_BOUND: u64 = 200;

pub fn default_golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

#[derive(Parser, Debug)]
#[command(name = "bmquad", version, about = "Integral points and Brauer-Manin obstructions on q(x) = p(t)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Any,
    Primitive,
}

impl From<ModeArg> for SolubilityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Any => SolubilityMode::Any,
            ModeArg::Primitive => SolubilityMode::Primitive,
        }
    }
}

#[derive(Args, Debug)]
pub struct Surface {
    /// Quadratic form, e.g. "1,-2,64" or "-9,7,2;1,0,0".
    #[arg(long = "q", allow_hyphen_values = true)]
    pub q: String,
    /// Polynomial in t, e.g. "(2t^2+3)^2".
    #[arg(long = "p", allow_hyphen_values = true)]
    pub p: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Full analysis as a JSON report.
    Analyze {
        #[command(flatten)]
        surface: Surface,
        /// Places of S, e.g. "real,2,5".
        #[arg(long = "S", default_value = "real")]
        s: String,
        #[arg(long, default_value_t = report::DEFAULT_BOUND)]
        bound: u64,
        /// Search mode; both modes when omitted.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Places for the central-point analysis.
        #[arg(long = "central-places", default_value = "real")]
        central_places: String,
        /// Accepted for uniformity; the report is always JSON.
        #[arg(long)]
        json: bool,
    },
    /// Re-runs the worked examples and diffs them against the committed reports.
    ReproduceExamples {
        #[arg(long)]
        json: bool,
        #[arg(long = "golden-dir")]
        golden_dir: Option<PathBuf>,
        /// Rewrite the committed reports instead of comparing.
        #[arg(long)]
        update: bool,
    },
    /// Hilbert symbol (a, b)_v as 0 or 1/2.
    Hilbert {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        place: String,
        #[arg(long)]
        json: bool,
    },
    /// Factorization over Q.
    Factor {
        #[arg(allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        json: bool,
    },
    /// Bounded integral point search, one JSON line per point.
    Search {
        #[command(flatten)]
        surface: Surface,
        #[arg(long, default_value_t = report::DEFAULT_BOUND)]
        bound: u64,
        #[arg(long, value_enum, default_value = "any")]
        mode: ModeArg,
    },
    /// Central-point analysis at the given places.
    Central {
        #[command(flatten)]
        surface: Surface,
        #[arg(long = "central-places", default_value = "real")]
        central_places: String,
        #[arg(long)]
        json: bool,
    },
}

fn exit_code(e: &Error) -> i32 {
    if e.is_hypothesis_error() {
        EXIT_HYPOTHESIS
    } else {
        EXIT_INPUT
    }
}

/// A failure carrying its exit code.
struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(exit_code(&e), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

fn input_error(e: Error) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

pub fn build_input(
    q: &str,
    p: &str,
    s: &str,
    bound: u64,
    mode: Option<SolubilityMode>,
    central: &str,
) -> Result<AnalysisInput, Error> {
    Ok(AnalysisInput {
        q_text: q.to_string(),
        p_text: p.to_string(),
        q: parse_quadratic_form(q)?,
        p: parse_poly(p)?,
        s: parse_places(s)?,
        bound,
        mode,
        central_places: parse_places(central)?,
    })
}

/// The report of one worked example, rendered as committed.
pub fn example_report(index: usize) -> Result<String, Error> {
    let (_, q, p, s, central) = EXAMPLES[index];
    let input = build_input(q, p, s, EXAMPLE_BOUND, None, central)?;
    Ok(to_json(&analyze(&input)?) + "\n")
}

#[derive(Serialize)]
struct ExampleOutcome {
    name: &'static str,
    status: &'static str,
    diff: Option<String>,
}

fn reproduce(out: &mut dyn Write, json: bool, dir: &Path, update: bool) -> Result<i32, Failure> {
    let mut outcomes = Vec::new();
    for (i, (name, ..)) in EXAMPLES.iter().enumerate() {
        let actual = example_report(i)?;
        let path = dir.join(format!("{name}.json"));
        if update {
            std::fs::write(&path, &actual)?;
        }
        let expected = std::fs::read_to_string(&path).unwrap_or_default();
        let (status, diff) = if expected == actual {
            ("PASS", None)
        } else {
            let d = similar::TextDiff::from_lines(&expected, &actual)
                .unified_diff()
                .header(&path.display().to_string(), "actual")
                .to_string();
            ("FAIL", Some(d))
        };
        outcomes.push(ExampleOutcome { name, status, diff });
    }
    if json {
        writeln!(out, "{}", to_json(&outcomes))?;
    } else {
        for o in &outcomes {
            writeln!(out, "{}: {}", o.name, o.status)?;
            if let Some(d) = &o.diff {
                write!(out, "{d}")?;
            }
        }
    }
    Ok(if outcomes.iter().all(|o| o.status == "PASS") { EXIT_OK } else { EXIT_INPUT })
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match cli.command {
        Command::Analyze { surface, s, bound, mode, central_places, json: _ } => {
            let input = build_input(&surface.q, &surface.p, &s, bound, mode.map(Into::into), &central_places)
                .map_err(input_error)?;
            let report = analyze(&input)?;
            writeln!(out, "{}", to_json(&report))?;
        }
        Command::ReproduceExamples { json, golden_dir, update } => {
            let dir = golden_dir.unwrap_or_else(default_golden_dir);
            return reproduce(out, json, &dir, update);
        }
        Command::Hilbert { a, b, place, json } => {
            let a = parse_constant(&a).map_err(input_error)?;
            let b = parse_constant(&b).map_err(input_error)?;
            let v: Place = place.parse().map_err(input_error)?;
            let h = hilbert_symbol(&a, &b, &v).map_err(input_error)?;
            if json {
                writeln!(out, "{}", serde_json::json!({ "place": v, "value": h }))?;
            } else {
                writeln!(out, "{h}")?;
            }
        }
        Command::Factor { poly, json } => {
            let p = parse_poly(&poly).map_err(input_error)?;
            if p.is_zero() {
                return Err(Failure(EXIT_INPUT, "cannot factor the zero polynomial".into()));
            }
            let f = factor_over_q(&p);
            if json {
                let factors: Vec<_> = f
                    .factors
                    .iter()
                    .map(|(g, e)| serde_json::json!({ "factor": g.to_string(), "multiplicity": e }))
                    .collect();
                let c = bmquad::arith::format_rational(&f.c);
                writeln!(out, "{}", serde_json::json!({ "c": c, "factors": factors }))?;
            } else {
                writeln!(out, "{}", report::factorization_text(&f.c, &f.factors))?;
            }
        }
        Command::Search { surface, bound, mode } => {
            let q = parse_quadratic_form(&surface.q).map_err(input_error)?;
            let p = parse_poly(&surface.p).map_err(input_error)?;
            let rep = search_integral_points(&q, &p, bound, mode.into())?;
            for pt in &rep.points {
                let (x, t) = pt.split_at(pt.len() - 1);
                writeln!(out, "{}", serde_json::json!({ "x": x, "t": t[0] }))?;
            }
            let summary = serde_json::json!({
                "bound": bound,
                "mode": rep.mode,
                "count": rep.points.len(),
                "fibre_exhaustive": rep.fibre_exhaustive,
                "statement": rep.statement,
            });
            writeln!(out, "{summary}")?;
        }
        Command::Central { surface, central_places, json } => {
            let input = build_input(&surface.q, &surface.p, "real", 1, None, &central_places).map_err(input_error)?;
            let mut reports = Vec::new();
            for v in &input.central_places {
                reports.push(bmquad::central::central_defect(&input.q, &input.p, v)?);
            }
            if json {
                writeln!(out, "{}", to_json(&serde_json::json!({ "central_points": reports })))?;
            } else {
                for r in &reports {
                    writeln!(out, "{}: defect {}", r.place, r.defect)?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

/// Runs the command line `args` (including the program name), writing the
/// result to `out` and diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

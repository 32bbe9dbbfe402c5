//! Command-line front end. Every subcommand parses its arguments, calls one
//! library routine and prints JSON (or DOT / ASCII where noted).
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerically ambiguous
//! decision.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use strata_core::congruence::classify::classify_congruence_small;
use strata_core::congruence::graphs::{congruence_graph, star_graph_2x2, ParametricGraph};
use strata_core::congruence::templates::{congruence_template, star_template};
use strata_core::lab::{
    arrow_realization_search, numeric_weyr_detailed, random_survey_with, PerturbationKind, SurveyOptions,
};
use strata_core::linalg::{CMat, DEFAULT_TOL};
use strata_core::matrix_io::{matrix_to_json, read_matrix_file};
use strata_core::order::{build_bundle_graph, build_class_graph, GraphKind, LabelPattern};
use strata_core::reduction::{reduce_to_miniversal, ReductionOptions};
use strata_core::structure::{orbit_codim, parse_complex, parse_compact, JordanType};
use strata_core::tangent::{codim_numeric, Action};
use strata_core::template::{arnold_template, DeformationTemplate};
use strata_core::StrataError;

/// Environment variable overriding the default rank tolerance.
pub const TOL_ENV: &str = "STRATA_TOL";

/// Significant digits of every float in JSON output.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_AMBIGUOUS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "strata", version, about = "Perturbation strata of square complex matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Weyr characteristic of a matrix at one eigenvalue.
    Weyr(WeyrArgs),
    /// Codimension of the orbit under similarity, congruence or *congruence.
    Codim(CodimArgs),
    /// Closure graph of classes or bundles.
    Graph(GraphArgs),
    /// Miniversal deformation template.
    Template(TemplateArgs),
    /// Reduces J + E to the miniversal form.
    Reduce(ReduceArgs),
    /// Congruence canonical form of a matrix of order at most 3.
    Classify(ClassifyArgs),
    /// Random perturbation survey of a Jordan type.
    Survey(SurveyArgs),
    /// Sparse perturbation realising a nilpotent closure arrow.
    Witness(WitnessArgs),
}

#[derive(Debug, Args)]
struct WeyrArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value = "0")]
    lambda: String,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ActionArg {
    Sim,
    Congr,
    Star,
}

impl ActionArg {
    fn action(self) -> Action {
        match self {
            ActionArg::Sim => Action::Similarity,
            ActionArg::Congr => Action::Congruence,
            ActionArg::Star => Action::StarCongruence,
        }
    }
}

#[derive(Debug, Args)]
struct CodimArgs {
    #[arg(long, value_enum)]
    action: ActionArg,
    /// Matrix file; alternatively `--jordan`.
    #[arg(long, conflicts_with = "jordan", required_unless_present = "jordan")]
    matrix: Option<PathBuf>,
    /// Jordan type in compact notation with numeric labels.
    #[arg(long)]
    jordan: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphSpace {
    Sim,
    Bundle,
    Congr,
    Star,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum GraphFormat {
    #[default]
    Json,
    Dot,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[arg(value_enum)]
    space: GraphSpace,
    #[arg(long)]
    n: usize,
    /// Single eigenvalue 0 (similarity classes only).
    #[arg(long)]
    nilpotent: bool,
    /// Bundle graph instead of the class graph (congruence only).
    #[arg(long)]
    bundles: bool,
    #[arg(long, value_enum, default_value_t)]
    format: GraphFormat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TemplateSpace {
    Sim,
    Congr,
    Star,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum TemplateFormat {
    #[default]
    Ascii,
    Json,
}

#[derive(Debug, Args)]
struct TemplateArgs {
    #[arg(value_enum)]
    space: TemplateSpace,
    /// Jordan type (similarity).
    #[arg(long)]
    jordan: Option<String>,
    /// Family key of the congruence or *congruence graph.
    #[arg(long)]
    family: Option<String>,
    /// Family parameters, repeatable.
    #[arg(long = "param", allow_hyphen_values = true)]
    params: Vec<String>,
    /// Matrix to classify first (congruence).
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Order of the congruence family.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t)]
    format: TemplateFormat,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[arg(long)]
    jordan: String,
    #[arg(long)]
    pert: PathBuf,
    /// Target size of the entries that must vanish.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum KindArg {
    #[default]
    Dense,
    Upper,
}

#[derive(Debug, Args)]
struct SurveyArgs {
    #[arg(long)]
    jordan: String,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    kind: KindArg,
    /// Cluster radius; defaults to max(10·ε^(1/n), 1e-6).
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct WitnessArgs {
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    #[arg(long)]
    tol: Option<f64>,
}

/// Failure of a subcommand.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Ambiguous(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Ambiguous(_) => EXIT_AMBIGUOUS,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Ambiguous(m) => write!(f, "ambiguous: {m}"),
        }
    }
}

impl From<StrataError> for CliError {
    fn from(e: StrataError) -> Self {
        match e {
            StrataError::Ambiguous(_) => CliError::Ambiguous(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the tool on `argv` (program name first), printing to stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Same as [`run`] with explicit output streams.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.code()
        }
    }
}

fn execute(command: Command) -> CliResult<String> {
    match command {
        Command::Weyr(a) => weyr(a),
        Command::Codim(a) => codim(a),
        Command::Graph(a) => graph(a),
        Command::Template(a) => template(a),
        Command::Reduce(a) => reduce(a),
        Command::Classify(a) => classify(a),
        Command::Survey(a) => survey(a),
        Command::Witness(a) => witness(a),
    }
}

/// Rank tolerance: explicit flag, then `STRATA_TOL`, then the library default.
fn rank_tol(flag: Option<f64>) -> CliResult<f64> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}={s} is not a number")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Usage(format!("tolerance {tol} must lie in (0, 1)")));
    }
    Ok(tol)
}

fn complex_arg(text: &str) -> CliResult<Complex64> {
    parse_complex(text).ok_or_else(|| CliError::Usage(format!("cannot parse complex number {text:?}")))
}

fn jordan_arg(text: &str) -> CliResult<JordanType> {
    parse_compact(text).map_err(|e| CliError::Usage(format!("Jordan type {text:?}: {e}")))
}

fn matrix_arg(path: &Path) -> CliResult<CMat> {
    Ok(read_matrix_file(path)?)
}

/// Rounds `x` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Applies [`round_significant`] to every float in a JSON value.
pub fn stabilize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            let x = round_significant(n.as_f64().unwrap_or(0.0));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(stabilize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, stabilize(v))).collect()),
        other => other,
    }
}

/// Pretty-printed JSON with stable float formatting.
pub fn render_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&stabilize(v)).expect("JSON values serialise");
    s.push('\n');
    s
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn weyr(a: WeyrArgs) -> CliResult<String> {
    let tol = rank_tol(a.tol)?;
    let m = matrix_arg(&a.matrix)?;
    let lambda = complex_arg(&a.lambda)?;
    let est = numeric_weyr_detailed(&m, lambda, tol)?;
    if est.ambiguous {
        return Err(CliError::Ambiguous(format!("rank sequence {:?} has a singular value near the threshold", est.ranks)));
    }
    let segre = est.weyr.segre().map(|p| p.parts().to_vec());
    Ok(render_json(json!({
        "lambda": complex_json(lambda),
        "weyr": est.weyr.values(),
        "segre": segre,
        "ranks": est.ranks,
    })))
}

fn codim(a: CodimArgs) -> CliResult<String> {
    let tol = rank_tol(a.tol)?;
    let (m, formula) = match (&a.matrix, &a.jordan) {
        (Some(path), _) => (matrix_arg(path)?, None),
        (None, Some(text)) => {
            let t = jordan_arg(text)?;
            let formula = matches!(a.action, ActionArg::Sim).then(|| orbit_codim(&t));
            (t.matrix()?, formula)
        }
        (None, None) => return Err(CliError::Usage("codim needs --matrix or --jordan".into())),
    };
    let action = a.action.action();
    let c = codim_numeric(action, &m, tol);
    if c.rank.ambiguous {
        return Err(CliError::Ambiguous(format!(
            "tangent rank {} has singular values near the threshold (kept {:.3e}, dropped {:.3e})",
            c.rank.rank, c.rank.kept_min_ratio, c.rank.dropped_max_ratio
        )));
    }
    let mut v = json!({
        "action": action.name(),
        "n": m.nrows(),
        "codim": c.codim,
        "real": matches!(action, Action::StarCongruence),
    });
    if let Some(f) = formula {
        v["formula"] = json!(f);
    }
    Ok(render_json(v))
}

fn graph(a: GraphArgs) -> CliResult<String> {
    if a.nilpotent && !matches!(a.space, GraphSpace::Sim) {
        return Err(CliError::Usage("--nilpotent applies to similarity class graphs only".into()));
    }
    if a.bundles && !matches!(a.space, GraphSpace::Congr) {
        return Err(CliError::Usage("--bundles applies to congruence graphs only".into()));
    }
    let closure = match a.space {
        GraphSpace::Sim => {
            let labels = if a.nilpotent { LabelPattern::nilpotent(a.n) } else { LabelPattern::AllSymbolic };
            Some(build_class_graph(a.n, &labels)?)
        }
        GraphSpace::Bundle => Some(build_bundle_graph(a.n)?),
        _ => None,
    };
    if let Some(g) = closure {
        return Ok(match a.format {
            GraphFormat::Json => render_json(g.to_json()),
            GraphFormat::Dot => g.to_dot(),
        });
    }
    let g: ParametricGraph = match a.space {
        GraphSpace::Congr => {
            let kind = if a.bundles { GraphKind::Bundles } else { GraphKind::Classes };
            congruence_graph(a.n, kind)?
        }
        _ => {
            if a.n != 2 {
                return Err(StrataError::OutOfBounds { n: a.n, min: 2, max: 2 }.into());
            }
            star_graph_2x2()
        }
    };
    Ok(match a.format {
        GraphFormat::Json => render_json(g.to_json()),
        GraphFormat::Dot => g.to_dot(),
    })
}

fn family_params(params: &[String]) -> CliResult<Vec<Complex64>> {
    params.iter().map(|p| complex_arg(p)).collect()
}

fn template(a: TemplateArgs) -> CliResult<String> {
    let (tmpl, source): (DeformationTemplate, Value) = match a.space {
        TemplateSpace::Sim => {
            let text = a.jordan.as_deref().ok_or_else(|| CliError::Usage("template sim needs --jordan".into()))?;
            let t = jordan_arg(text)?;
            (arnold_template(&t), json!(t.to_compact()))
        }
        TemplateSpace::Congr => {
            let form = if let Some(path) = &a.matrix {
                classify_congruence_small(&matrix_arg(path)?, rank_tol(a.tol)?)?
            } else {
                let key = a
                    .family
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("template congr needs --family or --matrix".into()))?;
                let n = a.n.ok_or_else(|| CliError::Usage("template congr --family needs --n".into()))?;
                let g = congruence_graph(n, GraphKind::Classes)?;
                g.congruence_form(&g.instance_by_key(key, &family_params(&a.params)?)?)?
            };
            (congruence_template(&form)?, form.to_json())
        }
        TemplateSpace::Star => {
            let key =
                a.family.as_deref().ok_or_else(|| CliError::Usage("template star needs --family".into()))?;
            let g = star_graph_2x2();
            let form = g.star_form(&g.instance_by_key(key, &family_params(&a.params)?)?)?;
            (star_template(&form)?, form.to_json())
        }
    };
    Ok(match a.format {
        TemplateFormat::Ascii => tmpl.to_ascii(),
        TemplateFormat::Json => {
            let mut v = tmpl.to_json();
            v["source"] = source;
            v["stars"] = json!(tmpl.star_count());
            v["real_parameters"] = json!(tmpl.real_parameter_count());
            render_json(v)
        }
    })
}

fn reduce(a: ReduceArgs) -> CliResult<String> {
    let t = jordan_arg(&a.jordan)?;
    let e = matrix_arg(&a.pert)?;
    let mut opts = ReductionOptions::default();
    if let Some(tol) = a.tol {
        if !(tol > 0.0) {
            return Err(CliError::Usage(format!("tolerance {tol} must be positive")));
        }
        opts.tol = tol;
    }
    let r = reduce_to_miniversal(&t, &e, &opts)?;
    Ok(render_json(json!({
        "S": matrix_to_json(&r.s),
        "D": matrix_to_json(&r.d),
        "residual": r.residual,
        "certificate": r.certificate,
        "s_distance": r.s_distance,
        "pattern_ok": r.pattern_ok,
    })))
}

fn classify(a: ClassifyArgs) -> CliResult<String> {
    let tol = rank_tol(a.tol)?;
    let form = classify_congruence_small(&matrix_arg(&a.matrix)?, tol)?;
    Ok(render_json(json!({"label": form.label(), "blocks": form.to_json()})))
}

fn survey(a: SurveyArgs) -> CliResult<String> {
    let t = jordan_arg(&a.jordan)?;
    if !(a.eps > 0.0) || a.trials == 0 {
        return Err(CliError::Usage("survey needs eps > 0 and at least one trial".into()));
    }
    let kind = match a.kind {
        KindArg::Dense => PerturbationKind::Dense,
        KindArg::Upper => PerturbationKind::StrictlyUpper,
    };
    let opts = SurveyOptions { kind, tol: rank_tol(a.tol)?, radius: a.radius };
    let report = random_survey_with(&t, a.eps, a.trials, a.seed, opts)?;
    Ok(render_json(report.to_json()))
}

fn witness(a: WitnessArgs) -> CliResult<String> {
    let from = jordan_arg(&a.from)?;
    let to = jordan_arg(&a.to)?;
    let search = arrow_realization_search(&from, &to, a.eps, rank_tol(a.tol)?)?;
    Ok(render_json(search.to_json()))
}

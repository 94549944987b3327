//! Command-line front end.
//!
//! Exit codes: 0 success (rule exists), 10 no Gaussian cubature (or a rule
//! that fails verification), 20 input or format error, 30 numerical failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::cubature::{
    complete_moments, flatness_check, multiplication_operators, verify_exactness,
};
use crate::error::{Error, ErrorClass, Result};
use crate::indexing::{dim_homog, dim_total, pair_count, MultiIndex};
use crate::measures::{
    catalog_moments, load_moments, moment_matrix, normalize_probability, write_moments,
    MeasureSpec, MomentSequence,
};
use crate::ortho::{build_orthobasis, ortho_det_oracle};
use crate::pipeline::{
    build_rule, run_existence, CubatureOptions, DEFAULT_COMMUTATION_TOL, DEFAULT_EXISTENCE_TOL,
    DEFAULT_FLATNESS_TOL, DEFAULT_SEED, DEFAULT_WEIGHT_TOL,
};
use crate::qcheck::{build_q, verify_gram_identity, verify_rule_identities, QSign};
use crate::rulefile::{load_rule, store_rule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_CUBATURE: i32 = 10;
pub const EXIT_INPUT: i32 = 20;
pub const EXIT_NUMERICAL: i32 = 30;

/// Default tolerance of `verify` on the relative exactness error.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(
    name = "gauss-cubature",
    version,
    about = "Gaussian cubature existence test and construction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a moment file for a catalog measure.
    Moments {
        #[command(flatten)]
        source: SourceArgs,
        /// Highest moment degree to emit.
        #[arg(long)]
        d_max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the orthonormal basis and check it.
    Ortho {
        #[command(flatten)]
        source: SourceArgs,
        /// Basis degree (defaults to 2m when --m is given).
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Compare P_sigma against the determinant formula, e.g. `2,1`.
        #[arg(long)]
        sigma: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decide whether a Gaussian cubature of degree 2m-1 exists.
    Exists {
        #[command(flatten)]
        source: SourceArgs,
        /// The rule has degree 2m-1 and C(n+m-1, n) nodes.
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        tols: TolArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Construct and verify the rule; `--out` writes the rule file.
    Cubature {
        #[command(flatten)]
        source: SourceArgs,
        /// The rule has degree 2m-1 and C(n+m-1, n) nodes.
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        tols: TolArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Build the certificate polynomial and check its identities.
    Qcheck {
        #[command(flatten)]
        source: SourceArgs,
        /// The rule has degree 2m-1 and C(n+m-1, n) nodes.
        #[arg(long)]
        m: usize,
        /// Use Q = +u^T P_2m instead of the default -u^T P_2m.
        #[arg(long)]
        literal_sign: bool,
        #[command(flatten)]
        tols: TolArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-check a rule file against a moment source.
    Verify {
        /// Rule file written by `cubature --out`.
        #[arg(long)]
        rule: PathBuf,
        #[command(flatten)]
        source: SourceArgs,
        /// Largest allowed relative exactness error.
        #[arg(long, default_value_t = DEFAULT_VERIFY_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Catalog measure: `NAME^n`, `NAME*NAME`, or `symmetrized:0.5`.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Moment file.
    #[arg(long)]
    pub moments: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    /// Relative residual threshold of the existence test.
    #[arg(long, default_value_t = DEFAULT_EXISTENCE_TOL)]
    pub tol: f64,
    /// Largest relative commutator norm of the multiplication matrices.
    #[arg(long, default_value_t = DEFAULT_COMMUTATION_TOL)]
    pub commutation_tol: f64,
    #[arg(long, default_value_t = DEFAULT_FLATNESS_TOL)]
    pub flatness_tol: f64,
    /// Weights must exceed this fraction of the total mass.
    #[arg(long, default_value_t = DEFAULT_WEIGHT_TOL)]
    pub weight_tol: f64,
    /// Seed for the random combination used to split the joint spectrum.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the moment or rule file here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Catalog(MeasureSpec),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    Moments {
        d_max: usize,
    },
    Ortho {
        degree: usize,
        sigma: Option<MultiIndex>,
    },
    Exists,
    Cubature,
    Qcheck {
        sign: QSign,
    },
    Verify {
        rule: PathBuf,
        tol: f64,
    },
}

/// A validated invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub source: Source,
    /// Zero for tasks that take no `m`.
    pub m: usize,
    pub options: CubatureOptions,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig> {
        let defaults = CubatureOptions::default();
        let (task, source, m, options, output) = match cli.command {
            Command::Moments {
                source,
                d_max,
                output,
            } => (Task::Moments { d_max }, source, 0, defaults, output),
            Command::Ortho {
                source,
                degree,
                m,
                sigma,
                output,
            } => {
                let degree = match (degree, m) {
                    (Some(d), _) => d,
                    (None, Some(m)) => 2 * m,
                    (None, None) => {
                        return Err(Error::InvalidArgument("ortho needs --degree or --m".into()))
                    }
                };
                let sigma = sigma.map(|s| s.parse()).transpose()?;
                (
                    Task::Ortho { degree, sigma },
                    source,
                    m.unwrap_or(0),
                    defaults,
                    output,
                )
            }
            Command::Exists {
                source,
                m,
                tols,
                output,
            } => (Task::Exists, source, m, tols.options(), output),
            Command::Cubature {
                source,
                m,
                tols,
                output,
            } => (Task::Cubature, source, m, tols.options(), output),
            Command::Qcheck {
                source,
                m,
                literal_sign,
                tols,
                output,
            } => {
                let sign = if literal_sign {
                    QSign::Literal
                } else {
                    QSign::Negated
                };
                (Task::Qcheck { sign }, source, m, tols.options(), output)
            }
            Command::Verify {
                rule,
                source,
                tol,
                output,
            } => {
                if !(tol.is_finite() && tol > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "tolerance must be positive, got {tol}"
                    )));
                }
                (Task::Verify { rule, tol }, source, 0, defaults, output)
            }
        };
        options.validate()?;
        let needs_m = matches!(task, Task::Exists | Task::Cubature | Task::Qcheck { .. });
        if needs_m && m == 0 {
            return Err(Error::InvalidArgument("--m must be at least 1".into()));
        }
        let source = match (source.catalog, source.moments) {
            (Some(spec), None) => Source::Catalog(spec.parse()?),
            (None, Some(path)) => Source::File(path),
            _ => {
                return Err(Error::InvalidArgument(
                    "exactly one of --catalog and --moments is required".into(),
                ))
            }
        };
        Ok(RunConfig {
            task,
            source,
            m,
            options,
            out: output.out,
            format: output.format,
        })
    }
}

impl TolArgs {
    fn options(&self) -> CubatureOptions {
        CubatureOptions {
            existence_tol: self.tol,
            commutation_tol: self.commutation_tol,
            flatness_tol: self.flatness_tol,
            weight_tol: self.weight_tol,
            seed: self.seed,
        }
    }
}

/// Result of [`run`]: the exit code and the report to print.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
}

/// Ordered key/value report rendered as text or JSON.
#[derive(Default)]
struct Report {
    fields: Vec<(String, Value)>,
}

impl Report {
    fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.push((key.to_string(), value.into()));
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => {
                let map: Map<String, Value> = self.fields.iter().cloned().collect();
                let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("json");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = String::new();
                for (k, v) in &self.fields {
                    match v {
                        Value::Array(items) if items.iter().any(|i| i.is_array()) => {
                            writeln!(s, "{k}:").unwrap();
                            for item in items {
                                writeln!(s, "  {}", text_value(item)).unwrap();
                            }
                        }
                        _ => writeln!(s, "{k}: {}", text_value(v)).unwrap(),
                    }
                }
                s
            }
        }
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(text_value).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

/// JSON has no NaN or infinity; those become strings.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(x.to_string()), Value::Number)
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn points(xs: &[Vec<f64>]) -> Value {
    Value::Array(xs.iter().map(|x| nums(x)).collect())
}

fn load_source(source: &Source, d: usize) -> Result<MomentSequence> {
    match source {
        Source::Catalog(spec) => match spec {
            MeasureSpec::File(p) => load_source(&Source::File(p.clone()), d),
            _ => catalog_moments(spec, spec.dim().unwrap(), d),
        },
        Source::File(path) => {
            let y = load_moments(path)?;
            y.require_degree(d, "requested computation")?;
            y.truncated(d)
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Input => EXIT_INPUT,
        ErrorClass::Numerical => EXIT_NUMERICAL,
    }
}

/// Runs a validated configuration. Never panics on bad input; every error is
/// mapped to its exit code and reported.
pub fn run(config: &RunConfig) -> Outcome {
    match execute(config) {
        Ok((code, report)) => Outcome {
            code,
            report: report.render(config.format),
        },
        Err(e) => error_outcome(&e, config.format),
    }
}

pub fn error_outcome(err: &Error, format: Format) -> Outcome {
    let code = exit_code(err);
    let mut r = Report::default();
    r.put("status", "error");
    r.put("exit_code", code);
    r.put("error", err.to_string());
    Outcome {
        code,
        report: r.render(format),
    }
}

fn execute(cfg: &RunConfig) -> Result<(i32, Report)> {
    let mut r = Report::default();
    r.put("command", task_name(&cfg.task));
    r.put("source", source_name(&cfg.source));
    match &cfg.task {
        Task::Moments { d_max } => {
            let y = load_source(&cfg.source, *d_max)?;
            let mut buf = Vec::new();
            write_moments(&y, &mut buf).expect("writing to memory");
            let text = String::from_utf8(buf).expect("utf8");
            if let Some(path) = &cfg.out {
                std::fs::write(path, &text).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                r.put("status", "ok");
                r.put("n", y.dim());
                r.put("d_max", y.max_degree());
                r.put("count", y.values().len());
                r.put("written", path.display().to_string());
            } else {
                r.put("status", "ok");
                r.put("moment_file", text);
            }
            Ok((EXIT_OK, r))
        }
        Task::Ortho { degree, sigma } => {
            let y = normalize_probability(&load_source(&cfg.source, 2 * degree)?)?;
            let basis = build_orthobasis(&y, *degree)?;
            let m = moment_matrix(&y, *degree)?.matrix;
            let s = basis.matrix();
            let gram = s * m * s.transpose();
            let size = gram.nrows();
            let dev = (gram - nalgebra::DMatrix::<f64>::identity(size, size)).amax();
            r.put("status", "ok");
            r.put("n", y.dim());
            r.put("degree", *degree);
            r.put("basis_size", size);
            r.put("orthonormality_error", num(dev));
            r.put("leading_coefficients_positive", basis.diag_positive());
            if let Some(sigma) = sigma {
                let p = basis.poly_of(sigma)?;
                let oracle = ortho_det_oracle(&y, sigma)?;
                let diff = p
                    .coeffs()
                    .iter()
                    .zip(oracle.coeffs())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                r.put("sigma", sigma.to_string());
                r.put("polynomial", p.to_string());
                r.put("coefficients", nums(p.coeffs()));
                r.put("determinant_oracle_error", num(diff));
            }
            Ok((EXIT_OK, r))
        }
        Task::Exists => {
            let m = cfg.m;
            let y = load_source(&cfg.source, 4 * m)?;
            let run = run_existence(&y, m, cfg.options.existence_tol)?;
            let ops = multiplication_operators(&run.y, &run.basis, m)?;
            let defect = ops.relative_commutation_defect();
            let code = if run.verdict.exists {
                EXIT_OK
            } else {
                EXIT_NO_CUBATURE
            };
            put_dimensions(&mut r, y.dim(), m)?;
            put_verdict(&mut r, &run.verdict);
            r.put("commutation_defect", num(defect));
            r.put("commutation_tol", num(cfg.options.commutation_tol));
            r.put("operators_commute", defect <= cfg.options.commutation_tol);
            Ok((code, r))
        }
        Task::Cubature => {
            let m = cfg.m;
            let y = load_source(&cfg.source, 4 * m)?;
            let run = run_existence(&y, m, cfg.options.existence_tol)?;
            put_dimensions(&mut r, y.dim(), m)?;
            put_verdict(&mut r, &run.verdict);
            if !run.verdict.exists {
                let ops = multiplication_operators(&run.y, &run.basis, m)?;
                r.put("commutation_defect", num(ops.relative_commutation_defect()));
                return Ok((EXIT_NO_CUBATURE, r));
            }
            let ops = multiplication_operators(&run.y, &run.basis, m)?;
            r.put("commutation_defect", num(ops.relative_commutation_defect()));
            let (rule, report) = build_rule(&run.y, &run.basis, m, &cfg.options)?;

            let ext = complete_moments(&run.y, &run.basis, &run.verdict.u, m)?;
            let flat = flatness_check(&ext.z, &run.basis, m, cfg.options.flatness_tol)?;
            let atomic = rule.probability_moments(2 * m)?;
            let atomic_gap = atomic
                .values()
                .iter()
                .zip(ext.z.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);

            r.put("node_count", rule.nodes.len());
            r.put("precision", rule.precision());
            r.put("scale", num(rule.scale));
            r.put("nodes", points(&rule.nodes));
            r.put("weights", nums(&rule.weights));
            r.put("max_abs_error", num(report.max_abs_error));
            r.put("max_rel_error", num(report.max_rel_error));
            r.put("min_weight", num(report.min_weight));
            r.put("weight_sum", num(report.weight_sum));
            r.put(
                "node_residual",
                report.node_residual.map_or(Value::Null, num),
            );
            r.put("interior", report.interior.map_or(Value::Null, Value::Bool));
            r.put("flat", flat.flat);
            r.put("flat_rank", flat.rank);
            r.put("flat_block_norm", num(flat.block_norm));
            r.put("flat_min_eigenvalue", num(flat.min_eigenvalue));
            r.put("atomic_moment_gap", num(atomic_gap));
            if let Some(path) = &cfg.out {
                store_rule(&rule, Some(&report), path)?;
                r.put("written", path.display().to_string());
            }
            Ok((EXIT_OK, r))
        }
        Task::Qcheck { sign } => {
            let m = cfg.m;
            let y = load_source(&cfg.source, 4 * m)?;
            let run = run_existence(&y, m, cfg.options.existence_tol)?;
            let q = build_q(&run.basis, &run.verdict.u, m, *sign)?;
            let cor = verify_gram_identity(&run.y, &run.basis, &q, m)?;
            put_dimensions(&mut r, y.dim(), m)?;
            r.put("exists", run.verdict.exists);
            r.put(
                "sign",
                match sign {
                    QSign::Negated => "-1",
                    QSign::Literal => "+1",
                },
            );
            r.put("q", q.poly.to_string());
            r.put("gram_deviation", num(cor.deviation));
            let signed_identity = (&cor.g
                - nalgebra::DMatrix::<f64>::identity(cor.g.nrows(), cor.g.ncols())
                    * -sign.factor())
            .amax();
            r.put("identity_deviation_for_sign", num(signed_identity));
            if run.verdict.exists {
                let (rule, _) = build_rule(&run.y, &run.basis, m, &cfg.options)?;
                let rem = verify_rule_identities(&run.y, &run.basis, &q, m, &rule)?;
                r.put("rule_u_from_rule", num(rem.u_from_rule));
                r.put("rule_lower_orthogonality", num(rem.lower_orthogonality));
                r.put("rule_top_coefficients", num(rem.top_coefficients));
                r.put("rule_integral", num(rem.integral));
                r.put("rule_passes", rem.passes(cfg.options.flatness_tol));
            }
            Ok((EXIT_OK, r))
        }
        Task::Verify { rule, tol } => {
            let rule = load_rule(rule)?;
            let m = rule.m;
            let y = normalize_probability(&load_source(&cfg.source, 2 * m)?)?;
            if y.dim() != rule.n {
                return Err(Error::DimensionMismatch {
                    expected: y.dim(),
                    found: rule.n,
                });
            }
            let basis = build_orthobasis(&y, m)?;
            let rep = verify_exactness(&rule, &y, Some(&basis), 2 * m - 1)?;
            let expected_nodes = dim_total(rule.n, m - 1)? as usize;
            let positive = rep.min_weight > 0.0;
            let ok = rep.max_rel_error <= *tol && positive;
            r.put("status", if ok { "ok" } else { "failed" });
            r.put("n", rule.n);
            r.put("m", m);
            r.put("precision", rule.precision());
            r.put("node_count", rule.nodes.len());
            r.put("gaussian_node_count", rule.nodes.len() == expected_nodes);
            r.put("max_abs_error", num(rep.max_abs_error));
            r.put("max_rel_error", num(rep.max_rel_error));
            r.put("worst_index", rep.worst_index.clone());
            r.put("min_weight", num(rep.min_weight));
            r.put("weight_sum", num(rep.weight_sum));
            r.put("node_residual", rep.node_residual.map_or(Value::Null, num));
            r.put("interior", rep.interior.map_or(Value::Null, Value::Bool));
            r.put("tol", num(*tol));
            Ok((if ok { EXIT_OK } else { EXIT_NO_CUBATURE }, r))
        }
    }
}

fn put_dimensions(r: &mut Report, n: usize, m: usize) -> Result<()> {
    r.put("n", n);
    r.put("m", m);
    r.put("t_m", pair_count(n, m)?);
    r.put("r_2m", dim_homog(n, 2 * m)?);
    r.put("s_m_minus_1", dim_total(n, m - 1)?);
    Ok(())
}

fn put_verdict(r: &mut Report, v: &crate::existence::Verdict) {
    r.put("verdict", if v.exists { "exists" } else { "no_cubature" });
    r.put("exists", v.exists);
    r.put("residual", num(v.residual));
    r.put("relative_residual", num(v.relative_residual));
    r.put("rank", v.rank);
    r.put("tol", num(v.tol));
    r.put("u", nums(&v.u));
}

fn task_name(t: &Task) -> &'static str {
    match t {
        Task::Moments { .. } => "moments",
        Task::Ortho { .. } => "ortho",
        Task::Exists => "exists",
        Task::Cubature => "cubature",
        Task::Qcheck { .. } => "qcheck",
        Task::Verify { .. } => "verify",
    }
}

fn source_name(s: &Source) -> String {
    match s {
        Source::Catalog(spec) => format!("catalog {spec}"),
        Source::File(p) => format!("file {}", p.display()),
    }
}

/// Parses `args` (including the program name) and runs them.
pub fn main_with_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            return Outcome {
                code,
                report: e.render().to_string(),
            };
        }
    };
    let format = command_format(&cli.command);
    match RunConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => error_outcome(&e, format),
    }
}

fn command_format(c: &Command) -> Format {
    match c {
        Command::Moments { output, .. }
        | Command::Ortho { output, .. }
        | Command::Exists { output, .. }
        | Command::Cubature { output, .. }
        | Command::Qcheck { output, .. }
        | Command::Verify { output, .. } => output.format,
    }
}

//! The `ncm` command-line front end.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use crate::correlation::{CorrelationMethod, ModelVariant, PdPolicy};
use crate::domain::{MarginalSpec, SampleSet};
use crate::error::{Error, Result};
use crate::model::{self, ConvexModel, Norm};
use crate::reliability::{reliability_index, LimitState, ReliabilityOptions};
use crate::{linalg, sampling, svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ncm", version, about = "Convex models for correlated interval variables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a model from samples and marginal intervals.
    Build(BuildArgs),
    /// Fitness and volume ratios of a model against samples.
    Assess(AssessArgs),
    /// Write a 2-D projection as SVG.
    Project(ProjectArgs),
    /// Draw points uniformly from a model's domain.
    Sample(SampleArgs),
    /// Check that the SCC of uniform draws recovers the correlation matrix.
    Verify(VerifyArgs),
    /// Non-probabilistic reliability index for a limit state.
    Reliability(ReliabilityArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub intervals: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    pub variant: ModelVariant,
    #[arg(long, value_parser = parse_method)]
    pub method: CorrelationMethod,
    #[arg(long, default_value = "strict", value_parser = parse_policy)]
    pub pd: PdPolicy,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Horizontal axis: 1-based index or variable name.
    #[arg(long)]
    pub i: String,
    /// Vertical axis: 1-based index or variable name.
    #[arg(long)]
    pub j: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Samples to mark on the plot.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_variant)]
    pub variant: ModelVariant,
    /// Correlation of a 2-D domain.
    #[arg(long, conflicts_with = "corr", required_unless_present = "corr", allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// File holding a full correlation matrix, one row per line.
    #[arg(long)]
    pub corr: Option<PathBuf>,
    #[arg(long, default_value_t = 200_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `ccc` refits each pair with the variant's CCC and only reports the gap.
    #[arg(long, default_value = "scc", value_parser = parse_method)]
    pub method: CorrelationMethod,
}

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// File holding the limit-state expression.
    #[arg(long)]
    pub g: PathBuf,
    /// Constants as name=value.
    #[arg(long = "bind", value_parser = parse_binding, num_args = 1..)]
    pub bind: Vec<(String, f64)>,
    /// `2` or `inf`; defaults to the model's natural norm.
    #[arg(long, value_parser = parse_norm)]
    pub norm: Option<Norm>,
    #[arg(long, default_value_t = 10.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_variant(s: &str) -> std::result::Result<ModelVariant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<CorrelationMethod, String> {
    match s.parse() {
        Ok(CorrelationMethod::Given) => Err("method must be `ccc` or `scc`".into()),
        Ok(m) => Ok(m),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_policy(s: &str) -> std::result::Result<PdPolicy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_norm(s: &str) -> std::result::Result<Norm, String> {
    match s {
        "2" | "euclidean" => Ok(Norm::Euclidean),
        "inf" | "infinity" => Ok(Norm::Infinity),
        _ => Err(format!("unknown norm `{s}`, expected `2` or `inf`")),
    }
}

fn parse_binding(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value = value.trim().parse::<f64>().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotPositiveDefinite { .. }
        | Error::NoSurfaceFound { .. }
        | Error::SingularShape { .. }
        | Error::InfeasibleFit { .. }
        | Error::MidpointOnSurface => EXIT_NUMERIC,
        _ => EXIT_INPUT,
    }
}

/// Parses arguments and runs one command, returning the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}

/// A command failure; construction failures also name the step.
#[derive(Debug)]
enum Failure {
    Plain(Error),
    Step(model::StepFailure),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Plain(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Plain(e) => exit_code(e),
            Failure::Step(s) => exit_code(&s.error),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Plain(e) => write!(f, "{e}"),
            Failure::Step(s) => write!(f, "{s}"),
        }
    }
}

fn execute(cmd: &Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Build(a) => build(a, out),
        Command::Assess(a) => Ok(assess(a, out)?),
        Command::Project(a) => Ok(project(a, out)?),
        Command::Sample(a) => Ok(sample(a, out)?),
        Command::Verify(a) => Ok(verify(a, out)?),
        Command::Reliability(a) => Ok(reliability(a, out)?),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn format_matrix(m: &DMatrix<f64>, decimals: usize) -> String {
    let mut s = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$.decimals$}", width = decimals + 4)).collect();
        s.push_str("  ");
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

fn build(a: &BuildArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let prep = |error| Failure::Step(model::StepFailure { step: model::Step::DataPreparation, error });
    let spec = MarginalSpec::read_intervals(&a.intervals).map_err(prep)?;
    let samples = SampleSet::read_csv(&a.samples).map_err(prep)?;
    let built = model::construct(&spec, &samples, a.variant, a.method, a.pd).map_err(Failure::Step)?;
    let m = &built.model;
    built.model.write(&a.out)?;
    writeln!(out, "n = {}", m.dim()).map_err(io)?;
    writeln!(out, "variant = {}", m.variant().label()).map_err(io)?;
    writeln!(out, "method = {}", m.method()).map_err(io)?;
    writeln!(out, "R =\n{}", format_matrix(m.correlation().entries(), 4).trim_end()).map_err(io)?;
    writeln!(out, "lambda_min = {:.6}", linalg::symmetric_eigen(m.correlation().entries()).min_value()).map_err(io)?;
    for w in &built.warnings {
        writeln!(out, "warning: {w}").map_err(io)?;
    }
    writeln!(out, "wrote {}", a.out.display()).map_err(io)?;
    Ok(())
}

fn assess(a: &AssessArgs, out: &mut dyn Write) -> Result<()> {
    let m = ConvexModel::read(&a.model)?;
    let samples = SampleSet::read_csv(&a.samples)?;
    let report = m.assess(&samples)?;
    writeln!(out, "{} ({}, {})", report, m.variant().label(), m.method()).map_err(io)?;
    if report.excluded.is_empty() {
        writeln!(out, "excluded rows: none").map_err(io)?;
    } else {
        let rows: Vec<String> = report.excluded.iter().map(|k| (k + 1).to_string()).collect();
        writeln!(out, "excluded rows (1-based): {}", rows.join(", ")).map_err(io)?;
    }
    if let Some(path) = &a.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
    }
    Ok(())
}

fn axis(spec: &MarginalSpec, s: &str) -> Result<usize> {
    if let Some(k) = spec.index_of(s) {
        return Ok(k);
    }
    let k: usize =
        s.parse().map_err(|_| Error::InvalidArgument(format!("`{s}` is neither a variable name nor an index")))?;
    if k == 0 || k > spec.dim() {
        return Err(Error::IndexOutOfRange { index: k, dim: spec.dim() });
    }
    Ok(k - 1)
}

fn project(a: &ProjectArgs, out: &mut dyn Write) -> Result<()> {
    let m = ConvexModel::read(&a.model)?;
    let i = axis(m.spec(), &a.i)?;
    let j = axis(m.spec(), &a.j)?;
    let overlay = a.overlay.as_ref().map(SampleSet::read_csv).transpose()?;
    let text = svg::projection_svg(&m, i, j, overlay.as_ref())?;
    std::fs::write(&a.out, text)?;
    if m.variant().is_ellipsoid() {
        let p = m.project_2d(i, j)?;
        writeln!(out, "projection r = {:.4}", p[(0, 1)]).map_err(io)?;
    } else {
        writeln!(out, "display hull only: parallelepiped projections are not a model operation").map_err(io)?;
    }
    writeln!(out, "wrote {}", a.out.display()).map_err(io)?;
    Ok(())
}

fn sample(a: &SampleArgs, out: &mut dyn Write) -> Result<()> {
    let m = ConvexModel::read(&a.model)?;
    if a.n == 0 {
        return Err(Error::InvalidArgument("--n must be positive".into()));
    }
    let points = sampling::sample_uniform(&m, a.n, a.seed);
    let set = SampleSet::new(m.spec().names().to_vec(), points)?;
    std::fs::write(&a.out, set.to_csv())?;
    writeln!(out, "wrote {} points to {}", a.n, a.out.display()).map_err(io)?;
    Ok(())
}

/// Whitespace- or comma-separated rows; `#` starts a comment.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|e| Error::Parse { line: k + 1, field: s.into(), message: e.to_string() })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidCorrelation("expected a square matrix".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let r = match (&a.corr, a.r) {
        (Some(path), _) => parse_matrix(&std::fs::read_to_string(path)?)?,
        (None, Some(r)) => DMatrix::from_row_slice(2, 2, &[1.0, r, r, 1.0]),
        (None, None) => return Err(Error::InvalidArgument("one of --r or --corr is required".into())),
    };
    if a.method == CorrelationMethod::Ccc {
        let gap = sampling::ccc_gap(a.variant, &r, a.n, a.seed)?;
        writeln!(out, "ccc recovery for {} ({} draws, seed {})", a.variant.label(), gap.draws, gap.seed).map_err(io)?;
        writeln!(out, "recovered =\n{}", format_matrix(&gap.recovered_r, 4).trim_end()).map_err(io)?;
        writeln!(out, "max_gap={:.6}", gap.max_abs_error).map_err(io)?;
        return Ok(());
    }
    let report = sampling::verify_unbiasedness(a.variant, &r, a.n, a.seed)?;
    writeln!(out, "{}", report.verdict_line()).map_err(io)?;
    Ok(())
}

fn reliability(a: &ReliabilityArgs, out: &mut dyn Write) -> Result<()> {
    let m = ConvexModel::read(&a.model)?;
    let g = LimitState::parse(std::fs::read_to_string(&a.g)?.trim())?;
    let options = ReliabilityOptions {
        bindings: a.bind.iter().cloned().collect::<BTreeMap<_, _>>(),
        norm: a.norm,
        eta_max: a.eta_max,
        seed: a.seed,
        random_starts: None,
    };
    let res = reliability_index(&m, &g, &options)?;
    let fmt_vec = |v: &nalgebra::DVector<f64>| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ");
    writeln!(out, "eta={:.6}", res.eta).map_err(io)?;
    writeln!(out, "norm={}", if res.norm == Norm::Euclidean { "2" } else { "inf" }).map_err(io)?;
    writeln!(out, "delta_star=[{}]", fmt_vec(&res.delta_star)).map_err(io)?;
    writeln!(out, "x_star=[{}]", fmt_vec(&res.x_star)).map_err(io)?;
    writeln!(out, "g_midpoint={:.6} ({})", res.g_midpoint, if res.g_midpoint > 0.0 { "positive" } else { "negative" })
        .map_err(io)?;
    writeln!(out, "converged={} evaluations={}", res.converged, res.evaluations).map_err(io)?;
    Ok(())
}

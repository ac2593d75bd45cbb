//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 when a
//! computation fails.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::algebra::{sample, AlgebraElement};
use crate::complex::{interval, mesh, polygon, standard_simplex, ComplexFile, GeometricRealization, SimplicialComplex};
use crate::convergence::{
    approximation_convergence, derivative_convergence, laplacian_convergence, refine_sequence, stencil_convergence,
    tensor_derivative_convergence, ErrorTable, Model,
};
use crate::error::{Error, Result};
use crate::expr::{partial, second_partial, Expr};
use crate::linalg::C64;
use crate::models::{circle_triple, line_lattice_triple, metric_weighted_dirac, torus_spec, LatticeSpec};
use crate::poset::InverseSystem;
use crate::spectral::{d_algebra, hodge_decompose, laplacian, spectral_values, SpectralTriple};

#[derive(Debug, Parser)]
#[command(name = "spectral-calculus", version, about = "Spectral calculus on refined simplicial complexes")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Barycentrically refine a complex and write the finest level as JSON
    Subdivide(RefineArgs),
    /// Write the face poset of a refinement level as JSON
    Poset(RefineArgs),
    /// Signed spectral values of da
    Spectrum(FieldArgs),
    /// Laplacian of a vertex function
    Laplacian(FieldArgs),
    /// Exact and harmonic parts of a vertex function
    Hodge(FieldArgs),
    /// Piecewise-linear approximation error over refinement levels
    Approx(ApproxArgs),
    /// Convergence table for derivative, Laplacian or stencil experiments
    Converge(ConvergeArgs),
    /// Assemble a lattice Dirac operator and write its entries as CSV
    Model(ModelArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Interval,
    Polygon,
    Simplex,
}

#[derive(Debug, Args)]
struct ComplexArgs {
    /// Complex as JSON: {"vertices": [[x, ...], ...], "maximal": [[v, ...], ...]}
    #[arg(long, conflicts_with = "shape")]
    complex: Option<PathBuf>,
    /// Built-in complex
    #[arg(long, value_enum)]
    shape: Option<Shape>,
    /// Size of the built-in complex (polygon sides, simplex dimension)
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[command(flatten)]
    input: ComplexArgs,
    /// Number of barycentric subdivisions
    #[arg(long, default_value_t = 1)]
    levels: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldModel {
    Line,
    Circle,
    Complex,
}

#[derive(Debug, Args)]
struct FieldArgs {
    #[arg(long, value_enum, default_value = "line")]
    model: FieldModel,
    /// Vertex count for the line and circle models
    #[arg(long)]
    m: Option<usize>,
    /// Lattice spacing; defaults to the mesh of the complex level
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated vertex values
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with = "function")]
    values: Option<Vec<f64>>,
    /// Expression in x (y, z on higher-dimensional complexes) sampled at vertices
    #[arg(long, allow_hyphen_values = true)]
    function: Option<String>,
    #[command(flatten)]
    input: ComplexArgs,
    /// Subdivisions applied to the complex before sampling
    #[arg(long, default_value_t = 0)]
    levels: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    #[command(flatten)]
    input: ComplexArgs,
    #[arg(long, allow_hyphen_values = true)]
    function: String,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[arg(long, default_value_t = 2.0)]
    expected_rate: f64,
    #[arg(long, default_value_t = 0.2)]
    rate_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON summary (stdout when --out is set, else stderr)
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ConvergeModel {
    Line,
    Circle,
    Lattice2d,
    Torus2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Derivative,
    Laplacian,
    Stencil,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    /// JSON experiment config; flags take precedence over its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ConvergeModel>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long, allow_hyphen_values = true)]
    function: Option<String>,
    /// Exact first derivative (numerical differentiation otherwise)
    #[arg(long, allow_hyphen_values = true)]
    derivative: Option<String>,
    /// Exact second derivative (numerical differentiation otherwise)
    #[arg(long, allow_hyphen_values = true)]
    second: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    expected_rate: Option<f64>,
    #[arg(long)]
    rate_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

/// Experiment settings read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    model: Option<ConvergeModel>,
    kind: Option<Kind>,
    function: Option<String>,
    derivative: Option<String>,
    second: Option<String>,
    levels: Option<usize>,
    expected_rate: Option<f64>,
    rate_tol: Option<f64>,
    out: Option<PathBuf>,
    summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Lattice spec as JSON: {"dims": [{"m":..,"h":..,"periodic":..}], "weights": [..]}
    #[arg(long, conflicts_with = "torus")]
    spec: Option<PathBuf>,
    /// Torus with this many nodes per direction
    #[arg(long)]
    torus: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the program on `argv` (including the program name) and returns the
/// process exit code.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Subdivide(args) => {
            let system = refine(&args.input, args.levels)?;
            for n in 0..=system.depth() {
                let (k, g) = (system.complex(n), system.realization(n));
                eprintln!("level {n}: {} faces, mesh {:.16e}", k.num_faces(), mesh(k, g));
            }
            let n = system.depth();
            let file = ComplexFile::from_parts(system.complex(n), system.realization(n));
            emit(args.out.as_deref(), &(serde_json::to_string_pretty(&file)? + "\n"))
        }
        Command::Poset(args) => {
            let system = refine(&args.input, args.levels)?;
            let file = system.poset(system.depth()).to_file();
            emit(args.out.as_deref(), &(serde_json::to_string_pretty(&file)? + "\n"))
        }
        Command::Spectrum(args) => {
            let field = Field::build(&args)?;
            let sv = spectral_values(&d_algebra(&field.values, field.triple.dirac())?)?;
            let mut out = String::from("index,value\n");
            for (i, v) in sv.iter().enumerate() {
                out.push_str(&format!("{i},{:.16e}\n", v + 0.0));
            }
            emit(args.out.as_deref(), &out)
        }
        Command::Laplacian(args) => {
            let field = Field::build(&args)?;
            let lap = laplacian(&field.values, field.triple.dirac())?;
            emit(args.out.as_deref(), &lap.to_csv(&field.vertex_ids))
        }
        Command::Hodge(args) => {
            let field = Field::build(&args)?;
            let parts = hodge_decompose(&field.values, field.triple.dirac())?;
            let mut out = String::from("vertex_id,exact_re,exact_im,harmonic_re,harmonic_im\n");
            for (i, id) in field.vertex_ids.iter().enumerate() {
                let (e, h) = (parts.exact.get(i), parts.harmonic.get(i));
                out.push_str(&format!("{id},{:.16e},{:.16e},{:.16e},{:.16e}\n", e.re, e.im, h.re, h.im));
            }
            emit(args.out.as_deref(), &out)
        }
        Command::Approx(args) => {
            let f = Expr::parse(&args.function)?;
            let system = refine(&args.input, args.levels)?;
            let table = approximation_convergence(&|x: &[f64]| f.eval(x), &system)?;
            report(&table, args.expected_rate, args.rate_tol, args.out.as_deref(), args.summary.as_deref())
        }
        Command::Converge(args) => converge(args),
        Command::Model(args) => {
            let spec = match (&args.spec, args.torus) {
                (Some(path), _) => read_json::<LatticeSpec>(path)?,
                (None, Some(m)) => torus_spec(m),
                (None, None) => return Err(Error::Invalid("give --spec or --torus".into())),
            };
            let t = metric_weighted_dirac(&spec)?;
            emit(args.out.as_deref(), &t.dirac_csv())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => write_stdout(text),
    }
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn write_stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load_complex(args: &ComplexArgs) -> Result<(SimplicialComplex, GeometricRealization)> {
    match (&args.complex, args.shape) {
        (Some(path), _) => read_json::<ComplexFile>(path)?.into_parts(),
        (None, Some(Shape::Interval)) => Ok(interval(0.0, 1.0)),
        (None, Some(Shape::Polygon)) => polygon(args.n),
        (None, Some(Shape::Simplex)) => Ok(standard_simplex(args.n)),
        (None, None) => Err(Error::Invalid("give --complex or --shape".into())),
    }
}

fn refine(args: &ComplexArgs, levels: usize) -> Result<InverseSystem> {
    let (k, g) = load_complex(args)?;
    refine_sequence(k, g, levels)
}

struct Field {
    triple: SpectralTriple,
    values: AlgebraElement,
    vertex_ids: Vec<usize>,
}

impl Field {
    fn build(args: &FieldArgs) -> Result<Self> {
        let expr = args.function.as_deref().map(Expr::parse).transpose()?;
        if args.model == FieldModel::Complex {
            let system = refine(&args.input, args.levels)?;
            let n = system.depth();
            let (k, g, p) = (system.complex(n), system.realization(n), system.poset(n));
            let h = args.h.unwrap_or_else(|| mesh(k, g));
            let triple = SpectralTriple::from_poset(p, h)?;
            let vertex_ids = k.vertices();
            let values = match (&args.values, &expr) {
                (Some(v), _) => AlgebraElement::from_real(v),
                (None, Some(f)) => sample(|x: &[f64]| f.eval(x), p, g)?,
                (None, None) => return Err(Error::Invalid("give --values or --function".into())),
            };
            values.ensure_len(triple.m())?;
            return Ok(Field { triple, values, vertex_ids });
        }
        let m = match (args.m, &args.values) {
            (Some(m), _) => m,
            (None, Some(v)) => v.len(),
            (None, None) => return Err(Error::Invalid("give --m or --values".into())),
        };
        let h = match (args.h, args.model) {
            (Some(h), _) => h,
            (None, FieldModel::Circle) => 2.0 * std::f64::consts::PI / m as f64,
            (None, _) => 1.0 / (m.max(2) - 1) as f64,
        };
        let triple = if args.model == FieldModel::Circle { circle_triple(m, h)? } else { line_lattice_triple(m, h)? };
        let values = match (&args.values, &expr) {
            (Some(v), _) => AlgebraElement::from_real(v),
            (None, Some(f)) => AlgebraElement::new(
                (0..m).map(|j| f.eval(&[j as f64 * h]).map(|v| C64::new(v, 0.0))).collect::<Result<_>>()?,
            ),
            (None, None) => return Err(Error::Invalid("give --values or --function".into())),
        };
        values.ensure_len(m)?;
        Ok(Field { triple, values, vertex_ids: (0..m).collect() })
    }
}

fn report(table: &ErrorTable, expected: f64, tol: f64, out: Option<&Path>, summary: Option<&Path>) -> Result<()> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Invalid(format!("rate tolerance must be positive, got {tol}")));
    }
    emit(out, &table.to_csv())?;
    let json = serde_json::to_string(&table.summary(expected, tol))? + "\n";
    match (summary, out) {
        (Some(path), _) => fs::write(path, json)?,
        (None, Some(_)) => write_stdout(&json)?,
        (None, None) => eprint!("{json}"),
    }
    Ok(())
}

fn converge(args: ConvergeArgs) -> Result<()> {
    let config: ExperimentConfig = match &args.config {
        Some(path) => read_json(path)?,
        None => ExperimentConfig::default(),
    };
    let model = args.model.or(config.model).unwrap_or(ConvergeModel::Circle);
    let kind = args.kind.or(config.kind).unwrap_or(Kind::Derivative);
    let source = args.function.or(config.function).ok_or_else(|| Error::Invalid("give --function".into()))?;
    let derivative = args.derivative.or(config.derivative);
    let second = args.second.or(config.second);
    let levels = args.levels.or(config.levels).unwrap_or(5);
    let (default_rate, default_tol) = match kind {
        Kind::Derivative => (1.0, 0.15),
        Kind::Laplacian | Kind::Stencil => (2.0, 0.2),
    };
    let expected = args.expected_rate.or(config.expected_rate).unwrap_or(default_rate);
    let tol = args.rate_tol.or(config.rate_tol).unwrap_or(default_tol);
    let out = args.out.or(config.out);
    let summary = args.summary.or(config.summary);

    let f = Expr::parse(&source)?;
    let df = derivative.as_deref().map(Expr::parse).transpose()?;
    let d2f = second.as_deref().map(Expr::parse).transpose()?;
    // evaluation failures surface as NaN, which sampling and tables reject
    let fx = |x: f64| f.eval(&[x]).unwrap_or(f64::NAN);
    let dfx = |x: f64| match &df {
        Some(e) => e.eval(&[x]).unwrap_or(f64::NAN),
        None => partial(&f, &[x], 0).unwrap_or(f64::NAN),
    };
    let d2fx = |x: f64| match &d2f {
        Some(e) => e.eval(&[x]).unwrap_or(f64::NAN),
        None => second_partial(&f, &[x], 0).unwrap_or(f64::NAN),
    };

    let one_d = |m: ConvergeModel| if m == ConvergeModel::Line { Model::Line } else { Model::Circle };
    let table = match (model, kind) {
        (ConvergeModel::Line | ConvergeModel::Circle, Kind::Derivative) => {
            derivative_convergence(&fx, &dfx, one_d(model), levels)?
        }
        (ConvergeModel::Line | ConvergeModel::Circle, Kind::Laplacian) => {
            laplacian_convergence(&fx, &d2fx, one_d(model), levels)?
        }
        (ConvergeModel::Circle, Kind::Stencil) => stencil_convergence(&fx, &dfx, &[(1, 0.5), (-1, 0.5)], levels)?,
        (ConvergeModel::Lattice2d | ConvergeModel::Torus2d, Kind::Derivative) => {
            let m2 = if model == ConvergeModel::Torus2d { Model::Torus2d } else { Model::Lattice2d };
            let eval = |p: &[f64]| f.eval(p);
            let grad = |p: &[f64], k: usize| partial(&f, p, k);
            tensor_derivative_convergence(m2, &eval, &grad, levels)?
        }
        (model, kind) => return Err(Error::Invalid(format!("{kind:?} is not available on the {model:?} model"))),
    };
    report(&table, expected, tol, out.as_deref(), summary.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &[&str]) -> Vec<String> {
        std::iter::once("spectral-calculus").chain(s.iter().copied()).map(String::from).collect()
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&argv(&[])), 1);
        assert_eq!(run(&argv(&["frobnicate"])), 1);
        assert_eq!(run(&argv(&["spectrum", "--bogus"])), 1);
        assert_eq!(run(&argv(&["--help"])), 0);
        assert_eq!(run(&argv(&["spectrum", "--model", "line", "--m", "2", "--h", "1", "--values", "0,1,2"])), 1);
        assert_eq!(run(&argv(&["converge", "--function", "sin(x"])), 1);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"modle": "circle"}"#);
        assert!(err.is_err());
        let ok: ExperimentConfig = serde_json::from_str(r#"{"model": "torus2d", "kind": "derivative"}"#).unwrap();
        assert_eq!(ok.model, Some(ConvergeModel::Torus2d));
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or configuration
//! error, 3 numerical failure at run time.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::Error;
use crate::hamilton::{CotangentPoint, HamiltonGeometry};
use crate::kcc::{jacobi_stability, KccGeometry};
use crate::lagrange::{yang_mills_energy, LagrangeGeometry, TangentPoint};
use crate::linalg::Mat;
use crate::model::{CovidModel, VectorField};
use crate::ode::{
    fmt_f64, integrate_adaptive, integrate_rk4, uniform_times, write_csv, AdaptiveOptions,
    GeometrySample, Trajectory,
};
use crate::surface::{
    band_point_cloud, enumerate_projections, extract_isosurface, sample_energy_grid,
    write_point_cloud_csv, AxisRange, ProjectionSpec, Sidecar,
};
use crate::validation::{pointwise_fd_checks, run_suite, CheckResult, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lhgeom", version, about = "Geometry and Jacobi stability of a six-compartment epidemic model")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the model and write the trajectory CSV.
    Simulate(SimulateArgs),
    /// Evaluate every geometric object at one state as JSON.
    Geometry(GeometryArgs),
    /// Jacobi stability verdict along a trajectory.
    Stability(StabilityArgs),
    /// Export level sets of the Yang-Mills energy on three-axis slices.
    EnergySurface(SurfaceArgs),
    /// Run the self-check suite and print a pass/fail table.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    /// Use the embedded adaptive pair with dense output at the dt grid.
    #[arg(long)]
    adaptive: bool,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Initial state `S,E,Is,Ia,Ih,R[,D]`.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    traj: TrajectoryArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the EYM, max_re_P and jacobi_class columns.
    #[arg(long)]
    with_geometry: bool,
}

#[derive(Debug, Args)]
struct StabilityArgs {
    #[command(flatten)]
    traj: TrajectoryArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[arg(long)]
    config: PathBuf,
    /// State `S,E,Is,Ia,Ih,R` (default: the configured initial state).
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Velocity: `field` (y = X(x), default), `zero`, or six values.
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// Momentum: six values (default: the Legendre image 2(y - X)).
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Also compare analytic derivatives against finite differences.
    #[arg(long)]
    check: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("which").required(true).args(["axes", "all"])))]
struct SurfaceArgs {
    #[arg(long)]
    config: PathBuf,
    /// Reference state supplying the fixed coordinates.
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Three distinct 1-based axes, e.g. `3,4,5`.
    #[arg(long)]
    axes: Option<String>,
    /// All 20 axis triples.
    #[arg(long)]
    all: bool,
    /// Nodes per axis `N`, or `min:max:count` for each of the three axes.
    #[arg(long)]
    grid: Option<String>,
    /// Level value (default: EYM at the reference state).
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Band half-width; a positive value writes point clouds instead of meshes.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed command with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::InvalidProjection(_) => EXIT_USAGE,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(format!("i/o error: {e}"))
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command,
/// writing regular output to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Geometry(a) => cmd_geometry(a, out),
        Command::Stability(a) => cmd_stability(a, out),
        Command::EnergySurface(a) => cmd_energy_surface(a, out),
        Command::Validate(a) => cmd_validate(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_config(path: &Path) -> std::result::Result<Config, Failure> {
    Config::load(path).map_err(|e| Failure::usage(e.to_string()))
}

fn model_of(cfg: &Config) -> std::result::Result<CovidModel, Failure> {
    Ok(CovidModel::new(cfg.params)?.strict(cfg.geometry.strict))
}

fn parse_list(text: &str, flag: &str) -> std::result::Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("{flag}: cannot parse `{}` as a number", s.trim())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Failure::usage(format!("{flag}: values must be finite")))
            }
        })
        .collect()
}

/// `--state` parsing: six compartments plus an optional `D`.
fn parse_state(text: &str) -> std::result::Result<(Vec<f64>, f64), Failure> {
    let v = parse_list(text, "--state")?;
    match v.len() {
        6 => Ok((v, 0.0)),
        7 => Ok((v[..6].to_vec(), v[6])),
        n => Err(Failure::usage(format!("--state needs 6 or 7 values, got {n}"))),
    }
}

fn initial_state(cfg: &Config, flag: Option<&str>) -> std::result::Result<(Vec<f64>, f64), Failure> {
    match flag {
        Some(s) => parse_state(s),
        None => Ok((cfg.initial_state.vector().to_vec(), cfg.initial_state.d)),
    }
}

fn open_output(path: Option<&Path>, stdout: &mut dyn Write, body: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(body)?;
            f.flush()
        }
        None => stdout.write_all(body),
    }
}

fn integrate(cfg: &Config, a: &TrajectoryArgs, model: &CovidModel) -> std::result::Result<Trajectory, Failure> {
    let (x0, d0) = initial_state(cfg, a.state.as_deref())?;
    let t0 = a.t0.unwrap_or(cfg.integrator.t0);
    let t1 = a.t1.unwrap_or(cfg.integrator.t1);
    let dt = a.dt.unwrap_or(cfg.integrator.dt);
    if !(t1 > t0) {
        return Err(Failure::usage(format!("need t1 > t0, got t0 = {t0}, t1 = {t1}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Failure::usage(format!("dt = {dt} must be > 0")));
    }
    if a.adaptive || cfg.integrator.adaptive {
        let opts = AdaptiveOptions {
            rel_tol: a.rtol.unwrap_or(cfg.integrator.rtol),
            abs_tol: a.atol.unwrap_or(cfg.integrator.atol),
            sample_times: Some(uniform_times((t0, t1), dt)),
            ..Default::default()
        };
        if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
            return Err(Failure::usage("rtol and atol must be > 0"));
        }
        Ok(integrate_adaptive(model, &x0, d0, (t0, t1), &opts)?)
    } else {
        Ok(integrate_rk4(model, &x0, d0, (t0, t1), dt)?)
    }
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = load_config(&a.traj.config)?;
    let model = model_of(&cfg)?;
    let traj = integrate(&cfg, &a.traj, &model)?;
    let geometry = if a.with_geometry {
        let opts = cfg.geometry.stability_options();
        let samples = traj
            .states()
            .iter()
            .map(|x| {
                let tp = TangentPoint::on_shell(&model, x)?;
                let v = jacobi_stability(&model, &tp, &opts)?;
                Ok(GeometrySample {
                    yang_mills: yang_mills_energy(&model, x)?,
                    max_real_part: v.max_real_part,
                    class: v.classification,
                })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        Some(samples)
    } else {
        None
    };
    let mut buf = Vec::new();
    write_csv(&mut buf, &traj, geometry.as_deref())?;
    open_output(a.out.as_deref(), out, &buf)?;
    Ok(EXIT_OK)
}

fn cmd_stability(a: StabilityArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = load_config(&a.traj.config)?;
    let model = model_of(&cfg)?;
    let traj = integrate(&cfg, &a.traj, &model)?;
    let opts = cfg.geometry.stability_options();
    let mut buf = Vec::new();
    writeln!(buf, "t,max_re_P,class")?;
    for (t, x) in traj.times().iter().zip(traj.states()) {
        let tp = TangentPoint::on_shell(&model, x)?;
        let v = jacobi_stability(&model, &tp, &opts)?;
        writeln!(buf, "{},{},{}", fmt_f64(*t), fmt_f64(v.max_real_part), v.classification)?;
    }
    open_output(a.out.as_deref(), out, &buf)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GeometryReport {
    x: Vec<f64>,
    y: Vec<f64>,
    p: Vec<f64>,
    #[serde(rename = "J")]
    jacobian: Mat,
    #[serde(flatten)]
    lagrange: LagrangeGeometry,
    #[serde(flatten)]
    kcc: KccGeometry,
    #[serde(flatten)]
    hamilton: HamiltonGeometry,
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<Vec<CheckResult>>,
}

fn cmd_geometry(a: GeometryArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = load_config(&a.config)?;
    let model = model_of(&cfg)?;
    let (x, _) = initial_state(&cfg, a.state.as_deref())?;
    let xv = model.eval(&x)?;
    let y = match a.y.as_deref() {
        None | Some("field") => xv.clone(),
        Some("zero") => vec![0.0; 6],
        Some(list) => parse_list(list, "--y")?,
    };
    if y.len() != 6 {
        return Err(Failure::usage(format!("--y needs 6 values, got {}", y.len())));
    }
    let tp = TangentPoint::new(x.clone(), y.clone())?;
    let cp = match a.p.as_deref() {
        None => CotangentPoint::legendre(&model, &x, &y)?,
        Some(list) => {
            let p = parse_list(list, "--p")?;
            if p.len() != 6 {
                return Err(Failure::usage(format!("--p needs 6 values, got {}", p.len())));
            }
            CotangentPoint::new(x.clone(), p)?
        }
    };
    let checks = if a.check {
        Some(pointwise_fd_checks(&model, &x)?)
    } else {
        None
    };
    let passed = checks.as_ref().is_none_or(|c| c.iter().all(|c| c.passed));
    let report = GeometryReport {
        jacobian: model.jacobian(&x)?,
        lagrange: LagrangeGeometry::evaluate(&model, &tp)?,
        kcc: KccGeometry::evaluate(&model, &tp, &cfg.geometry.stability_options())?,
        hamilton: HamiltonGeometry::evaluate(&model, &cp)?,
        p: cp.p.clone(),
        x,
        y,
        checks,
    };
    let mut body = serde_json::to_vec_pretty(&report).map_err(|e| Failure::usage(e.to_string()))?;
    body.push(b'\n');
    open_output(a.out.as_deref(), out, &body)?;
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}

fn parse_axes(text: &str) -> std::result::Result<[usize; 3], Failure> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::usage(format!("--axes: cannot parse `{text}`")))?;
    parts
        .try_into()
        .map_err(|_| Failure::usage(format!("--axes needs three indices, got `{text}`")))
}

/// Default per-axis range: the reference value plus or minus a half-width,
/// clipped at zero for non-negative coordinates.
fn default_range(cfg: &Config, reference: f64, count: usize) -> crate::Result<AxisRange> {
    let w = (cfg.surface.rel_width * reference.abs()).max(cfg.surface.min_width);
    let lo = if reference >= 0.0 { (reference - w).max(0.0) } else { reference - w };
    AxisRange::new(lo, reference + w, count)
}

fn grid_for(
    cfg: &Config,
    grid: Option<&str>,
    axes: [usize; 3],
    reference: &[f64],
) -> std::result::Result<[AxisRange; 3], Failure> {
    let defaults = |count: usize| -> std::result::Result<[AxisRange; 3], Failure> {
        let r: Vec<AxisRange> = axes
            .iter()
            .map(|a| default_range(cfg, reference[a - 1], count))
            .collect::<crate::Result<_>>()?;
        Ok([r[0], r[1], r[2]])
    };
    match grid {
        None => defaults(cfg.surface.count),
        Some(g) if !g.contains(':') => {
            let count: usize = g
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("--grid: cannot parse `{g}`")))?;
            defaults(count)
        }
        Some(g) => {
            let ranges = g
                .split(',')
                .map(|part| {
                    let f: Vec<&str> = part.split(':').collect();
                    if f.len() != 3 {
                        return Err(Failure::usage(format!("--grid: expected min:max:count, got `{part}`")));
                    }
                    let bad = || Failure::usage(format!("--grid: cannot parse `{part}`"));
                    let min: f64 = f[0].trim().parse().map_err(|_| bad())?;
                    let max: f64 = f[1].trim().parse().map_err(|_| bad())?;
                    let count: usize = f[2].trim().parse().map_err(|_| bad())?;
                    Ok(AxisRange::new(min, max, count)?)
                })
                .collect::<std::result::Result<Vec<_>, Failure>>()?;
            ranges
                .try_into()
                .map_err(|_| Failure::usage("--grid needs one min:max:count per axis"))
        }
    }
}

fn export_projection<F: VectorField>(
    field: &F,
    spec: &ProjectionSpec,
    dir: &Path,
) -> std::result::Result<String, Failure> {
    let grid = sample_energy_grid(field, spec)?;
    let [a, b, c] = spec.axes();
    let stem = format!("eym_{a}{b}{c}");
    let (mode, summary) = if spec.tol() > 0.0 {
        let points = band_point_cloud(&grid, spec.rho(), spec.tol())?;
        let mut buf = Vec::new();
        write_point_cloud_csv(&mut buf, &points)?;
        fs::write(dir.join(format!("{stem}.csv")), buf)?;
        let mut side = Sidecar::new(spec, &grid, "points");
        side.points = points.len();
        (side, format!("{stem}.csv points={}", points.len()))
    } else {
        let mesh = extract_isosurface(&grid, spec.rho());
        let mut buf = Vec::new();
        mesh.write_obj(&mut buf)?;
        fs::write(dir.join(format!("{stem}.obj")), buf)?;
        let mut side = Sidecar::new(spec, &grid, "mesh");
        side.vertices = mesh.vertices.len();
        side.triangles = mesh.triangles.len();
        (
            side,
            format!(
                "{stem}.obj vertices={} triangles={}",
                mesh.vertices.len(),
                mesh.triangles.len()
            ),
        )
    };
    let mut body = serde_json::to_vec_pretty(&mode).map_err(|e| Failure::usage(e.to_string()))?;
    body.push(b'\n');
    fs::write(dir.join(format!("{stem}.json")), body)?;
    Ok(summary)
}

fn cmd_energy_surface(a: SurfaceArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = load_config(&a.config)?;
    let model = model_of(&cfg)?;
    let (reference, _) = initial_state(&cfg, a.state.as_deref())?;
    let rho = match a.rho.or(cfg.surface.rho) {
        Some(r) => r,
        None => yang_mills_energy(&model, &reference)?,
    };
    let tol = a.tol.unwrap_or(cfg.surface.tol);
    let triples = if a.all {
        enumerate_projections()
    } else {
        vec![parse_axes(a.axes.as_deref().unwrap_or_default())?]
    };
    // Validate every spec before touching the filesystem.
    let specs = triples
        .iter()
        .map(|axes| {
            if axes.iter().any(|i| *i == 0 || *i > reference.len()) {
                return Err(Failure::usage(format!("--axes {axes:?} must lie in 1..=6")));
            }
            let grid = grid_for(&cfg, a.grid.as_deref(), *axes, &reference)?;
            Ok(ProjectionSpec::new(*axes, reference.clone(), grid, rho, tol)?)
        })
        .collect::<std::result::Result<Vec<_>, Failure>>()?;
    fs::create_dir_all(&a.out)?;
    let results: Vec<std::result::Result<String, Failure>> = specs
        .par_iter()
        .map(|spec| export_projection(&model, spec, &a.out))
        .collect();
    for r in results {
        writeln!(out, "{}", r?)?;
    }
    Ok(EXIT_OK)
}

fn cmd_validate(a: ValidateArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = load_config(&a.config)?;
    let model = model_of(&cfg)?;
    let x0 = cfg.initial_state.vector();
    let opts = SuiteOptions {
        t_span: (cfg.integrator.t0, cfg.integrator.t1),
        dt: cfg.integrator.dt,
        adaptive: AdaptiveOptions {
            rel_tol: cfg.integrator.rtol,
            abs_tol: cfg.integrator.atol,
            ..Default::default()
        },
    };
    let report = run_suite(&model, &x0, cfg.initial_state.d, &opts)?;
    write!(out, "{}", report.render_table())?;
    if let Some(path) = &a.out {
        let mut body = serde_json::to_vec_pretty(&report).map_err(|e| Failure::usage(e.to_string()))?;
        body.push(b'\n');
        fs::write(path, body)?;
    }
    match report.worst_failure() {
        None => {
            writeln!(out, "all {} checks passed", report.checks.len())?;
            Ok(EXIT_OK)
        }
        Some(w) => {
            writeln!(
                out,
                "FAILED: worst offender {} = {:.3e} (tolerance {:.3e}) at {}",
                w.name, w.value, w.tolerance, w.detail
            )?;
            Ok(EXIT_VALIDATION)
        }
    }
}

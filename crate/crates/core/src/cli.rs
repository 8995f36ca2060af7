//! The `olex` command line: solves, oracles, sweeps and verification suites
//! with JSON reports and CSV traces.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dual_volume::{measured_quadrature_tolerance, FunctionalContext};
use crate::ellipsoid::Ellipsoid;
use crate::error::{OlexError, Result};
use crate::linalg::{ball_volume, combine, expm_sym, trace_free_basis};
use crate::orlicz::{OrliczFunction, PhiSpec};
use crate::quadrature::{default_resolution, Scheme, SphericalGrid};
use crate::report::{
    inverse_ratio_bound, write_json, write_sweep_csv, write_trace_csv, Check, EllipsoidInfo, Functionals, GridInfo,
    InputEcho, Report, SolverInfo, SweepInfo, SweepRow, VolumeDiagnostics, SCHEMA,
};
use crate::solver::{
    isotropic_position, legendre_closed_form, limit_sweep, loewner, orlicz_legendre, solve_p2, Algorithm,
    SolveOptions, WarmStart,
};
use crate::star_body::{BodySpec, StarBody};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const DEFAULT_PHI: &str = r#"{"type":"power","p":2}"#;
const SPOT_CHECK_DIRECTIONS: usize = 32;
const SPOT_CHECK_EPS: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "olex", version, about = "Orlicz-Legendre ellipsoids of star bodies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orlicz-Legendre ellipsoid L_φK.
    Solve(SolveArgs),
    /// Legendre ellipsoid from second moments.
    Legendre(CommonArgs),
    /// Minimum-volume origin-symmetric ellipsoid containing K.
    Loewner(CommonArgs),
    /// L_{φ^p}K over a list of exponents, against the Löwner ellipsoid.
    Sweep(SweepArgs),
    /// Volume inequalities and optimality checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON body description.
    #[arg(long)]
    pub body: PathBuf,
    /// Orlicz function as inline JSON or a path to a JSON file.
    #[arg(long)]
    pub phi: Option<String>,
    /// Dimension; needed for balls, otherwise checked against the body.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub quad_resolution: Option<usize>,
    #[arg(long, value_enum)]
    pub quad_scheme: Option<SchemeArg>,
    /// Seed for monte_carlo_seeded grids and randomized checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub csv_trace: Option<PathBuf>,
    /// Include wall time in the report (breaks byte-identical output).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OptionArgs {
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub isotropy_tol: Option<f64>,
    #[arg(long)]
    pub step_init: Option<f64>,
    #[arg(long)]
    pub backtrack_factor: Option<f64>,
    #[arg(long)]
    pub outer_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    #[arg(long, value_enum)]
    pub warm_start: Option<WarmStartArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub options: OptionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub options: OptionArgs,
    /// Comma-separated increasing exponents, each ≥ 1.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p_list: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub options: OptionArgs,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    #[value(name = "uniform_circle")]
    UniformCircle,
    #[value(name = "fibonacci_sphere")]
    FibonacciSphere,
    #[value(name = "monte_carlo_seeded")]
    MonteCarloSeeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    #[value(name = "gradient")]
    Gradient,
    #[value(name = "derivative_free")]
    DerivativeFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WarmStartArg {
    #[value(name = "unit_ball")]
    UnitBall,
    #[value(name = "legendre")]
    Legendre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    #[value(name = "inequalities")]
    Inequalities,
    #[value(name = "isotropy")]
    Isotropy,
    #[value(name = "all")]
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Inequalities => "inequalities",
            Suite::Isotropy => "isotropy",
            Suite::All => "all",
        }
    }
}

impl OptionArgs {
    pub fn resolve(&self) -> Result<SolveOptions> {
        let d = SolveOptions::default();
        let opts = SolveOptions {
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            isotropy_tol: self.isotropy_tol.unwrap_or(d.isotropy_tol),
            step_init: self.step_init.unwrap_or(d.step_init),
            backtrack_factor: self.backtrack_factor.unwrap_or(d.backtrack_factor),
            outer_tol: self.outer_tol.unwrap_or(d.outer_tol),
            algorithm: match self.algorithm {
                Some(AlgorithmArg::DerivativeFree) => Algorithm::DerivativeFree,
                _ => Algorithm::Gradient,
            },
            warm_start: match self.warm_start {
                Some(WarmStartArg::Legendre) => WarmStart::Legendre,
                _ => WarmStart::UnitBall,
            },
        };
        opts.validate()?;
        Ok(opts)
    }
}

/// Loaded inputs shared by every command.
pub struct Inputs {
    pub spec: BodySpec,
    pub body: StarBody,
    pub phi_spec: PhiSpec,
    pub phi: OrliczFunction,
    pub grid: SphericalGrid,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| OlexError::Config(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| OlexError::Config(format!("invalid {what} in {}: {e}", path.display())))
}

/// Parses `--phi` as inline JSON, falling back to a file path.
pub fn parse_phi(arg: &str) -> Result<PhiSpec> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        serde_json::from_str(arg).map_err(|e| OlexError::Config(format!("invalid φ JSON: {e}")))
    } else {
        read_json(Path::new(arg), "φ")
    }
}

impl CommonArgs {
    pub fn load(&self) -> Result<Inputs> {
        let spec: BodySpec = read_json(&self.body, "body")?;
        // a ball carries no dimension of its own; default to the plane
        let dim = match (&spec, self.dim) {
            (BodySpec::Ball { .. }, None) => Some(2),
            (_, d) => d,
        };
        let body = StarBody::from_spec(&spec, dim)?;
        let n = body.dim();
        let phi_spec = parse_phi(self.phi.as_deref().unwrap_or(DEFAULT_PHI))?;
        let phi = OrliczFunction::from_spec(&phi_spec).map_err(as_config)?;
        let scheme = match self.quad_scheme {
            None => Scheme::default_for(n, self.seed),
            Some(SchemeArg::UniformCircle) => Scheme::UniformCircle,
            Some(SchemeArg::FibonacciSphere) => Scheme::FibonacciSphere,
            Some(SchemeArg::MonteCarloSeeded) => Scheme::MonteCarloSeeded { seed: self.seed },
        };
        let grid = SphericalGrid::build(n, self.quad_resolution.unwrap_or_else(|| default_resolution(n)), scheme)?;
        Ok(Inputs { spec: body.to_spec(), body, phi_spec, phi, grid })
    }
}

fn as_config(e: OlexError) -> OlexError {
    match e {
        OlexError::Domain(m) => OlexError::Config(m),
        e => e,
    }
}

/// Exit code for an error that prevented a report.
pub fn exit_code(err: &OlexError) -> i32 {
    match err {
        OlexError::Config(_)
        | OlexError::Io(_)
        | OlexError::Json(_)
        | OlexError::Csv(_)
        | OlexError::Capability(_)
        | OlexError::DegenerateInput(_) => EXIT_CONFIG,
        OlexError::Domain(_) | OlexError::Numeric(_) | OlexError::Internal(_) => EXIT_NUMERIC,
    }
}

/// Result of a command: the report, an optional CSV payload and the exit code.
pub struct Outcome {
    pub report: Report,
    pub csv: Option<Vec<u8>>,
    pub code: i32,
}

fn base_report(command: &str, inputs: &Inputs, with_phi: bool) -> Report {
    Report {
        schema: SCHEMA,
        command: command.into(),
        input: InputEcho {
            body: inputs.spec.clone(),
            phi: with_phi.then(|| inputs.phi_spec.clone()),
            dim: inputs.body.dim(),
            options: None,
            p_list: None,
            suite: None,
        },
        grid: GridInfo::of(&inputs.grid),
        ellipsoid: None,
        functionals: None,
        isotropy_residual: None,
        volumes: None,
        solver: None,
        sweep: None,
        checks: None,
        wall_time_s: None,
    }
}

fn volume_diagnostics(
    inputs: &Inputs,
    e: &Ellipsoid,
    l1_volume: Option<f64>,
    loewner_volume: Option<f64>,
) -> Result<VolumeDiagnostics> {
    let body_volume = inputs.body.quadrature_volume(&inputs.grid)?;
    Ok(VolumeDiagnostics {
        body_volume,
        ellipsoid_volume: e.volume(),
        ratio: e.volume() / body_volume,
        quadrature_tolerance: measured_quadrature_tolerance(&inputs.body, &inputs.grid)?,
        l1_volume,
        loewner_volume,
        inverse_ratio_bound: inverse_ratio_bound(inputs.body.dim()),
        inverse_ratio_bound_applies: inputs.body.is_symmetric_convex(),
    })
}

fn run_solve(args: &SolveArgs) -> Result<Outcome> {
    let inputs = args.common.load()?;
    let opts = args.options.resolve()?;
    let (e, rep) = orlicz_legendre(&inputs.body, &inputs.phi, &inputs.grid, &opts)?;
    let ctx = FunctionalContext::new(inputs.body.clone(), inputs.grid.clone(), inputs.phi.clone())?;
    let (l1, _) = orlicz_legendre(&inputs.body, &OrliczFunction::Power(1.0), &inputs.grid, &opts)?;
    let outer = loewner(&inputs.body, &inputs.grid)?;
    let mut report = base_report("solve", &inputs, true);
    report.input.options = Some(opts);
    report.ellipsoid = Some(EllipsoidInfo::of(&e));
    report.functionals = Some(Functionals::of(&ctx, &e)?);
    report.isotropy_residual = rep.final_residual();
    report.volumes = Some(volume_diagnostics(&inputs, &e, Some(l1.volume()), Some(outer.volume()))?);
    report.solver = Some(SolverInfo::of(&rep));
    let csv = match args.common.csv_trace {
        Some(_) => {
            let mut buf = Vec::new();
            write_trace_csv(&rep, &mut buf)?;
            Some(buf)
        }
        None => None,
    };
    let code = if rep.converged() { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Ok(Outcome { report, csv, code })
}

fn run_legendre(args: &CommonArgs) -> Result<Outcome> {
    let inputs = args.load()?;
    let e = legendre_closed_form(&inputs.body, &inputs.grid)?;
    let ctx = FunctionalContext::new(inputs.body.clone(), inputs.grid.clone(), OrliczFunction::Power(2.0))?;
    let mut report = base_report("legendre", &inputs, false);
    report.ellipsoid = Some(EllipsoidInfo::of(&e));
    report.functionals = Some(Functionals::of(&ctx, &e)?);
    report.volumes = Some(volume_diagnostics(&inputs, &e, None, None)?);
    Ok(Outcome { report, csv: None, code: EXIT_OK })
}

fn run_loewner(args: &CommonArgs) -> Result<Outcome> {
    let inputs = args.load()?;
    let e = loewner(&inputs.body, &inputs.grid)?;
    let mut report = base_report("loewner", &inputs, false);
    report.ellipsoid = Some(EllipsoidInfo::of(&e));
    report.volumes = Some(volume_diagnostics(&inputs, &e, None, Some(e.volume()))?);
    Ok(Outcome { report, csv: None, code: EXIT_OK })
}

fn run_sweep(args: &SweepArgs) -> Result<Outcome> {
    let inputs = args.common.load()?;
    let opts = args.options.resolve()?;
    let res = limit_sweep(&inputs.body, &inputs.phi, &args.p_list, &inputs.grid, &opts)?;
    let mut report = base_report("sweep", &inputs, true);
    report.input.options = Some(opts);
    report.input.p_list = Some(args.p_list.clone());
    let all_converged =
        res.entries.iter().all(|e| e.error.is_none() && e.terminated == Some(crate::solver::Termination::Converged));
    let csv = match args.common.csv_trace {
        Some(_) => {
            let mut buf = Vec::new();
            write_sweep_csv(&res.entries, &mut buf)?;
            Some(buf)
        }
        None => None,
    };
    report.sweep = Some(SweepInfo {
        loewner: EllipsoidInfo::of(&res.loewner),
        entries: res
            .entries
            .into_iter()
            .map(|e| SweepRow { ellipsoid: e.ellipsoid.as_ref().map(EllipsoidInfo::of), entry: e })
            .collect(),
    });
    let code = if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED };
    Ok(Outcome { report, csv, code })
}

/// Volume chain, lower bound, inverse ratio bound and active constraint.
fn inequality_checks(inputs: &Inputs, opts: &SolveOptions) -> Result<Vec<Check>> {
    let (body, grid, phi) = (&inputs.body, &inputs.grid, &inputs.phi);
    let tol = measured_quadrature_tolerance(body, grid)?;
    let vk = body.quadrature_volume(grid)?;
    let (l1, _) = orlicz_legendre(body, &OrliczFunction::Power(1.0), grid, opts)?;
    let (lphi, _) = orlicz_legendre(body, phi, grid, opts)?;
    let (lphi2, _) = orlicz_legendre(body, &OrliczFunction::power_of(phi.clone(), 2.0)?, grid, opts)?;
    let (lphi4, _) = orlicz_legendre(body, &OrliczFunction::power_of(phi.clone(), 4.0)?, grid, opts)?;
    let linf = loewner(body, grid)?;
    let chain = [("L1", &l1), ("Lphi", &lphi), ("Lphi^2", &lphi2), ("Lphi^4", &lphi4), ("Linf", &linf)];
    let mut checks = Vec::new();
    for w in chain.windows(2) {
        let (a, b) = (w[0].1.volume(), w[1].1.volume());
        checks.push(Check::at_most(format!("volume_chain V({}) <= V({})", w[0].0, w[1].0), a, b, 2.0 * tol * b));
    }
    checks.push(Check::at_least("volume_lower_bound V(Lphi)/V(K) >= 1", lphi.volume() / vk, 1.0, tol));
    if body.is_symmetric_convex() {
        let n = body.dim();
        checks.push(Check::at_least("inverse_ratio_bound V(K)/V(Lphi)", vk / lphi.volume(), inverse_ratio_bound(n), 1e-3));
    }
    let ctx = FunctionalContext::new(body.clone(), grid.clone(), phi.clone())?;
    let o = ctx.o_phi(&lphi)?;
    checks.push(Check::at_most("active_constraint |O_phi(K, Lphi) - 1|", (o - 1.0).abs(), 0.0, 1e-8));
    Ok(checks)
}

/// Certificate, local minimality spot check and normalization relation.
fn isotropy_checks(inputs: &Inputs, opts: &SolveOptions, seed: u64) -> Result<Vec<Check>> {
    let (body, grid, phi) = (&inputs.body, &inputs.grid, &inputs.phi);
    let n = body.dim();
    let pos = isotropic_position(body, phi, grid, opts)?;
    let mut checks = vec![Check::at_most("isotropy_residual", pos.residual, opts.isotropy_tol, 0.0)];
    let ctx = FunctionalContext::new(body.clone(), grid.clone(), phi.clone())?;
    let a = crate::linalg::checked_inverse(&pos.t, "isotropic position")?;
    let f0 = ctx.dual_orlicz_mixed_volume(&Ellipsoid::from_factor(&a)?)?;
    let basis = trace_free_basis(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..SPOT_CHECK_DIRECTIONS {
        let c: Vec<f64> = (0..basis.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let l = combine(&basis, &c);
        let l = &l / l.norm();
        let moved = &a * expm_sym(&(l * SPOT_CHECK_EPS));
        let f = ctx.dual_orlicz_mixed_volume(&Ellipsoid::from_factor(&moved)?)?;
        worst = worst.min((f - f0) / f0);
    }
    checks.push(Check::at_least("local_minimality min relative objective change", worst, 0.0, 1e-6));
    let (normalized, _) = solve_p2(body, phi, grid, opts)?;
    let (l, _) = orlicz_legendre(body, phi, grid, opts)?;
    let rescaled = l.scaled((ball_volume(n) / l.volume()).powf(1.0 / n as f64));
    checks.push(Check::at_most("normalization_relation", rescaled.shape_distance(&normalized), 0.0, 1e-8));
    Ok(checks)
}

fn run_verify(args: &VerifyArgs) -> Result<Outcome> {
    let inputs = args.common.load()?;
    let opts = args.options.resolve()?;
    let mut checks = Vec::new();
    if matches!(args.suite, Suite::Inequalities | Suite::All) {
        checks.extend(inequality_checks(&inputs, &opts)?);
    }
    if matches!(args.suite, Suite::Isotropy | Suite::All) {
        checks.extend(isotropy_checks(&inputs, &opts, args.common.seed)?);
    }
    let passed = checks.iter().all(|c| c.passed);
    let mut report = base_report("verify", &inputs, true);
    report.input.options = Some(opts);
    report.input.suite = Some(args.suite.name().into());
    report.checks = Some(checks);
    Ok(Outcome { report, csv: None, code: if passed { EXIT_OK } else { EXIT_NOT_CONVERGED } })
}

fn common(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Solve(a) => &a.common,
        Command::Legendre(a) | Command::Loewner(a) => a,
        Command::Sweep(a) => &a.common,
        Command::Verify(a) => &a.common,
    }
}

/// Runs a parsed command and returns the outcome without writing anything.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let c = common(&cli.command);
    if c.csv_trace.is_some() && !matches!(cli.command, Command::Solve(_) | Command::Sweep(_)) {
        return Err(OlexError::Config("--csv-trace applies to solve and sweep only".into()));
    }
    let start = Instant::now();
    let mut outcome = match &cli.command {
        Command::Solve(a) => run_solve(a)?,
        Command::Legendre(a) => run_legendre(a)?,
        Command::Loewner(a) => run_loewner(a)?,
        Command::Sweep(a) => run_sweep(a)?,
        Command::Verify(a) => run_verify(a)?,
    };
    if c.timing {
        outcome.report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    Ok(outcome)
}

fn write_outputs(cli: &Cli, outcome: &Outcome) -> Result<()> {
    let c = common(&cli.command);
    match &c.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_json(&outcome.report, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_json(&outcome.report, &mut w)?;
        }
    }
    if let (Some(path), Some(bytes)) = (&c.csv_trace, &outcome.csv) {
        std::fs::write(path, bytes)?;
    }
    Ok(())
}

/// Parses `args`, runs the command, writes its outputs and returns the exit
/// code. Errors go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("olex: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = write_outputs(&cli, &outcome) {
        eprintln!("olex: {e}");
        return EXIT_CONFIG;
    }
    outcome.code
}

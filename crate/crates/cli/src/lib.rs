//! Command-line front end for `requ-forge`.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on invalid input
//! (including unreadable files and clap usage errors).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use requ_forge::approximator::{
    bump_net_with, full_approximator_with, BuildOptions, BuildReport, BumpProfile,
};
use requ_forge::calculus::identity_net;
use requ_forge::gadgets::{
    indicator_net, polynomial_net, product2, product_d, sqrt_iterations, sqrt_net_with_iterations,
};
use requ_forge::partition::{build_partitions, Level};
use requ_forge::registry::builtin_on;
use requ_forge::taylor::{choose_m, taylor_constant};
use requ_forge::verify::{sample_domain, sweep};
use requ_forge::{Network, WeightFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Relative allowance on the sqrt check. At `x = 0` the iteration converges
/// to `sqrt(eps^2) = eps` from below, so the bound is tight there, and the
/// rounding of the bias `eps^2 - t` moves the result by about `1e-10 eps`.
pub const SQRT_ROUNDING: f64 = 1e-9;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "REQU_FORGE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "requ-forge",
    version,
    about = "Explicit ReQU networks for smooth functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the approximating network for a registry function.
    Build(BuildArgs),
    /// Compare a saved network against a registry function on random points.
    Sweep(SweepArgs),
    /// Build a single gadget and evaluate it.
    Gadget(GadgetArgs),
    /// Build the square root network and check it on a grid of [0, t].
    Sqrt(SqrtArgs),
    /// Evaluate a saved network at one point.
    Eval(EvalArgs),
    /// Print the size of a saved network.
    Inspect(InspectArgs),
    /// Rewrite a saved network with dense or sparse weights.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long = "fn")]
    pub function: String,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub r: f64,
    /// Declared Hölder radius on the domain; defaults to the registry bound.
    #[arg(long = "R")]
    pub radius: Option<f64>,
    #[arg(long)]
    pub eps: f64,
    /// Half-width `a` of the domain `[-a, a]^d`.
    #[arg(long, default_value_t = 0.5)]
    pub domain: f64,
    #[arg(long = "M-override")]
    pub m_override: Option<usize>,
    #[arg(long = "c-override")]
    pub c_override: Option<f64>,
    /// Seed for the Taylor constant validation.
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Network JSON path.
    #[arg(long)]
    pub out: PathBuf,
    /// Report JSON path.
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Network JSON path.
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long = "fn")]
    pub function: String,
    /// Input dimension; must match the network when given.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Build report supplying eps and the domain.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub domain: Option<f64>,
    /// CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GadgetName {
    Product2,
    ProductD,
    Identity,
    Indicator,
    Polynomial,
    Bump,
}

#[derive(Debug, Args)]
pub struct GadgetArgs {
    #[arg(value_enum)]
    pub name: GadgetName,
    #[arg(long)]
    pub d: Option<usize>,
    /// Identity bound or indicator sharpness.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Shift index of the bump grid.
    #[arg(long, default_value_t = 1)]
    pub kappa: usize,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Use the ramp-shaped bump profile instead of the symmetric one.
    #[arg(long)]
    pub printed: bool,
    /// Polynomial degree.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub a: Vec<f64>,
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub b: Vec<f64>,
    /// Polynomial coefficients in graded order.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub weights: Vec<f64>,
    /// Input values, or `at-center` for the bump.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    pub probe: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SqrtArgs {
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub eps: f64,
    /// Grid points on [0, t], endpoints included.
    #[arg(long, default_value_t = 10_001)]
    pub points: usize,
    /// Number of iterations; defaults to the closed-form bound.
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, num_args = 1.., allow_negative_numbers = true, required = true)]
    pub x: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub net: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dense,
    Sparse,
    Auto,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    pub format: Format,
    #[arg(long)]
    pub out: PathBuf,
}

/// A failed command: the message and the exit code to report.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

impl From<requ_forge::Error> for Failure {
    fn from(e: requ_forge::Error) -> Self {
        invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        invalid(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Build(a) => cmd_build(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Gadget(a) => cmd_gadget(&a, out),
        Command::Sqrt(a) => cmd_sqrt(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Inspect(a) => cmd_inspect(&a, out),
        Command::Export(a) => cmd_export(&a),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_net(path: &Path) -> Result<Network, Failure> {
    Network::from_json(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn cmd_build(a: &BuildArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if a.r < 1.0 {
        return Err(invalid(format!("r must be at least 1, got {}", a.r)));
    }
    if !(a.domain.is_finite() && a.domain > 0.0) {
        return Err(invalid(format!(
            "domain half-width must be positive, got {}",
            a.domain
        )));
    }
    // The construction evaluates derivatives on [-2a, 2a]^d.
    let mut f = builtin_on(&a.function, a.d, a.r, 2.0 * a.domain)?;
    if let Some(radius) = a.radius {
        f = f.with_radius(radius)?;
    }
    let opts = BuildOptions {
        domain_half_width: a.domain,
        m_override: a.m_override,
        c_override: a.c_override,
        validation_seed: a.seed,
        ..BuildOptions::default()
    };
    let build = full_approximator_with(&f, a.eps, &opts)?;
    let rep = &build.report;
    if a.m_override.is_some() {
        let c = a.c_override.unwrap_or_else(|| taylor_constant(a.r, a.d));
        let needed = choose_m(rep.window_eps, a.r, rep.construction_radius, a.d, c)?;
        if rep.m < needed {
            writeln!(
                err,
                "warning: M = {} is below the {needed} needed for eps = {}",
                rep.m, a.eps
            )?;
        }
    }
    write_file(&a.out, &build.network.to_json())?;
    write_file(&a.report, &rep.to_json())?;
    writeln!(
        out,
        "built {} d={} r={} eps={}: M={} L={}/{} N={}/{} nonzero={}",
        rep.function,
        rep.d,
        rep.r,
        rep.eps,
        rep.m,
        rep.measured.hidden_layers,
        rep.predicted_depth,
        rep.measured.max_width,
        rep.predicted_width,
        rep.measured.nonzero_weights
    )?;
    if !rep.within_budget() {
        writeln!(out, "FAIL: complexity exceeds the closed-form budget")?;
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_OK)
}

/// Runs `job` on a pool capped by [`THREADS_ENV`] when it is set.
fn with_threads<R: Send>(job: impl FnOnce() -> R + Send) -> Result<R, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                invalid(format!(
                    "{THREADS_ENV} must be a positive integer, got `{v}`"
                ))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| invalid(e.to_string()))?;
            Ok(pool.install(job))
        }
        Err(_) => Ok(job()),
    }
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Outcome {
    let net = load_net(&a.net)?;
    let d = net.input_dim();
    if let Some(given) = a.d {
        if given != d {
            return Err(invalid(format!(
                "--d is {given} but the network takes {d} inputs"
            )));
        }
    }
    let report = match &a.report {
        Some(p) => Some(
            BuildReport::from_json(&read(p)?)
                .map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    if let Some(rep) = &report {
        if rep.d != d {
            return Err(invalid(format!(
                "report has d = {} but the network takes {d} inputs",
                rep.d
            )));
        }
        if rep.function != a.function {
            return Err(invalid(format!(
                "report was built for `{}`, not `{}`",
                rep.function, a.function
            )));
        }
    }
    let eps = a.eps.or(report.as_ref().map(|r| r.eps));
    let domain = a
        .domain
        .or(report.as_ref().map(|r| r.domain_half_width))
        .unwrap_or(0.5);
    if !(domain.is_finite() && domain > 0.0) {
        return Err(invalid(format!(
            "domain half-width must be positive, got {domain}"
        )));
    }
    // Values do not depend on r; 1 is the smallest accepted smoothness.
    let f = builtin_on(&a.function, d, 1.0, domain)?;
    let points = sample_domain(d, domain, a.points, a.seed);
    let result = with_threads(|| sweep(&net, |x| f.value(x), &points))??;
    if let Some(path) = &a.out {
        write_file(path, &result.to_csv())?;
    }
    if result.rows.is_empty() {
        writeln!(out, "no samples")?;
        return Ok(EXIT_OK);
    }
    let max = result.max_abs_err();
    match eps {
        Some(e) => {
            let verdict = if max <= e { "PASS" } else { "FAIL" };
            writeln!(out, "max abs_err = {max:.6e} (eps = {e}) {verdict}")?;
            Ok(if max <= e { EXIT_OK } else { EXIT_FAIL })
        }
        None => {
            writeln!(out, "max abs_err = {max:.6e}")?;
            Ok(EXIT_OK)
        }
    }
}

fn need<T: Copy>(v: Option<T>, flag: &str, gadget: &str) -> Result<T, Failure> {
    v.ok_or_else(|| invalid(format!("gadget {gadget} needs --{flag}")))
}

fn cmd_gadget(a: &GadgetArgs, out: &mut dyn Write) -> Outcome {
    let name = a
        .name
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let net = match a.name {
        GadgetName::Product2 => product2(),
        GadgetName::ProductD => product_d(need(a.d, "d", &name)?)?,
        GadgetName::Identity => identity_net(a.s.unwrap_or(1.0))?,
        GadgetName::Indicator => {
            if a.a.is_empty() || a.a.len() != a.b.len() {
                return Err(invalid(
                    "gadget indicator needs --a and --b of equal length",
                ));
            }
            indicator_net(&a.a, &a.b, need(a.s, "s", &name)?)?
        }
        GadgetName::Polynomial => polynomial_net(
            need(a.d, "d", &name)?,
            need(a.n, "n", &name)?,
            &a.weights,
            a.s.unwrap_or(2.0),
        )?,
        GadgetName::Bump => {
            let pp = build_partitions(need(a.m, "M", &name)?, need(a.d, "d", &name)?, a.kappa)?;
            let profile = if a.printed {
                BumpProfile::Printed
            } else {
                BumpProfile::Symmetric
            };
            bump_net_with(&pp, a.r, profile)?
        }
    };
    let c = net.complexity();
    writeln!(
        out,
        "{name}: hidden_layers={} max_width={} nonzero={}",
        c.hidden_layers, c.max_width, c.nonzero_weights
    )?;
    if !a.probe.is_empty() {
        let x = probe_point(a, &net)?;
        let y = net.realize(&x)?;
        let show = |v: &[f64]| {
            v.iter()
                .map(|t| format!("{t}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(out, "{} -> {}", show(&x), show(&y))?;
    }
    if let Some(path) = &a.out {
        write_file(path, &net.to_json())?;
    }
    Ok(EXIT_OK)
}

fn probe_point(a: &GadgetArgs, net: &Network) -> Result<Vec<f64>, Failure> {
    if a.probe.len() == 1 && a.probe[0] == "at-center" {
        if a.name != GadgetName::Bump {
            return Err(invalid("`at-center` only applies to the bump gadget"));
        }
        // Center of the fine cube holding the origin.
        let pp = build_partitions(a.m.unwrap_or(2), net.input_dim(), a.kappa)?;
        return Ok(pp
            .locate(&vec![0.0; net.input_dim()], Level::Fine)?
            .center());
    }
    let x = a
        .probe
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| invalid(format!("bad probe value `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if x.len() != net.input_dim() {
        return Err(invalid(format!(
            "probe has {} values but the gadget takes {}",
            x.len(),
            net.input_dim()
        )));
    }
    Ok(x)
}

fn cmd_sqrt(a: &SqrtArgs, out: &mut dyn Write) -> Outcome {
    let n = match a.iterations {
        Some(n) => n,
        None => sqrt_iterations(a.t, a.eps)?,
    };
    let net = sqrt_net_with_iterations(a.t, a.eps, n)?;
    if a.points < 2 {
        return Err(invalid("the sqrt grid needs at least 2 points"));
    }
    let max = with_threads(|| {
        use rayon::prelude::*;
        (0..a.points)
            .into_par_iter()
            .map(|k| {
                let x = a.t * k as f64 / (a.points - 1) as f64;
                net.realize_scalar(&[x]).map(|y| (y - x.sqrt()).abs())
            })
            .collect::<Result<Vec<_>, _>>()
    })??
    .into_iter()
    .fold(0.0, f64::max);
    let c = net.complexity();
    let pass = max <= a.eps * (1.0 + SQRT_ROUNDING);
    writeln!(
        out,
        "sqrt t={} eps={}: n={n} hidden_layers={} max_width={} nonzero={} max_err={max:.16e} {}",
        a.t,
        a.eps,
        c.hidden_layers,
        c.max_width,
        c.nonzero_weights,
        if pass { "PASS" } else { "FAIL" }
    )?;
    if let Some(path) = &a.out {
        write_file(path, &net.to_json())?;
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Outcome {
    let net = load_net(&a.net)?;
    let y = net.realize(&a.x)?;
    let text: Vec<String> = y.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(out, "{}", text.join(" "))?;
    Ok(EXIT_OK)
}

fn cmd_inspect(a: &InspectArgs, out: &mut dyn Write) -> Outcome {
    let net = load_net(&a.net)?;
    let c = net.complexity();
    writeln!(
        out,
        "input_dim={} output_dim={} hidden_layers={} max_width={} nonzero={}",
        net.input_dim(),
        net.output_dim(),
        c.hidden_layers,
        c.max_width,
        c.nonzero_weights
    )?;
    let widths: Vec<String> = net.widths().iter().map(usize::to_string).collect();
    writeln!(out, "widths {}", widths.join(" "))?;
    Ok(EXIT_OK)
}

fn cmd_export(a: &ExportArgs) -> Outcome {
    let net = load_net(&a.net)?;
    let format = match a.format {
        Format::Dense => WeightFormat::Dense,
        Format::Sparse => WeightFormat::Sparse,
        Format::Auto => WeightFormat::Auto,
    };
    write_file(&a.out, &net.to_json_with(format))?;
    Ok(EXIT_OK)
}

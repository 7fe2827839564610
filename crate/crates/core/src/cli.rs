//! `kilab` command-line front end.
//!
//! Options can also come from a plain `key=value` file (`--config FILE`),
//! where keys are the long option names of the subcommand. Options given on
//! the command line win over the file. Output files are written only after
//! the whole computation has succeeded.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgAction, ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::diagnostics::{self, ConvergenceOptions, DecayOptions, Target, DEFAULT_GRID_FACTOR};
use crate::error::{KilabError, Result};
use crate::exec::Exec;
use crate::geometry::{self, GridScheme, ManifoldDescriptor, ManifoldKind, Point};
use crate::interpolation::{self, AssembleOptions};
use crate::io::{self, Provenance};
use crate::kernels::{Kernel, KernelFamily, KernelSpec};
use crate::pointsets::{self, PointSet};

#[derive(Parser, Debug)]
#[command(name = "kilab", version, about = "Kernel interpolation experiments on spheres and boxes")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a node set.
    Gen(GenArgs),
    /// Mesh norm, separation radius and mesh ratio of a node set.
    MeshStats(MeshStatsArgs),
    /// Solve an interpolation problem and write the coefficients.
    Solve(SolveArgs),
    /// Sample the Lebesgue function on a grid.
    Lebesgue(LebesgueArgs),
    /// Decay profile of one Lagrange function.
    Decay(DecayArgs),
    /// Convergence study over increasing node counts.
    Converge(ConvergeArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// key=value file with defaults for this subcommand's options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print a JSON summary on stdout.
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Fibonacci,
    Random,
    Halton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Fibonacci,
    Tensor,
    Random,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Grid size; defaults to 40 times the node count.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Grid construction; fibonacci on the sphere and tensor in a box by default.
    #[arg(long, value_enum)]
    pub grid_scheme: Option<GridKind>,
    /// Seed for random grids.
    #[arg(long, default_value_t = 0)]
    pub grid_seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub shape: Shape,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Box bounds `lo:hi,lo:hi,...`; selects a box for halton/random.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub box_bounds: Option<String>,
    /// Unit-box dimension for halton when no --box is given.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct MeshStatsArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    pub box_bounds: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub values: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    pub box_bounds: Option<String>,
    /// Diagonal regularization τ added to the kernel matrix.
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct LebesgueArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long = "box", allow_hyphen_values = true)]
    pub box_bounds: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DecayArgs {
    #[arg(long)]
    pub kernel: String,
    #[arg(long)]
    pub points: PathBuf,
    /// Index of the Lagrange center.
    #[arg(long, default_value_t = 0)]
    pub center: usize,
    #[arg(long, default_value_t = 40)]
    pub bins: usize,
    /// Fit range `lo,hi` in units of h.
    #[arg(long, allow_hyphen_values = true)]
    pub fit_range: Option<String>,
    #[arg(long = "box", allow_hyphen_values = true)]
    pub box_bounds: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub kernel: String,
    /// exp-dot, one, const:<c> or span.
    #[arg(long, default_value = "exp-dot")]
    pub target: String,
    /// Direction z₀ for exp-dot, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// Increasing node counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    /// Box bounds for matern/tps studies; unit box of the kernel dimension by default.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub box_bounds: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let (cli, matches) = match parse(&args) {
        Ok(Parsed::Run(cli, m)) => (cli, m),
        Ok(Parsed::Exit(code)) => return code,
        Err(e) => return report_error(&e),
    };
    init_logging(cli.verbose);
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let echo = config_echo(name, sub);
    match dispatch(&cli.command, echo) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &KilabError) -> i32 {
    eprintln!("kilab: error[{}]: {e}", e.category());
    e.exit_code()
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    // configured from flags only, never from the environment
    let _ = env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).try_init();
}

enum Parsed {
    Run(Cli, ArgMatches),
    Exit(i32),
}

fn clap_failure(e: clap::Error) -> Result<Parsed> {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            Ok(Parsed::Exit(if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 }))
        }
        _ => Err(KilabError::Config(e.render().to_string().trim_end().to_string())),
    }
}

fn parse(args: &[OsString]) -> Result<Parsed> {
    let merged = match find_config(args) {
        None => args.to_vec(),
        Some((pos, name, path)) => {
            let mut merged: Vec<OsString> = args[..=pos].to_vec();
            merged.extend(config_args(&name, Path::new(&path))?.into_iter().map(OsString::from));
            merged.extend_from_slice(&args[pos + 1..]);
            merged
        }
    };
    let matches = match Cli::command().try_get_matches_from(&merged) {
        Ok(m) => m,
        Err(e) => return clap_failure(e),
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| KilabError::Config(e.to_string()))?;
    Ok(Parsed::Run(cli, matches))
}

/// Locates the subcommand token and a `--config` value after it, before clap
/// validates required options that the file may supply.
fn find_config(args: &[OsString]) -> Option<(usize, String, OsString)> {
    let pos = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-'))? + 1;
    let name = args[pos].to_string_lossy().into_owned();
    let rest = &args[pos + 1..];
    for (i, a) in rest.iter().enumerate() {
        let a = a.to_string_lossy();
        if a == "--config" {
            return rest.get(i + 1).map(|v| (pos, name, v.clone()));
        }
        if let Some(v) = a.strip_prefix("--config=") {
            return Some((pos, name, OsString::from(v)));
        }
    }
    None
}

/// Parses a `key=value` file into command-line arguments for `subcommand`.
fn config_args(subcommand: &str, path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(subcommand)
        .ok_or_else(|| KilabError::Config(format!("unknown subcommand '{subcommand}'")))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| KilabError::Parse {
            line: i + 1,
            msg: format!("expected key=value, got '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key) && key != "config" && key != "help")
            .ok_or_else(|| KilabError::Config(format!("unknown config key '{key}' for {subcommand}")))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value {
                "true" => out.push(format!("--{key}")),
                "false" => {}
                _ => return Err(KilabError::Config(format!("{key} must be true or false, got '{value}'"))),
            }
        } else {
            out.push(format!("--{key}={value}"));
        }
    }
    Ok(out)
}

/// Effective option values of the subcommand, in declaration order.
fn config_echo(name: &str, sub: &ArgMatches) -> Vec<(String, String)> {
    let cmd = Cli::command();
    let known: Vec<String> = cmd
        .find_subcommand(name)
        .map(|c| c.get_arguments().map(|a| a.get_id().to_string()).collect())
        .unwrap_or_default();
    sub.ids()
        .filter(|id| known.iter().any(|k| k == id.as_str()))
        .filter_map(|id| {
            let raw = sub.get_raw(id.as_str())?;
            let vals: Vec<String> = raw.map(|v| v.to_string_lossy().into_owned()).collect();
            Some((id.as_str().replace('_', "-"), vals.join(",")))
        })
        .collect()
}

fn dispatch(cmd: &Command, echo: Vec<(String, String)>) -> Result<()> {
    match cmd {
        Command::Gen(a) => cmd_gen(a, echo),
        Command::MeshStats(a) => cmd_mesh_stats(a, echo),
        Command::Solve(a) => cmd_solve(a, echo),
        Command::Lebesgue(a) => cmd_lebesgue(a, echo),
        Command::Decay(a) => cmd_decay(a, echo),
        Command::Converge(a) => cmd_converge(a, echo),
    }
}

/// Parses `lo:hi,lo:hi,...`.
pub fn parse_box(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| KilabError::Config(format!("box interval '{pair}' is not lo:hi")))?;
            let p = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| KilabError::Config(format!("bad box bound '{v}'")))
            };
            Ok((p(lo)?, p(hi)?))
        })
        .collect()
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| KilabError::Config(format!("bad number '{v}' in {what}")))
        })
        .collect()
}

fn load_points(path: &Path, box_bounds: &Option<String>) -> Result<PointSet> {
    let bounds = box_bounds.as_deref().map(parse_box).transpose()?;
    let file = fs::File::open(path)?;
    let label = path.display().to_string();
    io::read_points(BufReader::new(file), bounds, &label)
}

fn build_grid(man: &ManifoldDescriptor, n_nodes: usize, g: &GridArgs) -> Result<Vec<Point>> {
    let n = g.grid_n.unwrap_or(DEFAULT_GRID_FACTOR * n_nodes);
    let scheme = match (g.grid_scheme, man.kind()) {
        (Some(GridKind::Fibonacci), _) => GridScheme::Fibonacci,
        (Some(GridKind::Tensor), _) => GridScheme::Tensor,
        (Some(GridKind::Random), _) => GridScheme::Random(g.grid_seed),
        (None, ManifoldKind::UnitSphere2) => GridScheme::Fibonacci,
        (None, ManifoldKind::FlatBox) => GridScheme::Tensor,
    };
    geometry::evaluation_grid(man, n, scheme)
}

fn grid_seed(g: &GridArgs) -> Option<u64> {
    (g.grid_scheme == Some(GridKind::Random)).then_some(g.grid_seed)
}

fn parse_kernel(s: &str) -> Result<Arc<Kernel>> {
    let spec: KernelSpec = s.parse()?;
    Ok(Arc::new(Kernel::new(spec)?))
}

/// Renders with `render` into memory, then writes the file in one go.
fn write_output(path: &Path, render: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

fn print_json(enabled: bool, value: serde_json::Value) {
    if enabled {
        println!("{value}");
    }
}

fn cmd_gen(a: &GenArgs, echo: Vec<(String, String)>) -> Result<()> {
    if a.n == 0 {
        return Err(KilabError::Config("n must be at least 1".into()));
    }
    let bounds = a.box_bounds.as_deref().map(parse_box).transpose()?;
    let box_man = || match &bounds {
        Some(b) => ManifoldDescriptor::flat_box(b.clone()),
        None => ManifoldDescriptor::unit_box(a.dim),
    };
    let (xi, seed) = match a.shape {
        Shape::Fibonacci => {
            if bounds.is_some() {
                return Err(KilabError::Config("fibonacci nodes live on the sphere; drop --box".into()));
            }
            (pointsets::fibonacci_sphere(a.n)?, None)
        }
        Shape::Random if bounds.is_none() => (pointsets::random_sphere(a.n, a.seed)?, Some(a.seed)),
        Shape::Random => {
            let man = box_man()?;
            let nodes = geometry::evaluation_grid(&man, a.n, GridScheme::Random(a.seed))?;
            (PointSet::new(nodes, man, format!("random-box({},{})", a.n, a.seed))?, Some(a.seed))
        }
        Shape::Halton => (pointsets::halton_box(a.n, &box_man()?)?, None),
    };
    let prov = Provenance::new("gen", echo, seed);
    write_output(&a.out, |w| io::write_points(w, &xi, &prov))?;
    print_json(
        a.common.json,
        json!({
            "command": "gen",
            "n": xi.len(),
            "kind": match xi.manifold().kind() { ManifoldKind::UnitSphere2 => "sphere", ManifoldKind::FlatBox => "box" },
            "dimension": xi.manifold().dimension(),
            "out": a.out.display().to_string(),
        }),
    );
    Ok(())
}

fn cmd_mesh_stats(a: &MeshStatsArgs, echo: Vec<(String, String)>) -> Result<()> {
    let xi = load_points(&a.points, &a.box_bounds)?;
    let grid = build_grid(xi.manifold(), xi.len(), &a.grid)?;
    let st = geometry::mesh_stats(&xi, &grid)?;
    let prov = Provenance::new("mesh-stats", echo, grid_seed(&a.grid));
    let render = |w: &mut dyn Write| -> Result<()> {
        writeln!(w, "# kilab-mesh v1")?;
        prov.write_lines(w)?;
        writeln!(w, "n,mesh_norm_h,separation_q,mesh_ratio_rho,grid_size")?;
        writeln!(
            w,
            "{},{},{},{},{}",
            xi.len(),
            io::fmt_f64(st.mesh_norm_h),
            io::fmt_f64(st.separation_q),
            io::fmt_f64(st.mesh_ratio_rho),
            st.grid_size_used
        )?;
        Ok(())
    };
    match &a.out {
        Some(path) => write_output(path, render)?,
        None if !a.common.json => render(&mut std::io::stdout().lock())?,
        None => {}
    }
    print_json(
        a.common.json,
        json!({
            "command": "mesh-stats",
            "n": xi.len(),
            "mesh_norm_h": st.mesh_norm_h,
            "separation_q": finite_or_null(st.separation_q),
            "mesh_ratio_rho": finite_or_null(st.mesh_ratio_rho),
            "grid_size": st.grid_size_used,
        }),
    );
    Ok(())
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

fn cmd_solve(a: &SolveArgs, echo: Vec<(String, String)>) -> Result<()> {
    let kernel = parse_kernel(&a.kernel)?;
    let xi = Arc::new(load_points(&a.points, &a.box_bounds)?);
    let values = io::read_values(BufReader::new(fs::File::open(&a.values)?))?;
    let sys = interpolation::assemble_with(
        kernel,
        Arc::clone(&xi),
        AssembleOptions {
            jitter: a.jitter,
            exec: Exec::default(),
        },
    )?;
    let s = interpolation::interpolate(&sys, &values)?;
    let prov = Provenance::new("solve", echo, None);
    write_output(&a.out, |w| io::write_coeffs(w, &s, &prov))?;
    print_json(
        a.common.json,
        json!({
            "command": "solve",
            "kernel": sys.kernel().spec().to_string(),
            "n": sys.n(),
            "poly_terms": sys.poly_terms(),
        }),
    );
    Ok(())
}

fn cmd_lebesgue(a: &LebesgueArgs, echo: Vec<(String, String)>) -> Result<()> {
    let kernel = parse_kernel(&a.kernel)?;
    let xi = Arc::new(load_points(&a.points, &a.box_bounds)?);
    let grid = build_grid(xi.manifold(), xi.len(), &a.grid)?;
    let sys = interpolation::assemble_with(
        kernel,
        Arc::clone(&xi),
        AssembleOptions {
            jitter: a.jitter,
            exec: Exec::default(),
        },
    )?;
    let report = diagnostics::lebesgue_report(&sys, &grid)?;
    let prov = Provenance::new("lebesgue", echo, grid_seed(&a.grid));
    write_output(&a.out, |w| io::write_lebesgue(w, xi.manifold(), &grid, &report, &prov))?;
    print_json(
        a.common.json,
        json!({
            "command": "lebesgue",
            "kernel": report.kernel,
            "L_est": report.l_est,
            "n_nodes": report.n_nodes,
            "grid_size": report.grid_size,
            "h": report.mesh.mesh_norm_h,
            "q": finite_or_null(report.mesh.separation_q),
            "rho": finite_or_null(report.mesh.mesh_ratio_rho),
        }),
    );
    Ok(())
}

fn cmd_decay(a: &DecayArgs, echo: Vec<(String, String)>) -> Result<()> {
    let kernel = parse_kernel(&a.kernel)?;
    let xi = Arc::new(load_points(&a.points, &a.box_bounds)?);
    let fit_range = match &a.fit_range {
        None => None,
        Some(s) => match parse_list(s, "fit-range")?.as_slice() {
            [lo, hi] if lo < hi => Some((*lo, *hi)),
            _ => return Err(KilabError::Config(format!("fit-range must be lo,hi with lo < hi, got '{s}'"))),
        },
    };
    let grid = build_grid(xi.manifold(), xi.len(), &a.grid)?;
    let mesh = geometry::mesh_stats(&xi, &grid)?;
    let sys = interpolation::assemble_with(
        kernel,
        Arc::clone(&xi),
        AssembleOptions {
            jitter: a.jitter,
            exec: Exec::default(),
        },
    )?;
    let chi = interpolation::lagrange(&sys, a.center)?;
    let fit = diagnostics::decay_profile_with(
        &chi,
        &grid,
        &mesh,
        a.bins,
        DecayOptions {
            fit_range,
            exec: Exec::default(),
        },
    )?;
    let prov = Provenance::new("decay", echo, grid_seed(&a.grid));
    write_output(&a.out, |w| io::write_decay(w, &fit, &prov))?;
    print_json(
        a.common.json,
        json!({
            "command": "decay",
            "nu": fit.nu_fit,
            "r2": fit.r_squared,
            "intercept": fit.intercept,
            "fit_range": [fit.fit_range.0, fit.fit_range.1],
            "bins_in_fit": fit.bins_in_fit,
            "h": mesh.mesh_norm_h,
        }),
    );
    Ok(())
}

fn cmd_converge(a: &ConvergeArgs, echo: Vec<(String, String)>) -> Result<()> {
    let spec: KernelSpec = a.kernel.parse()?;
    let man = match (&a.box_bounds, spec.family) {
        (Some(b), _) => ManifoldDescriptor::flat_box(parse_box(b)?)?,
        (None, KernelFamily::ZonalSobolevS2) => ManifoldDescriptor::sphere(),
        (None, _) => ManifoldDescriptor::unit_box(spec.d as usize)?,
    };
    spec.compatible_with(&man)?;
    let z0 = a.z0.as_deref().map(|s| parse_list(s, "z0")).transpose()?;
    let target = Target::parse(&a.target, &man, z0)?;
    let largest = a.sizes.iter().copied().max().unwrap_or(1);
    let grid = build_grid(&man, largest, &a.grid)?;
    let study = diagnostics::convergence_study_with(
        &spec,
        &target,
        &a.sizes,
        &man,
        &grid,
        ConvergenceOptions {
            jitter: a.jitter,
            exec: Exec::default(),
        },
    )?;
    let prov = Provenance::new("converge", echo, grid_seed(&a.grid));
    write_output(&a.out, |w| io::write_converge(w, &study, &prov))?;
    let rows: Vec<_> = study
        .rows
        .iter()
        .map(|r| json!({"n": r.n, "h": r.h, "sup_err": r.sup_err, "rate": finite_or_null(r.rate_local)}))
        .collect();
    print_json(
        a.common.json,
        json!({
            "command": "converge",
            "kernel": study.kernel,
            "target": study.target,
            "rate": finite_or_null(study.rate),
            "rows": rows,
        }),
    );
    Ok(())
}

//! Command-line front end: recovery experiments, grid generation from a
//! monitor file, and gradient checks.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pjgrid::gradcheck::{check_gradient, random_recovery_problem};
use pjgrid::io::{read_field_csv, write_history_csv, write_transformation_csv, write_vtk};
use pjgrid::metrics::{compare_report, format_table, CSV_HEADER};
use pjgrid::synth::{
    default_fixed_boundary_map, default_moving_boundary_map, harmonic_boundary_match,
    monitors_from_map, DEFAULT_FIXED_AMPLITUDE, DEFAULT_MOVING_AMPLITUDE,
};
use pjgrid::{
    ComparisonReport, DescentOptions, GridSpec, MonitorPair, RunResult, ScalarField, StopReason,
    Transformation,
};

pub const GRADCHECK_TOL: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "pjgrid",
    version,
    about = "Grids with prescribed Jacobian determinant and curl"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover a synthetic map whose boundary is the identity.
    RecoverFixed(RecoverArgs),
    /// Recover a synthetic map whose boundary nodes slide along the edges.
    RecoverMoving(RecoverArgs),
    /// Build a grid whose cell areas follow a monitor function.
    Generate(GenerateArgs),
    /// Compare the adjoint gradient against finite differences.
    Gradcheck(GradcheckArgs),
    /// Run the same recovery with and without the curl term.
    Ablation(AblationArgs),
    /// Run the same recovery for several curl weights.
    AlphaSweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    Fixed,
    Moving,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 65)]
    pub nx: usize,
    #[arg(long, default_value_t = 65)]
    pub ny: usize,
}

#[derive(Debug, Clone, Args)]
pub struct DescentArgs {
    /// Weight of the curl term.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Initial step of every line search, or the fixed step with --plain-descent.
    #[arg(long, default_value_t = 1.0)]
    pub tstep: f64,
    /// Take fixed steps of size --tstep without a line search.
    #[arg(long)]
    pub plain_descent: bool,
    /// Relative objective change over 10 iterations that ends the run.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

impl DescentArgs {
    fn options(&self, curl: bool) -> DescentOptions {
        DescentOptions {
            tstep: self.tstep,
            max_iters: self.iters,
            tol: self.tol,
            alpha: self.alpha,
            curl,
            line_search: !self.plain_descent,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub descent: DescentArgs,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub curl: Switch,
    /// Target amplitude in grid spacings (default depends on the case).
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Field CSV with the target cell-area density. Rescaled to unit mean.
    #[arg(long)]
    pub monitors: PathBuf,
    /// Field CSV with the target curl (zero if absent).
    #[arg(long)]
    pub curl_target: Option<PathBuf>,
    #[command(flatten)]
    pub descent: DescentArgs,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub curl: Switch,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 17)]
    pub nx: usize,
    #[arg(long, default_value_t = 17)]
    pub ny: usize,
    #[arg(long, default_value_t = 20)]
    pub probes: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct AblationArgs {
    #[arg(long, value_enum, default_value_t = Case::Fixed)]
    pub case: Case,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub descent: DescentArgs,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Case::Fixed)]
    pub case: Case,
    /// Comma-separated curl weights.
    #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
    pub alphas: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub descent: DescentArgs,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::RecoverFixed(a) => recover(Case::Fixed, &a),
        Command::RecoverMoving(a) => recover(Case::Moving, &a),
        Command::Generate(a) => generate(&a),
        Command::Gradcheck(a) => gradcheck(&a),
        Command::Ablation(a) => ablation(&a),
        Command::AlphaSweep(a) => alpha_sweep(&a),
    }
}

/// Rescales `f0` so its interior quadrature equals the interior area.
/// Every interior value must be finite and positive.
pub fn normalize_monitor(f0: &ScalarField) -> pjgrid::Result<ScalarField> {
    let g = f0.spec();
    if let Some((i, j)) = g
        .interior_nodes()
        .find(|&(i, j)| f0.get(i, j).is_nan() || f0.get(i, j) <= 0.0)
    {
        return Err(pjgrid::Error::InfeasibleMonitor(format!(
            "monitor value {} at node ({i}, {j}) is not positive",
            f0.get(i, j)
        )));
    }
    Ok(f0.scaled(g.interior_area() / f0.interior_integral()))
}

struct Target {
    t0: Transformation,
    base: Transformation,
    monitors: MonitorPair,
}

fn target(case: Case, grid: &GridArgs, amplitude: Option<f64>) -> Result<Target> {
    let spec = node_grid(grid.nx, grid.ny)?;
    let (t0, base) = match case {
        Case::Fixed => {
            let t0 =
                default_fixed_boundary_map(spec, amplitude.unwrap_or(DEFAULT_FIXED_AMPLITUDE))?;
            (t0, Transformation::identity(spec))
        }
        Case::Moving => {
            let t0 =
                default_moving_boundary_map(spec, amplitude.unwrap_or(DEFAULT_MOVING_AMPLITUDE))?;
            let base = harmonic_boundary_match(spec, &t0)?;
            (t0, base)
        }
    };
    let monitors = monitors_from_map(&t0)?;
    Ok(Target { t0, base, monitors })
}

/// Grid on `[1, nx] x [1, ny]`, so one unit is one node spacing.
fn node_grid(nx: usize, ny: usize) -> pjgrid::Result<GridSpec> {
    GridSpec::uniform(nx, ny, [1.0, nx as f64, 1.0, ny as f64])
}

fn objective_label(curl: bool) -> &'static str {
    if curl {
        "Jacobian and Curl"
    } else {
        "Only Jacobian"
    }
}

fn case_name(case: Case) -> &'static str {
    match case {
        Case::Fixed => "fixed",
        Case::Moving => "moving",
    }
}

fn recover(case: Case, a: &RecoverArgs) -> Result<ExitCode> {
    let tg = target(case, &a.grid, a.amplitude)?;
    let curl = a.curl == Switch::On;
    let opts = a.descent.options(curl);
    let r = pjgrid::optimizer::run_descent(&tg.base, &tg.monitors, &opts)?;
    let report = compare_report(&r.final_t, &tg.t0, &tg.monitors, opts.alpha)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_outputs(&a.out, &r, Some(&tg.t0))?;
    write_text(
        &a.out.join("report.csv"),
        &format!("{CSV_HEADER}\n{}\n", report.csv_row()),
    )?;
    let label = objective_label(curl);
    write_text(
        &a.out.join("report.txt"),
        &format_table(&[(label, &report)]),
    )?;
    let mut manifest = manifest_common(&opts, &r);
    let _ = writeln!(manifest, "command=recover-{}", case_name(case));
    let _ = writeln!(manifest, "nx={}\nny={}", a.grid.nx, a.grid.ny);
    if let Some(amp) = a.amplitude {
        let _ = writeln!(manifest, "amplitude={amp}");
    }
    write_text(&a.out.join("manifest.txt"), &manifest)?;

    print!("{label}\n{}", format_table(&[(label, &report)]));
    println!(
        "stop: {} after {} iterations",
        r.stop_reason, r.iterations_run
    );
    finish(&r)
}

fn generate(a: &GenerateArgs) -> Result<ExitCode> {
    let f0 = read_field(&a.monitors)?;
    let f0 = normalize_monitor(&f0)?;
    let spec = *f0.spec();
    let g0 = match &a.curl_target {
        Some(p) => read_field(p)?,
        None => ScalarField::zeros(spec),
    };
    let monitors = MonitorPair::new(f0, g0)?;
    let curl = a.curl == Switch::On;
    let opts = a.descent.options(curl);
    let r = pjgrid::optimizer::run_descent(&Transformation::identity(spec), &monitors, &opts)?;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_outputs(&a.out, &r, None)?;
    let rep = &r.final_report;
    write_text(
        &a.out.join("report.csv"),
        &format!(
            "ssd_J,ssd,ssd_curl\n{},{},{}\n",
            rep.ssd_j, rep.ssd, rep.ssd_curl
        ),
    )?;
    let text = format!(
        "{}\nssd_J    {:.6e}\nssd_curl {:.6e}\nssd      {:.6e}\n",
        objective_label(curl),
        rep.ssd_j,
        rep.ssd_curl,
        rep.ssd
    );
    write_text(&a.out.join("report.txt"), &text)?;
    let mut manifest = manifest_common(&opts, &r);
    let _ = writeln!(manifest, "command=generate");
    let _ = writeln!(manifest, "monitors={}", a.monitors.display());
    if let Some(p) = &a.curl_target {
        let _ = writeln!(manifest, "curl_target={}", p.display());
    }
    let _ = writeln!(manifest, "nx={}\nny={}", spec.nx(), spec.ny());
    write_text(&a.out.join("manifest.txt"), &manifest)?;

    print!("{text}");
    println!(
        "stop: {} after {} iterations",
        r.stop_reason, r.iterations_run
    );
    finish(&r)
}

fn gradcheck(a: &GradcheckArgs) -> Result<ExitCode> {
    let spec = node_grid(a.nx, a.ny)?;
    let (problem, control) = random_recovery_problem(spec, a.seed)?;
    let check = check_gradient(&problem, &control, a.probes, a.eps, a.seed)?;
    for p in &check.probes {
        println!(
            "({:>3},{:>3}) {:?}  adjoint {:+.10e}  fd {:+.10e}  rel {:.2e}",
            p.node.0, p.node.1, p.component, p.adjoint, p.finite_difference, p.rel_error
        );
    }
    println!("max relative error {:.3e}", check.max_rel_error);
    Ok(if check.max_rel_error <= GRADCHECK_TOL {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// Runs each configuration on its own thread and writes one table column
/// per run. Each run also gets its own output subdirectory.
fn compare_runs(
    tg: &Target,
    configs: &[(String, DescentOptions)],
    out: &Path,
    command: &str,
) -> Result<ExitCode> {
    let results: Vec<pjgrid::Result<(RunResult, ComparisonReport)>> = thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(_, opts)| {
                s.spawn(move || {
                    let r = pjgrid::optimizer::run_descent(&tg.base, &tg.monitors, opts)?;
                    let rep = compare_report(&r.final_t, &tg.t0, &tg.monitors, opts.alpha)?;
                    Ok((r, rep))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("descent thread panicked"))
            .collect()
    });
    let results = results.into_iter().collect::<pjgrid::Result<Vec<_>>>()?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut csv = format!("run,{CSV_HEADER},stop_reason,iterations\n");
    for ((name, opts), (r, rep)) in configs.iter().zip(&results) {
        let dir = out.join(slug(name));
        fs::create_dir_all(&dir)?;
        write_outputs(&dir, r, Some(&tg.t0))?;
        let mut manifest = manifest_common(opts, r);
        let _ = writeln!(manifest, "command={command}\nrun={name}");
        write_text(&dir.join("manifest.txt"), &manifest)?;
        let _ = writeln!(
            csv,
            "{name},{},{},{}",
            rep.csv_row(),
            r.stop_reason,
            r.iterations_run
        );
    }
    let columns: Vec<(&str, &ComparisonReport)> = configs
        .iter()
        .zip(&results)
        .map(|((n, _), (_, rep))| (n.as_str(), rep))
        .collect();
    let table = format_table(&columns);
    write_text(&out.join("report.csv"), &csv)?;
    write_text(&out.join("report.txt"), &table)?;
    print!("{table}");
    for ((name, _), (r, _)) in configs.iter().zip(&results) {
        println!(
            "{name}: stop {} after {} iterations",
            r.stop_reason, r.iterations_run
        );
    }
    if results
        .iter()
        .any(|(r, _)| r.stop_reason == StopReason::Divergence)
    {
        bail!("at least one run diverged");
    }
    Ok(ExitCode::SUCCESS)
}

fn ablation(a: &AblationArgs) -> Result<ExitCode> {
    let tg = target(a.case, &a.grid, a.amplitude)?;
    let configs =
        [false, true].map(|curl| (objective_label(curl).to_string(), a.descent.options(curl)));
    compare_runs(&tg, &configs, &a.out, "ablation")
}

fn alpha_sweep(a: &SweepArgs) -> Result<ExitCode> {
    if a.alphas.is_empty() {
        bail!("--alphas needs at least one value");
    }
    let tg = target(a.case, &a.grid, a.amplitude)?;
    let configs: Vec<_> = a
        .alphas
        .iter()
        .map(|&alpha| {
            let opts = DescentOptions {
                alpha,
                ..a.descent.options(true)
            };
            (format!("alpha={alpha}"), opts)
        })
        .collect();
    compare_runs(&tg, &configs, &a.out, "alpha-sweep")
}

fn finish(r: &RunResult) -> Result<ExitCode> {
    if r.stop_reason == StopReason::Divergence {
        bail!(
            "descent diverged after {} iterations (ssd {:.3e}, started at {:.3e})",
            r.iterations_run,
            r.final_report.ssd,
            r.initial_report.ssd
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn manifest_common(opts: &DescentOptions, r: &RunResult) -> String {
    let mut m = String::new();
    let _ = writeln!(m, "version={}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "alpha={}", opts.alpha);
    let _ = writeln!(m, "curl={}", if opts.curl { "on" } else { "off" });
    let _ = writeln!(m, "iters={}", opts.max_iters);
    let _ = writeln!(m, "tstep={}", opts.tstep);
    let _ = writeln!(m, "tol={}", opts.tol);
    let _ = writeln!(m, "line_search={}", opts.line_search);
    let _ = writeln!(m, "stop_reason={}", r.stop_reason);
    let _ = writeln!(m, "iterations={}", r.iterations_run);
    let _ = writeln!(m, "last_step={}", r.last_step);
    let _ = writeln!(m, "initial_ssd={}", r.initial_report.ssd);
    let _ = writeln!(m, "final_ssd={}", r.final_report.ssd);
    m
}

fn write_outputs(dir: &Path, r: &RunResult, t0: Option<&Transformation>) -> Result<()> {
    write_history_csv(create(&dir.join("history.csv"))?, &r.history)?;
    write_vtk(
        create(&dir.join("grid.vtk"))?,
        &r.final_t,
        "pjgrid transformation",
    )?;
    write_transformation_csv(
        create(&dir.join("t1.csv"))?,
        create(&dir.join("t2.csv"))?,
        &r.final_t,
    )?;
    write_text(&dir.join("grid.svg"), &grid_svg(&r.final_t, t0))?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn read_field(path: &Path) -> Result<ScalarField> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_field_csv(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

/// Grid lines of `t`, plus a small star at every node of `t0` when given.
pub fn grid_svg(t: &Transformation, t0: Option<&Transformation>) -> String {
    const SIZE: f64 = 800.0;
    const PAD: f64 = 20.0;
    let g = t.spec();
    let mut pts: Vec<(f64, f64)> = g.nodes().map(|(i, j)| t.position(i, j)).collect();
    if let Some(t0) = t0 {
        pts.extend(g.nodes().map(|(i, j)| t0.position(i, j)));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let scale = (SIZE - 2.0 * PAD) / (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    // svg y grows downward
    let map = |(x, y): (f64, f64)| (PAD + (x - x0) * scale, SIZE - PAD - (y - y0) * scale);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g fill="none" stroke="black" stroke-width="0.6">"#);
    let mut polyline = |nodes: &mut dyn Iterator<Item = (usize, usize)>| {
        let coords: Vec<String> = nodes
            .map(|(i, j)| {
                let (px, py) = map(t.position(i, j));
                format!("{px:.3},{py:.3}")
            })
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}"/>"#, coords.join(" "));
    };
    for j in 0..g.ny() {
        polyline(&mut (0..g.nx()).map(|i| (i, j)));
    }
    for i in 0..g.nx() {
        polyline(&mut (0..g.ny()).map(|j| (i, j)));
    }
    let _ = writeln!(s, "</g>");
    if let Some(t0) = t0 {
        let r = 2.5;
        let _ = writeln!(s, r#"<g stroke="red" stroke-width="0.6">"#);
        for (i, j) in g.nodes() {
            let (px, py) = map(t0.position(i, j));
            let mut d = String::new();
            for k in 0..3 {
                let a = std::f64::consts::PI * k as f64 / 3.0;
                let (dx, dy) = (r * a.cos(), r * a.sin());
                let _ = write!(
                    d,
                    "M{:.3},{:.3}L{:.3},{:.3}",
                    px - dx,
                    py - dy,
                    px + dx,
                    py + dy
                );
            }
            let _ = writeln!(s, r#"<path d="{d}"/>"#);
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use betti_core::betti::PreparedSurface;
use betti_core::geometry::{fixtures, io as mesh_io, CurvatureSource, TriangleMesh};
use betti_core::report::RunReport;
use betti_core::suite::{run_verify_abstract, SuiteConfig, DEFAULT_MESH_SUBDIVISION};
use betti_core::surface_report::{run_betti_bound, run_mesh_info, BettiRunConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::ConfigFile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] betti_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const CONFIG_KEYS: &[&str] = &[
    "seed",
    "trials",
    "out",
    "tolerance",
    "quiet",
    "max-points",
    "max-fiber",
    "quadrature-order",
    "subdivision",
    "rho0",
    "t0",
    "grid",
    "p",
    "curvature",
    "c-n",
    "alpha-n",
    "k-lower",
];

#[derive(Parser, Debug)]
#[command(name = "betti", version, about = "Randomized operator-inequality suites and Betti-number bounds for triangulated surfaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed of the randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Instances per inequality family.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write the JSON report (or the OFF file for gen-fixture) here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative slack replacing every family default, in (0, 1e-3].
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Suppress the human-readable table.
    #[arg(long, global = true)]
    quiet: bool,
    /// `key = value` file with `[section]` headers; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the randomized operator-inequality suites.
    VerifyAbstract {
        #[arg(long)]
        max_points: Option<usize>,
        #[arg(long)]
        max_fiber: Option<usize>,
        #[arg(long)]
        quadrature_order: Option<usize>,
    },
    /// Bound the first Betti number of a builtin surface or mesh file.
    BettiBound {
        /// Builtin name (sphere, flat-torus, torus-rev, bumpy-sphere, genus2, tetrahedron) or .off/.obj path.
        surface: String,
        #[arg(long)]
        subdivision: Option<u32>,
        /// Comma-separated values.
        #[arg(long)]
        rho0: Option<String>,
        /// Comma-separated values.
        #[arg(long)]
        t0: Option<String>,
        /// N×N geometric grid, rho0 in [0.1, 2] and t0 in [0.25, 4]; overrides --rho0/--t0.
        #[arg(long)]
        grid: Option<usize>,
        /// Schatten exponent of the operator-level bound.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_enum)]
        curvature: Option<Curvature>,
        /// Constant c(n) of the heat-kernel bound (uncertified).
        #[arg(long)]
        c_n: Option<f64>,
        /// Constant alpha(n) of the heat-kernel bound (uncertified).
        #[arg(long)]
        alpha_n: Option<f64>,
        /// K with K(v) >= -K everywhere; defaults to max(0, -min K).
        #[arg(long)]
        k_lower: Option<f64>,
    },
    /// Counts, Euler characteristic, both b1 oracles, Gauss-Bonnet residual, diameter and area.
    MeshInfo {
        surface: String,
        #[arg(long)]
        subdivision: Option<u32>,
    },
    /// Write a builtin surface as OFF to --out, or to stdout.
    GenFixture {
        name: String,
        #[arg(long)]
        subdivision: Option<u32>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Curvature {
    AngleDefect,
    Analytic,
}

impl std::str::FromStr for Curvature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Curvature as ValueEnum>::from_str(s, true)
    }
}

impl From<Curvature> for CurvatureSource {
    fn from(c: Curvature) -> Self {
        match c {
            Curvature::AngleDefect => CurvatureSource::AngleDefect,
            Curvature::Analytic => CurvatureSource::Analytic,
        }
    }
}

/// Flag, then config file, then default.
struct Resolver<'a> {
    file: &'a ConfigFile,
    section: &'static str,
}

impl Resolver<'_> {
    fn value<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(self.section, key),
        }
    }

    fn or<T: std::str::FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.value(flag, key)?.unwrap_or(default))
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("{what}: cannot parse `{t}` as a number")))
        })
        .collect()
}

/// `n` points from `lo` to `hi`, evenly spaced in log scale.
fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn load_surface(name: &str, subdivision: u32) -> Result<TriangleMesh, CliError> {
    if fixtures::BUILTIN_NAMES.contains(&name) {
        return Ok(fixtures::builtin(name, subdivision)?);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::Input(format!(
            "`{name}` is neither a builtin ({}) nor an existing mesh file",
            fixtures::BUILTIN_NAMES.join(", ")
        )));
    }
    Ok(mesh_io::load_mesh(path)?)
}

/// The invocation without `--out` and `--config` and their values.
fn command_echo() -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in std::env::args().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" || a == "--config" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--config=") {
            continue;
        }
        out.push(a);
    }
    out
}

fn print_records(report: &RunReport) {
    println!("{:<6} {:<58} {:>13} {:>13} {:>13} {:>7} {:>6}", "status", "check", "lhs", "rhs", "margin", "trials", "fails");
    for r in &report.records {
        println!(
            "{:<6} {:<58} {:>13.6e} {:>13.6e} {:>13.6e} {:>7} {:>6}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.lhs,
            r.rhs,
            r.margin,
            r.trials,
            r.failures
        );
    }
}

fn print_betti(report: &RunReport) {
    let Some(reports) = &report.betti_reports else { return };
    println!(
        "{:<12} {:>9} {:>9} {:>4} {:>13} {:>13} {:>13} {:>13} {:>5}",
        "surface", "rho0", "t0", "b1", "bound_main", "bound_simple", "bound_schatten", "liyau*", "pass"
    );
    for r in reports {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6e}"));
        println!(
            "{:<12} {:>9.4} {:>9.4} {:>4} {:>13.6e} {:>13.6e} {:>13} {:>13} {:>5}",
            r.surface,
            r.rho0,
            r.t0,
            r.b1_oracle,
            r.bound_main,
            r.bound_abstract,
            opt(r.bound_schatten),
            opt(r.bound_liyau.map(|l| l.value)),
            r.pass
        );
    }
    println!("* heat-kernel bound with user-supplied constants; uncertified, not asserted");
}

fn print_summary(report: &RunReport) {
    let s = &report.summary;
    println!(
        "{}: {} records, {} failed, {:.3} s",
        if s.pass { "PASS" } else { "FAIL" },
        s.records,
        s.failures,
        s.wall_time_seconds.unwrap_or(0.0)
    );
}

#[derive(Serialize)]
struct MeshInfoConfig<'a> {
    surface: &'a str,
    subdivision: Option<u32>,
    tolerance: Option<f64>,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let file = match &cli.common.config {
        Some(p) => ConfigFile::load(p, CONFIG_KEYS)?,
        None => ConfigFile::default(),
    };
    let section = match cli.command {
        Command::VerifyAbstract { .. } => "verify-abstract",
        Command::BettiBound { .. } => "betti-bound",
        Command::MeshInfo { .. } => "mesh-info",
        Command::GenFixture { .. } => "gen-fixture",
    };
    let cfg = Resolver { file: &file, section };
    let c = &cli.common;
    let out: Option<PathBuf> = cfg.value(c.out.clone(), "out")?;
    let quiet = c.quiet || cfg.or(None, "quiet", false)?;
    let tolerance: Option<f64> = cfg.value(c.tolerance, "tolerance")?;
    let defaults = SuiteConfig::default();
    let subdivision_default = cfg.or(None, "subdivision", DEFAULT_MESH_SUBDIVISION)?;

    let report = match cli.command {
        Command::VerifyAbstract {
            max_points,
            max_fiber,
            quadrature_order,
        } => {
            let suite = SuiteConfig {
                seed: cfg.or(c.seed, "seed", defaults.seed)?,
                trials: cfg.or(c.trials, "trials", defaults.trials)?,
                max_points: cfg.or(max_points, "max-points", defaults.max_points)?,
                max_fiber: cfg.or(max_fiber, "max-fiber", defaults.max_fiber)?,
                mesh_subdivision: subdivision_default,
                quadrature_order: cfg.or(quadrature_order, "quadrature-order", defaults.quadrature_order)?,
                tolerance,
            };
            let report = run_verify_abstract(&suite, command_echo())?;
            if !quiet {
                print_records(&report);
            }
            report
        }
        Command::BettiBound {
            surface,
            subdivision,
            rho0,
            t0,
            grid,
            p,
            curvature,
            c_n,
            alpha_n,
            k_lower,
        } => {
            let level = subdivision.unwrap_or(subdivision_default);
            let grid: Option<usize> = cfg.value(grid, "grid")?;
            let (rho0s, t0s) = match grid {
                Some(0) => return Err(CliError::Input("--grid must be at least 1".into())),
                Some(n) => (geometric_grid(0.1, 2.0, n), geometric_grid(0.25, 4.0, n)),
                None => (
                    parse_list(&cfg.or(rho0, "rho0", "0.5".to_string())?, "rho0")?,
                    parse_list(&cfg.or(t0, "t0", "1".to_string())?, "t0")?,
                ),
            };
            let mesh = load_surface(&surface, level)?;
            let builtin = fixtures::BUILTIN_NAMES.contains(&surface.as_str());
            let mut run_cfg = BettiRunConfig::new(surface.clone(), rho0s, t0s);
            run_cfg.subdivision = builtin.then_some(level);
            run_cfg.p = cfg.or(p, "p", 2.0)?;
            run_cfg.curvature = cfg.or(curvature, "curvature", Curvature::AngleDefect)?.into();
            run_cfg.c_n = cfg.or(c_n, "c-n", 1.0)?;
            run_cfg.alpha_n = cfg.or(alpha_n, "alpha-n", 1.0)?;
            run_cfg.k_lower = cfg.value(k_lower, "k-lower")?;
            if let Some(t) = tolerance {
                if !(t > 0.0 && t <= betti_core::suite::MAX_TOLERANCE) {
                    return Err(CliError::Input(format!("--tolerance must lie in (0, 1e-3], got {t:e}")));
                }
            }
            run_cfg.tolerance = tolerance;
            let label = if builtin {
                surface.clone()
            } else {
                Path::new(&surface)
                    .file_stem()
                    .map_or(surface.clone(), |s| s.to_string_lossy().into_owned())
            };
            let prepared = PreparedSurface::new(label, mesh, run_cfg.curvature)?;
            let report = run_betti_bound(&prepared, &run_cfg, command_echo())?;
            if !quiet {
                print_betti(&report);
                println!();
                print_records(&report);
            }
            report
        }
        Command::MeshInfo { surface, subdivision } => {
            let level = subdivision.unwrap_or(subdivision_default);
            let mesh = load_surface(&surface, level)?;
            let builtin = fixtures::BUILTIN_NAMES.contains(&surface.as_str());
            let config = MeshInfoConfig {
                surface: &surface,
                subdivision: builtin.then_some(level),
                tolerance,
            };
            let report = run_mesh_info(&mesh, &config, tolerance, command_echo())?;
            if !quiet {
                if let Some(details) = &report.details {
                    for (k, v) in details.as_object().into_iter().flatten() {
                        println!("{k:<24} {v}");
                    }
                    println!();
                }
                print_records(&report);
            }
            report
        }
        Command::GenFixture { name, subdivision } => {
            let level = subdivision.unwrap_or(subdivision_default);
            let mesh = fixtures::builtin(&name, level)?;
            match &out {
                Some(path) => mesh_io::write_off(&mesh, std::io::BufWriter::new(std::fs::File::create(path)?))?,
                None => mesh_io::write_off(&mesh, std::io::stdout().lock())?,
            }
            if !quiet && out.is_some() {
                println!("{} V, {} E, {} F", mesh.vertex_count(), mesh.edge_count(), mesh.face_count());
            }
            return Ok(ExitCode::SUCCESS);
        }
    };

    if let Some(path) = &out {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        report.write_json(&mut w)?;
        w.flush()?;
    }
    if !quiet {
        print_summary(&report);
    } else if !report.pass() {
        for r in report.records.iter().filter(|r| !r.pass) {
            eprintln!("FAIL {} lhs={:e} rhs={:e} margin={:e} failures={}/{}", r.name, r.lhs, r.rhs, r.margin, r.failures, r.trials);
        }
    }
    Ok(if report.pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

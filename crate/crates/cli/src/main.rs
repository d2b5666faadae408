//! `entloc`: reproduce tables, sweep concurrence curves, run the
//! oracle-vs-analytic verification grid and Hong-Ou-Mandel scans.
//!
//! Exit codes: 0 success, 1 tolerance failure, 2 usage or runtime error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use entloc::fock::{hom_coincidence, hom_visibility};
use entloc::report::{self, round_sig, ReferenceData, Table};
use entloc::sweep::{self, SweepSpec, SweepVariable};
use entloc::{verify, Exec, FilterConfig};

#[derive(Parser, Debug)]
#[command(name = "entloc", version, about = "Entanglement localization simulator")]
struct Cli {
    /// TOML file with default parameter values; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Evaluate grid points on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concurrence of every stage along T, p or eps (CSV).
    Sweep(SweepArgs),
    /// Compare computed values with a published theory table (JSON).
    Reproduce(ReproduceArgs),
    /// Oracle-vs-analytic equivalence on a T x p grid (JSON).
    Verify(VerifyArgs),
    /// Hong-Ou-Mandel coincidence and visibility versus overlap p (CSV).
    Hom(HomArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum VarArg {
    #[value(name = "T")]
    T,
    #[value(name = "p")]
    P,
    #[value(name = "eps")]
    Eps,
}

#[allow(clippy::upper_case_acronyms)]
#[derive(Copy, Clone, Debug, ValueEnum)]
enum TableArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
    #[value(name = "III")]
    III,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Swept variable.
    #[arg(long = "var", value_enum, default_value = "T")]
    variable: VarArg,
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Beamsplitter transmittivity (fixed when not swept).
    #[arg(long = "T")]
    t: Option<f64>,
    /// Environment indistinguishability (fixed when not swept).
    #[arg(long)]
    p: Option<f64>,
    /// Filter strength for the stage-III column.
    #[arg(long)]
    eps: Option<f64>,
    /// Fixed V attenuation on arm A; replaces the eps schedule (needs --ab).
    #[arg(long, requires = "ab")]
    aa: Option<f64>,
    /// Fixed V attenuation on arm B (needs --aa).
    #[arg(long, requires = "aa")]
    ab: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(long, value_enum)]
    table: TableArg,
    /// Transmittivity for the closed-form table.
    #[arg(long = "T")]
    t: Option<f64>,
    /// Filter strength for the closed-form table.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Points per axis of the T x p grid.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HomArgs {
    #[arg(long = "T")]
    t: Option<f64>,
    /// Number of p values on [0, 1].
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Defaults read from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "T")]
    t: Option<f64>,
    p: Option<f64>,
    eps: Option<f64>,
    aa: Option<f64>,
    ab: Option<f64>,
    steps: Option<usize>,
    min: Option<f64>,
    max: Option<f64>,
    grid: Option<usize>,
    tolerance: Option<f64>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
            }
        }
    }
}

enum Outcome {
    Ok,
    ToleranceFailure,
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn cmd_sweep(args: SweepArgs, cfg: &FileConfig, exec: Exec) -> Result<Outcome> {
    let variable = match args.variable {
        VarArg::T => SweepVariable::T,
        VarArg::P => SweepVariable::P,
        VarArg::Eps => SweepVariable::Eps,
    };
    let (dmin, dmax) = match variable {
        SweepVariable::Eps => (1e-3, 1.0),
        _ => (0.0, 1.0),
    };
    let aa = args.aa.or(cfg.aa);
    let ab = args.ab.or(cfg.ab);
    let filter = match (aa, ab) {
        (Some(a), Some(b)) => Some(FilterConfig::new(a, b)?),
        (None, None) => None,
        _ => bail!("--aa and --ab must be given together"),
    };
    let spec = SweepSpec {
        variable,
        min: args.min.or(cfg.min).unwrap_or(dmin),
        max: args.max.or(cfg.max).unwrap_or(dmax),
        steps: args.steps.or(cfg.steps).unwrap_or(101),
        t: args.t.or(cfg.t).unwrap_or(0.4),
        p: args.p.or(cfg.p).unwrap_or(0.0),
        eps: args.eps.or(cfg.eps).unwrap_or(0.15),
        filter,
    };
    let rows = sweep::run(&spec, exec)?;
    emit(args.out.as_deref(), &sweep::to_csv(variable, &rows))?;
    Ok(Outcome::Ok)
}

fn cmd_reproduce(args: ReproduceArgs, cfg: &FileConfig) -> Result<Outcome> {
    let rows = match args.table {
        TableArg::I => report::reproduce_closed_forms(
            args.t.or(cfg.t).unwrap_or(0.5),
            args.eps.or(cfg.eps).unwrap_or(1.0),
        )?,
        TableArg::II => report::reproduce_table(&ReferenceData::bundled()?, Table::II)?,
        TableArg::III => report::reproduce_table(&ReferenceData::bundled()?, Table::III)?,
    };
    emit(args.out.as_deref(), &to_json(&rows)?)?;
    Ok(if report::all_pass(&rows) {
        Outcome::Ok
    } else {
        Outcome::ToleranceFailure
    })
}

fn cmd_verify(args: VerifyArgs, cfg: &FileConfig, exec: Exec) -> Result<Outcome> {
    let grid = args.grid.or(cfg.grid).unwrap_or(10);
    let tol = args.tolerance.or(cfg.tolerance).unwrap_or(1e-9);
    let summary = verify::run(grid, tol, exec)?;
    emit(args.out.as_deref(), &to_json(&summary)?)?;
    Ok(if summary.pass {
        Outcome::Ok
    } else {
        Outcome::ToleranceFailure
    })
}

fn cmd_hom(args: HomArgs, cfg: &FileConfig) -> Result<Outcome> {
    let t = args.t.or(cfg.t).unwrap_or(0.5);
    let steps = args.steps.or(cfg.steps).unwrap_or(101);
    if steps < 2 {
        bail!("--steps must be at least 2");
    }
    let mut csv = String::from("p,coincidence,visibility\n");
    for k in 0..steps {
        let p = k as f64 / (steps - 1) as f64;
        let c = hom_coincidence(t, p)?;
        let v = hom_visibility(t, p)?;
        csv.push_str(&format!("{},{},{}\n", round_sig(p), round_sig(c), round_sig(v)));
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(Outcome::Ok)
}

fn run(cli: Cli) -> Result<Outcome> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match cli.command {
        Command::Sweep(a) => cmd_sweep(a, &cfg, exec),
        Command::Reproduce(a) => cmd_reproduce(a, &cfg),
        Command::Verify(a) => cmd_verify(a, &cfg, exec),
        Command::Hom(a) => cmd_hom(a, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ToleranceFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

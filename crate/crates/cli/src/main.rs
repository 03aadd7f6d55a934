use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hydrowave::acceptance::run_suite;
use hydrowave::diagnostics::write_table;
use hydrowave::linear::{dispersion_table, ModelParams};
use hydrowave::nondim::{nondimensionalize, BetaConvention, Dimensional};
use hydrowave::scenario::{self, load_config, preset, ModelKind, RunConfig, RunOutcome, RunStatus, SweepKey, OUTPUT_ROOT_ENV};
use hydrowave::Error;

const EXIT_FAILED_RUN: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

#[derive(Parser)]
#[command(name = "hydrowave", version, about = "Pseudospectral solvers for reduced hydroelastic wave models")]
struct Cli {
    /// Directory that receives run outputs.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV)]
    output_root: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a config file or a preset.
    Run {
        #[command(flatten)]
        source: Source,
        /// Override the run name (output subdirectory).
        #[arg(long)]
        name: Option<String>,
    },
    /// Run a scenario once per value of one parameter, in parallel.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// upsilon | delta | beta | eps | dt
        #[arg(long)]
        key: SweepKey,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
    },
    /// Tabulate dispersion roots and unidirectional symbols.
    Dispersion {
        #[arg(long)]
        upsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 32)]
        k_max: usize,
        /// Output CSV (default: <output-root>/dispersion.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Curvature, Gauss-Bonnet and biharmonic reduction of a graph surface.
    GeometryCheck {
        /// Config with `model = "geometry-check"` (default: the surface-geometry preset).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
    },
    /// Run the acceptance criteria; prints one tab-separated record per criterion.
    Acceptance {
        /// `all` or a single suite name.
        #[arg(default_value = "all")]
        suite: String,
        /// Also print the individual checks.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Dimensionless parameters from SI plate and fluid data.
    Nondim {
        #[command(flatten)]
        data: NondimArgs,
        #[arg(long, default_value = "length")]
        beta_convention: BetaConvention,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> hydrowave::Result<RunConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path),
            (None, Some(name)) => preset(name),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Args)]
struct NondimArgs {
    /// Plate density (kg/m^3).
    #[arg(long)]
    rho_s: f64,
    /// Plate thickness (m).
    #[arg(long)]
    h: f64,
    /// Fluid density (kg/m^3).
    #[arg(long, default_value_t = 1000.0)]
    rho_f: f64,
    /// Horizontal length scale (m).
    #[arg(long)]
    length: f64,
    /// Flexural rigidity (N m).
    #[arg(long)]
    rigidity: f64,
    #[arg(long, default_value_t = 9.81)]
    g: f64,
    /// Damping coefficient (kg/s).
    #[arg(long)]
    gamma: f64,
    /// Wave amplitude (m).
    #[arg(long)]
    amplitude: f64,
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::BlowUp { .. } | Error::NonContraction { .. } | Error::MaxIterations { .. } => EXIT_FAILED_RUN,
        _ => EXIT_CONFIG,
    }
}

fn report(outcome: &RunOutcome) -> u8 {
    println!("output: {}", outcome.dir.display());
    for (k, v) in &outcome.summary {
        println!("{k} = {v}");
    }
    if let RunStatus::Failed { last_good_time, reason } = &outcome.status {
        eprintln!("run failed after t = {last_good_time}: {reason}");
    }
    outcome.exit_code() as u8
}

fn geometry_config(config: Option<&Path>, n: Option<usize>, eps: Option<f64>, eps_list: Option<Vec<f64>>) -> hydrowave::Result<RunConfig> {
    let mut c = match config {
        Some(p) => load_config(p)?,
        None => preset("surface-geometry")?,
    };
    if c.run.model != ModelKind::GeometryCheck {
        return Err(Error::InvalidParameter(format!("geometry-check needs model = \"geometry-check\", config has {:?}", c.run.model.name())));
    }
    if let Some(n) = n {
        c.grid.n = n;
    }
    if let Some(e) = eps {
        c.params.eps = e;
    }
    if let Some(list) = eps_list {
        c.geometry.eps_list = list;
    }
    c.validate()?;
    Ok(c)
}

fn execute(cli: Cli) -> hydrowave::Result<u8> {
    let root = scenario::output_root(cli.output_root.as_deref());
    match cli.command {
        Command::Run { source, name } => {
            let mut c = source.load()?;
            if name.is_some() {
                c.run.name = name;
            }
            Ok(report(&scenario::run_scenario(&c, &root)?))
        }
        Command::Sweep { source, key, values } => {
            let outcomes = scenario::sweep(&source.load()?, key, &values, &root)?;
            let mut code = 0;
            for o in &outcomes {
                let status = match &o.status {
                    RunStatus::Completed => "completed".to_string(),
                    RunStatus::Failed { last_good_time, .. } => format!("failed at t = {last_good_time}"),
                };
                println!("{}\t{status}", o.dir.display());
                code = code.max(o.exit_code() as u8);
            }
            Ok(code)
        }
        Command::Dispersion { upsilon, delta, beta, k_max, output } => {
            let params = ModelParams::new(upsilon, delta, beta, 0.0)?;
            let path = output.unwrap_or_else(|| root.join("dispersion.csv"));
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            write_table(&dispersion_table(k_max, &params), "dispersion", &path)?;
            println!("{}", path.display());
            Ok(0)
        }
        Command::GeometryCheck { config, n, eps, eps_list } => {
            let c = geometry_config(config.as_deref(), n, eps, eps_list)?;
            Ok(report(&scenario::run_scenario(&c, &root)?))
        }
        Command::Acceptance { suite, verbose } => {
            let reports = run_suite(&suite)?;
            for r in &reports {
                println!("{}", r.machine_line());
                if verbose {
                    eprint!("{r}");
                }
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            eprintln!("{} of {} criteria passed", reports.len() - failed, reports.len());
            Ok(if failed == 0 { 0 } else { EXIT_ACCEPTANCE })
        }
        Command::Nondim { data, beta_convention } => {
            let d = Dimensional {
                rho_s: data.rho_s,
                h: data.h,
                rho_f: data.rho_f,
                length: data.length,
                rigidity: data.rigidity,
                g: data.g,
                gamma: data.gamma,
                amplitude: data.amplitude,
            };
            println!("{}", nondimensionalize(&d, beta_convention)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}

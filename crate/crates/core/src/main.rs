use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dshock::diagnostics::Equation;
use dshock::integrator::Trajectory;
use dshock::ladder::{run_residual_study, run_scale_study, LadderSpec};
use dshock::output::{emit_plot_script, write_run, write_text};
use dshock::{parse_scenario, Error, Result, Scenario, Simulation};

#[derive(Parser)]
#[command(
    name = "dshock",
    version,
    about = "Delta-shock cascade solver and scaling studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its snapshots.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides `scheme.epsilon`.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output directory (default: `run.output`, else `out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compute in single precision.
        #[arg(long)]
        f32: bool,
    },
    /// Primitive-area ladder for source degree n.
    ScaleStudy {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 4e-3)]
        eps_start: f64,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Report CSV path (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Raises the cell cap of the finest level.
        #[arg(long)]
        cell_cap: Option<usize>,
    },
    /// Weak-residual decay along a ladder.
    ResidualStudy {
        #[arg(long)]
        scenario: PathBuf,
        /// density | w | z
        #[arg(long)]
        equation: String,
        #[arg(long, default_value_t = 4e-3)]
        eps_start: f64,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Highest Fourier mode of the test basis.
        #[arg(long, default_value_t = 3)]
        modes: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write `plot.gp` for a run directory.
    Plot {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

fn report_run<T: dshock::Real>(traj: &Trajectory<T>, dir: &Path) -> Result<bool> {
    write_run(traj, dir)?;
    println!(
        "wrote {} snapshot(s) to {}",
        traj.snapshots.len(),
        dir.display()
    );
    if let Some(d) = &traj.diverged {
        eprintln!(
            "diverged at t = {:e}: field `{}` reached {:e}",
            d.time, d.field, d.magnitude
        );
        return Ok(false);
    }
    Ok(true)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Returns `Ok(false)` for a diverged run.
fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            scenario,
            epsilon,
            out,
            f32,
        } => {
            let mut s = load(&scenario)?;
            if let Some(e) = epsilon {
                s = s.with_epsilon(e);
            }
            let dir = out
                .or_else(|| s.output.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| Path::new("out").join(&s.name));
            if f32 {
                let traj = Simulation::<f32>::new(&s)?.run()?;
                report_run(&traj, &dir)
            } else {
                let traj = Simulation::<f64>::new(&s)?.run()?;
                report_run(&traj, &dir)
            }
        }
        Command::ScaleStudy {
            scenario,
            n,
            eps_start,
            levels,
            out,
            cell_cap,
        } => {
            let mut spec = LadderSpec {
                eps_start,
                levels,
                scenario: load(&scenario)?,
                cell_cap: dshock::ladder::DEFAULT_CELL_CAP,
            };
            if let Some(cap) = cell_cap {
                spec.cell_cap = cap;
            }
            let report = run_scale_study(&spec, n)?;
            emit(out.as_deref(), &report.to_csv())?;
            Ok(report.levels.iter().all(|l| l.diverged.is_none()))
        }
        Command::ResidualStudy {
            scenario,
            equation,
            eps_start,
            levels,
            modes,
            out,
        } => {
            let eq = Equation::parse(&equation).ok_or_else(|| Error::Validation {
                field: "--equation".into(),
                message: format!("unknown equation `{equation}` (density | w | z)"),
            })?;
            let spec = LadderSpec::new(load(&scenario)?, eps_start, levels)?;
            let report = run_residual_study(&spec, eq, modes)?;
            emit(out.as_deref(), &report.to_csv(&spec.scenario, eq))?;
            Ok(true)
        }
        Command::Plot { dir } => {
            let path = emit_plot_script(&dir)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

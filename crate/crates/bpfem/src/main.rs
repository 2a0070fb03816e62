use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bpfem::cli::{convergence_study, run_experiment, section_to_csv, Axis, ExperimentOptions, RunConfig};

#[derive(Parser)]
#[command(
    name = "bpfem",
    about = "Bound-preserving finite element solver for convection-diffusion problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Space,
    Time,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single configured experiment and write its outputs.
    Run { config: PathBuf },
    /// Refinement study over mesh resolutions (space) or time steps (time).
    Converge {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated levels: mesh resolutions for space, dt values for time.
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<f64>,
    },
    /// Run, then sample the final solution along a horizontal line.
    Section {
        config: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        y: f64,
        #[arg(long, default_value_t = 10_000)]
        npoints: usize,
    },
    /// Run and report mass evolution (mass.csv).
    Mass { config: PathBuf },
}

fn load_config(path: &PathBuf) -> bpfem::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| bpfem::Error::io(path.clone(), e))?;
    RunConfig::parse(&text)
}

fn dispatch(cli: Cli) -> bpfem::Result<()> {
    match cli.command {
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let summary = run_experiment(&cfg, &ExperimentOptions::default())?;
            println!("run finished: {} steps", summary.result.reports.len() - 1);
            println!("mean Richardson iterations per step: {:.2}", summary.mean_iterations);
            if let Some(e) = summary.l2_error_final {
                println!("final L2 error: {e:.6e}");
            }
            if let Some(e) = summary.energy_error {
                println!("energy error: {e:.6e}");
            }
            println!("nodal range of reported solution: [{:.6e}, {:.6e}]", summary.min_nodal, summary.max_nodal);
            println!("outputs in {}", cfg.output_dir.display());
        }
        Command::Converge { config, axis, levels } => {
            let cfg = load_config(&config)?;
            let axis = match axis {
                AxisArg::Space => Axis::Space,
                AxisArg::Time => Axis::Time,
            };
            let study = convergence_study(&cfg, axis, &levels)?;
            println!("level          param            l2_error        energy_error");
            for l in &study.levels {
                println!(
                    "{:<14.6e} {:<16.6e} {:<15.6e} {:<15.6e}",
                    l.level, l.param, l.l2_error, l.energy_error
                );
            }
            println!("fitted L2 slope: {:.3}", study.l2_slope);
            println!("fitted energy slope: {:.3}", study.energy_slope);
            println!("rates written to {}", study.rates_csv.display());
        }
        Command::Section { config, y, npoints } => {
            let cfg = load_config(&config)?;
            let path = section_to_csv(&cfg, y, npoints)?;
            println!("section written to {}", path.display());
        }
        Command::Mass { config } => {
            let cfg = load_config(&config)?;
            let opts = ExperimentOptions { write_vtk: false, write_files: true };
            let summary = run_experiment(&cfg, &opts)?;
            println!("mass evolution written to {}", cfg.output_dir.join("mass.csv").display());
            println!("mean Richardson iterations per step: {:.2}", summary.mean_iterations);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Thin command-line front end over the library: compute intervals for a
//! study file, run a simulation grid, or run an appropriateness check.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use riskratio::io::{read_grid_config, read_params_config, read_study_csv};
use riskratio::methods::compute_all;
use riskratio::report::{
    render_appropriateness, render_intervals, render_medians, render_metrics_csv, OutputFormat,
};
use riskratio::simulation::{appropriateness_check, run_grid, SimOptions};

#[derive(Parser)]
#[command(
    name = "riskratio",
    version,
    about = "Risk-ratio confidence intervals for clustered binary data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the 17 confidence intervals for a study CSV file.
    Ci {
        /// Study file with header `group,cluster,size,successes`.
        study: PathBuf,
        /// Two-sided nominal error rate.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        /// Write the output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a simulation grid from a TOML config and report per-method
    /// coverage, width, and location metrics with grid medians.
    Simulate {
        config: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config's replication target.
        #[arg(long)]
        reps: Option<u32>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write per-cell metrics CSV here (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Format for the medians summary.
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Simulate at fitted study parameters and report whether each method
    /// qualifies on coverage and interval location.
    Appropriateness {
        config: PathBuf,
        /// Override the config's replication target.
        #[arg(long)]
        reps: Option<u32>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
        /// Write the output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn with_output<F>(out: Option<&PathBuf>, f: F) -> Result<(), Box<dyn std::error::Error>>
where
    F: FnOnce(&mut dyn Write) -> Result<(), riskratio::io::IoError>,
{
    match out {
        Some(path) => {
            let mut file = fs::File::create(path)?;
            f(&mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)?;
        }
    }
    Ok(())
}

fn install_workers(workers: Option<usize>) -> Result<(), Box<dyn std::error::Error>> {
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::Ci {
            study,
            alpha,
            format,
            out,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(format!("alpha {alpha} outside (0, 1)").into());
            }
            let study = read_study_csv(&study)?;
            let results = compute_all(&study, alpha);
            with_output(out.as_ref(), |w| render_intervals(&results, format, w))
        }
        Command::Simulate {
            config,
            workers,
            reps,
            seed,
            out,
            format,
        } => {
            install_workers(workers)?;
            let mut config = read_grid_config(&config)?;
            if let Some(reps) = reps {
                config.replications = reps;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let specs = config.expand()?;
            eprintln!(
                "grid: {} cells x {} replications",
                specs.len(),
                config.replications
            );
            let opts = SimOptions {
                stall_factor: config.stall_factor,
                per_method_accounting: config.per_method_accounting,
                ..SimOptions::new(config.alpha)
            };
            let (results, medians) = run_grid(&specs, &opts);
            let cells: Vec<_> = specs.into_iter().zip(results).collect();
            with_output(out.as_ref(), |w| render_metrics_csv(&cells, w))?;
            let stdout = std::io::stdout();
            render_medians(&medians, format, stdout.lock())?;
            Ok(())
        }
        Command::Appropriateness {
            config,
            reps,
            seed,
            workers,
            format,
            out,
        } => {
            install_workers(workers)?;
            let mut config = read_params_config(&config)?;
            if let Some(reps) = reps {
                config.replications = reps;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            let spec = config.to_spec()?;
            let opts = SimOptions {
                stall_factor: config.stall_factor,
                ..SimOptions::new(spec.alpha)
            };
            let rows = appropriateness_check(&spec, &opts)?;
            with_output(out.as_ref(), |w| render_appropriateness(&rows, format, w))
        }
    }
}

fn is_broken_pipe(err: &(dyn std::error::Error + 'static)) -> bool {
    let mut source = Some(err);
    while let Some(e) = source {
        let io_err = e
            .downcast_ref::<std::io::Error>()
            .or(match e.downcast_ref::<riskratio::io::IoError>() {
                Some(riskratio::io::IoError::Io(inner)) => Some(inner),
                _ => None,
            });
        if io_err.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) {
            return true;
        }
        source = e.source();
    }
    false
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe downstream is not an input error
        Err(e) if is_broken_pipe(e.as_ref()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

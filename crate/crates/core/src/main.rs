use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand};

use evtcure::io::input::transform_csv;
use evtcure::io::report::{analyze, AnalysisRequest};
use evtcure::io::sim_config::{parse_pairs, run_plan, SimulationPlan};
use evtcure::simulation::Progress;
use evtcure::Error;

const EXIT_VALIDATION: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "evtcure", version, about = "Cure-rate estimation under insufficient follow-up")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the cure rate of each group in a survival CSV.
    Analyze {
        /// CSV with `time` and `status` columns.
        #[arg(long)]
        input: PathBuf,
        /// Column whose values split the data into groups.
        #[arg(long)]
        group: Option<String>,
        /// Known finite right endpoint; times are mapped by 1/(tau0 - t) first.
        #[arg(long)]
        tau0: Option<f64>,
        /// Bootstrap resamples used to select y.
        #[arg(long, default_value_t = 200)]
        nb: usize,
        #[arg(long, env = "EVTCURE_SEED", default_value_t = 0)]
        seed: u64,
        /// Confidence level of the Wald interval.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Comma-separated y grid; defaults to 0.60, 0.62, ..., 0.98.
        #[arg(long, value_delimiter = ',')]
        y_grid: Option<Vec<f64>>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study and write one curve CSV per model and p.
    Simulate {
        /// `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Base settings: `desk` or `full`.
        #[arg(long)]
        preset: Option<String>,
        /// Override a configuration key, e.g. `--set N=20`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, env = "EVTCURE_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Print progress to stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Map the time column of a CSV by t -> 1/(tau0 - t).
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        tau0: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> evtcure::Result<()> {
    match command {
        Command::Analyze {
            input,
            group,
            tau0,
            nb,
            seed,
            level,
            y_grid,
            out,
        } => {
            let mut request = AnalysisRequest::new(input);
            request.group_column = group;
            request.tau0 = tau0;
            request.n_bootstrap = nb;
            request.seed = seed;
            request.confidence_level = level;
            if let Some(grid) = y_grid {
                request.y_grid = grid;
            }
            let json = analyze(&request)?.to_json()?;
            match out {
                Some(path) => fs::write(path, json)?,
                None => print!("{json}"),
            }
        }
        Command::Simulate {
            config,
            preset,
            set,
            seed,
            out_dir,
            progress,
        } => {
            let file_pairs = match config {
                Some(path) if !path.exists() => return Err(Error::FileNotFound(path)),
                Some(path) => parse_pairs(&fs::read_to_string(path)?)?,
                None => Vec::new(),
            };
            let mut overrides = Vec::new();
            if let Some(p) = preset {
                overrides.push(("preset".to_string(), p));
            }
            for item in set {
                let (k, v) = item.split_once('=').ok_or_else(|| Error::BadConfig {
                    key: item.clone(),
                    reason: "expected KEY=VALUE".into(),
                })?;
                overrides.push((k.trim().to_string(), v.trim().to_string()));
            }
            if let Some(s) = seed {
                overrides.push(("seed".to_string(), s.to_string()));
            }
            let plan = SimulationPlan::resolve(&file_pairs, &overrides, 0)?;
            let done = AtomicUsize::new(0);
            let report = |event: Progress| {
                if progress {
                    if let Progress::GridPoint { grid_index } = event {
                        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                        eprintln!("grid point {grid_index} done ({n} total)");
                    }
                }
            };
            for path in run_plan(&plan, &out_dir, &report)? {
                println!("{}", path.display());
            }
        }
        Command::Transform { input, tau0, out } => transform_csv(&input, tau0, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(if err.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_RUNTIME
            })
        }
    }
}

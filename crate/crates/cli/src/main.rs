use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;
use tcd_core::runner::{self, validate_config, Experiment, ExperimentConfig};
use tcd_core::Error;

#[derive(Parser)]
#[command(name = "tcd", version, about = "Tavis-Cummings dimer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Base seed; overrides `ensemble.base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to TCD_THREADS, then all cores.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config file.
    Run(RunArgs),
    /// Check a config file and print the fully defaulted result.
    Validate {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
    },
    /// Quantum imbalance after a left-cavity quench.
    ImbalanceQuantum(RunArgs),
    /// Eigenstate imbalance mean and spread versus energy.
    EigenstateStats(RunArgs),
    /// Spacing and gap-ratio histograms and the form factor.
    SpectralStatsHermitian(RunArgs),
    /// Gap ratio and steady imbalance across the coupling grid.
    RVsLambdaSweep(RunArgs),
    /// Classical imbalance after a left-cavity start.
    ImbalanceClassical(RunArgs),
    /// Maximal Lyapunov exponents on the energy shell.
    LyapunovEnsemble(RunArgs),
    /// Spread of time-averaged classical imbalance across states.
    ClassicalScatter(RunArgs),
    /// Complex spacing ratios and form factor of the Liouvillian.
    LiouvillianStats(RunArgs),
    /// Same statistics for the gain-loss Hamiltonian.
    NhStats(RunArgs),
    /// Random-matrix and Poisson reference statistics.
    Baselines(RunArgs),
}

fn read_config(path: Option<&Path>, experiment: Option<Experiment>) -> Result<ExperimentConfig, Error> {
    let raw = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config(vec![format!("config: cannot read {}: {e}", p.display())]))?,
        None => "{}".to_string(),
    };
    let Some(experiment) = experiment else {
        return validate_config(&raw);
    };
    let mut value: Value = serde_json::from_str(&raw).map_err(|e| Error::Config(vec![format!("syntax: {e}")]))?;
    let Some(obj) = value.as_object_mut() else {
        return Err(Error::Config(vec!["config: must be a JSON object".into()]));
    };
    match obj.get("experiment").and_then(Value::as_str) {
        Some(name) if !name.is_empty() && name != experiment.name() => {
            return Err(Error::Config(vec![format!(
                "experiment: config names {name:?} but the subcommand is {:?}",
                experiment.name()
            )]));
        }
        _ => {
            obj.insert("experiment".into(), Value::String(experiment.name().into()));
        }
    }
    validate_config(&value.to_string())
}

fn execute(args: &RunArgs, experiment: Option<Experiment>) -> Result<(), Error> {
    let mut config = read_config(args.config.as_deref(), experiment)?;
    if let Some(seed) = args.seed {
        config.ensemble.base_seed = seed;
    }
    let dir = args
        .output_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results").join(config.experiment.name()));
    let manifest = runner::run(&config, &dir, args.threads)?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, dir.join(&f.name).display());
    }
    eprintln!(
        "{} finished in {:.2} s on {} thread(s)",
        manifest.experiment, manifest.wall_clock_seconds, manifest.threads
    );
    Ok(())
}

fn report(err: &Error) -> ExitCode {
    match err {
        Error::Config(violations) => {
            for v in violations {
                eprintln!("config violation: {v}");
            }
        }
        e => eprintln!("error: {e}"),
    }
    ExitCode::from(runner::exit_code(err) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, experiment) = match &cli.command {
        Command::Validate { config } => {
            return match read_config(Some(config), None) {
                Ok(c) => {
                    println!("{}", serde_json::to_string_pretty(&c).expect("config serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => report(&e),
            };
        }
        Command::Run(a) => (a, None),
        Command::ImbalanceQuantum(a) => (a, Some(Experiment::ImbalanceQuantum)),
        Command::EigenstateStats(a) => (a, Some(Experiment::EigenstateStats)),
        Command::SpectralStatsHermitian(a) => (a, Some(Experiment::SpectralStatsHermitian)),
        Command::RVsLambdaSweep(a) => (a, Some(Experiment::RVsLambdaSweep)),
        Command::ImbalanceClassical(a) => (a, Some(Experiment::ImbalanceClassical)),
        Command::LyapunovEnsemble(a) => (a, Some(Experiment::LyapunovEnsemble)),
        Command::ClassicalScatter(a) => (a, Some(Experiment::ClassicalScatter)),
        Command::LiouvillianStats(a) => (a, Some(Experiment::LiouvillianStats)),
        Command::NhStats(a) => (a, Some(Experiment::NhStats)),
        Command::Baselines(a) => (a, Some(Experiment::Baselines)),
    };
    match execute(args, experiment) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

//! Experiment orchestration: strict configs, deterministic realization
//! seeding, parallel ensembles reduced in index order, and CSV/JSON output
//! with a checksummed manifest.

mod config;
mod experiments;
mod output;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    validate_config, ClassicalConfig, EnsembleConfig, Experiment, ExperimentConfig, GridConfig, SectorConfig,
    StatsConfig, TruncationConfig,
};
pub use experiments::{realization_classical, realization_model};
pub use output::{format_f64, sha256_hex, Cell, Csv, FileRecord, Outputs};

use crate::error::{Error, Result};

/// Environment variable that overrides the worker count.
pub const THREADS_ENV: &str = "TCD_THREADS";

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct ResultManifest {
    pub software: String,
    pub version: String,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    /// Every emitted file except the manifest itself.
    pub files: Vec<FileRecord>,
    pub wall_clock_seconds: f64,
    pub threads: usize,
}

/// Worker count: explicit request, then `TCD_THREADS`, then all cores.
pub fn resolve_threads(requested: Option<usize>) -> usize {
    requested
        .filter(|&n| n > 0)
        .or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&n| n > 0)
        })
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Process exit code for a failed run: 2 for configuration problems, 3 for
/// numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        _ => 3,
    }
}

/// Execute the configured pipeline, writing artifacts and `manifest.json`
/// into `output_dir`.
pub fn run(config: &ExperimentConfig, output_dir: &Path, threads: Option<usize>) -> Result<ResultManifest> {
    let violations = config.violations();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    let threads = resolve_threads(threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut out = Outputs::create(output_dir)?;
    pool.install(|| experiments::dispatch(config, &mut out))?;
    let manifest = ResultManifest {
        software: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: config.experiment,
        config: config.clone(),
        files: out.into_files(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    std::fs::write(output_dir.join(MANIFEST_NAME), text)?;
    Ok(manifest)
}

/// Map `f` over realization indices in parallel, keeping index order. The
/// first failing index is reported.
pub fn par_realizations<T, F>(count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = (0..count)
        .into_par_iter()
        .map(|i| f(i).map_err(|e| e.in_realization(i)))
        .collect();
    results.into_iter().collect()
}

/// Mean and standard error (sample standard deviation over `√n`; NaN for
/// a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

//! Experiment orchestration: configuration, figure sweeps, CSV output and
//! the analytic check battery.

pub mod checks;
pub mod config;
pub mod figures;

use std::path::PathBuf;

use rayon::prelude::*;

pub use checks::{run_checks, run_checks_with, CheckOutcome, CheckReport};
pub use config::{ConfigError, EtaMode, PartialConfig, RunConfig};
pub use figures::{
    run_figure, run_sweep, to_csv, write_atomically, Figure, SweepRecord, CSV_HEADER,
};

/// Caps the number of worker threads; 0 runs everything on the caller.
pub const THREADS_ENV: &str = "INTERFACE_SIM_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Compute(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Worker count requested through [`THREADS_ENV`]; `None` leaves the choice
/// to rayon.
pub fn requested_threads() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            ConfigError::field("INTERFACE_SIM_THREADS", format!("`{v}` is not a count"))
        }),
    }
}

/// Maps `f` over `tasks`, in parallel unless threads are capped at 0. The
/// output order always matches the input order.
pub(crate) fn run_tasks<T: Sync, R: Send>(
    tasks: &[T],
    f: impl Fn(&T) -> crate::Result<R> + Sync,
) -> Result<Vec<R>, RunError> {
    let results: crate::Result<Vec<R>> = match requested_threads()? {
        Some(0) => tasks.iter().map(&f).collect(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| crate::Error::numerical(format!("thread pool: {e}")))?
            .install(|| tasks.par_iter().map(&f).collect()),
        None => tasks.par_iter().map(&f).collect(),
    };
    Ok(results?)
}

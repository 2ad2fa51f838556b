//! Parallel execution of experiment grids.
//!
//! Runs share nothing: each owns its parameters, optimizer state, and RNG
//! streams, so results are bit-identical at any parallelism level. A failed
//! run is recorded in place without aborting its siblings, and the output
//! order always matches the input order.

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::train::{self, RunResult};

/// Outcome of one grid run, in input order.
#[derive(Debug)]
pub struct GridRunRecord {
    pub index: usize,
    pub config: ExperimentConfig,
    pub outcome: Result<RunResult>,
}

/// Runs every config, at most `parallelism` at a time.
pub fn run_grid(configs: &[ExperimentConfig], parallelism: usize) -> Result<Vec<GridRunRecord>> {
    if configs.is_empty() {
        return Err(Error::InvalidInput("grid has no runs".into()));
    }
    if parallelism == 0 {
        return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    let records = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(index, config)| GridRunRecord {
                index,
                config: config.clone(),
                outcome: train::run(config),
            })
            .collect()
    });
    Ok(records)
}

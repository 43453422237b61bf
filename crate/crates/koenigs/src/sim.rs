//! Replicates in parallel, folded in replicate order.

use koenigs_core::montecarlo::{lcl_from_outcome, simulate_replicate, LclEstimate, SimConfig, SimOutcome};
use koenigs_core::Result;
use rayon::prelude::*;
use serde::Serialize;

/// Same result as [`koenigs_core::montecarlo::simulate`] for any number of workers.
pub fn simulate(config: &SimConfig) -> Result<SimOutcome> {
    config.validate()?;
    let times = config.times();
    let results: Vec<_> =
        (0..config.replicates).into_par_iter().map(|r| simulate_replicate(config, &times, r)).collect();
    SimOutcome::from_replicates(config, &results)
}

pub fn lcl_estimate(config: &SimConfig) -> Result<LclEstimate> {
    if !(config.model.lambda() < 1.0) {
        return Err(koenigs_core::Error::Domain("the limit conditional law needs lambda < 1".into()));
    }
    lcl_from_outcome(&simulate(config)?)
}

#[derive(Debug, Serialize)]
pub struct CheckpointReport {
    pub t: f64,
    pub extinct_fraction: f64,
    pub extinct_se: f64,
    pub mean_estimate: f64,
    pub mean_se: f64,
    pub truncated: u64,
    /// `[population, replicates]` pairs in increasing population.
    pub histogram: Vec<[u64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct SimReport {
    pub lambda: f64,
    pub bigk: f64,
    pub horizon: f64,
    pub replicates: u64,
    pub seed: u64,
    pub cap: u64,
    pub truncated: u64,
    pub checkpoints: Vec<CheckpointReport>,
}

impl SimReport {
    pub fn new(config: &SimConfig, outcome: &SimOutcome) -> Self {
        Self {
            lambda: config.model.lambda(),
            bigk: config.model.k(),
            horizon: config.horizon,
            replicates: outcome.replicates,
            seed: config.seed,
            cap: config.cap,
            truncated: outcome.truncated,
            checkpoints: outcome
                .checkpoints
                .iter()
                .map(|c| CheckpointReport {
                    t: c.t,
                    extinct_fraction: c.extinct_fraction,
                    extinct_se: c.extinct_se,
                    mean_estimate: c.mean_estimate,
                    mean_se: c.mean_se,
                    truncated: c.truncated,
                    histogram: c.histogram.iter().map(|(&n, &k)| [n, k]).collect(),
                })
                .collect(),
        }
    }
}

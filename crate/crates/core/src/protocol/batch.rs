use std::time::Instant;

use serde::Serialize;

use super::{run_with, EveModel, ProtocolParams, RunConfig};
use crate::error::{Error, Result};
use crate::rng::{child_seed, stream};

pub const SUMMARY_SCHEMA: &str = "uhqkd.run-summary.v1";

/// Aggregate of a batch; run `i` used the stream seeded by
/// `child_seed(seed, i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchSummary {
    pub schema: &'static str,
    pub params: ProtocolParams,
    pub seed: u64,
    pub trials: u64,
    pub accepts: u64,
    /// Accepted runs with `key_A ≠ key_B`.
    pub mismatches: u64,
    /// `2·2^{−k+n·h(r/n)}`.
    pub bound_2uh: f64,
    pub wallclock_ms: u64,
}

impl BatchSummary {
    pub fn run_seed(&self, index: u64) -> u64 {
        child_seed(self.seed, index)
    }

    pub fn accept_rate(&self) -> f64 {
        self.accepts as f64 / self.trials as f64
    }

    /// Equality ignoring wall-clock time.
    pub fn same_outcome(&self, other: &BatchSummary) -> bool {
        Self {
            wallclock_ms: 0,
            ..self.clone()
        } == Self {
            wallclock_ms: 0,
            ..other.clone()
        }
    }
}

/// Run `trials` independent protocol instances; deterministic in `seed`.
pub fn run_batch(
    params: &ProtocolParams,
    eve: &EveModel,
    cfg: RunConfig,
    trials: u64,
    seed: u64,
) -> Result<BatchSummary> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    eve.validate(params.n)?;
    let start = Instant::now();
    let mut accepts = 0;
    let mut mismatches = 0;
    for i in 0..trials {
        let rec = run_with(params, eve, cfg, &mut stream(child_seed(seed, i)))?;
        if let Some(same) = rec.keys_match() {
            accepts += 1;
            if !same {
                mismatches += 1;
            }
        }
    }
    Ok(BatchSummary {
        schema: SUMMARY_SCHEMA,
        params: *params,
        seed,
        trials,
        accepts,
        mismatches,
        bound_2uh: params.correctness_bound(),
        wallclock_ms: start.elapsed().as_millis() as u64,
    })
}

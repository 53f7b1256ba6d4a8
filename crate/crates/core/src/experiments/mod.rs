//! Monte Carlo experiments that pair simulation estimates with the
//! closed-form values in [`crate::bounds`].
//!
//! Every experiment is deterministic for a given config and seed. Work is
//! split into fixed-size chunks (or single trials), each driven by its own
//! stream `stream_id(cell, chunk)`; chunks run in parallel on the current
//! rayon pool and are reduced in index order.

mod connectivity;
mod eta;
mod hopcount;
mod prop1;
mod report;
mod stepdist;
mod uwedge;

pub use connectivity::{network_disconnected, run_connectivity, ConnectivityConfig, GapRule};
pub use eta::{run_eta_sweep, EtaSweepConfig};
pub use hopcount::{run_hopcount, run_walk_hops, HopcountConfig, WalkHopsConfig};
pub use prop1::{run_prop1, Prop1Config};
pub use report::{judge, Cell, ExperimentReport, Verdict};
pub use stepdist::{run_stepdist, StepdistConfig};
pub use uwedge::{run_uwedge, widest_gap, UwedgeConfig};

use rayon::prelude::*;

use crate::rng::{stream_id, stream_rng, SimRng};

/// Samples per chunk for experiments that draw many cheap samples.
pub(crate) const CHUNK: u64 = 1 << 14;

/// Runs `f(rng, start, len)` over `total` items split into chunks of `chunk`
/// and returns the per-chunk results in chunk order.
pub(crate) fn run_chunks<T, F>(seed: u64, cell: u32, total: u64, chunk: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng, u64, u64) -> T + Sync,
{
    let chunks = total.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let len = chunk.min(total - start);
            f(&mut stream_rng(seed, stream_id(cell, c)), start, len)
        })
        .collect()
}

/// Runs `f(rng, trial)` once per trial, each trial on its own stream.
pub(crate) fn run_trials<T, F>(seed: u64, cell: u32, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng, u64) -> T + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| f(&mut stream_rng(seed, stream_id(cell, t)), t))
        .collect()
}

pub(crate) fn check_positive_count(name: &str, n: u64) -> crate::Result<()> {
    if n == 0 {
        return Err(crate::Error::invalid(format!("{name} must be at least 1")));
    }
    Ok(())
}

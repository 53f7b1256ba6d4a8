use serde::{Deserialize, Serialize};

use super::{check_positive_count, network_disconnected, run_trials, Cell, ExperimentReport, GapRule, Verdict};
use crate::bounds::sigma_total;
use crate::error::{Error, Result};
use crate::network::{generate_ppp_with, NetworkParams, RegionKind};
use crate::stats::{proportion_std_error, Moments};
use crate::walk::{default_hop_cap, simulate_stopping_time_with};

/// Disconnection frequency and Markov hop count across wedge fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSweepConfig {
    pub etas: Vec<f64>,
    /// Expected node count of the connectivity networks.
    pub n: f64,
    pub dn: f64,
    pub region: RegionKind,
    pub trials: u64,
    pub h_over_r: f64,
    pub walks: u64,
    pub seed: u64,
}

impl Default for EtaSweepConfig {
    fn default() -> Self {
        EtaSweepConfig {
            etas: vec![0.25, 0.5, 0.75, 1.0],
            n: 3000.0,
            dn: 30.0,
            region: RegionKind::Disk,
            trials: 200,
            h_over_r: 10.0,
            walks: 10_000,
            seed: 0,
        }
    }
}

/// One exploratory row per η. Every η sees the same network realizations
/// and the same walk streams, so the rows differ only through η. Walks that
/// exhaust the hop cap are counted and left out of the mean; for η near 1
/// the walk has no inward drift and many do.
pub fn run_eta_sweep(cfg: &EtaSweepConfig) -> Result<ExperimentReport> {
    check_positive_count("trials", cfg.trials)?;
    check_positive_count("walks", cfg.walks)?;
    if !(cfg.h_over_r > 1.0) {
        return Err(Error::invalid("h/R must exceed 1"));
    }
    let d = cfg.dn / cfg.n;
    let mut report = ExperimentReport::new("eta");
    for &eta in &cfg.etas {
        let params = NetworkParams::from_n_d(cfg.n, d, eta, 1.0, cfg.region)?;
        let flags = run_trials(cfg.seed, 0, cfg.trials, |rng, _| {
            network_disconnected(&generate_ppp_with(&params, rng), 1.0, eta, GapRule::Effective)
        });
        let hits = flags.iter().filter(|&&f| f).count() as u64;
        let cap = default_hop_cap(cfg.h_over_r, 1.0);
        let walks = run_trials(cfg.seed, 1, cfg.walks, |rng, _| {
            simulate_stopping_time_with(cfg.h_over_r, 1.0, 1.0, eta, cap, rng).map(|s| s.nu as f64)
        });
        let mut hops = Moments::new();
        let mut capped = 0u64;
        for w in walks {
            match w {
                Ok(nu) => hops.push(nu),
                Err(Error::HopCapExhausted { .. }) => capped += 1,
                Err(e) => return Err(e),
            }
        }
        let bound = sigma_total(cfg.n, d, eta)?;
        report.cells.push(
            Cell::judged(
                format!("eta={eta}"),
                Some(bound.sigma_total),
                None,
                None,
                hits as f64 / cfg.trials as f64,
                proportion_std_error(hits, cfg.trials),
                cfg.trials,
            )
            .with_verdict(Verdict::Exploratory)
            .detail("mean_hops", hops.mean())
            .detail("mean_hops_se", hops.std_error())
            .detail("walks", hops.count() as f64)
            .detail("hop_cap_hits", capped as f64),
        );
    }
    Ok(report)
}

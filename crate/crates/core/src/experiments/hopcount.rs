use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_positive_count, run_trials, Cell, ExperimentReport, Verdict};
use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::network::{generate_ppp_with, NetworkParams, RegionSpec};
use crate::routing::{self, route_between_points, RelayPolicy, RouteStatus};
use crate::stats::{proportion_std_error, Moments};
use crate::walk::{self, simulate_stopping_time_with};

/// Routing over fresh Poisson networks between two points `h` apart.
/// Lengths are in units of `R`; `lambda` is therefore `λR²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopcountConfig {
    pub lambda: f64,
    pub h_over_r: Vec<f64>,
    pub eta: f64,
    pub policy: RelayPolicy,
    pub trials: u64,
    /// Defaults to `⌈40·h/R⌉ + 100`.
    pub hop_cap: Option<u64>,
    pub seed: u64,
}

impl Default for HopcountConfig {
    fn default() -> Self {
        HopcountConfig {
            lambda: 20.0,
            h_over_r: vec![10.0, 25.0, 50.0],
            eta: 0.5,
            policy: RelayPolicy::RandomWedge,
            trials: 10_000,
            hop_cap: None,
            seed: 0,
        }
    }
}

/// Bounds on the mean number of transmissions `ν_R + 1` from distance `h`.
fn transmission_bounds(h: f64) -> (f64, f64) {
    if h <= 1.0 {
        (1.0, 1.0)
    } else {
        (0.75 * PI * (h - 1.0) + 1.0, 4.0 * h + 1.0)
    }
}

fn check_h(h_over_r: &[f64], eta: f64) -> Result<()> {
    if h_over_r.is_empty() || h_over_r.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::invalid("h/R values must be positive and finite"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("η must lie in (0, 1], got {eta}")));
    }
    Ok(())
}

/// The source sits at `(−h/2, 0)` and the destination at `(h/2, 0)` inside
/// a disk of radius `h/2 + 4R`. Neither endpoint is a network node. Hop
/// statistics are over delivered packets only.
pub fn run_hopcount(cfg: &HopcountConfig) -> Result<ExperimentReport> {
    check_positive_count("trials", cfg.trials)?;
    check_h(&cfg.h_over_r, cfg.eta)?;
    let mut report = ExperimentReport::new("hopcount");
    for (cell, &h) in cfg.h_over_r.iter().enumerate() {
        let region = RegionSpec::disk(h / 2.0 + 4.0)?;
        let params = NetworkParams::new(cfg.lambda, 1.0, cfg.eta, region)?;
        let cap = cfg.hop_cap.unwrap_or_else(|| routing::default_hop_cap(h, 1.0));
        let src = Point2D::new(-h / 2.0, 0.0);
        let dst = Point2D::new(h / 2.0, 0.0);
        let outcomes = run_trials(cfg.seed, cell as u32, cfg.trials, |rng, _| {
            let ns = generate_ppp_with(&params, rng);
            route_between_points(&ns, src, dst, cfg.policy, &params, cap, rng)
        });
        let mut hops = Moments::new();
        let (mut stuck, mut capped) = (0u64, 0u64);
        for o in outcomes {
            let o = o?;
            match o.status {
                RouteStatus::Delivered => hops.push(o.hops as f64),
                RouteStatus::Stuck => stuck += 1,
                RouteStatus::HopCapExceeded => capped += 1,
            }
        }
        let delivered = hops.count();
        let n = cfg.trials as f64;
        let checked = cfg.eta == 0.5 && cfg.policy == RelayPolicy::RandomWedge;
        let (lo, hi) = transmission_bounds(h);
        let mut c = if checked {
            Cell::judged(format!("h/R={h}"), None, Some(lo), Some(hi), hops.mean(), hops.std_error(), delivered)
        } else {
            Cell::judged(format!("h/R={h}"), None, None, None, hops.mean(), hops.std_error(), delivered)
                .with_verdict(Verdict::Exploratory)
        };
        if delivered == 0 {
            c = c.with_verdict(Verdict::Inconclusive);
        }
        report.cells.push(
            c.detail("delivery_rate", delivered as f64 / n)
                .detail("delivery_rate_se", proportion_std_error(delivered, cfg.trials))
                .detail("stuck_rate", stuck as f64 / n)
                .detail("hop_cap_rate", capped as f64 / n)
                .detail("ratio", hops.mean() / h)
                .detail("ratio_se", hops.std_error() / h),
        );
    }
    Ok(report)
}

/// Stopping times `ν_R` of the Markov walk started at distance `h` (units
/// of `R`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkHopsConfig {
    pub h_over_r: Vec<f64>,
    pub eta: f64,
    pub walks: u64,
    /// Defaults to `⌈100·h/R⌉ + 10⁴`.
    pub hop_cap: Option<u64>,
    pub seed: u64,
}

impl Default for WalkHopsConfig {
    fn default() -> Self {
        WalkHopsConfig { h_over_r: vec![10.0, 25.0, 50.0, 100.0], eta: 0.5, walks: 100_000, hop_cap: None, seed: 0 }
    }
}

/// Mean `ν_R` per `h/R`, judged against `[3π/4·(h/R − 1), 4h/R]` for the
/// half-disk. Walks that run out of hops are counted, excluded from the
/// mean, and make the cell inconclusive.
pub fn run_walk_hops(cfg: &WalkHopsConfig) -> Result<ExperimentReport> {
    check_positive_count("walks", cfg.walks)?;
    check_h(&cfg.h_over_r, cfg.eta)?;
    let mut report = ExperimentReport::new("walk");
    for (cell, &h) in cfg.h_over_r.iter().enumerate() {
        let cap = cfg.hop_cap.unwrap_or_else(|| walk::default_hop_cap(h, 1.0));
        let results = run_trials(cfg.seed, cell as u32, cfg.walks, |rng, _| {
            simulate_stopping_time_with(h, 1.0, 1.0, cfg.eta, cap, rng)
        });
        let mut nu = Moments::new();
        let mut capped = 0u64;
        for r in results {
            match r {
                Ok(s) => nu.push(s.nu as f64),
                Err(Error::HopCapExhausted { .. }) => capped += 1,
                Err(e) => return Err(e),
            }
        }
        let label = format!("h/R={h}");
        let mut c = if cfg.eta == 0.5 {
            let (lo, hi) = if h <= 1.0 { (0.0, 0.0) } else { (0.75 * PI * (h - 1.0), 4.0 * h) };
            Cell::judged(label, None, Some(lo), Some(hi), nu.mean(), nu.std_error(), nu.count())
        } else {
            Cell::judged(label, None, None, None, nu.mean(), nu.std_error(), nu.count())
                .with_verdict(Verdict::Exploratory)
        };
        if capped > 0 {
            c = c.with_verdict(Verdict::Inconclusive);
        }
        report.cells.push(
            c.detail("ratio", nu.mean() / h)
                .detail("ratio_se", nu.std_error() / h)
                .detail("asymptotic_ratio", 0.75 * PI)
                .detail("hop_cap_hits", capped as f64),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_distances_take_one_transmission() {
        let cfg = HopcountConfig { h_over_r: vec![0.5, 1.0], trials: 50, ..Default::default() };
        let r = run_hopcount(&cfg).unwrap();
        for c in &r.cells {
            assert_eq!(c.estimate, 1.0);
            assert_eq!(c.samples, 50);
            assert_eq!(c.verdict, Verdict::Consistent);
        }
    }

    #[test]
    fn network_hops_within_bounds() {
        let cfg = HopcountConfig { h_over_r: vec![10.0], trials: 400, seed: 2, ..Default::default() };
        let r = run_hopcount(&cfg).unwrap();
        let c = &r.cells[0];
        assert_eq!(c.verdict, Verdict::Consistent, "{c:?}");
        assert!(c.details["delivery_rate"] > 0.9);
        assert_eq!(r, run_hopcount(&cfg).unwrap());
    }

    #[test]
    fn other_policies_are_exploratory() {
        let cfg = HopcountConfig { h_over_r: vec![6.0], trials: 30, policy: RelayPolicy::Greedy, ..Default::default() };
        let r = run_hopcount(&cfg).unwrap();
        assert_eq!(r.cells[0].verdict, Verdict::Exploratory);
        // greedy makes at least as much progress per hop as a half-disk draw
        assert!(r.cells[0].estimate < 0.75 * PI * 5.0 + 1.0);
    }

    #[test]
    fn walk_hops_cells() {
        let cfg = WalkHopsConfig { h_over_r: vec![10.0, 30.0], walks: 5000, seed: 1, ..Default::default() };
        let r = run_walk_hops(&cfg).unwrap();
        assert_eq!(r.cells.len(), 2);
        assert!(r.cells.iter().all(|c| c.verdict == Verdict::Consistent));
        let capped = WalkHopsConfig { h_over_r: vec![50.0], walks: 10, hop_cap: Some(5), ..Default::default() };
        let r = run_walk_hops(&capped).unwrap();
        assert_eq!(r.cells[0].verdict, Verdict::Inconclusive);
        assert_eq!(r.cells[0].details["hop_cap_hits"], 10.0);
    }
}

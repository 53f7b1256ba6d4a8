use serde::{Deserialize, Serialize};

use super::{check_positive_count, run_chunks, run_trials, Cell, ExperimentReport, CHUNK};
use crate::bounds::{step_cdf, step_support};
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Wedge};
use crate::network::{generate_ppp_with, NetworkParams, RegionSpec};
use crate::routing::{select_relay, RelayPolicy};
use crate::stats::{ks_radius, ks_statistic};
use crate::walk::{step_markov, WalkState};

const KS_ALPHA: f64 = 0.001;

/// Empirical law of the one-hop distance change against its closed-form
/// CDF, for the half-disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepdistConfig {
    pub r_over_r: Vec<f64>,
    /// Draws per `r/R` from the uniform half-disk.
    pub trials: u64,
    /// Relay choices per `r/R` in Poisson networks; 0 skips the networked rows.
    pub network_trials: u64,
    /// Network density `λR²` for the networked rows.
    pub lambda: f64,
    pub seed: u64,
}

impl Default for StepdistConfig {
    fn default() -> Self {
        StepdistConfig { r_over_r: vec![1.01, 1.5, 2.0, 5.0, 20.0], trials: 1_000_000, network_trials: 0, lambda: 50.0, seed: 0 }
    }
}

fn ks_cell(label: String, mut xi: Vec<f64>, r: f64) -> Result<Cell> {
    let n = xi.len();
    let (lo, hi) = step_support(r, 1.0);
    let slack = 1e-12;
    let outside = xi.iter().filter(|&&x| x < lo - slack || x > hi + slack).count();
    let (min, max) = xi.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let d = ks_statistic(&mut xi, |x| step_cdf(x.clamp(lo, hi), r, 1.0).unwrap_or(f64::NAN));
    if !d.is_finite() {
        return Err(Error::invalid("step CDF evaluation failed"));
    }
    let radius = ks_radius(n, KS_ALPHA);
    let mut c = Cell::judged(label, None, None, Some(radius), d, 0.0, n as u64);
    if outside > 0 {
        c = c.with_verdict(super::Verdict::Violated);
    }
    Ok(c.detail("support_lower", lo)
        .detail("support_upper", hi)
        .detail("min_xi", min)
        .detail("max_xi", max)
        .detail("outside_support", outside as f64))
}

/// Rows `markov r/R=…` compare draws from the uniform half-disk with the
/// CDF. Rows `network r/R=…` hand the packet from a holder at the origin to
/// a uniformly chosen member of its half-disk in a fresh Poisson network
/// (holders with an empty half-disk are skipped). The reported estimate is
/// the KS statistic, judged against the 99.9% KS radius.
pub fn run_stepdist(cfg: &StepdistConfig) -> Result<ExperimentReport> {
    check_positive_count("trials", cfg.trials)?;
    if cfg.r_over_r.is_empty() || cfg.r_over_r.iter().any(|&r| !(r > 1.0 && r.is_finite())) {
        return Err(Error::invalid("r/R values must exceed 1"));
    }
    let mut report = ExperimentReport::new("stepdist");
    let cells = cfg.r_over_r.len() as u32;
    for (i, &r) in cfg.r_over_r.iter().enumerate() {
        let start = WalkState { r, t: 0 };
        let xi: Vec<f64> = run_chunks(cfg.seed, i as u32, cfg.trials, CHUNK, |rng, _, len| {
            (0..len).map(|_| step_markov(start, 1.0, 0.5, rng).r - r).collect::<Vec<f64>>()
        })
        .concat();
        report.cells.push(ks_cell(format!("markov r/R={r}"), xi, r)?);
    }
    if cfg.network_trials > 0 {
        let params = NetworkParams::new(cfg.lambda, 1.0, 0.5, RegionSpec::square(2.5)?)?;
        for (i, &r) in cfg.r_over_r.iter().enumerate() {
            let dst = Point2D::new(r, 0.0);
            let wedge = Wedge::toward(Point2D::ORIGIN, dst, 1.0, 0.5)?;
            let draws = run_trials(cfg.seed, cells + i as u32, cfg.network_trials, |rng, _| {
                let ns = generate_ppp_with(&params, rng);
                let mut cands = Vec::new();
                ns.for_each_in_wedge(&wedge, None, |id, p| cands.push((id, p)));
                select_relay(RelayPolicy::RandomWedge, &cands, Point2D::ORIGIN, dst, rng)
                    .map(|id| ns.positions()[id].distance(dst) - r)
            });
            let skipped = draws.iter().filter(|d| d.is_none()).count();
            let xi: Vec<f64> = draws.into_iter().flatten().collect();
            if xi.is_empty() {
                return Err(Error::invalid("no holder had a non-empty half-disk"));
            }
            report.cells.push(ks_cell(format!("network r/R={r}"), xi, r)?.detail("empty_half_disks", skipped as f64));
        }
    }
    Ok(report)
}

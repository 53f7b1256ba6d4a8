use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_positive_count, run_trials, Cell, ExperimentReport, Verdict};
use crate::bounds::prop1_bounds;
use crate::error::{Error, Result};
use crate::geometry::{wedge_overlap_area, Point2D, Wedge};
use crate::network::{sample_ppp_positions, NetworkParams, NodeSet, RegionSpec};
use crate::stats::{proportion_std_error, Moments};

/// Two consecutive random half-disk relay choices in a Poisson network,
/// checking how often the second relay lands in the previous half-disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prop1Config {
    /// Values of `λ|D|`, the expected node count of a half-disk.
    pub lambda_area: Vec<f64>,
    pub trials: u64,
    pub bins: usize,
    /// Bins with fewer accepted trials are inconclusive.
    pub min_per_bin: u64,
    pub seed: u64,
}

impl Default for Prop1Config {
    fn default() -> Self {
        Prop1Config { lambda_area: vec![5.0, 20.0, 100.0], trials: 200_000, bins: 20, min_per_bin: 30, seed: 0 }
    }
}

const HALF_DISK: f64 = PI / 2.0;

/// One trial: `(overlap ratio, whether the second relay is in the previous
/// half-disk)`, or `None` when either half-disk is empty.
fn trial<R: Rng + ?Sized>(params: &NetworkParams, rng: &mut R) -> Result<Option<(f64, bool)>> {
    let dst = Point2D::new(1000.0, 0.0);
    let mut positions = sample_ppp_positions(params, rng);
    let prev_id = positions.len();
    positions.push(Point2D::ORIGIN);
    let ns = NodeSet::from_positions(positions, params.region, params.range)?;

    let prev = Wedge::toward(Point2D::ORIGIN, dst, 1.0, 0.5)?;
    let first = ns.neighbors_in_wedge(&prev, Some(prev_id));
    if first.is_empty() {
        return Ok(None);
    }
    let cur_id = first[rng.random_range(0..first.len())];
    let cur = ns.positions()[cur_id];
    let next = Wedge::toward(cur, dst, 1.0, 0.5)?;
    let second = ns.neighbors_in_wedge(&next, Some(cur_id));
    if second.is_empty() {
        return Ok(None);
    }
    let chosen = ns.positions()[second[rng.random_range(0..second.len())]];
    let ratio = (wedge_overlap_area(&next, &prev) / HALF_DISK).clamp(0.0, 1.0);
    Ok(Some((ratio, prev.contains(chosen))))
}

/// The previous holder sits at the origin and the destination at
/// `(1000R, 0)`. Trials are binned by the overlap ratio of the two
/// half-disks; each populated bin compares the selection frequency with the
/// sandwich at the bin's mean ratio. A `gap` row per density reports the
/// mean of `ratio − indicator`, which the sandwich confines to
/// `[0, E(ratio)/(λ|D|)]`.
pub fn run_prop1(cfg: &Prop1Config) -> Result<ExperimentReport> {
    check_positive_count("trials", cfg.trials)?;
    if cfg.bins == 0 || cfg.lambda_area.is_empty() || cfg.lambda_area.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::invalid("need at least one bin and positive λ|D| values"));
    }
    let mut report = ExperimentReport::new("prop1");
    for (cell, &la) in cfg.lambda_area.iter().enumerate() {
        let lambda = la / HALF_DISK;
        let params = NetworkParams::new(lambda, 1.0, 0.5, RegionSpec::square(4.5)?)?;
        let results = run_trials(cfg.seed, cell as u32, cfg.trials, |rng, _| trial(&params, rng));
        let mut bins = vec![(0u64, 0u64, 0.0f64); cfg.bins];
        let mut gap = Moments::new();
        let mut ratios = Moments::new();
        for r in results {
            let Some((ratio, hit)) = r? else { continue };
            let b = ((ratio * cfg.bins as f64) as usize).min(cfg.bins - 1);
            bins[b].0 += 1;
            bins[b].1 += hit as u64;
            bins[b].2 += ratio;
            gap.push(ratio - hit as u8 as f64);
            ratios.push(ratio);
        }
        for (b, &(n, hits, sum)) in bins.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let mean_ratio = sum / n as f64;
            let bounds = prop1_bounds(mean_ratio * HALF_DISK, HALF_DISK, lambda);
            let freq = hits as f64 / n as f64;
            let mut c = Cell::judged(
                format!("lambda_area={la} bin={b:02}"),
                Some(bounds.upper),
                Some(bounds.lower),
                Some(bounds.upper),
                freq,
                proportion_std_error(hits, n),
                n,
            );
            if n < cfg.min_per_bin {
                c = c.with_verdict(Verdict::Inconclusive);
            }
            report.cells.push(
                c.detail("bin_lower", b as f64 / cfg.bins as f64)
                    .detail("bin_upper", (b + 1) as f64 / cfg.bins as f64),
            );
        }
        let accepted = gap.count();
        let mut c = Cell::judged(
            format!("lambda_area={la} gap"),
            None,
            Some(0.0),
            Some(ratios.mean() / la),
            gap.mean(),
            gap.std_error(),
            accepted,
        );
        if accepted < cfg.min_per_bin {
            c = c.with_verdict(Verdict::Inconclusive);
        }
        report.cells.push(
            c.detail("mean_ratio", ratios.mean())
                .detail("rejected_trials", (cfg.trials - accepted) as f64)
                .detail("lambda", lambda),
        );
    }
    Ok(report)
}

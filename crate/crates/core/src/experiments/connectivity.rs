use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{check_positive_count, run_trials, Cell, ExperimentReport, Verdict};
use crate::bounds::sigma_total;
use crate::error::{Error, Result};
use crate::network::{generate_ppp_with, NetworkParams, NodeId, NodeSet, RegionKind};
use crate::stats::proportion_std_error;

/// Which orientations count when looking for an empty η-disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapRule {
    /// Every orientation, for every node.
    Unrestricted,
    /// For a node at distance `δR < R` from the boundary, only orientations
    /// in `[φ, 2π − φ]` from the outward normal, `φ = acos δ`. Other
    /// orientations would put the destination within range.
    Effective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectivityConfig {
    /// Expected number of nodes `N = λ|A|`.
    pub n: f64,
    /// Values of `dN`, the expected number of nodes in range.
    pub dn: Vec<f64>,
    pub eta: f64,
    pub region: RegionKind,
    pub trials: u64,
    pub seed: u64,
}

impl Default for ConnectivityConfig {
    fn default() -> Self {
        ConnectivityConfig {
            n: 3000.0,
            dn: vec![20.0, 30.0, 40.0],
            eta: 0.5,
            region: RegionKind::Disk,
            trials: 1000,
            seed: 0,
        }
    }
}

/// True when some node has an empty η-disk in an admissible orientation.
pub fn network_disconnected(ns: &NodeSet, range: f64, eta: f64, rule: GapRule) -> bool {
    let mut angles = Vec::new();
    (0..ns.len()).any(|id| node_flagged(ns, id, range, eta, rule, &mut angles))
}

fn node_flagged(ns: &NodeSet, id: NodeId, range: f64, eta: f64, rule: GapRule, angles: &mut Vec<f64>) -> bool {
    let p = ns.positions()[id];
    let delta = ns.region().boundary_distance(p) / range;
    let (base, phi) = match rule {
        GapRule::Effective if delta <= 1.0 => (ns.region().outward_normal(p), delta.clamp(0.0, 1.0).acos()),
        _ => (0.0, 0.0),
    };
    angles.clear();
    ns.for_each_in_disk(p, range, Some(id), |_, q| angles.push(((q - p).angle() - base).rem_euclid(TAU)));
    has_empty_wedge(angles, eta, phi)
}

/// Whether a closed gap of angle `2ηπ` exists between the neighbor angles
/// (in `[0, 2π)`) whose bisector lies in `[φ, 2π − φ]`.
fn has_empty_wedge(angles: &mut [f64], eta: f64, phi: f64) -> bool {
    let width = 2.0 * PI * eta;
    let n = angles.len();
    // no neighbors, or one neighbor leaving a full-turn gap
    if n <= 1 {
        return true;
    }
    angles.sort_unstable_by(|a, b| a.total_cmp(b));
    (0..n).any(|k| {
        let a = angles[k];
        let b = if k + 1 < n { angles[k + 1] } else { angles[0] + TAU };
        if b - a < width {
            return false;
        }
        if phi <= 0.0 {
            return true;
        }
        let (c0, c1) = (a + PI * eta, b - PI * eta);
        (c0 <= TAU - phi && c1 >= phi) || (c0 <= 2.0 * TAU - phi && c1 >= TAU + phi)
    })
}

/// Disconnection frequency over fresh Poisson networks against the
/// connectivity bound, one cell per `dN`.
pub fn run_connectivity(cfg: &ConnectivityConfig) -> Result<ExperimentReport> {
    check_positive_count("trials", cfg.trials)?;
    if cfg.dn.is_empty() {
        return Err(Error::invalid("dn list is empty"));
    }
    let mut report = ExperimentReport::new("connectivity");
    for (cell, &dn) in cfg.dn.iter().enumerate() {
        let d = dn / cfg.n;
        let params = NetworkParams::from_n_d(cfg.n, d, cfg.eta, 1.0, cfg.region)?;
        let bound = sigma_total(cfg.n, d, cfg.eta)?;
        let flags = run_trials(cfg.seed, cell as u32, cfg.trials, |rng, _| {
            let ns = generate_ppp_with(&params, rng);
            let effective = network_disconnected(&ns, 1.0, cfg.eta, GapRule::Effective);
            let unrestricted = effective || network_disconnected(&ns, 1.0, cfg.eta, GapRule::Unrestricted);
            (effective, unrestricted, ns.len())
        });
        let hits = flags.iter().filter(|f| f.0).count() as u64;
        let loose = flags.iter().filter(|f| f.1).count() as u64;
        let nodes = flags.iter().map(|f| f.2 as f64).sum::<f64>() / cfg.trials as f64;
        let freq = hits as f64 / cfg.trials as f64;
        let se = proportion_std_error(hits, cfg.trials);
        let mut c = Cell::judged(
            format!("dN={dn}"),
            Some(bound.sigma_total),
            None,
            Some(bound.sigma_total),
            freq,
            se,
            cfg.trials,
        );
        if bound.sigma_total >= 1.0 && c.verdict != Verdict::Violated {
            c = c.with_verdict(Verdict::Vacuous);
        }
        report.cells.push(
            c.detail("sigma_interior", bound.sigma_interior)
                .detail("sigma_edge", bound.sigma_edge)
                .detail("unrestricted_frequency", loose as f64 / cfg.trials as f64)
                .detail("mean_nodes", nodes)
                .detail("d", d)
                .detail("lambda", params.lambda),
        );
    }
    Ok(report)
}

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_positive_count, run_chunks, Cell, ExperimentReport, CHUNK};
use crate::bounds::{empty_wedge_prob_exact, empty_wedge_prob_upper};
use crate::error::{Error, Result};
use crate::stats::proportion_std_error;

/// Widest-gap probability of `i` uniform angles against the exact
/// empty-wedge probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UwedgeConfig {
    pub max_i: u64,
    pub etas: Vec<f64>,
    /// Angle tuples per `(i, η)` cell.
    pub samples: u64,
    pub seed: u64,
}

impl Default for UwedgeConfig {
    fn default() -> Self {
        UwedgeConfig { max_i: 10, etas: vec![0.25, 0.5, 0.75], samples: 1_000_000, seed: 0 }
    }
}

/// Largest circular gap between the angles in `[0, 2π)`; sorts in place.
/// A single angle leaves a full turn.
pub fn widest_gap(angles: &mut [f64]) -> f64 {
    if angles.len() <= 1 {
        return TAU;
    }
    angles.sort_unstable_by(|a, b| a.total_cmp(b));
    let wrap = angles[0] + TAU - angles[angles.len() - 1];
    angles.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

/// One row per `(i, η)`, `i = 1..=max_i`: the fraction of tuples whose
/// widest gap is at least `2ηπ`, judged at three standard errors around the
/// exact value. The standard error is the one implied by the exact value,
/// `√(p(1 − p)/n)`, so cells where every tuple leaves a wide gap are still
/// judged sensibly.
pub fn run_uwedge(cfg: &UwedgeConfig) -> Result<ExperimentReport> {
    check_positive_count("samples", cfg.samples)?;
    check_positive_count("max_i", cfg.max_i)?;
    if cfg.etas.is_empty() || cfg.etas.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::invalid("η values must lie in (0, 1]"));
    }
    let mut report = ExperimentReport::new("uwedge");
    let mut cell = 0u32;
    for &eta in &cfg.etas {
        let width = 2.0 * PI * eta;
        for i in 1..=cfg.max_i {
            let counts = run_chunks(cfg.seed, cell, cfg.samples, CHUNK, |rng, _, len| {
                let mut buf = vec![0.0; i as usize];
                (0..len)
                    .filter(|_| {
                        buf.iter_mut().for_each(|a| *a = TAU * rng.random::<f64>());
                        widest_gap(&mut buf) >= width
                    })
                    .count() as u64
            });
            cell += 1;
            let hits: u64 = counts.iter().sum();
            let exact = empty_wedge_prob_exact(i, eta)?;
            let upper = empty_wedge_prob_upper(i, eta)?;
            let c = Cell::judged(
                format!("i={i} eta={eta}"),
                Some(exact),
                Some(exact),
                Some(exact),
                hits as f64 / cfg.samples as f64,
                (exact * (1.0 - exact) / cfg.samples as f64).sqrt(),
                cfg.samples,
            );
            report.cells.push(
                c.detail("union_bound", upper)
                    .detail("exact_below_union_bound", (exact <= upper) as u8 as f64)
                    .detail("sample_std_error", proportion_std_error(hits, cfg.samples)),
            );
        }
    }
    Ok(report)
}

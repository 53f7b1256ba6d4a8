//! Markov approximation of the distance from the packet to its destination.
//!
//! Each hop moves the packet to a point uniform on the η-disk of radius `R`
//! pointing at the destination, independently of the past. Only the distance
//! `r_t` is tracked; no network is built.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::drift_bound;
use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_wedge, LocalStep};
use crate::rng::{stream_rng, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkState {
    pub r: f64,
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingTimeSample {
    pub nu: u64,
    pub h: f64,
    pub r_threshold: f64,
}

/// `⌈100·h/R⌉ + 10⁴`.
pub fn default_hop_cap(h: f64, range: f64) -> u64 {
    (100.0 * h / range).ceil() as u64 + 10_000
}

/// Moves the state by a local step `(x', y')`, with `x'` pointing at the
/// destination.
pub fn apply_step(state: WalkState, step: LocalStep) -> WalkState {
    WalkState { r: state.r + drift_bound(state.r, step.x_prime, step.y_prime), t: state.t + 1 }
}

/// One hop of the walk.
pub fn step_markov<R: Rng + ?Sized>(state: WalkState, range: f64, eta: f64, rng: &mut R) -> WalkState {
    apply_step(state, sample_uniform_wedge(rng, range, eta))
}

fn check(h: f64, r_threshold: f64, range: f64, eta: f64) -> Result<()> {
    if !(range > 0.0 && r_threshold >= range && h.is_finite() && h >= 0.0 && eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!(
            "walk needs h ≥ 0, r_threshold ≥ R > 0 and 0 < η ≤ 1, got h = {h}, r_threshold = {r_threshold}, R = {range}, η = {eta}"
        )));
    }
    Ok(())
}

/// First hop index at which the distance is at most `r_threshold`, starting
/// from `h`. Running out of `hop_cap` steps is an error.
pub fn simulate_stopping_time_with<R: Rng + ?Sized>(
    h: f64,
    r_threshold: f64,
    range: f64,
    eta: f64,
    hop_cap: u64,
    rng: &mut R,
) -> Result<StoppingTimeSample> {
    check(h, r_threshold, range, eta)?;
    let mut s = WalkState { r: h, t: 0 };
    while s.r > r_threshold {
        if s.t >= hop_cap {
            return Err(Error::HopCapExhausted { cap: hop_cap, distance: s.r });
        }
        s = step_markov(s, range, eta, rng);
    }
    Ok(StoppingTimeSample { nu: s.t, h, r_threshold })
}

/// [`simulate_stopping_time_with`] on stream 0 of `seed`.
pub fn simulate_stopping_time(
    h: f64,
    r_threshold: f64,
    range: f64,
    eta: f64,
    hop_cap: u64,
    seed: u64,
) -> Result<StoppingTimeSample> {
    simulate_stopping_time_with(h, r_threshold, range, eta, hop_cap, &mut stream_rng(seed, 0))
}

/// Full trajectory from `r = h` until `r ≤ R` or `hop_cap` steps.
pub fn walk_trace(h: f64, range: f64, eta: f64, hop_cap: u64, seed: u64) -> Result<Vec<WalkState>> {
    check(h, range, range, eta)?;
    let mut rng: SimRng = stream_rng(seed, 0);
    let mut s = WalkState { r: h, t: 0 };
    let mut trace = vec![s];
    while s.r > range && s.t < hop_cap {
        s = step_markov(s, range, eta, &mut rng);
        trace.push(s);
    }
    Ok(trace)
}

/// Writes `t,r,xi` where `xi = r_{t+1} − r_t`; the last row has no `xi`.
pub fn write_trace_csv<W: Write>(out: &mut W, trace: &[WalkState]) -> Result<()> {
    writeln!(out, "t,r,xi")?;
    for (i, s) in trace.iter().enumerate() {
        match trace.get(i + 1) {
            Some(next) => writeln!(out, "{},{},{}", s.t, s.r, next.r - s.r)?,
            None => writeln!(out, "{},{},", s.t, s.r)?,
        }
    }
    Ok(())
}

//! Closed-form connectivity and hop-count bounds.
//!
//! Notation: `n` is the expected node count `λ|A|`, `d = πR²/|A|` the
//! normalized transmission-disk area (so `d·n` is the expected number of
//! nodes within range of a node), and `eta` the wedge fraction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{RegionKind, RegionSpec};
use crate::quadrature::GaussLegendre;

/// Disconnection-probability bound for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub sigma_interior: f64,
    pub sigma_edge: f64,
    pub sigma_total: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub d: f64,
    pub eta: f64,
}

/// Bounds on the expected stopping time `E(ν_r | h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Which expected interior-node count multiplies the interior bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteriorCount {
    /// `(1 − 2√d)·N`, the simplified factor that enters the total bound.
    #[default]
    Simplified,
    /// `(1 − (2 − √d)√d)·N`, the exact expected count of interior nodes of a
    /// disk region.
    Intermediate,
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("eta must lie in (0, 1], got {eta}")))
    }
}

fn check_network(n: f64, d: f64, eta: f64) -> Result<()> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::invalid(format!("N must be positive, got {n}")));
    }
    if !(d > 0.0 && d <= 1.0) {
        return Err(Error::invalid(format!("d must lie in (0, 1], got {d}")));
    }
    check_eta(eta)
}

fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Probability that `i` independent uniform directions leave an empty arc of
/// angle at least `2ηπ`, by inclusion–exclusion over the gaps.
pub fn empty_wedge_prob_exact(i: u64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    if i == 0 {
        return Ok(1.0);
    }
    let kmax = ((1.0 / eta + 1e-12).floor() as u64).min(i);
    let mut sum = 0.0;
    for k in 1..=kmax {
        let base = (1.0 - k as f64 * eta).max(0.0);
        let term = binomial(i, k) * base.powi((i - 1) as i32);
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// The union bound `i(1 − η)^(i−1)`.
pub fn empty_wedge_prob_upper(i: u64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    if i == 0 {
        return Err(Error::invalid("the union bound needs i ≥ 1"));
    }
    Ok(i as f64 * (1.0 - eta).powi((i - 1) as i32))
}

/// Bound on the probability that some interior node has an empty η-disk in
/// some direction: `(1 − 2√d)·N·(dN + 1)·e^(−ηdN)`.
pub fn sigma_interior(n: f64, d: f64, eta: f64) -> Result<f64> {
    sigma_interior_with(n, d, eta, InteriorCount::Simplified)
}

pub fn sigma_interior_with(n: f64, d: f64, eta: f64, count: InteriorCount) -> Result<f64> {
    check_network(n, d, eta)?;
    let sd = d.sqrt();
    let factor = match count {
        InteriorCount::Simplified => 1.0 - 2.0 * sd,
        InteriorCount::Intermediate => 1.0 - (2.0 - sd) * sd,
    };
    if factor <= 0.0 {
        return Ok(0.0);
    }
    let dn = d * n;
    Ok(factor * n * (dn + 1.0) * (-eta * dn).exp())
}

/// Bound on the probability that some edge node is disconnected:
/// `(96π·ln²(dN) + 1)/√d · e^(−ηdN/2) + 2√d·N·e^(−dN/2)`.
pub fn sigma_edge(n: f64, d: f64, eta: f64) -> Result<f64> {
    check_network(n, d, eta)?;
    let dn = d * n;
    if dn <= 0.0 {
        return Err(Error::invalid(format!("dN must be positive, got {dn}")));
    }
    let sd = d.sqrt();
    let l = dn.ln();
    let gaps = (96.0 * PI * l * l + 1.0) / sd * (-eta * dn / 2.0).exp();
    let isolated = 2.0 * sd * n * (-dn / 2.0).exp();
    Ok(gaps + isolated)
}

pub fn sigma_total(n: f64, d: f64, eta: f64) -> Result<BoundReport> {
    let sigma_interior = sigma_interior(n, d, eta)?;
    let sigma_edge = sigma_edge(n, d, eta)?;
    Ok(BoundReport {
        sigma_interior,
        sigma_edge,
        sigma_total: sigma_interior + sigma_edge,
        n,
        d,
        eta,
    })
}

/// Support `[−R, √(r² + R²) − r]` of the one-hop distance change.
pub fn step_support(r: f64, range: f64) -> (f64, f64) {
    (-range, (r * r + range * range).sqrt() - r)
}

/// CDF of the one-hop change `ξ = r' − r` of the distance to the destination
/// when the relay is uniform on the half-disk of radius `range` at distance
/// `r` from the destination.
///
/// The probability is the area of the half-disk inside the circle of radius
/// `r + x` about the destination, over `πR²/2`: a circle–circle lens, minus
/// (for `x > 0`) the circular segment that falls behind the half-disk's
/// diameter.
pub fn step_cdf(x: f64, r: f64, range: f64) -> Result<f64> {
    if !(range > 0.0) || !(r > range) {
        return Err(Error::invalid(format!("step_cdf needs r > R > 0, got r = {r}, R = {range}")));
    }
    let (lower, upper) = step_support(r, range);
    let slack = 1e-12 * range;
    if !(x >= lower - slack && x <= upper + slack) {
        return Err(Error::OutsideSupport { x, lower, upper });
    }
    let x = x.clamp(lower, upper);
    let rr = range * range;
    let rho = r + x;
    let a1 = ((r * r + rr - rho * rho) / (2.0 * r * range)).clamp(-1.0, 1.0).acos();
    let a2 = ((2.0 * r * rho - (rr - x * x)) / (2.0 * r * rho)).clamp(-1.0, 1.0).acos();
    let k = ((rr - x * x) * (4.0 * r * rho - (rr - x * x))).max(0.0).sqrt();
    let mut area = rr * a1 + rho * rho * a2 - 0.5 * k;
    if x > 0.0 {
        let a3 = (r / rho).clamp(-1.0, 1.0).acos();
        area -= rho * rho * a3 - r * (rho * rho - r * r).max(0.0).sqrt();
    }
    Ok((2.0 / (PI * rr) * area).clamp(0.0, 1.0))
}

/// `E(x')` for a uniform point on the half-disk: `4R/(3π)`.
pub fn expected_x_prime(range: f64) -> f64 {
    4.0 * range / (3.0 * PI)
}

/// `g(r, x', y') = √((r − x')² + y'²) − r`, evaluated without cancellation.
pub fn drift_bound(r: f64, x: f64, y: f64) -> f64 {
    let num = x * x + y * y - 2.0 * r * x;
    num / (((r - x) * (r - x) + y * y).sqrt() + r)
}

const G_NODES: usize = 256;

/// Quadrature estimate of `E g(r, x', y')` with `(x', y')` uniform on the
/// half-disk, together with the difference against the doubled rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub coarse: f64,
}

impl QuadratureEstimate {
    pub fn error_estimate(&self) -> f64 {
        (self.value - self.coarse).abs()
    }
}

/// Tensor-product Gauss–Legendre in polar coordinates `(v, θ)` over the
/// upper quarter (the integrand is even in `y'`), 256×256 nodes, checked
/// against 512×512. Returns the finer value.
pub fn expected_g_estimate(r: f64, range: f64) -> Result<QuadratureEstimate> {
    if !(range > 0.0 && r >= range) {
        return Err(Error::invalid(format!("expected_g needs r ≥ R > 0, got r = {r}, R = {range}")));
    }
    let coarse = polar_mean_g(r, range, &GaussLegendre::new(G_NODES));
    let value = polar_mean_g(r, range, &GaussLegendre::new(2 * G_NODES));
    Ok(QuadratureEstimate { value, coarse })
}

pub fn expected_g(r: f64, range: f64) -> Result<f64> {
    expected_g_estimate(r, range).map(|q| q.value)
}

fn polar_mean_g(r: f64, range: f64, rule: &GaussLegendre) -> f64 {
    // θ uniform on (0, π/2) with density 2/π, v with density 2v on (0, 1).
    let radial: Vec<(f64, f64)> = rule.mapped(0.0, 1.0).collect();
    rule.mapped(0.0, PI / 2.0)
        .map(|(theta, wt)| {
            let (s, c) = theta.sin_cos();
            let inner: f64 = radial
                .iter()
                .map(|&(v, wv)| wv * 2.0 * v * drift_bound(r, range * v * c, range * v * s))
                .sum();
            wt * inner
        })
        .sum::<f64>()
        * (2.0 / PI)
}

/// Wald-type bounds on `E(ν_r | h)`: lower `3π(h − r)/(4R)`, upper
/// `(h − r + R)/(−E g(r))`.
pub fn hop_bounds(h: f64, r: f64, range: f64) -> Result<HopBounds> {
    if !(h > r && r >= range && range > 0.0) {
        return Err(Error::invalid(format!(
            "hop bounds need h > r ≥ R > 0, got h = {h}, r = {r}, R = {range}"
        )));
    }
    let eg = expected_g(r, range)?;
    Ok(HopBounds { lower: 3.0 * PI * (h - r) / (4.0 * range), upper: (h - r + range) / (-eg) })
}

/// The `r = R` bounds in their simplified form: `3π/4·(h/R − 1)` and `4h/R`.
pub fn simplified_hop_bounds(h: f64, range: f64) -> HopBounds {
    HopBounds { lower: 0.75 * PI * (h / range - 1.0), upper: 4.0 * h / range }
}

/// Limit of `E(ν_R | h)/(h/R)` as `h/R → ∞`.
pub fn asymptotic_hop_ratio() -> f64 {
    0.75 * PI
}

/// `R/(−E g(r))` on a grid of `r/R` values.
pub fn hop_ratio_profile(r_over_range: &[f64]) -> Result<Vec<(f64, f64)>> {
    r_over_range.iter().map(|&q| Ok((q, -1.0 / expected_g(q, 1.0)?))).collect()
}

/// Mean distance between two independent uniform points of the region. A
/// disk of diameter `a` gives `64a/(45π)`; a square of side `a` gives
/// `(2 + √2 + 5 ln(1 + √2))·a/15`.
pub fn mean_sd_distance(region: &RegionSpec) -> f64 {
    match region.kind {
        RegionKind::Disk => 64.0 * (2.0 * region.size) / (45.0 * PI),
        RegionKind::Square => {
            let s2 = 2f64.sqrt();
            (2.0 + s2 + 5.0 * (s2 + 1.0).ln()) * region.size / 15.0
        }
    }
}

/// Sandwich on the probability that the next relay falls in the overlap of
/// the current and previous relay-selection regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionBounds {
    pub lower: f64,
    pub upper: f64,
}

pub fn prop1_bounds(overlap_area: f64, wedge_area: f64, lambda: f64) -> SelectionBounds {
    debug_assert!(overlap_area >= 0.0 && overlap_area <= wedge_area * (1.0 + 1e-9));
    debug_assert!(lambda * wedge_area > 0.0);
    let upper = overlap_area / wedge_area;
    let lower = ((1.0 - 1.0 / (lambda * wedge_area)) * upper).max(0.0);
    SelectionBounds { lower, upper }
}

//! Planar geometry: wedges, lens areas, wedge–wedge overlap, wedge sampling.
//!
//! Angles are radians normalized to `(-π, π]`. Wedges are closed sets: points
//! on the bounding rays and on the arc are members.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Sub};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre};

/// Slack on the angular boundary test, absorbs rounding in `atan2`.
const ANGLE_SLACK: f64 = 1e-12;
/// Relative slack on the radial boundary test.
const RADIUS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: Point2D) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2D) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2D) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Polar angle in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, s: f64) -> Point2D {
        Point2D::new(self.x * s, self.y * s)
    }
}

/// Maps an angle to `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// A circular sector: all points within `radius` of `apex` whose direction
/// lies within `half_angle` of `orientation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub apex: Point2D,
    pub orientation: f64,
    pub radius: f64,
    pub half_angle: f64,
}

impl Wedge {
    pub fn new(apex: Point2D, orientation: f64, radius: f64, half_angle: f64) -> Result<Self> {
        if !apex.is_finite() || !orientation.is_finite() {
            return Err(Error::invalid("wedge apex and orientation must be finite"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("wedge radius must be positive, got {radius}")));
        }
        if !(half_angle > 0.0 && half_angle <= PI) {
            return Err(Error::invalid(format!(
                "wedge half-angle must lie in (0, π], got {half_angle}"
            )));
        }
        Ok(Self { apex, orientation: normalize_angle(orientation), radius, half_angle })
    }

    /// The η-disk at `apex`: half-angle `ηπ`.
    pub fn eta_disk(apex: Point2D, orientation: f64, radius: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(format!("eta must lie in (0, 1], got {eta}")));
        }
        Self::new(apex, orientation, radius, eta * PI)
    }

    /// The η-disk at `apex` pointing at `target`.
    pub fn toward(apex: Point2D, target: Point2D, radius: f64, eta: f64) -> Result<Self> {
        Self::eta_disk(apex, (target - apex).angle(), radius, eta)
    }

    pub fn area(&self) -> f64 {
        self.half_angle * self.radius * self.radius
    }

    pub fn contains(&self, p: Point2D) -> bool {
        wedge_contains(self, p)
    }

    /// Maps a step expressed in the wedge's local frame (x along the
    /// bisector) to global coordinates.
    pub fn to_global(&self, step: LocalStep) -> Point2D {
        let (s, c) = self.orientation.sin_cos();
        Point2D::new(
            self.apex.x + c * step.x_prime - s * step.y_prime,
            self.apex.y + s * step.x_prime + c * step.y_prime,
        )
    }

    /// Axis-aligned bounding box of the full disk, as `(min, max)` corners.
    pub fn bounding_box(&self) -> (Point2D, Point2D) {
        let r = Point2D::new(self.radius, self.radius);
        (self.apex - r, self.apex + r)
    }
}

/// Displacement in the local frame of a transmitting node: `x_prime` along the
/// direction to the destination, `y_prime` perpendicular to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalStep {
    pub x_prime: f64,
    pub y_prime: f64,
}

impl LocalStep {
    pub fn length(&self) -> f64 {
        self.x_prime.hypot(self.y_prime)
    }
}

pub fn wedge_contains(w: &Wedge, p: Point2D) -> bool {
    let d = p - w.apex;
    let r = d.norm();
    if r > w.radius * (1.0 + RADIUS_SLACK) {
        return false;
    }
    if r == 0.0 || w.half_angle >= PI {
        return true;
    }
    normalize_angle(d.angle() - w.orientation).abs() <= w.half_angle + ANGLE_SLACK
}

/// Area of the intersection of two discs with radii `r1`, `r2` whose centres
/// are `d` apart.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    debug_assert!(r1 > 0.0 && r2 > 0.0 && d >= 0.0);
    if d >= r1 + r2 {
        return 0.0;
    }
    let small = r1.min(r2);
    if d <= (r1 - r2).abs() {
        return PI * small * small;
    }
    let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * c1.acos() + r2 * r2 * c2.acos() - 0.5 * k.max(0.0).sqrt()
}

/// Area of `w1 ∩ w2`.
///
/// Integrates, over the directions `θ` of rays leaving `w1`'s apex, the
/// measure `∫ s ds` of the ray's portion inside both wedges. Along each ray the
/// portion inside `w2` is found exactly from the ray's crossings with `w2`'s
/// circle and bounding lines. The outer integral is split at every direction
/// where that crossing structure can change and each smooth piece is
/// integrated by adaptive Gauss–Legendre. Absolute error is well below
/// `1e-6·R²`.
pub fn wedge_overlap_area(w1: &Wedge, w2: &Wedge) -> f64 {
    if w1.apex.distance(w2.apex) >= w1.radius + w2.radius {
        return 0.0;
    }
    let c = w2.apex - w1.apex;
    let full1 = w1.half_angle >= PI;
    let full2 = w2.half_angle >= PI;
    let (start, span) = if full1 {
        (w1.orientation - PI, TAU)
    } else {
        (w1.orientation - w1.half_angle, 2.0 * w1.half_angle)
    };

    let edges: Vec<Point2D> = if full2 {
        Vec::new()
    } else {
        [w2.orientation - w2.half_angle, w2.orientation + w2.half_angle]
            .iter()
            .map(|&a| Point2D::from_polar(1.0, a))
            .collect()
    };

    let mut critical = critical_directions(w1, w2, c, &edges);
    // Offsets from `start` in [0, span].
    let mut cuts: Vec<f64> = critical
        .drain(..)
        .filter_map(|a| {
            let off = (a - start).rem_euclid(TAU);
            (off > 1e-13 && off < span - 1e-13).then_some(off)
        })
        .collect();
    cuts.push(0.0);
    cuts.push(span);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let rule = GaussLegendre::new(12);
    let mut radial = |theta: f64| radial_measure(theta, w1.radius, c, w2, &edges);
    let tol = 1e-12 * w1.radius * w1.radius;
    cuts.windows(2)
        .map(|p| {
            integrate_adaptive(&rule, start + p[0], start + p[1], tol, 30, &mut radial)
        })
        .sum()
}

/// Directions from `w1`'s apex at which the set of ray crossings with `w2`
/// changes combinatorially.
fn critical_directions(w1: &Wedge, w2: &Wedge, c: Point2D, edges: &[Point2D]) -> Vec<f64> {
    let mut dirs = Vec::new();
    let push_point = |p: Point2D, dirs: &mut Vec<f64>| {
        if p.norm() > 1e-14 {
            dirs.push(p.angle());
        }
    };
    push_point(c, &mut dirs);
    let cn = c.norm();
    // tangents to w2's circle
    if cn > w2.radius {
        let a = (w2.radius / cn).asin();
        dirs.push(c.angle() + a);
        dirs.push(c.angle() - a);
    }
    // w1 circle ∩ w2 circle
    for p in circle_circle_points(Point2D::ORIGIN, w1.radius, c, w2.radius) {
        push_point(p, &mut dirs);
    }
    for &e in edges {
        // parallel to an edge
        dirs.push(e.angle());
        dirs.push((e * -1.0).angle());
        // edge line ∩ w2 circle (includes the arc endpoint)
        push_point(c + e * w2.radius, &mut dirs);
        push_point(c - e * w2.radius, &mut dirs);
        // edge line ∩ w1 circle
        for t in line_circle_params(c, e, Point2D::ORIGIN, w1.radius) {
            push_point(c + e * t, &mut dirs);
        }
    }
    dirs
}

/// `∫ s ds` over the part of the ray `{s·u(θ) : 0 ≤ s ≤ len}` inside `w2`,
/// with coordinates relative to the ray origin (`c` is `w2`'s apex).
fn radial_measure(theta: f64, len: f64, c: Point2D, w2: &Wedge, edges: &[Point2D]) -> f64 {
    let u = Point2D::from_polar(1.0, theta);
    let mut breaks = [0.0f64; 6];
    let mut n = 0;
    breaks[n] = 0.0;
    n += 1;
    // ray ∩ circle2: s² − 2 s (u·c) + |c|² − r2² = 0
    let b = u.dot(c);
    let disc = b * b - (c.norm_sq() - w2.radius * w2.radius);
    let mut extra = [f64::NAN; 4];
    if disc > 0.0 {
        let sq = disc.sqrt();
        extra[0] = b - sq;
        extra[1] = b + sq;
    }
    for (k, &e) in edges.iter().enumerate() {
        let den = u.cross(e);
        if den.abs() > 1e-15 {
            extra[2 + k] = c.cross(e) / den;
        }
    }
    let mut inner = [0.0f64; 4];
    let mut m = 0;
    for s in extra {
        if s.is_finite() && s > 0.0 && s < len {
            inner[m] = s;
            m += 1;
        }
    }
    let inner = &mut inner[..m];
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &s in inner.iter() {
        breaks[n] = s;
        n += 1;
    }
    breaks[n] = len;
    n += 1;

    let mut acc = 0.0;
    for k in 0..n - 1 {
        let (a, b) = (breaks[k], breaks[k + 1]);
        if b - a <= 0.0 {
            continue;
        }
        let mid = u * (0.5 * (a + b));
        // membership in w2 with the ray origin as reference frame
        if inside_relative(w2, c, mid) {
            acc += 0.5 * (b * b - a * a);
        }
    }
    acc
}

/// Membership of `p` in `w` whose apex sits at `c` (relative coordinates).
fn inside_relative(w: &Wedge, c: Point2D, p: Point2D) -> bool {
    let d = p - c;
    if d.norm() > w.radius {
        return false;
    }
    w.half_angle >= PI || normalize_angle(d.angle() - w.orientation).abs() <= w.half_angle
}

fn circle_circle_points(c1: Point2D, r1: f64, c2: Point2D, r2: f64) -> Vec<Point2D> {
    let d = c1.distance(c2);
    if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
        return Vec::new();
    }
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let ex = (c2 - c1) * (1.0 / d);
    let mid = c1 + ex * a;
    let perp = Point2D::new(-ex.y, ex.x);
    vec![mid + perp * h, mid - perp * h]
}

/// Parameters `t` where `p + t·e` (unit `e`) meets the circle `(center, r)`.
fn line_circle_params(p: Point2D, e: Point2D, center: Point2D, r: f64) -> Vec<f64> {
    let q = p - center;
    let b = q.dot(e);
    let disc = b * b - (q.norm_sq() - r * r);
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    vec![-b - sq, -b + sq]
}

/// A point uniform on the η-disk of radius `radius`, in the local frame.
///
/// The angle is uniform on `(−ηπ, ηπ)` and the radial fraction `v` has density
/// `2v` on `(0, 1)`, drawn as `√u`.
pub fn sample_uniform_wedge<R: Rng + ?Sized>(rng: &mut R, radius: f64, eta: f64) -> LocalStep {
    debug_assert!(eta > 0.0 && eta <= 1.0 && radius > 0.0);
    let theta = (2.0 * rng.random::<f64>() - 1.0) * eta * PI;
    let v = rng.random::<f64>().sqrt();
    let (s, c) = theta.sin_cos();
    LocalStep { x_prime: radius * v * c, y_prime: radius * v * s }
}

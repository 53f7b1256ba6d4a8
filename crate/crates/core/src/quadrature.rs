//! Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre three-term
    /// recurrence, starting from the Tricomi approximation of each root.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature degree must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive Gauss–Legendre integration: each panel is compared against the
/// sum of its two halves and bisected until they agree to `tol` (scaled by the
/// panel's share of the interval).
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
    f: &mut F,
) -> f64 {
    let whole = rule.integrate(a, b, &mut *f);
    refine(rule, a, b, whole, tol, max_depth, f)
}

fn refine<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    f: &mut F,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, &mut *f);
    let right = rule.integrate(m, b, &mut *f);
    if depth == 0 || (left + right - whole).abs() <= tol {
        return left + right;
    }
    refine(rule, a, m, left, 0.5 * tol, depth - 1, f)
        + refine(rule, m, b, right, 0.5 * tol, depth - 1, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 2, 5, 16, 64, 256, 512] {
            let q = GaussLegendre::new(n);
            let s: f64 = q.weights().iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let q = GaussLegendre::new(6);
        // ∫_0^2 x^11 dx = 2^12 / 12
        let v = q.integrate(0.0, 2.0, |x| x.powi(11));
        assert_abs_diff_eq!(v, 4096.0 / 12.0, epsilon = 1e-9);
    }

    #[test]
    fn three_point_rule_matches_textbook_nodes() {
        let q = GaussLegendre::new(3);
        assert_abs_diff_eq!(q.nodes()[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(q.weights()[1], 8.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.weights()[0], 5.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn adaptive_handles_a_kink() {
        let q = GaussLegendre::new(8);
        let v = integrate_adaptive(&q, -1.0, 2.0, 1e-12, 40, &mut |x: f64| x.abs());
        assert_abs_diff_eq!(v, 2.5, epsilon = 1e-10);
    }

    #[test]
    fn smooth_transcendental() {
        let q = GaussLegendre::new(20);
        assert_abs_diff_eq!(q.integrate(0.0, PI, f64::sin), 2.0, epsilon = 1e-14);
    }
}

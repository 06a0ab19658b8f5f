//! Gauss-Legendre quadrature with panel-doubling refinement.
//!
//! All angular and radial integrals in this crate go through the
//! routines here so that results are deterministic and carry a known
//! absolute tolerance.

use crate::error::{Error, Result};

/// Nodes per panel used by [`integrate`]. High enough that smooth
/// integrands converge after very few doublings.
pub const PANEL_NODES: usize = 16;

const MAX_DOUBLINGS: usize = 22;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Computed by Newton iteration on the Legendre polynomial; symmetric
/// pairs are filled from one half so the rule is exactly symmetric.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
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
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term
/// recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Uses composite Gauss-Legendre with [`PANEL_NODES`] nodes per panel,
/// doubling the panel count until two successive estimates agree to
/// `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (nodes, weights) = gauss_legendre(PANEL_NODES);
    let mut panels = 1usize;
    let mut previous = panel_sum(&f, a, b, panels, &nodes, &weights);
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let current = panel_sum(&f, a, b, panels, &nodes, &weights);
        if (current - previous).abs() < abs_tol {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::Numerics(format!(
        "quadrature did not reach tolerance {abs_tol:.1e} on [{a}, {b}]"
    )))
}

fn panel_sum<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = NeumaierSum::new();
    for p in 0..panels {
        let left = a + p as f64 * h;
        let mid = left + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in nodes.iter().zip(weights) {
            sum.add(w * half * f(mid + half * x));
        }
    }
    sum.total()
}

/// Compensated (Neumaier) accumulator. Keeps reduction results
/// independent of how contributions are grouped, to within one extra
/// rounding.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn five_point_nodes_match_reference() {
        let (nodes, weights) = gauss_legendre(5);
        // Abramowitz & Stegun table 25.4.
        let expected_nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let expected_weights = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(nodes[i], expected_nodes[i], epsilon = 1e-14);
            assert_abs_diff_eq!(weights[i], expected_weights[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        // An n-node rule integrates degree 2n-1 exactly.
        let (nodes, weights) = gauss_legendre(PANEL_NODES);
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(30))
            .sum();
        assert_abs_diff_eq!(integral, 2.0 / 31.0, epsilon = 1e-14);
    }

    #[test]
    fn integrates_sine_over_half_period() {
        let v = integrate(f64::sin, 0.0, PI, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn integrates_gaussian_tail() {
        let v = integrate(|t| (-t * t).exp(), -8.0, 8.0, 1e-12).unwrap();
        assert_abs_diff_eq!(v, PI.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn compensated_sum_handles_cancellation() {
        let mut s = NeumaierSum::new();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.total(), 2.0);
    }
}

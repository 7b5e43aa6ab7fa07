//! Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for k in 0..m {
            // Tricomi's initial guess, refined by Newton on P_n.
            let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_deriv(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_deriv(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Smallest rule integrating polynomials of degree `degree` exactly.
    pub fn for_degree(degree: usize) -> Self {
        Self::new(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Exact polynomial degree of the rule.
    pub fn degree(&self) -> usize {
        2 * self.nodes.len() - 1
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

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Integrates `f` over `[a, b]` with a Gauss–Legendre rule exact to `degree`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, degree: usize) -> f64 {
    GaussLegendre::for_degree(degree).integrate(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constants_and_monomials() {
        assert_abs_diff_eq!(integrate(|_| 1.0, 0.0, 1.0, 0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(integrate(|y| y * y, 0.0, 1.0, 2), 1.0 / 3.0, epsilon = 1e-15);
        for deg in 0..40 {
            let exact = 1.0 / (deg as f64 + 1.0);
            assert_abs_diff_eq!(
                integrate(|y| y.powi(deg as i32), 0.0, 1.0, deg),
                exact,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn p2_norm() {
        let p2 = |y: f64| 0.5 * (3.0 * y * y - 1.0);
        assert_abs_diff_eq!(integrate(|y| p2(y) * p2(y), -1.0, 1.0, 4), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_two() {
        for n in 1..80 {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-13);
            assert_eq!(rule.degree(), 2 * n - 1);
        }
    }
}

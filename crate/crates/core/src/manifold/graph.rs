use rand::Rng;

/// Lower end of the truncated graph domain.
pub const DOMAIN_LO: f64 = -0.25;
/// Upper end of the truncated graph domain.
pub const DOMAIN_HI: f64 = 1.25;
/// Node count of the standard graph grid.
pub const GRID_NODES: usize = 1501;

/// Piecewise-linear function `η ↦ ℝ^{N+1}` on a fixed grid, clamped to its
/// end values outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFn {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// Uniform grid on `[-0.25, 1.25]` with `0`, `rho` and `1` snapped onto the
/// nearest nodes.
pub fn standard_grid(rho: f64) -> Vec<f64> {
    let n = GRID_NODES - 1;
    let h = (DOMAIN_HI - DOMAIN_LO) / n as f64;
    let mut grid: Vec<f64> = (0..=n).map(|k| DOMAIN_LO + k as f64 * h).collect();
    for anchor in [0.0, rho, 1.0] {
        let k = ((anchor - DOMAIN_LO) / h).round() as usize;
        grid[k.min(n)] = anchor;
    }
    grid
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl GraphFn {
    pub fn new(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Self {
        assert_eq!(grid.len(), values.len(), "one value per node");
        assert!(grid.len() >= 2, "need at least one segment");
        assert!(grid.windows(2).all(|w| w[1] > w[0]), "grid must be strictly increasing");
        Self { grid, values }
    }

    pub fn from_fn<F: FnMut(f64) -> Vec<f64>>(grid: Vec<f64>, mut f: F) -> Self {
        let values = grid.iter().map(|&e| f(e)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    /// Index `k` of the segment `[grid[k], grid[k+1]]` holding `eta` (clamped).
    pub fn segment(&self, eta: f64) -> usize {
        let last = self.grid.len() - 2;
        self.grid.partition_point(|&g| g <= eta).saturating_sub(1).min(last)
    }

    pub fn eval_into(&self, eta: f64, out: &mut [f64]) {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if eta <= lo {
            out.copy_from_slice(&self.values[0]);
            return;
        }
        if eta >= hi {
            out.copy_from_slice(self.values.last().unwrap());
            return;
        }
        let k = self.segment(eta);
        let t = (eta - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
        let (a, b) = (&self.values[k], &self.values[k + 1]);
        for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(b)) {
            *o = x + t * (y - x);
        }
    }

    pub fn eval(&self, eta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(eta, &mut out);
        out
    }

    /// Largest nodal Euclidean norm; equals the sup-norm of the interpolant.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| norm(v)).fold(0.0, f64::max)
    }

    /// Largest segment slope; equals the Lipschitz constant of the interpolant.
    pub fn max_slope(&self) -> f64 {
        (0..self.grid.len() - 1)
            .map(|k| diff_norm(&self.values[k + 1], &self.values[k]) / (self.grid[k + 1] - self.grid[k]))
            .fold(0.0, f64::max)
    }

    /// Membership in the ball of functions bounded by `bound` with Lipschitz constant at most `bound`.
    pub fn in_ball(&self, bound: f64) -> bool {
        self.sup_norm() <= bound && self.max_slope() <= bound
    }

    /// Sup-norm distance; both functions must share the grid.
    pub fn sup_distance(&self, other: &GraphFn) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| diff_norm(a, b))
            .fold(0.0, f64::max)
    }

    /// Bound on the linear-interpolation error at `eta` in cell `[a, b]`.
    ///
    /// For any function whose mean slopes on `[a, η]` and `[η, b]` are `s₁`
    /// and `s₂`, the error is exactly `(η − a)(b − η)(s₁ − s₂)/h`. Here
    /// `|s₁ − s₂|` is bounded componentwise by the range of nodal slopes over
    /// the cell and its two neighbours, which covers kinks that lie inside
    /// the cell.
    pub fn interpolation_error_bound(&self, eta: f64) -> f64 {
        let (lo, hi) = (self.grid[0], *self.grid.last().unwrap());
        if eta <= lo || eta >= hi {
            return 0.0;
        }
        let k = self.segment(eta);
        let last = self.grid.len() - 2;
        let segs = k.saturating_sub(1)..=(k + 1).min(last);
        let spread: Vec<f64> = (0..self.dim())
            .map(|i| {
                let slopes = segs.clone().map(|j| {
                    (self.values[j + 1][i] - self.values[j][i]) / (self.grid[j + 1] - self.grid[j])
                });
                let (mn, mx) = slopes.fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), v| {
                    (mn.min(v), mx.max(v))
                });
                mx - mn
            })
            .collect();
        let (a, b) = (self.grid[k], self.grid[k + 1]);
        (eta - a) * (b - eta) / (b - a) * norm(&spread)
    }

    /// Random element with sup-norm and Lipschitz constant at most `fraction · bound`,
    /// built from a constant plus a few random sinusoids per component.
    pub fn random_in_ball<R: Rng>(grid: Vec<f64>, dim: usize, bound: f64, fraction: f64, rng: &mut R) -> Self {
        let waves: Vec<Vec<(f64, f64, f64)>> = (0..dim)
            .map(|_| {
                (0..4)
                    .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..40.0), rng.gen_range(0.0..std::f64::consts::TAU)))
                    .collect()
            })
            .collect();
        let offsets: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut g = Self::from_fn(grid, |eta| {
            (0..dim)
                .map(|i| offsets[i] + waves[i].iter().map(|(a, k, p)| a * (k * eta + p).sin()).sum::<f64>())
                .collect()
        });
        let scale = fraction * bound / g.sup_norm().max(g.max_slope());
        for v in &mut g.values {
            v.iter_mut().for_each(|x| *x *= scale);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn standard_grid_contains_anchors() {
        let g = standard_grid(0.3517);
        assert_eq!(g.len(), GRID_NODES);
        for a in [0.0, 0.3517, 1.0] {
            assert!(g.contains(&a));
        }
        assert_eq!(g[0], DOMAIN_LO);
        assert_eq!(*g.last().unwrap(), DOMAIN_HI);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn interpolation_and_clamping() {
        let g = GraphFn::new(vec![0.0, 1.0, 3.0], vec![vec![0.0, 1.0], vec![2.0, 1.0], vec![0.0, 5.0]]);
        assert_eq!(g.eval(0.5), vec![1.0, 1.0]);
        assert_eq!(g.eval(2.0), vec![1.0, 3.0]);
        assert_eq!(g.eval(-4.0), vec![0.0, 1.0]);
        assert_eq!(g.eval(9.0), vec![0.0, 5.0]);
        assert_eq!(g.eval(1.0), vec![2.0, 1.0]);
        assert!((g.max_slope() - 5f64.sqrt()).abs() < 1e-15);
        assert!((g.sup_norm() - 5f64.hypot(0.0)).abs() < 1e-15);
    }

    #[test]
    fn random_elements_respect_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let g = GraphFn::random_in_ball(standard_grid(0.35), 6, 1000.0, 0.9, &mut rng);
            assert!(g.in_ball(1000.0));
            assert!((g.sup_norm().max(g.max_slope()) - 900.0).abs() < 1e-9);
        }
    }

    #[test]
    fn interpolation_bound_covers_quadratic() {
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let g = GraphFn::from_fn(grid, |x| vec![x * x]);
        for k in 0..200 {
            let x = 0.0013 + k as f64 / 201.0;
            let err = (g.eval(x)[0] - x * x).abs();
            assert!(err <= g.interpolation_error_bound(x) + 1e-15);
        }
    }

    #[test]
    fn interpolation_bound_covers_interior_kink() {
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        let kinked = |x: f64| (x - 0.5123).abs();
        let g = GraphFn::from_fn(grid, |x| vec![kinked(x)]);
        for k in 0..400 {
            let x = k as f64 / 400.0;
            let err = (g.eval(x)[0] - kinked(x)).abs();
            assert!(err <= g.interpolation_error_bound(x) + 1e-15, "{x}");
        }
    }
}

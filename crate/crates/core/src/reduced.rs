//! Scalar ice-line dynamics on the invariant manifold: `φ_ε(η) = η + ε z(η)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forcing::{ForcingTable, Side};

/// Ice-line time constant used for desk-scale simulations.
pub const PRACTICAL_EPSILON: f64 = 0.01;
/// Bracketing scan step for [`find_equilibria`].
pub const SCAN_STEP: f64 = 1e-3;
/// Below this `|z'|` an equilibrium is reported as fold-degenerate.
pub const CLASSIFY_TOL: f64 = 1e-8;
/// Distance from a kink within which a root is treated as sitting on it.
pub const KINK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    FoldDegenerate,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::FoldDegenerate => "fold-degenerate",
        }
    }

    /// Classification from the slope of `z` (or of any function with the same sign).
    pub fn from_slope(slope: f64) -> Self {
        if slope < -CLASSIFY_TOL {
            Stability::Stable
        } else if slope > CLASSIFY_TOL {
            Stability::Unstable
        } else {
            Stability::FoldDegenerate
        }
    }
}

/// Position of an equilibrium relative to the bare-ice boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Location {
    BelowRho,
    AtRho,
    AboveRho,
}

impl Location {
    pub fn as_str(self) -> &'static str {
        match self {
            Location::BelowRho => "below-rho",
            Location::AtRho => "at-rho",
            Location::AboveRho => "above-rho",
        }
    }
}

/// Which derivative [`z_prime`] should return.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Left,
    Right,
    /// Two-sided; rejected exactly on a kink.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub eta_star: f64,
    pub stability: Stability,
    pub location: Location,
    /// `z'(η*)`; the left derivative when the root sits on a kink.
    pub z_prime: f64,
    /// Right derivative, present only for roots on a kink.
    pub z_prime_right: Option<f64>,
}

/// `z(η) = Σ f_2i(η) q_2i(η) − T_c`.
pub fn z(forcing: &ForcingTable, eta: f64) -> f64 {
    let f = forcing.f_coeffs(eta);
    let (q, _) = forcing.q_with_derivs(eta, Side::Right);
    f.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>() - forcing.params().critical_temp
}

fn kinks(forcing: &ForcingTable) -> [f64; 3] {
    [0.0, forcing.params().bare_ice_edge, 1.0]
}

/// Analytic piecewise derivative of `z`.
pub fn z_prime(forcing: &ForcingTable, eta: f64, which: Derivative) -> Result<f64> {
    let side = match which {
        Derivative::Left => Side::Left,
        Derivative::Right => Side::Right,
        Derivative::Auto => {
            if kinks(forcing).contains(&eta) {
                return Err(Error::Undefined {
                    module: "reduced",
                    operation: "z_prime",
                    message: format!("z is not differentiable at the kink eta = {eta}"),
                });
            }
            Side::Right
        }
    };
    Ok(one_sided_slope(forcing, eta, side))
}

fn one_sided_slope(forcing: &ForcingTable, eta: f64, side: Side) -> f64 {
    let f = forcing.f_coeffs(eta);
    let df = forcing.f_derivs(eta, side);
    let (q, dq) = forcing.q_with_derivs(eta, side);
    (0..f.len()).map(|i| df[i] * q[i] + f[i] * dq[i]).sum()
}

/// Reduced ice-line map `φ_ε(η) = η + ε z(η)`.
pub fn phi(forcing: &ForcingTable, eta: f64, epsilon: f64) -> f64 {
    eta + epsilon * z(forcing, eta)
}

/// Orbit `η, φ(η), φ²(η), ..` of length `n_steps + 1`.
pub fn phi_orbit(forcing: &ForcingTable, eta: f64, epsilon: f64, n_steps: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(eta);
    for _ in 0..n_steps {
        let last = *out.last().unwrap();
        out.push(phi(forcing, last, epsilon));
    }
    out
}

/// Largest `ε` keeping `φ_ε` increasing on `grid`: `1 / max(−z')`.
pub fn monotonicity_bound(forcing: &ForcingTable, grid: &[f64]) -> f64 {
    let steepest = grid
        .iter()
        .flat_map(|&e| [Side::Left, Side::Right].map(|s| one_sided_slope(forcing, e, s)))
        .fold(0.0, |m: f64, d| m.max(-d));
    if steepest > 0.0 {
        1.0 / steepest
    } else {
        f64::INFINITY
    }
}

/// Bisection of a continuous `f` on a sign-changing bracket, run until the
/// midpoint no longer separates the endpoints. Returns the endpoint with
/// the smaller residual.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa.signum() != fb.signum(), "bracket must change sign");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
    }
    if fa.abs() <= fb.abs() {
        a
    } else {
        b
    }
}

/// Scan grid with step [`SCAN_STEP`] that contains every kink inside `[lo, hi]`.
pub fn scan_grid(lo: f64, hi: f64, kinks: &[f64]) -> Vec<f64> {
    let cells = ((hi - lo) / SCAN_STEP).ceil().max(1.0) as usize;
    let mut grid: Vec<f64> = (0..=cells)
        .map(|k| if k == cells { hi } else { lo + k as f64 * (hi - lo) / cells as f64 })
        .collect();
    for &k in kinks {
        if k > lo && k < hi {
            grid.push(k);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    grid
}

/// All zeros of `z` in `[lo, hi]`, bracketed on a scan grid, refined by
/// bisection and classified by the sign of `z'`.
pub fn find_equilibria(forcing: &ForcingTable, lo: f64, hi: f64) -> Result<Vec<Equilibrium>> {
    const ALLOWED: (f64, f64) = (-0.25, 1.25);
    for v in [lo, hi] {
        if !(ALLOWED.0..=ALLOWED.1).contains(&v) {
            return Err(Error::Domain {
                module: "reduced",
                operation: "find_equilibria",
                value: v,
                domain: "[-0.25, 1.25]",
            });
        }
    }
    let grid = scan_grid(lo, hi, &kinks(forcing));
    let values: Vec<f64> = grid.par_iter().map(|&e| z(forcing, e)).collect();
    let mut roots = Vec::new();
    for k in 0..grid.len() {
        if values[k] == 0.0 {
            roots.push(grid[k]);
        } else if k + 1 < grid.len() && values[k + 1] != 0.0 && values[k].signum() != values[k + 1].signum() {
            roots.push(bisect(|e| z(forcing, e), grid[k], grid[k + 1]));
        }
    }
    Ok(roots.into_iter().map(|r| classify(forcing, r)).collect())
}

/// Builds the [`Equilibrium`] record for a root of `z`.
pub fn classify(forcing: &ForcingTable, eta: f64) -> Equilibrium {
    let rho = forcing.params().bare_ice_edge;
    let location = if (eta - rho).abs() <= KINK_TOL {
        Location::AtRho
    } else if eta < rho {
        Location::BelowRho
    } else {
        Location::AboveRho
    };
    let kink = kinks(forcing).into_iter().find(|k| (eta - k).abs() <= KINK_TOL);
    match kink {
        Some(k) => {
            log::warn!("equilibrium at eta = {eta} coincides with the kink {k}; using one-sided slopes");
            let left = one_sided_slope(forcing, k, Side::Left);
            let right = one_sided_slope(forcing, k, Side::Right);
            let stability = match (Stability::from_slope(left), Stability::from_slope(right)) {
                (a, b) if a == b => a,
                _ => Stability::FoldDegenerate,
            };
            Equilibrium {
                eta_star: eta,
                stability,
                location,
                z_prime: left,
                z_prime_right: Some(right),
            }
        }
        None => {
            let slope = one_sided_slope(forcing, eta, Side::Right);
            Equilibrium {
                eta_star: eta,
                stability: Stability::from_slope(slope),
                location,
                z_prime: slope,
                z_prime_right: None,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn table() -> ForcingTable {
        ForcingTable::new(ModelParams::default()).unwrap()
    }

    #[test]
    fn z_continuous_at_rho() {
        let t = table();
        let rho = t.params().bare_ice_edge;
        assert!((z(&t, rho - 1e-13) - z(&t, rho + 1e-13)).abs() < 1e-9);
        assert!((z(&t, rho) - z(&t, rho - 1e-13)).abs() < 1e-9);
    }

    #[test]
    fn z_signs_at_ends() {
        let t = table();
        assert!(z(&t, 0.0) > 0.0);
        assert!(z(&t, 1.0) < 0.0);
    }

    #[test]
    fn z_prime_matches_difference_quotient() {
        let t = table();
        let h = 1e-6;
        for k in 1..200 {
            let eta = k as f64 / 200.0 + 0.0013;
            if (eta - t.params().bare_ice_edge).abs() < 1e-3 || eta >= 1.0 {
                continue;
            }
            let fd = (z(&t, eta + h) - z(&t, eta - h)) / (2.0 * h);
            let an = z_prime(&t, eta, Derivative::Auto).unwrap();
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "eta={eta}: {fd} vs {an}");
        }
    }

    #[test]
    fn z_prime_at_kinks() {
        let t = table();
        let rho = t.params().bare_ice_edge;
        assert!(z_prime(&t, rho, Derivative::Auto).is_err());
        assert!(z_prime(&t, 0.0, Derivative::Auto).is_err());
        let l = z_prime(&t, rho, Derivative::Left).unwrap();
        let r = z_prime(&t, rho, Derivative::Right).unwrap();
        // Only f_2i' jumps at ρ; the jump is Σ Q(4i+1)(α₂−α_i) s(ρ) p_2i(ρ)² / (B + 2i(2i+1)D).
        let p = t.params();
        let s = t.spectral().insolation_series(rho);
        let jump: f64 = (0..=p.n_modes)
            .map(|i| {
                let q = crate::spectral::legendre(i, rho);
                p.solar_mean * (4 * i + 1) as f64 * (p.albedo_snow - p.albedo_bare_ice) * s * q * q
                    / (p.olr_slope + crate::params::eigen_weight(i) * p.diffusivity)
            })
            .sum();
        assert!((r - l - jump).abs() < 1e-9 * jump.abs());
    }

    #[test]
    fn three_equilibria_table_defaults() {
        let t = table();
        let eq = find_equilibria(&t, 0.0, 1.0).unwrap();
        let pattern: Vec<Stability> = eq.iter().map(|e| e.stability).collect();
        assert_eq!(pattern, vec![Stability::Stable, Stability::Unstable, Stability::Stable]);
        assert!(eq[0].eta_star < t.params().bare_ice_edge);
        assert!(eq.iter().all(|e| z(&t, e.eta_star).abs() < 1e-10));
        assert!(eq.windows(2).all(|w| w[0].eta_star < w[1].eta_star));
    }

    #[test]
    fn no_equilibria_outside_window() {
        for a in [140.0, 200.0] {
            let t = table().with_params(ModelParams { olr_intercept: a, ..ModelParams::default() });
            assert!(find_equilibria(&t, 0.0, 1.0).unwrap().is_empty(), "A = {a}");
        }
    }

    #[test]
    fn range_is_checked() {
        assert!(find_equilibria(&table(), -0.5, 1.0).is_err());
    }

    #[test]
    fn phi_basics() {
        let t = table();
        let eq = find_equilibria(&t, 0.0, 1.0).unwrap();
        for e in &eq {
            assert!((phi(&t, e.eta_star, 0.01) - e.eta_star).abs() < 1e-12);
        }
        assert_eq!(phi(&t, 0.4, 0.0), 0.4);
        let orbit = phi_orbit(&t, 0.9, PRACTICAL_EPSILON, 3000);
        assert!(orbit.windows(2).all(|w| w[1] <= w[0]));
        assert!((orbit.last().unwrap() - eq[2].eta_star).abs() < 1e-8);
    }

    #[test]
    fn phi_monotone_below_bound() {
        let t = table();
        let grid: Vec<f64> = (0..=2000).map(|k| -0.25 + 1.5 * k as f64 / 2000.0).collect();
        let bound = monotonicity_bound(&t, &grid);
        assert!(bound > PRACTICAL_EPSILON);
        for eps in [PRACTICAL_EPSILON, 0.9 * bound] {
            let img: Vec<f64> = grid.iter().map(|&e| phi(&t, e, eps)).collect();
            assert!(img.windows(2).all(|w| w[1] > w[0]), "eps = {eps}");
        }
    }

    #[test]
    fn bisect_reaches_machine_precision() {
        let r = bisect(|x| x * x - 2.0, 1.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }
}

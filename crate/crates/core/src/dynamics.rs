//! The full discrete map `H(x, η) = (x + F(x, η), η + G(x, η))`.

use crate::forcing::{ForcingTable, Side};
use crate::params::ModelParams;
use crate::spectral::legendre_even_into;

/// Component magnitude beyond which a trajectory is reported as diverging.
pub const OVERFLOW_THRESHOLD: f64 = 1e12;

const FD_STEP_X: f64 = 1e-6;
const FD_STEP_ETA: f64 = 1e-7;
const KINK_GUARD: f64 = 1e-6;

/// Relaxation rate `γ_i` of mode `i`.
pub fn gamma(params: &ModelParams, i: usize) -> f64 {
    params.gamma(i)
}

/// Result of the truncation admissibility check `|1 − γ_N| ≤ 1 − γ_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissible {
    /// Every truncation up to and including this one is admissible.
    UpTo(usize),
    /// The bound holds for all `N` (no diffusion).
    Unbounded,
    /// Not even `N = 0` satisfies the bound (`γ_0 > 1`).
    Never,
}

impl Admissible {
    pub fn allows(self, n: usize) -> bool {
        match self {
            Admissible::UpTo(max) => n <= max,
            Admissible::Unbounded => true,
            Admissible::Never => false,
        }
    }
}

/// Largest spectral truncation for which every mode relaxes at least as
/// fast as it would without transport.
pub fn max_admissible_n(params: &ModelParams) -> Admissible {
    let g0 = params.gamma(0);
    let bound = 1.0 - g0;
    if (1.0 - g0).abs() > bound {
        return Admissible::Never;
    }
    if params.diffusivity <= 0.0 {
        return Admissible::Unbounded;
    }
    // γ_n grows quadratically in n, so the first violation ends the range.
    let mut n = 0;
    while (1.0 - params.gamma(n + 1)).abs() <= bound {
        n += 1;
    }
    Admissible::UpTo(n)
}

/// A point `(X, η)` of the extended phase space `ℝ^{N+1} × ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub x: Vec<f64>,
    pub eta: f64,
}

impl SystemState {
    pub fn new(x: Vec<f64>, eta: f64) -> Self {
        Self { x, eta }
    }

    /// Point on the curve of frozen-ice-line equilibria above `eta`.
    pub fn on_h0(forcing: &ForcingTable, eta: f64) -> Self {
        Self { x: forcing.h0(eta), eta }
    }

    /// Whether the state lies on the switching set `η = ρ`.
    pub fn on_switching_set(&self, params: &ModelParams) -> bool {
        self.eta == params.bare_ice_edge
    }

    pub fn is_finite(&self) -> bool {
        self.eta.is_finite() && self.x.iter().all(|v| v.is_finite())
    }

    /// Euclidean distance in `ℝ^{N+2}`.
    pub fn distance(&self, other: &SystemState) -> f64 {
        let dx: f64 = self.x.iter().zip(&other.x).map(|(a, b)| (a - b).powi(2)).sum();
        (dx + (self.eta - other.eta).powi(2)).sqrt()
    }
}

/// `F(x, η)_i = −γ_i (x_i − f_2i(η))`.
pub fn temperature_increment(forcing: &ForcingTable, x: &[f64], eta: f64) -> Vec<f64> {
    let p = forcing.params();
    let f = forcing.f_coeffs(eta);
    x.iter()
        .zip(&f)
        .enumerate()
        .map(|(i, (xi, fi))| -p.gamma(i) * (xi - fi))
        .collect()
}

/// Temperature at the ice line, `Σ x_i q_2i(η)`.
pub fn ice_line_temperature(x: &[f64], eta: f64) -> f64 {
    let mut q = vec![0.0; x.len()];
    legendre_even_into(eta.clamp(0.0, 1.0), &mut q);
    x.iter().zip(&q).map(|(a, b)| a * b).sum()
}

/// `G(x, η) = ε (Σ x_i q_2i(η) − T_c)`.
pub fn ice_line_increment(params: &ModelParams, x: &[f64], eta: f64) -> f64 {
    params.epsilon * (ice_line_temperature(x, eta) - params.critical_temp)
}

/// One application of `H`.
pub fn step(forcing: &ForcingTable, state: &SystemState) -> SystemState {
    let dx = temperature_increment(forcing, &state.x, state.eta);
    let deta = ice_line_increment(forcing.params(), &state.x, state.eta);
    SystemState {
        x: state.x.iter().zip(&dx).map(|(a, b)| a + b).collect(),
        eta: state.eta + deta,
    }
}

/// Densely stored orbit of `H`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<SystemState>,
    /// Set when some component exceeded [`OVERFLOW_THRESHOLD`]; the orbit stops there.
    pub overflowed: bool,
}

impl Trajectory {
    pub fn last(&self) -> &SystemState {
        self.states.last().expect("trajectory always holds its initial state")
    }
}

pub fn iterate(forcing: &ForcingTable, state: &SystemState, n_steps: usize) -> Trajectory {
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(state.clone());
    let mut overflowed = exceeds(state);
    for _ in 0..n_steps {
        if overflowed {
            break;
        }
        let next = step(forcing, states.last().unwrap());
        overflowed = exceeds(&next);
        states.push(next);
    }
    Trajectory { states, overflowed }
}

fn exceeds(s: &SystemState) -> bool {
    !s.is_finite()
        || s.eta.abs() > OVERFLOW_THRESHOLD
        || s.x.iter().any(|v| v.abs() > OVERFLOW_THRESHOLD)
}

/// Equilibrium temperature `T*(y) = Σ f_2i(η) p_2i(y)` with the ice line frozen at `eta`.
pub fn equilibrium_profile(forcing: &ForcingTable, eta: f64, y_grid: &[f64]) -> Vec<f64> {
    let f = forcing.f_coeffs(eta);
    let mut basis = vec![0.0; f.len()];
    y_grid
        .iter()
        .map(|&y| {
            legendre_even_into(y, &mut basis);
            f.iter().zip(&basis).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Projected energy-balance residual `−γ_i (x_i − f_2i(η)) · R` in W·m⁻².
pub fn energy_residual(forcing: &ForcingTable, x: &[f64], eta: f64) -> Vec<f64> {
    let r = forcing.params().heat_capacity;
    temperature_increment(forcing, x, eta)
        .into_iter()
        .map(|v| v * r)
        .collect()
}

/// Finite-difference Jacobian of `H`, rows/columns ordered `(x_0, .., x_N, η)`.
///
/// Differences in `η` are taken one-sided when the state is within `1e-6`
/// of a kink so that no stencil straddles `{0, ρ, 1}`.
pub fn jacobian_fd(forcing: &ForcingTable, state: &SystemState) -> Vec<Vec<f64>> {
    let n = state.x.len();
    let flat = |s: &SystemState| {
        let mut v = s.x.clone();
        v.push(s.eta);
        v
    };
    let mut jac = vec![vec![0.0; n + 1]; n + 1];
    for col in 0..n {
        let mut plus = state.clone();
        let mut minus = state.clone();
        plus.x[col] += FD_STEP_X;
        minus.x[col] -= FD_STEP_X;
        let (hp, hm) = (flat(&step(forcing, &plus)), flat(&step(forcing, &minus)));
        for row in 0..=n {
            jac[row][col] = (hp[row] - hm[row]) / (2.0 * FD_STEP_X);
        }
    }
    let rho = forcing.params().bare_ice_edge;
    let near = [0.0, rho, 1.0]
        .into_iter()
        .find(|k| (state.eta - k).abs() < KINK_GUARD);
    let (lo, hi) = match near {
        Some(k) if state.eta >= k => (state.eta, state.eta + FD_STEP_ETA),
        Some(_) => (state.eta - FD_STEP_ETA, state.eta),
        None => (state.eta - FD_STEP_ETA, state.eta + FD_STEP_ETA),
    };
    let at = |eta: f64| flat(&step(forcing, &SystemState { x: state.x.clone(), eta }));
    let (hp, hm) = (at(hi), at(lo));
    for row in 0..=n {
        jac[row][n] = (hp[row] - hm[row]) / (hi - lo);
    }
    jac
}

/// Analytic one-sided Jacobian of `H`; used to cross-check [`jacobian_fd`].
pub fn jacobian(forcing: &ForcingTable, state: &SystemState, side: Side) -> Vec<Vec<f64>> {
    let p = forcing.params();
    let n = state.x.len();
    let df = forcing.f_derivs(state.eta, side);
    let (q, dq) = forcing.q_with_derivs(state.eta, side);
    let mut jac = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        let g = p.gamma(i);
        jac[i][i] = 1.0 - g;
        jac[i][n] = g * df[i];
        jac[n][i] = p.epsilon * q[i];
    }
    jac[n][n] = 1.0 + p.epsilon * state.x.iter().zip(&dq).map(|(a, b)| a * b).sum::<f64>();
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn table() -> ForcingTable {
        ForcingTable::new(ModelParams::default()).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let p = ModelParams::default();
        assert_abs_diff_eq!(gamma(&p, 0), 0.095, epsilon = 1e-15);
        assert_abs_diff_eq!(gamma(&p, 5), 1.47, epsilon = 1e-14);
        assert!((0..8).all(|i| gamma(&p, i + 1) > gamma(&p, i)));
    }

    #[test]
    fn admissibility_examples() {
        let p = ModelParams::default();
        assert_eq!(max_admissible_n(&p), Admissible::UpTo(5));
        assert!((1.0 - p.gamma(6)).abs() > 1.0 - p.gamma(0));
        let no_transport = ModelParams { diffusivity: 0.0, ..p };
        assert_eq!(max_admissible_n(&no_transport), Admissible::Unbounded);
        let strong = ModelParams { diffusivity: 20.0, heat_capacity: 20.0, olr_slope: 1.9, ..p };
        assert_eq!(max_admissible_n(&strong), Admissible::UpTo(0));
        let stiff = ModelParams { heat_capacity: 1.0, ..p };
        assert_eq!(max_admissible_n(&stiff), Admissible::Never);
    }

    #[test]
    fn frozen_ice_line_fixes_h0() {
        let t = table().with_params(ModelParams { epsilon: 0.0, ..ModelParams::default() });
        for &eta in &[-0.2, 0.1, 0.35, 0.7, 1.3] {
            let s = SystemState::on_h0(&t, eta);
            assert_eq!(step(&t, &s), s);
        }
    }

    #[test]
    fn modewise_contraction_without_ice_motion() {
        let t = table().with_params(ModelParams { epsilon: 0.0, ..ModelParams::default() });
        let eta = 0.42;
        let h = t.h0(eta);
        let x: Vec<f64> = h.iter().enumerate().map(|(i, v)| v + 0.3 * (i as f64 + 1.0)).collect();
        let next = step(&t, &SystemState::new(x.clone(), eta));
        for i in 0..h.len() {
            let lhs = (next.x[i] - h[i]).abs();
            let rhs = (1.0 - t.params().gamma(i)).abs() * (x[i] - h[i]).abs();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
        let mut shifted = h.clone();
        shifted[0] += 1.0;
        let out = step(&t, &SystemState::new(shifted, eta));
        assert_abs_diff_eq!(out.x[0] - h[0], 1.0 - 0.095, epsilon = 1e-12);
    }

    #[test]
    fn residual_examples() {
        let t = table();
        let eta = 0.27;
        let h = t.h0(eta);
        assert!(energy_residual(&t, &h, eta).iter().all(|v| v.abs() < 1e-9));
        let mut x = h.clone();
        x[0] += 1.0;
        let r = energy_residual(&t, &x, eta);
        assert_abs_diff_eq!(r[0], -0.095 * 20.0, epsilon = 1e-12);
        assert!(r[1..].iter().all(|v| v.abs() < 1e-9));
        let x = vec![3.0, -1.0, 2.0, 0.5, 0.1, -0.2];
        let next = step(&t, &SystemState::new(x.clone(), eta));
        let r = energy_residual(&t, &x, eta);
        for i in 0..6 {
            assert_abs_diff_eq!(r[i], 20.0 * (next.x[i] - x[i]), epsilon = 1e-10);
        }
    }

    #[test]
    fn iterate_basics() {
        let t = table();
        let s = SystemState::on_h0(&t, 0.5);
        let tr = iterate(&t, &s, 0);
        assert_eq!(tr.states.len(), 1);
        assert!(!tr.overflowed);
        let tr = iterate(&t, &s, 5);
        assert_eq!(tr.states.len(), 6);
        assert_eq!(tr.states[1], step(&t, &tr.states[0]));
    }

    #[test]
    fn inadmissible_truncation_diverges() {
        let p = ModelParams { n_modes: 6, ..ModelParams::default() };
        let t = ForcingTable::new(p).unwrap();
        let mut s = SystemState::on_h0(&t, 0.5);
        s.x[6] += 1.0;
        let tr = iterate(&t, &s, 2000);
        assert!(tr.overflowed);
        let sixth: Vec<f64> = tr.states.iter().take(50).map(|s| (s.x[6] - t.h0(s.eta)[6]).abs()).collect();
        assert!(sixth[40] > sixth[1]);
    }

    #[test]
    fn continuous_across_switching_set() {
        let t = table();
        let rho = t.params().bare_ice_edge;
        let x = t.h0(rho);
        let a = step(&t, &SystemState::new(x.clone(), rho - 1e-12));
        let b = step(&t, &SystemState::new(x, rho + 1e-12));
        assert!(a.distance(&b) < 1e-9);
    }

    #[test]
    fn fd_jacobian_matches_analytic() {
        let t = table();
        for &eta in &[0.2, 0.35, 0.6] {
            let s = SystemState::new(t.h0(eta).iter().map(|v| v + 0.5).collect(), eta);
            let fd = jacobian_fd(&t, &s);
            let an = jacobian(&t, &s, Side::Right);
            for (r1, r2) in fd.iter().zip(&an) {
                for (a, b) in r1.iter().zip(r2) {
                    assert!((a - b).abs() < 1e-5 * b.abs().max(1.0), "{a} vs {b} at {eta}");
                }
            }
        }
    }

    #[test]
    fn profile_is_warm_at_equator() {
        let t = table();
        let y: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let prof = equilibrium_profile(&t, 0.3, &y);
        assert!(prof[0] > prof[10]);
        let h = t.h0(0.3);
        let direct: f64 = h.iter().enumerate().map(|(i, f)| f * crate::spectral::legendre(i, 0.4)).sum();
        assert_abs_diff_eq!(prof[4], direct, epsilon = 1e-12);
    }
}

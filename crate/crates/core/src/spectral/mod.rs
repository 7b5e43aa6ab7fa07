//! Even Legendre basis, the insolation distribution and its spectral coefficients.

mod quadrature;

use std::f64::consts::{FRAC_PI_2, PI};

pub use quadrature::{integrate, GaussLegendre};

use crate::error::{Error, Result};
use crate::params::{TABLE_INSOLATION_COEFFS, TABLE_OBLIQUITY};

/// Points of the periodic trapezoid rule for the daily-average integral.
const INSOLATION_POINTS: usize = 256;
/// Gauss–Legendre points per panel when projecting `s(y)` onto the basis.
const PROJECTION_POINTS: usize = 64;
const PROJECTION_TOL: f64 = 1e-7;

/// Even Legendre polynomial `p_2i(y)`, normalised so that `p_2i(1) = 1`.
pub fn legendre(i: usize, y: f64) -> f64 {
    legendre_pair(2 * i, y).0
}

/// Derivative `d/dy p_2i(y)`.
pub fn legendre_deriv(i: usize, y: f64) -> f64 {
    legendre_pair(2 * i, y).1
}

/// Fills `out[i] = p_2i(y)` for `i < out.len()`.
pub fn legendre_even_into(y: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let (mut p0, mut p1) = (1.0, y);
    out[0] = 1.0;
    let top = 2 * (out.len() - 1);
    for k in 1..top {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * y * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
        if (k + 1) % 2 == 0 {
            out[k.div_ceil(2)] = p1;
        }
    }
}

/// Fills values and derivatives of the even polynomials at `y`.
pub fn legendre_even_with_deriv_into(y: f64, values: &mut [f64], derivs: &mut [f64]) {
    debug_assert_eq!(values.len(), derivs.len());
    if values.is_empty() {
        return;
    }
    values[0] = 1.0;
    derivs[0] = 0.0;
    let (mut p0, mut p1) = (1.0, y);
    let (mut d0, mut d1) = (0.0, 1.0);
    let top = 2 * (values.len() - 1);
    for k in 1..top {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * y * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
        if (k + 1) % 2 == 0 {
            values[k.div_ceil(2)] = p1;
            derivs[k.div_ceil(2)] = d1;
        }
    }
}

fn legendre_pair(n: usize, y: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, y);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * y * p1 - kf * p0) / (kf + 1.0);
        let d2 = d0 + (2.0 * kf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// The basis function clamped to `[0, 1]`: `p_2i(0)` below, `p_2i(1)` above.
pub fn q_basis(i: usize, eta: f64) -> f64 {
    legendre(i, eta.clamp(0.0, 1.0))
}

/// Lipschitz constant of `q_basis(i, ·)`, i.e. `max |p_2i'|` on `[0, 1]`,
/// attained at `y = 1` where `p_n'(1) = n(n+1)/2`.
pub fn basis_lipschitz(i: usize) -> f64 {
    (i * (2 * i + 1)) as f64
}

/// Annual-mean insolation distribution `s(y)` for obliquity in degrees.
pub fn insolation(y: f64, obliquity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain {
            module: "spectral",
            operation: "insolation",
            value: y,
            domain: "[0, 1]",
        });
    }
    Ok(insolation_unchecked(y, obliquity))
}

fn insolation_unchecked(y: f64, obliquity: f64) -> f64 {
    let beta = obliquity.to_radians();
    let (sb, cb) = beta.sin_cos();
    let cos_lat = (1.0 - y * y).max(0.0).sqrt();
    let h = 2.0 * PI / INSOLATION_POINTS as f64;
    let sum: f64 = (0..INSOLATION_POINTS)
        .map(|k| {
            let c = cos_lat * sb * (k as f64 * h).cos() - y * cb;
            (1.0 - c * c).max(0.0).sqrt()
        })
        .sum();
    2.0 / (PI * PI) * sum * h
}

/// Projection coefficients `s_2i = (4i+1) ∫_0^1 s(y) p_2i(y) dy`, `i = 0..=n_modes`.
///
/// The outer integral is taken in latitude and split at the polar circle, where `s`
/// has a kink, and is checked against a rule of twice the size.
pub fn insolation_coeffs(n_modes: usize, obliquity: f64) -> Result<Vec<f64>> {
    let coarse = project_insolation(n_modes, obliquity, PROJECTION_POINTS);
    let fine = project_insolation(n_modes, obliquity, 2 * PROJECTION_POINTS);
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if worst > PROJECTION_TOL {
        return Err(Error::NonConvergence {
            module: "spectral",
            operation: "insolation_coeffs",
            iterations: 2 * PROJECTION_POINTS,
            residual: worst,
        });
    }
    Ok(fine)
}

fn project_insolation(n_modes: usize, obliquity: f64, points: usize) -> Vec<f64> {
    // Integrate in latitude θ with y = sin θ, so that the √(1 - y²) edge at the
    // pole becomes smooth. The polar circle sits at θ = π/2 - β.
    let rule = GaussLegendre::new(points);
    let polar = FRAC_PI_2 - obliquity.to_radians();
    let mut panels = vec![0.0];
    if polar > 0.0 && polar < FRAC_PI_2 {
        panels.push(polar);
    }
    panels.push(FRAC_PI_2);
    let mut acc = vec![0.0; n_modes + 1];
    let mut basis = vec![0.0; n_modes + 1];
    for w in panels.windows(2) {
        for (theta, wt) in rule.mapped(w[0], w[1]) {
            let (y, jac) = theta.sin_cos();
            let s = insolation_unchecked(y, obliquity);
            legendre_even_into(y, &mut basis);
            for (a, p) in acc.iter_mut().zip(&basis) {
                *a += wt * jac * s * p;
            }
        }
    }
    acc.iter()
        .enumerate()
        .map(|(i, a)| (4 * i + 1) as f64 * a)
        .collect()
}

/// Truncated even Legendre data shared by every downstream module.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable {
    n_modes: usize,
    s_coeffs: Vec<f64>,
    basis_lipschitz: Vec<f64>,
    obliquity: f64,
}

impl SpectralTable {
    /// Table for `n_modes` at `obliquity`: the tabulated coefficients at 23.4°
    /// (computing any mode beyond `s_10`), quadrature otherwise.
    pub fn new(n_modes: usize, obliquity: f64) -> Result<Self> {
        let s_coeffs = if obliquity == TABLE_OBLIQUITY {
            let mut s: Vec<f64> = TABLE_INSOLATION_COEFFS
                .iter()
                .copied()
                .take(n_modes + 1)
                .collect();
            if n_modes >= TABLE_INSOLATION_COEFFS.len() {
                let computed = insolation_coeffs(n_modes, obliquity)?;
                s.extend_from_slice(&computed[TABLE_INSOLATION_COEFFS.len()..]);
            }
            s
        } else {
            insolation_coeffs(n_modes, obliquity)?
        };
        Ok(Self::from_coeffs(s_coeffs, obliquity))
    }

    /// Table built from explicit coefficients `s_0 .. s_2N`.
    pub fn from_coeffs(s_coeffs: Vec<f64>, obliquity: f64) -> Self {
        assert!(!s_coeffs.is_empty(), "need at least s_0");
        let n_modes = s_coeffs.len() - 1;
        let basis_lipschitz = (0..=n_modes).map(basis_lipschitz).collect();
        Self {
            n_modes,
            s_coeffs,
            basis_lipschitz,
            obliquity,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn s_coeffs(&self) -> &[f64] {
        &self.s_coeffs
    }

    pub fn basis_lipschitz(&self) -> &[f64] {
        &self.basis_lipschitz
    }

    /// `K = Σ K_i`.
    pub fn lipschitz_sum(&self) -> f64 {
        self.basis_lipschitz.iter().sum()
    }

    pub fn obliquity(&self) -> f64 {
        self.obliquity
    }

    /// Truncated series `Σ s_2i p_2i(y)`.
    pub fn insolation_series(&self, y: f64) -> f64 {
        let mut basis = vec![0.0; self.n_modes + 1];
        legendre_even_into(y, &mut basis);
        self.dot(&basis)
    }

    pub(crate) fn dot(&self, basis: &[f64]) -> f64 {
        self.s_coeffs.iter().zip(basis).map(|(s, p)| s * p).sum()
    }

    /// Exact insolation at the equator for this table's obliquity.
    pub fn equator_insolation(&self) -> f64 {
        insolation_unchecked(0.0, self.obliquity)
    }
}

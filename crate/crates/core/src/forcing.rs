//! Ice-line dependent albedo forcing and the curve of frozen-ice-line equilibria.

use crate::error::Result;
use crate::params::{eigen_weight, ModelParams};
use crate::spectral::{legendre_even_into, legendre_even_with_deriv_into, GaussLegendre, SpectralTable};

/// Which albedo formula applies: the ice edge sits below the bare-ice
/// boundary (`Below`, a bare-ice band is exposed) or at/above it (`Above`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Below,
    Above,
}

/// One-sided selector for derivatives at the kinks `η ∈ {0, ρ, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Pointwise albedo `α(y, η)` including the midpoint values on `y = η` and `y = ρ`.
pub fn albedo(params: &ModelParams, y: f64, eta: f64) -> f64 {
    let (a1, ai, a2) = (params.albedo_open, params.albedo_bare_ice, params.albedo_snow);
    let rho = params.bare_ice_edge;
    if eta < rho {
        if y < eta {
            a1
        } else if y == eta {
            0.5 * (a1 + ai)
        } else if y < rho {
            ai
        } else if y == rho {
            0.5 * (ai + a2)
        } else {
            a2
        }
    } else if y < eta {
        a1
    } else if y == eta {
        0.5 * (a1 + a2)
    } else {
        a2
    }
}

/// Albedo-weighted spectral forcing for one parameter set.
#[derive(Debug, Clone)]
pub struct ForcingTable {
    params: ModelParams,
    spectral: SpectralTable,
    rule: GaussLegendre,
}

impl ForcingTable {
    /// Builds the table, taking insolation coefficients from [`SpectralTable::new`].
    ///
    /// Parameters are not validated here; callers wanting the physical
    /// constraints enforced use [`ModelParams::validate`].
    pub fn new(params: ModelParams) -> Result<Self> {
        let spectral = SpectralTable::new(params.n_modes, params.obliquity)?;
        Ok(Self::with_spectral(params, spectral))
    }

    pub fn with_spectral(params: ModelParams, spectral: SpectralTable) -> Self {
        assert_eq!(
            spectral.n_modes(),
            params.n_modes,
            "spectral table truncation must match the model"
        );
        // s·p_2i has degree at most 4N; one extra order of headroom.
        let rule = GaussLegendre::for_degree(4 * params.n_modes + 2);
        Self { params, spectral, rule }
    }

    /// Same insolation table, different parameters (the truncation must agree).
    pub fn with_params(&self, params: ModelParams) -> Self {
        if params.obliquity == self.params.obliquity {
            Self::with_spectral(params, self.spectral.clone())
        } else {
            Self::new(params).expect("insolation projection failed")
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn spectral(&self) -> &SpectralTable {
        &self.spectral
    }

    pub fn n_modes(&self) -> usize {
        self.params.n_modes
    }

    fn dim(&self) -> usize {
        self.params.n_modes + 1
    }

    /// `∫_a^b s(y) p_2i(y) dy` for every mode, with the truncated insolation series.
    fn weighted_integrals(&self, a: f64, b: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if a == b {
            return;
        }
        let mut basis = vec![0.0; self.dim()];
        for (y, w) in self.rule.mapped(a, b) {
            legendre_even_into(y, &mut basis);
            let s = self.spectral.dot(&basis);
            for (o, p) in out.iter_mut().zip(&basis) {
                *o += w * s * p;
            }
        }
    }

    /// Branch selected by the (clamped) ice line.
    pub fn branch(&self, eta: f64) -> Branch {
        if eta.clamp(0.0, 1.0) < self.params.bare_ice_edge {
            Branch::Below
        } else {
            Branch::Above
        }
    }

    /// `a_2i(η)` for every mode from the requested formula, `η` clamped to `[0, 1]`.
    pub fn a_branch_all(&self, eta: f64, branch: Branch) -> Vec<f64> {
        let p = &self.params;
        let eta = eta.clamp(0.0, 1.0);
        let n = self.dim();
        let mut open = vec![0.0; n];
        self.weighted_integrals(0.0, eta, &mut open);
        let mut band = vec![0.0; n];
        if branch == Branch::Below {
            self.weighted_integrals(eta, p.bare_ice_edge, &mut band);
        }
        let s = self.spectral.s_coeffs();
        (0..n)
            .map(|i| {
                let norm = (4 * i + 1) as f64;
                let mut reduction = (p.albedo_snow - p.albedo_open) * open[i];
                if branch == Branch::Below {
                    reduction += (p.albedo_snow - p.albedo_bare_ice) * band[i];
                }
                p.albedo_snow * s[i] - norm * reduction
            })
            .collect()
    }

    pub fn a_branch(&self, i: usize, eta: f64, branch: Branch) -> f64 {
        self.a_branch_all(eta, branch)[i]
    }

    /// All `a_2i(η)`, branch chosen by the clamped ice line.
    pub fn a_coeffs(&self, eta: f64) -> Vec<f64> {
        self.a_branch_all(eta, self.branch(eta))
    }

    pub fn a_coeff(&self, i: usize, eta: f64) -> f64 {
        self.a_coeffs(eta)[i]
    }

    fn f_from_a(&self, a: &[f64]) -> Vec<f64> {
        let p = &self.params;
        let s = self.spectral.s_coeffs();
        a.iter()
            .enumerate()
            .map(|(i, ai)| {
                let absorbed = p.solar_mean * (s[i] - ai);
                let source = if i == 0 { absorbed - p.olr_intercept } else { absorbed };
                source / (p.olr_slope + eigen_weight(i) * p.diffusivity)
            })
            .collect()
    }

    /// `f_2i` from an explicit branch formula (no extension logic beyond clamping).
    pub fn f_branch(&self, i: usize, eta: f64, branch: Branch) -> f64 {
        self.f_from_a(&self.a_branch_all(eta, branch))[i]
    }

    /// Extended forcing `f_2i(η)` for all modes; constant outside `[0, 1]`.
    pub fn f_coeffs(&self, eta: f64) -> Vec<f64> {
        self.f_from_a(&self.a_coeffs(eta))
    }

    pub fn f_coeff(&self, i: usize, eta: f64) -> f64 {
        self.f_coeffs(eta)[i]
    }

    /// The curve of fixed points at `ε = 0`: `h⁰(η) = (f_0(η), .., f_2N(η))`.
    pub fn h0(&self, eta: f64) -> Vec<f64> {
        self.f_coeffs(eta)
    }

    /// One-sided derivatives `f_2i'(η)`; zero where the extension is constant.
    pub fn f_derivs(&self, eta: f64, side: Side) -> Vec<f64> {
        let p = &self.params;
        let n = self.dim();
        let outside = match side {
            Side::Left => eta <= 0.0 || eta > 1.0,
            Side::Right => !(0.0..1.0).contains(&eta),
        };
        if outside {
            return vec![0.0; n];
        }
        let below = match side {
            Side::Left => eta <= p.bare_ice_edge,
            Side::Right => eta < p.bare_ice_edge,
        };
        let contrast = if below {
            p.albedo_bare_ice - p.albedo_open
        } else {
            p.albedo_snow - p.albedo_open
        };
        let mut basis = vec![0.0; n];
        legendre_even_into(eta, &mut basis);
        let s = self.spectral.dot(&basis);
        (0..n)
            .map(|i| {
                let da = -((4 * i + 1) as f64) * contrast * s * basis[i];
                -p.solar_mean * da / (p.olr_slope + eigen_weight(i) * p.diffusivity)
            })
            .collect()
    }

    /// Clamped basis values `q_2i(η)` and their one-sided derivatives.
    pub fn q_with_derivs(&self, eta: f64, side: Side) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim();
        let mut q = vec![0.0; n];
        let mut dq = vec![0.0; n];
        legendre_even_with_deriv_into(eta.clamp(0.0, 1.0), &mut q, &mut dq);
        let flat = match side {
            Side::Left => eta <= 0.0 || eta > 1.0,
            Side::Right => !(0.0..1.0).contains(&eta),
        };
        if flat {
            dq.iter_mut().for_each(|d| *d = 0.0);
        }
        (q, dq)
    }

    /// Upper bound on the Lipschitz constant of `h⁰`:
    /// `L₀ = (4N+1) Q s(0) / B · √(N+1) · (α₂ + α_i − 2α₁)`.
    pub fn lipschitz_l0(&self) -> f64 {
        let p = &self.params;
        let n = p.n_modes as f64;
        (4.0 * n + 1.0) * p.solar_mean * self.spectral.equator_insolation() / p.olr_slope
            * (n + 1.0).sqrt()
            * (p.albedo_snow + p.albedo_bare_ice - 2.0 * p.albedo_open)
    }
}

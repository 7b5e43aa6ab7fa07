//! Physical constants and model knobs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Obliquity at which the tabulated insolation coefficients apply (degrees).
pub const TABLE_OBLIQUITY: f64 = 23.4;

/// Tabulated insolation coefficients `s_0 .. s_10` for an obliquity of 23.4°.
pub const TABLE_INSOLATION_COEFFS: [f64; 6] =
    [1.0, -0.477131, -0.045029, 0.007937, 0.013859, 0.008663];

/// Parameters of the temperature / ice-line model.
///
/// Units: heat capacity in W·yr·°C⁻¹·m⁻², radiative terms in W·m⁻² and
/// W·°C⁻¹·m⁻², temperatures in °C, latitudes as `y = sin(latitude)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "R")]
    pub heat_capacity: f64,
    #[serde(rename = "Q")]
    pub solar_mean: f64,
    /// Outgoing longwave radiation intercept.
    #[serde(rename = "A")]
    pub olr_intercept: f64,
    /// Outgoing longwave radiation slope.
    #[serde(rename = "B")]
    pub olr_slope: f64,
    /// Meridional heat transport coefficient.
    #[serde(rename = "D")]
    pub diffusivity: f64,
    /// Tilt of the spin axis in degrees.
    pub obliquity: f64,
    #[serde(rename = "T_c")]
    pub critical_temp: f64,
    /// Ice-free surface albedo.
    #[serde(rename = "alpha1")]
    pub albedo_open: f64,
    /// Bare (snow-free) ice albedo.
    #[serde(rename = "alpha_i")]
    pub albedo_bare_ice: f64,
    /// Snow-covered ice albedo.
    #[serde(rename = "alpha2")]
    pub albedo_snow: f64,
    /// Latitude below which ice carries no snow.
    #[serde(rename = "rho")]
    pub bare_ice_edge: f64,
    /// Ice-line time constant.
    pub epsilon: f64,
    /// Spectral truncation: modes `p_0, p_2, .., p_2N` are kept.
    #[serde(rename = "N")]
    pub n_modes: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            heat_capacity: 20.0,
            solar_mean: 321.0,
            olr_intercept: 164.0,
            olr_slope: 1.9,
            diffusivity: 0.25,
            obliquity: TABLE_OBLIQUITY,
            critical_temp: 0.0,
            albedo_open: 0.30,
            albedo_bare_ice: 0.40,
            albedo_snow: 0.80,
            bare_ice_edge: 0.35,
            epsilon: 0.01,
            n_modes: 5,
        }
    }
}

impl ModelParams {
    /// Relaxation rate `γ_i = (B + 2i(2i+1)D) / R` of spectral mode `i`.
    pub fn gamma(&self, i: usize) -> f64 {
        (self.olr_slope + eigen_weight(i) * self.diffusivity) / self.heat_capacity
    }

    /// Checks every physical constraint, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive and finite, got {v}")))
            }
        }
        positive("R", self.heat_capacity)?;
        positive("Q", self.solar_mean)?;
        positive("B", self.olr_slope)?;
        positive("D", self.diffusivity)?;
        if !self.olr_intercept.is_finite() {
            return Err(invalid("A", "must be finite".into()));
        }
        if !self.critical_temp.is_finite() {
            return Err(invalid("T_c", "must be finite".into()));
        }
        if !(0.0..90.0).contains(&self.obliquity) {
            return Err(invalid(
                "obliquity",
                format!("must lie in [0, 90) degrees, got {}", self.obliquity),
            ));
        }
        if !(self.albedo_open > 0.0 && self.albedo_open < 1.0) {
            return Err(invalid("alpha1", format!("must lie in (0, 1), got {}", self.albedo_open)));
        }
        if !(self.albedo_snow > 0.0 && self.albedo_snow < 1.0) {
            return Err(invalid("alpha2", format!("must lie in (0, 1), got {}", self.albedo_snow)));
        }
        if !(self.albedo_bare_ice > self.albedo_open && self.albedo_bare_ice < self.albedo_snow) {
            return Err(invalid(
                "alpha_i",
                format!(
                    "ordering alpha1 < alpha_i < alpha2 violated ({} < {} < {})",
                    self.albedo_open, self.albedo_bare_ice, self.albedo_snow
                ),
            ));
        }
        if !(self.bare_ice_edge > 0.0 && self.bare_ice_edge < 1.0) {
            return Err(invalid("rho", format!("must lie in (0, 1), got {}", self.bare_ice_edge)));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(invalid("epsilon", format!("must be non-negative, got {}", self.epsilon)));
        }
        match crate::dynamics::max_admissible_n(self) {
            crate::dynamics::Admissible::Unbounded => {}
            crate::dynamics::Admissible::UpTo(n) if self.n_modes <= n => {}
            crate::dynamics::Admissible::UpTo(n) => {
                return Err(invalid(
                    "N",
                    format!("truncation {} exceeds the admissible maximum {n}", self.n_modes),
                ))
            }
            crate::dynamics::Admissible::Never => {
                return Err(invalid(
                    "R",
                    "B/R exceeds 2, so no truncation is admissible".to_string(),
                ))
            }
        }
        Ok(())
    }
}

/// Eigenvalue magnitude `2i(2i+1)` of the spherical diffusion operator for `p_2i`.
pub fn eigen_weight(i: usize) -> f64 {
    let n = 2 * i;
    (n * (n + 1)) as f64
}

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidParameter { field, reason }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn albedo_ordering_names_field() {
        let p = ModelParams { albedo_bare_ice: 0.9, ..Default::default() };
        match p.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "alpha_i"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inadmissible_truncation_rejected() {
        let p = ModelParams { n_modes: 6, ..Default::default() };
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { field: "N", .. })));
    }
}

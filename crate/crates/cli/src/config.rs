//! Flat JSON configuration: model parameters plus per-command options.

use std::path::Path;

use budyko::ModelParams;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Every key the configuration accepts. Omitted keys take their defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "R")]
    pub heat_capacity: Option<f64>,
    #[serde(rename = "Q")]
    pub solar_mean: Option<f64>,
    #[serde(rename = "A")]
    pub olr_intercept: Option<f64>,
    #[serde(rename = "B")]
    pub olr_slope: Option<f64>,
    #[serde(rename = "D")]
    pub diffusivity: Option<f64>,
    pub obliquity: Option<f64>,
    #[serde(rename = "T_c")]
    pub critical_temp: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha_i: Option<f64>,
    pub alpha2: Option<f64>,
    pub rho: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(rename = "N")]
    pub n_modes: Option<usize>,

    pub eta: Option<f64>,
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
    pub points: Option<usize>,
    pub eta0: Option<f64>,
    pub steps: Option<usize>,
    pub a_min: Option<f64>,
    pub a_max: Option<f64>,
    pub points_per_piece: Option<usize>,
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub d_grid_step: Option<f64>,
    pub states: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub attraction_steps: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub options: ConfigFile,
}

/// Reads the optional config file, applies `key=value` overrides and
/// validates the resulting parameters.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut map = match path {
        Some(p) => read_object(p)?,
        None => Map::new(),
    };
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::config(None, format!("--set expects key=value, got `{item}`")))?;
        let value = serde_json::from_str(raw.trim())
            .map_err(|_| CliError::config(Some(key), format!("`{raw}` is not a JSON scalar")))?;
        map.insert(key.trim().to_owned(), value);
    }
    from_map(map)
}

fn read_object(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(None, format!("{}: {e}", path.display())))?;
    if text.trim().is_empty() {
        return Ok(Map::new());
    }
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::config(None, format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(CliError::config(None, format!("{}: {e}", path.display()))),
    }
}

pub fn from_map(map: Map<String, Value>) -> Result<RunConfig, CliError> {
    for (key, value) in &map {
        if value.is_object() || value.is_array() {
            return Err(CliError::config(Some(key), "values must be scalars"));
        }
    }
    let options: ConfigFile = serde_json::from_value(Value::Object(map)).map_err(|e| {
        let msg = e.to_string();
        let field = msg.split('`').nth(1).map(str::to_owned);
        CliError::Config { field, message: msg }
    })?;
    let mut params = ModelParams::default();
    let o = &options;
    let set = |dst: &mut f64, src: Option<f64>| {
        if let Some(v) = src {
            *dst = v;
        }
    };
    set(&mut params.heat_capacity, o.heat_capacity);
    set(&mut params.solar_mean, o.solar_mean);
    set(&mut params.olr_intercept, o.olr_intercept);
    set(&mut params.olr_slope, o.olr_slope);
    set(&mut params.diffusivity, o.diffusivity);
    set(&mut params.obliquity, o.obliquity);
    set(&mut params.critical_temp, o.critical_temp);
    set(&mut params.albedo_open, o.alpha1);
    set(&mut params.albedo_bare_ice, o.alpha_i);
    set(&mut params.albedo_snow, o.alpha2);
    set(&mut params.bare_ice_edge, o.rho);
    set(&mut params.epsilon, o.epsilon);
    if let Some(n) = o.n_modes {
        params.n_modes = n;
    }
    params.validate()?;
    Ok(RunConfig { params, options })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn map(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn empty_gives_defaults() {
        assert_eq!(from_map(Map::new()).unwrap().params, ModelParams::default());
    }

    #[test]
    fn single_override() {
        let cfg = from_map(map(json!({"A": 170}))).unwrap();
        assert_eq!(cfg.params.olr_intercept, 170.0);
        assert_eq!(cfg.params.olr_slope, 1.9);
    }

    #[test]
    fn every_model_key_maps() {
        let cfg = from_map(map(json!({
            "R": 21, "Q": 320, "A": 160, "B": 2, "D": 0.2, "obliquity": 22,
            "T_c": -1, "alpha1": 0.31, "alpha_i": 0.41, "alpha2": 0.79,
            "rho": 0.3, "epsilon": 0.02, "N": 4
        })))
        .unwrap();
        let p = cfg.params;
        assert_eq!(
            [p.heat_capacity, p.solar_mean, p.olr_intercept, p.olr_slope, p.diffusivity, p.obliquity],
            [21.0, 320.0, 160.0, 2.0, 0.2, 22.0]
        );
        assert_eq!([p.critical_temp, p.albedo_open, p.albedo_bare_ice, p.albedo_snow], [-1.0, 0.31, 0.41, 0.79]);
        assert_eq!((p.bare_ice_edge, p.epsilon, p.n_modes), (0.3, 0.02, 4));
    }

    #[test]
    fn ordering_violation_names_field() {
        let err = from_map(map(json!({"alpha_i": 0.9}))).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(err.record().field.as_deref(), Some("alpha_i"));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = from_map(map(json!({"albedo": 0.3}))).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert_eq!(err.record().field.as_deref(), Some("albedo"));
    }

    #[test]
    fn overrides_parse_scalars() {
        let cfg = load(None, &["D=0.3".into(), "N=4".into()]).unwrap();
        assert_eq!((cfg.params.diffusivity, cfg.params.n_modes), (0.3, 4));
        assert!(load(None, &["D".into()]).is_err());
        assert!(load(None, &["D=abc".into()]).is_err());
    }
}

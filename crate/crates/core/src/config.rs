//! Run configuration: JSON file, dotted overrides and schema.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::armodel::AcfSpec;
use crate::continuation::{IltParams, PadeConfig};
use crate::dist::DistributionSpec;
use crate::sampler::{ArConfig, Pipeline, SamplerError, SpeckleConfig};
use crate::validate::ValidateConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("override `{0}` must look like key.path=value")]
    BadOverride(String),
    #[error("override path `{0}` crosses a non-object value")]
    OverridePath(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    /// Raw little-endian 64-bit floats, channels interleaved per sample.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default = "default_prf")]
    pub prf_hz: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_length() -> usize {
    10_000
}

fn default_prf() -> f64 {
    1000.0
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { length: default_length(), prf_hz: default_prf(), seed: 0, format: OutputFormat::Csv }
    }
}

/// Complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub acf: Option<AcfSpec>,
    #[serde(default)]
    pub ar: ArConfig,
    #[serde(default)]
    pub pade: PadeConfig,
    #[serde(default)]
    pub ilt: IltParams,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default)]
    pub speckle: SpeckleConfig,
}

/// Parse a `key.path=value` override; the value is JSON when it parses as
/// JSON and a string otherwise.
pub fn parse_override(s: &str) -> Result<(Vec<String>, Value), ConfigError> {
    let (key, raw) = s.split_once('=').ok_or_else(|| ConfigError::BadOverride(s.into()))?;
    let path: Vec<String> = key.split('.').map(str::to_owned).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::BadOverride(s.into()));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    Ok((path, value))
}

/// Set `path` in a JSON object tree, creating intermediate objects.
pub fn apply_override(root: &mut Value, path: &[String], value: Value) -> Result<(), ConfigError> {
    let mut node = root;
    for (i, key) in path.iter().enumerate() {
        let obj = match node {
            Value::Object(o) => o,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just created")
            }
            _ => return Err(ConfigError::OverridePath(path.join("."))),
        };
        if i + 1 == path.len() {
            obj.insert(key.clone(), value);
            return Ok(());
        }
        node = obj.entry(key.clone()).or_insert(Value::Null);
    }
    Ok(())
}

impl RunConfig {
    /// Parse JSON text, apply overrides in order, and check the result.
    pub fn from_json_with_overrides(text: &str, overrides: &[(Vec<String>, Value)]) -> Result<Self, ConfigError> {
        let mut v: Value = serde_json::from_str(text)?;
        for (path, value) in overrides {
            apply_override(&mut v, path, value.clone())?;
        }
        let cfg: RunConfig = serde_json::from_value(v)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path, overrides: &[(Vec<String>, Value)]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json_with_overrides(&text, overrides)
    }

    /// Checks that need no numerical work.
    pub fn check(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if let Err(e) = self.distribution.validate() {
            return invalid(e.to_string());
        }
        if let Some(acf) = &self.acf {
            if let Err(e) = acf.validate() {
                return invalid(e.to_string());
            }
        }
        if let Err(e) = self.pade.validate() {
            return invalid(e.to_string());
        }
        if self.simulate.length == 0 {
            return invalid("simulate.length must be positive".into());
        }
        if !(self.simulate.prf_hz > 0.0 && self.simulate.prf_hz.is_finite()) {
            return invalid("simulate.prf_hz must be positive".into());
        }
        if self.validate.trials == 0 {
            return invalid("validate.trials must be at least 1".into());
        }
        if self.validate.bins.is_some_and(|b| b < 2) {
            return invalid("validate.bins must be at least 2".into());
        }
        Ok(())
    }

    pub fn pipeline(&self) -> Result<Pipeline, SamplerError> {
        Pipeline::build(&self.distribution, self.acf.as_ref(), &self.ar, self.simulate.prf_hz, &self.pade)
    }

    /// Target ACF `r_0..r_n`: the ACF block when present, otherwise the AR
    /// model's own autocorrelation.
    pub fn target_acf(&self, pipeline: &Pipeline, n: usize) -> Result<Vec<f64>, SamplerError> {
        match &self.acf {
            Some(acf) if self.ar.coeffs.is_none() => Ok(acf.values(self.simulate.prf_hz, n + 1)?),
            _ => Ok(pipeline.model.theoretical_acf(n + 1)),
        }
    }
}

/// JSON schema of [`RunConfig`].
pub fn schema() -> Value {
    serde_json::to_value(schemars::schema_for!(RunConfig)).expect("schema serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "distribution": {"family": "ptas", "alpha": 0.95, "gamma": 2, "eta": 4},
        "ar": {"coeffs": [0.9, -0.1]}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json_with_overrides(EXAMPLE, &[]).unwrap();
        assert_eq!(c.pade.k, 16);
        assert_eq!(c.simulate.length, 10_000);
        assert_eq!(c.validate.lags, 200);
        assert_eq!(c.simulate.format, OutputFormat::Csv);
    }

    #[test]
    fn overrides_win() {
        let ov = vec![parse_override("pade.K=12").unwrap(), parse_override("pade.L=13").unwrap(), parse_override("simulate.format=binary").unwrap()];
        let c = RunConfig::from_json_with_overrides(EXAMPLE, &ov).unwrap();
        assert_eq!((c.pade.k, c.pade.l), (12, 13));
        assert_eq!(c.simulate.format, OutputFormat::Binary);
    }

    #[test]
    fn unknown_keys_rejected() {
        let ov = vec![parse_override("pade.Q=3").unwrap()];
        assert!(matches!(RunConfig::from_json_with_overrides(EXAMPLE, &ov), Err(ConfigError::Json(_))));
        let bad = r#"{"distribution": {"family": "gamma", "alpha": 1, "lambda": 1}, "extra": 1}"#;
        assert!(RunConfig::from_json_with_overrides(bad, &[]).is_err());
    }

    #[test]
    fn bad_override_syntax() {
        assert!(parse_override("pade.K").is_err());
        assert!(parse_override(".K=1").is_err());
        let ov = vec![parse_override("distribution.alpha.x=1").unwrap()];
        assert!(matches!(RunConfig::from_json_with_overrides(EXAMPLE, &ov), Err(ConfigError::OverridePath(_))));
    }

    #[test]
    fn invalid_values_rejected() {
        let ov = vec![parse_override("distribution.gamma=-1").unwrap()];
        assert!(matches!(RunConfig::from_json_with_overrides(EXAMPLE, &ov), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn acf_forms_parse() {
        let text = r#"{
            "distribution": {"family": "gamma", "alpha": 2, "lambda": 1},
            "acf": {"model": "exp_cosine", "t0": 8, "T0": 10, "d": 0.6},
            "ar": {"order": 40}
        }"#;
        let c = RunConfig::from_json_with_overrides(text, &[]).unwrap();
        assert!(c.acf.is_some());
        let text = r#"{"distribution": {"family": "gamma", "alpha": 2, "lambda": 1}, "acf": {"lags": [1, 0.5, 0.25]}, "ar": {"order": 2}}"#;
        assert!(RunConfig::from_json_with_overrides(text, &[]).is_ok());
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::from_json_with_overrides(EXAMPLE, &[]).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::from_json_with_overrides(&text, &[]).unwrap(), c);
    }

    #[test]
    fn schema_lists_blocks() {
        let s = schema().to_string();
        for key in ["distribution", "acf", "ar", "pade", "ilt", "simulate", "validate"] {
            assert!(s.contains(&format!("\"{key}\"")), "{key}");
        }
    }
}

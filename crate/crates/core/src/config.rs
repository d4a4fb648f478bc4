//! Scenario configuration documents.
//!
//! A scenario is a JSON document whose physical quantities carry their unit
//! in the key name (`_m`, `_hz`, `_db`, `_dbw`, `_dbm`, `_j`, `_w`, `_s`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_lower, Error, Result};
use crate::harvest::EhParams;
use crate::linkbudget::{build_channel, mrt_egc_combine, ChannelMode, ScenarioGeometry};
use crate::montecarlo::FluctuationModel;
use crate::solvers::{Method, SwiptInputs};

pub const SCHEMA_VERSION: u32 = 1;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbw_to_w(dbw: f64) -> f64 {
    db_to_linear(dbw)
}

pub fn w_to_dbw(w: f64) -> f64 {
    linear_to_db(w)
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn w_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub geometry: ScenarioGeometry,
    #[serde(default)]
    pub channel_mode: ChannelMode,
    #[serde(default)]
    pub channel_seed: u64,
    pub harvester: EhParams,
    pub sigma2_dbw: f64,
    pub delta2_dbw: f64,
    pub snr0_db: f64,
    pub e0_j: f64,
    pub p_t_dbm: f64,
    pub fluctuation: FluctuationModel,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            geometry: ScenarioGeometry::default(),
            channel_mode: ChannelMode::Rank1Los,
            channel_seed: 0,
            harvester: EhParams::default(),
            sigma2_dbw: -100.0,
            delta2_dbw: -100.0,
            snr0_db: 7.0,
            e0_j: 1e-9,
            p_t_dbm: 20.0,
            fluctuation: FluctuationModel::default(),
            methods: all_methods(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.geometry.validate()?;
        for (name, v) in [
            ("sigma2_dbw", self.sigma2_dbw),
            ("delta2_dbw", self.delta2_dbw),
            ("snr0_db", self.snr0_db),
            ("p_t_dbm", self.p_t_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        check_lower("e0_j", self.e0_j, 0.0, true)?;
        self.fluctuation.validate()?;
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "at least one method is required"));
        }
        Ok(())
    }
}

/// A validated configuration with its link gain `P_r / P_t` resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub gain: f64,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let channel = build_channel(&config.geometry, config.channel_mode, config.channel_seed)?;
        let gain = mrt_egc_combine(&channel)?.gain;
        Ok(Self { config, gain })
    }

    pub fn received_power(&self, p_t_dbm: f64) -> f64 {
        self.gain * dbm_to_w(p_t_dbm)
    }

    /// Planning inputs at the configured transmit power.
    pub fn inputs(&self) -> SwiptInputs {
        self.inputs_at(self.config.p_t_dbm)
    }

    pub fn inputs_at(&self, p_t_dbm: f64) -> SwiptInputs {
        let c = &self.config;
        SwiptInputs {
            p_r: self.received_power(p_t_dbm),
            sigma2: dbw_to_w(c.sigma2_dbw),
            delta2: dbw_to_w(c.delta2_dbw),
            snr_0: db_to_linear(c.snr0_db),
            e_0: c.e0_j,
            l_max: c.geometry.l_max,
            eh: c.harvester,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_conversions() {
        assert_relative_eq!(dbw_to_w(-100.0), 1e-10, max_relative = 1e-14);
        assert_relative_eq!(dbm_to_w(20.0), 0.1, max_relative = 1e-14);
        assert_relative_eq!(db_to_linear(7.0), 5.011872336272722, max_relative = 1e-14);
        for x in [-130.0, -100.0, -3.0, 0.0, 7.0, 17.5, 30.0] {
            assert_relative_eq!(w_to_dbw(dbw_to_w(x)), x, epsilon = 1e-12 * x.abs().max(1.0));
            assert_relative_eq!(w_to_dbm(dbm_to_w(x)), x, epsilon = 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn default_round_trips_through_json() {
        let c = ScenarioConfig::default();
        let text = c.to_json_pretty().unwrap();
        assert!(text.contains("\"distance_m\""));
        assert!(text.contains("\"e_hat_j\""));
        assert_eq!(ScenarioConfig::from_json_str(&text).unwrap(), c);
    }

    #[test]
    fn missing_field_is_named() {
        let mut value: serde_json::Value =
            serde_json::from_str(&ScenarioConfig::default().to_json_pretty().unwrap()).unwrap();
        value["geometry"].as_object_mut().unwrap().remove("l_max");
        let text = serde_json::to_string_pretty(&value).unwrap();
        let err = ScenarioConfig::from_json_str(&text)
            .unwrap_err()
            .to_string();
        assert!(err.contains("l_max"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let mut value: serde_json::Value =
            serde_json::from_str(&ScenarioConfig::default().to_json_pretty().unwrap()).unwrap();
        value["distance"] = 3.into();
        assert!(ScenarioConfig::from_json_str(&value.to_string()).is_err());
        let c = ScenarioConfig {
            schema_version: 2,
            ..ScenarioConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_scenario_link() {
        let s = Scenario::new(ScenarioConfig::default()).unwrap();
        // N * l_max^2 * g with g at 108.679 dB loss
        assert_relative_eq!(
            linear_to_db(s.gain),
            -62.658552361545372,
            max_relative = 1e-9
        );
        let i = s.inputs();
        assert_relative_eq!(i.p_r, 5.421815862538518e-8, max_relative = 1e-9);
        assert_eq!(i.l_max, 100);
    }
}

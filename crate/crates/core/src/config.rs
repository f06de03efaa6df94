//! TOML experiment configuration shared by every command.
//!
//! All sections and keys are optional; missing keys take the documented
//! defaults, unknown keys are rejected. Unit suffixes are part of the key
//! names (`lambda_w`, `sigma2_w`, `d_bits_per_hz`, ...).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::SweepConfig;
use crate::optim::SystemParams;
use crate::scenario::{ChannelConfig, GeometryConfig};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemParams,
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Every violated constraint across all sections.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.system.violations();
        out.extend(self.geometry.violations());
        out.extend(self.channel.violations());
        out.extend(self.sweep.violations());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_override() {
        let cfg =
            ExperimentConfig::from_toml("[system]\nlambda_w = 5.0\n[sweep]\ntrials = 10\nmechanisms = [\"mspoa\"]\n")
                .unwrap();
        assert_eq!(cfg.system.delay_power_w, 5.0);
        assert_eq!(cfg.system.data_bits_per_hz, 8.0);
        assert_eq!(cfg.sweep.trials, 10);
        assert_eq!(cfg.sweep.n_values, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("[system]\nlambda = 5.0\n").is_err());
        assert!(ExperimentConfig::from_toml("[extra]\n").is_err());
    }

    #[test]
    fn every_violation_reported() {
        let cfg = ExperimentConfig::from_toml(
            "[system]\np_max_w = -1.0\nalpha = 2.0\n[geometry]\nblockage_radius_m = 0.0\n[sweep]\ntrials = 0\n",
        )
        .unwrap();
        let v = cfg.violations();
        assert_eq!(v.len(), 4, "{v:?}");
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}

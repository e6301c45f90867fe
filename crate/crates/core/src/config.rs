//! TOML configuration for the color constants and S-CIELAB kernels.
//!
//! ```toml
//! [colorspace]
//! white_point = [0.95047, 1.0, 1.08883]
//! opponent = [[0.279, 0.72, -0.107], [-0.449, 0.29, -0.077], [0.086, -0.59, 0.501]]
//!
//! [scielab]
//! samples_per_degree = 23.0
//! plane2 = [{ weight = 0.531, spread = 0.0392 }, { weight = 0.330, spread = 0.494 }]
//! ```
//!
//! Every key is optional; missing keys keep their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::{OpponentTransform, Xyz, D65};
use crate::error::{Error, Result};
use crate::metrics::{Scielab, ScielabConfig};

/// Environment variable naming a configuration file.
pub const CONFIG_ENV: &str = "FHSF_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorspaceConfig {
    pub white_point: [f64; 3],
    pub opponent: [[f64; 3]; 3],
}

impl Default for ColorspaceConfig {
    fn default() -> Self {
        ColorspaceConfig {
            white_point: D65.to_array(),
            opponent: OpponentTransform::DEFAULT_MATRIX,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub colorspace: ColorspaceConfig,
    pub scielab: ScielabConfig,
}

impl Config {
    /// Parses and validates a configuration document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Loads the file named by [`CONFIG_ENV`], or the defaults when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONFIG_ENV) {
            Some(path) if !path.is_empty() => Self::load(path),
            _ => Ok(Config::default()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .colorspace
            .white_point
            .iter()
            .any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(Error::Config(
                "white point components must be positive".into(),
            ));
        }
        OpponentTransform::new(self.colorspace.opponent)?;
        self.scielab.validate()
    }

    pub fn white_point(&self) -> Xyz {
        Xyz::from_array(self.colorspace.white_point)
    }

    pub fn opponent(&self) -> Result<OpponentTransform> {
        OpponentTransform::new(self.colorspace.opponent)
    }

    pub fn scielab(&self) -> Result<Scielab> {
        Scielab::new(&self.scielab, self.opponent()?, self.white_point())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(Config::from_toml("").unwrap(), Config::default());
    }

    #[test]
    fn partial_override() {
        let cfg = Config::from_toml(
            "[scielab]\nsamples_per_degree = 40.0\n[colorspace]\nwhite_point = [0.9642, 1.0, 0.8249]\n",
        )
        .unwrap();
        assert_eq!(cfg.scielab.samples_per_degree, 40.0);
        assert_eq!(cfg.scielab.plane1, ScielabConfig::default().plane1);
        assert_eq!(cfg.white_point().z, 0.8249);
        cfg.scielab().unwrap();
    }

    #[test]
    fn singular_opponent_rejected_at_load() {
        let err =
            Config::from_toml("[colorspace]\nopponent = [[1,0,0],[0,1,0],[1,1,0]]\n").unwrap_err();
        assert!(matches!(err, Error::SingularMatrix));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            Config::from_toml("[scielab]\nfoo = 1\n"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn round_trips_through_toml() {
        let text = toml::to_string(&Config::default()).unwrap();
        assert_eq!(Config::from_toml(&text).unwrap(), Config::default());
    }
}

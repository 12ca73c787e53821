//! Scenario description files.
//!
//! Scenarios are TOML documents. The required sections describe the deployment;
//! the optional ones carry the OFDM numerology and experiment knobs:
//!
//! ```toml
//! [aps]
//! positions = [[0.0, 0.0], [100.0, 0.0]]
//!
//! [ues]
//! positions = [[35.0, 0.0]]
//!
//! [array]
//! num_antennas = 8
//! spacing_wavelengths = 0.5        # Δ as a multiple of λ_c
//! carrier_frequency_hz = 28e9
//!
//! [paths]
//! count = 2
//! power_profile = [1.0, 0.5]
//! seed = 7
//!
//! [ofdm]                           # optional
//! bandwidth_hz = 400e6
//! num_subcarriers = 64
//! layout = "centered"              # or "one-sided"
//!
//! [pathloss]                       # optional
//! reference_distance_m = 1.0
//! exponent = 3.19
//!
//! [correlation]                    # optional
//! num_trials = 2000
//! expectation = "gains-and-doas"   # or "fixed-doas"
//!
//! [isi]                            # optional
//! num_symbols = 16
//! cp_values = [0, 8, 16, 32, 48]
//! ```

use std::path::Path as FsPath;

use serde::Deserialize;

use crate::channel::{OfdmGrid, SubcarrierLayout};
use crate::correlation::ExpectationMode;
use crate::scenario::{ArrayConfig, PathGenerator, PathlossModel, Position, Scenario};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositionsSection {
    pub positions: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub num_antennas: usize,
    pub spacing_wavelengths: f64,
    pub carrier_frequency_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub count: usize,
    pub power_profile: Vec<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSection {
    #[serde(default = "OfdmSection::default_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "OfdmSection::default_subcarriers")]
    pub num_subcarriers: usize,
    #[serde(default)]
    pub layout: SubcarrierLayout,
}

impl OfdmSection {
    fn default_bandwidth() -> f64 {
        400e6
    }

    fn default_subcarriers() -> usize {
        64
    }
}

impl Default for OfdmSection {
    fn default() -> Self {
        Self {
            bandwidth_hz: Self::default_bandwidth(),
            num_subcarriers: Self::default_subcarriers(),
            layout: SubcarrierLayout::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationSection {
    #[serde(default = "CorrelationSection::default_trials")]
    pub num_trials: usize,
    #[serde(default)]
    pub expectation: ExpectationMode,
}

impl CorrelationSection {
    fn default_trials() -> usize {
        2000
    }
}

impl Default for CorrelationSection {
    fn default() -> Self {
        Self {
            num_trials: Self::default_trials(),
            expectation: ExpectationMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsiSection {
    #[serde(default = "IsiSection::default_symbols")]
    pub num_symbols: usize,
    #[serde(default = "IsiSection::default_cp_values")]
    pub cp_values: Vec<usize>,
}

impl IsiSection {
    fn default_symbols() -> usize {
        16
    }

    fn default_cp_values() -> Vec<usize> {
        vec![0, 8, 16, 32, 48]
    }
}

impl Default for IsiSection {
    fn default() -> Self {
        Self {
            num_symbols: Self::default_symbols(),
            cp_values: Self::default_cp_values(),
        }
    }
}

/// Parsed and validated scenario file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub aps: PositionsSection,
    pub ues: PositionsSection,
    pub array: ArraySection,
    pub paths: PathsSection,
    #[serde(default)]
    pub ofdm: OfdmSection,
    #[serde(default)]
    pub pathloss: PathlossModel,
    #[serde(default)]
    pub correlation: CorrelationSection,
    #[serde(default)]
    pub isi: IsiSection,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let reason = e.inner().message().trim().to_string();
            Error::Config { field, reason }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, section) in [("aps.positions", &self.aps), ("ues.positions", &self.ues)] {
            if section.positions.is_empty() {
                return Err(Error::config(field, "must list at least one position"));
            }
            if let Some(i) = section
                .positions
                .iter()
                .position(|p| !(p[0].is_finite() && p[1].is_finite()))
            {
                return Err(Error::config(field, format!("entry {i} is not finite")));
            }
        }
        if self.array.num_antennas == 0 {
            return Err(Error::config("array.num_antennas", "must be at least 1"));
        }
        if !(self.array.spacing_wavelengths.is_finite() && self.array.spacing_wavelengths > 0.0) {
            return Err(Error::config(
                "array.spacing_wavelengths",
                "must be positive and finite",
            ));
        }
        if !(self.array.carrier_frequency_hz.is_finite() && self.array.carrier_frequency_hz > 0.0) {
            return Err(Error::config(
                "array.carrier_frequency_hz",
                "must be positive and finite",
            ));
        }
        if self.paths.count == 0 {
            return Err(Error::config("paths.count", "must be at least 1"));
        }
        if self.paths.power_profile.len() != self.paths.count {
            return Err(Error::config(
                "paths.power_profile",
                format!(
                    "has {} weights but paths.count is {}",
                    self.paths.power_profile.len(),
                    self.paths.count
                ),
            ));
        }
        if !(self.ofdm.bandwidth_hz.is_finite() && self.ofdm.bandwidth_hz >= 0.0) {
            return Err(Error::config(
                "ofdm.bandwidth_hz",
                "must be nonnegative and finite",
            ));
        }
        if self.ofdm.num_subcarriers == 0 {
            return Err(Error::config("ofdm.num_subcarriers", "must be at least 1"));
        }
        if self.correlation.num_trials < 2 {
            return Err(Error::config(
                "correlation.num_trials",
                "must be at least 2",
            ));
        }
        if self.isi.num_symbols < 2 {
            return Err(Error::config("isi.num_symbols", "must be at least 2"));
        }
        // Generator construction checks the profile weights and pathloss section.
        self.path_generator()?;
        Ok(())
    }

    pub fn array_config(&self) -> Result<ArrayConfig> {
        ArrayConfig::with_spacing_wavelengths(
            self.array.num_antennas,
            self.array.spacing_wavelengths,
            self.array.carrier_frequency_hz,
        )
    }

    pub fn path_generator(&self) -> Result<PathGenerator> {
        PathGenerator::new(self.paths.power_profile.clone(), self.pathloss)
    }

    pub fn grid(&self) -> Result<OfdmGrid> {
        OfdmGrid::new(
            self.ofdm.bandwidth_hz,
            self.ofdm.num_subcarriers,
            self.ofdm.layout,
        )
    }
}

/// Builds the deterministic deployment described by `config`.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    let to_positions = |v: &[[f64; 2]]| v.iter().map(|p| Position::new(p[0], p[1])).collect();
    Scenario::new(
        to_positions(&config.aps.positions),
        to_positions(&config.ues.positions),
        config.array_config()?,
        config.paths.count,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[aps]
positions = [[0.0, 0.0], [100.0, 0.0]]

[ues]
positions = [[40.0, 0.0]]

[array]
num_antennas = 4
spacing_wavelengths = 0.5
carrier_frequency_hz = 28e9

[paths]
count = 2
power_profile = [1.0, 0.5]
seed = 11
"#;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn parses_and_builds() {
        let cfg = ScenarioConfig::from_toml_str(BASE).unwrap();
        let s = build_scenario(&cfg).unwrap();
        assert_eq!(s.distances_from(0), &[40.0, 60.0]);
        assert_eq!(s.num_antennas(), 4);
        assert_eq!(cfg.paths.seed, 11);
        assert_eq!(cfg.ofdm, OfdmSection::default());
        let expected_spacing = 0.5 * crate::SPEED_OF_LIGHT / 28e9;
        assert!((s.array().antenna_spacing() - expected_spacing).abs() < 1e-18);
    }

    #[test]
    fn missing_key_names_field() {
        let text = BASE.replace("seed = 11\n", "");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn wrong_type_names_field() {
        let text = BASE.replace("num_antennas = 4", "num_antennas = -4");
        assert_eq!(
            field_of(ScenarioConfig::from_toml_str(&text).unwrap_err()),
            "array.num_antennas"
        );
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{BASE}\n[ofdm]\nbandwith_hz = 1.0\n");
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn profile_length_checked() {
        let text = BASE.replace("power_profile = [1.0, 0.5]", "power_profile = [1.0]");
        assert_eq!(
            field_of(ScenarioConfig::from_toml_str(&text).unwrap_err()),
            "paths.power_profile"
        );
    }

    #[test]
    fn zero_profile_rejected() {
        let text = BASE.replace("power_profile = [1.0, 0.5]", "power_profile = [0.0, 0.0]");
        assert_eq!(
            field_of(ScenarioConfig::from_toml_str(&text).unwrap_err()),
            "paths.power_profile"
        );
    }

    #[test]
    fn zero_antennas_rejected() {
        let text = BASE.replace("num_antennas = 4", "num_antennas = 0");
        assert_eq!(
            field_of(ScenarioConfig::from_toml_str(&text).unwrap_err()),
            "array.num_antennas"
        );
    }

    #[test]
    fn coincident_positions_are_geometry_errors() {
        let text = BASE.replace("[[40.0, 0.0]]", "[[100.0, 0.0]]");
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        assert!(matches!(build_scenario(&cfg), Err(Error::Geometry(_))));
    }

    #[test]
    fn optional_sections() {
        let text = format!(
            "{BASE}\n[ofdm]\nbandwidth_hz = 100e6\nnum_subcarriers = 32\nlayout = \"one-sided\"\n\n[pathloss]\nexponent = 2.0\n"
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let grid = cfg.grid().unwrap();
        assert_eq!(grid.num_subcarriers(), 32);
        assert_eq!(grid.frequency(0), 0.0);
        assert_eq!(cfg.pathloss.exponent, 2.0);
        assert_eq!(cfg.pathloss.reference_distance, 1.0);
    }
}

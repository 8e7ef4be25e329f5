//! TOML run configuration. Lengths in the file use the units named in the key
//! (`_um`, `_nm`); everything is converted to SI on the way in.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::evap::{EvapModelParams, EvaporationModel, PowerSchedule};
use crate::par::Execution;
use crate::thermo::{DEFAULT_BETA, DEFAULT_TOLERANCE};
use crate::trapcore::constants::{ATOMIC_MASS_UNIT, STANDARD_GRAVITY};
use crate::trapcore::{AtomSpecies, GaussianBeam, TrapConfig};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub species: SpeciesConfig,
    #[serde(default)]
    pub beams: Vec<BeamConfig>,
    #[serde(default)]
    pub trap: TrapSection,
    #[serde(default)]
    pub thermo: ThermoConfig,
    /// Replaces the beams with an isotropic harmonic well for `vtab`.
    pub harmonic: Option<HarmonicConfig>,
    pub schedule: Option<PowerSchedule>,
    #[serde(default)]
    pub evap: EvapConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub preset: String,
    pub mass_amu: Option<f64>,
    pub scattering_length_nm: Option<f64>,
    pub three_body_k3_cm6_s: Option<f64>,
}

impl Default for SpeciesConfig {
    fn default() -> Self {
        Self { preset: "rubidium87".into(), mass_amu: None, scattering_length_nm: None, three_body_k3_cm6_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub power_w: f64,
    /// Circular waist; mutually exclusive with the per-axis pair.
    pub waist_um: Option<f64>,
    pub waist_x_um: Option<f64>,
    pub waist_y_um: Option<f64>,
    pub wavelength_nm: f64,
    #[serde(default = "x_axis")]
    pub axis: [f64; 3],
    /// Direction of `waist_x`; defaults to a lab axis perpendicular to `axis`.
    pub transverse_x: Option<[f64; 3]>,
    #[serde(default)]
    pub focus_um: [f64; 3],
}

fn x_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    #[serde(default)]
    pub gravity: bool,
    #[serde(default = "standard_gravity")]
    pub gravity_m_s2: f64,
}

fn standard_gravity() -> f64 {
    STANDARD_GRAVITY
}

impl Default for TrapSection {
    fn default() -> Self {
        Self { gravity: false, gravity_m_s2: STANDARD_GRAVITY }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermoConfig {
    pub beta: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub eta_step: f64,
    pub atom_number: f64,
    pub samples: u64,
    pub seed: u64,
    /// One `wings` output per entry; the beams' own wavelength when absent.
    pub wavelengths_nm: Option<Vec<f64>>,
    /// Largest accepted MC relative error on the normalization integral.
    pub tolerance: f64,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            eta_min: 6.0,
            eta_max: 12.0,
            eta_step: 1.0,
            atom_number: 2e6,
            samples: 10_000_000,
            seed: 1,
            wavelengths_nm: None,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl ThermoConfig {
    /// η grid from `eta_min` to `eta_max` inclusive.
    pub fn etas(&self) -> Result<Vec<f64>, CliError> {
        if !(self.eta_step > 0.0 && self.eta_min <= self.eta_max) {
            return Err(CliError::Config("thermo: need eta_step > 0 and eta_min <= eta_max".into()));
        }
        // 20 itself is allowed so the deep-truncation end of a sweep can be probed.
        if !(self.eta_min > 2.0 && self.eta_max <= 20.0) {
            return Err(CliError::Domain(format!(
                "eta range [{}, {}] must lie inside (2, 20]",
                self.eta_min, self.eta_max
            )));
        }
        let n = ((self.eta_max - self.eta_min) / self.eta_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.eta_min + i as f64 * self.eta_step).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    /// Radius at which the potential reaches the depth.
    pub radius_um: f64,
    pub depth_uk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    TruncatedBoltzmannHarmonic,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvapConfig {
    pub initial_atom_number: f64,
    /// Defaults to a tenth of the initial depth.
    pub initial_temperature_uk: Option<f64>,
    /// `inf` disables background loss.
    pub background_lifetime_s: f64,
    /// Defaults to the species value.
    pub three_body_k3_cm6_s: Option<f64>,
    pub model: ModelName,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub trap_grid_spacing_s: f64,
    pub output_interval_s: f64,
}

impl Default for EvapConfig {
    fn default() -> Self {
        let p = EvapModelParams::default();
        Self {
            initial_atom_number: 4e6,
            initial_temperature_uk: None,
            background_lifetime_s: p.background_lifetime,
            three_body_k3_cm6_s: None,
            model: ModelName::TruncatedBoltzmannHarmonic,
            ode_rel_tol: p.ode_rel_tol,
            ode_abs_tol: p.ode_abs_tol,
            trap_grid_spacing_s: p.trap_grid_spacing,
            output_interval_s: p.output_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), svg: false }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok((Self::parse(text)?, bytes))
    }

    pub fn species(&self) -> Result<AtomSpecies, CliError> {
        let s = &self.species;
        let mut species = match s.preset.to_ascii_lowercase().as_str() {
            "rubidium87" | "rb87" => AtomSpecies::rubidium87(),
            other => return Err(CliError::Config(format!("species: unknown preset {other:?}"))),
        };
        if let Some(m) = s.mass_amu {
            species.mass = m * ATOMIC_MASS_UNIT;
        }
        if let Some(a) = s.scattering_length_nm {
            species.scattering_length = a * 1e-9;
        }
        if let Some(k3) = s.three_body_k3_cm6_s {
            species.three_body_k3 = k3;
        }
        Ok(species)
    }

    pub fn trap_config(&self) -> Result<TrapConfig, CliError> {
        if self.beams.is_empty() {
            return Err(CliError::Config("at least one [[beams]] entry is required".into()));
        }
        let beams = self.beams.iter().enumerate().map(|(i, b)| b.to_beam(i)).collect::<Result<Vec<_>, _>>()?;
        let mut config = TrapConfig::new(self.species()?, beams).with_gravity(self.trap.gravity);
        config.gravity_acceleration = self.trap.gravity_m_s2;
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn evap_params(&self, species: &AtomSpecies) -> EvapModelParams {
        let e = &self.evap;
        EvapModelParams {
            background_lifetime: e.background_lifetime_s,
            three_body_k3: e.three_body_k3_cm6_s.unwrap_or(species.three_body_k3),
            evaporation_model: match e.model {
                ModelName::TruncatedBoltzmannHarmonic => EvaporationModel::TruncatedBoltzmannHarmonic,
                ModelName::Disabled => EvaporationModel::Disabled,
            },
            ode_rel_tol: e.ode_rel_tol,
            ode_abs_tol: e.ode_abs_tol,
            trap_grid_spacing: e.trap_grid_spacing_s,
            output_interval: e.output_interval_s,
            execution: Execution::Parallel,
        }
    }
}

impl BeamConfig {
    fn to_beam(&self, index: usize) -> Result<GaussianBeam, CliError> {
        let bad = |m: &str| CliError::Config(format!("beams[{index}]: {m}"));
        let (wx, wy) = match (self.waist_um, self.waist_x_um, self.waist_y_um) {
            (Some(w), None, None) => (w, w),
            (None, Some(x), Some(y)) => (x, y),
            _ => return Err(bad("give either waist_um or both waist_x_um and waist_y_um")),
        };
        let axis = Vector3::from(self.axis);
        let transverse = match self.transverse_x {
            Some(t) => Vector3::from(t),
            None => {
                // First lab axis not parallel to the beam.
                let a = axis.normalize();
                [Vector3::y(), Vector3::x(), Vector3::z()]
                    .into_iter()
                    .find(|v| a.dot(v).abs() < 0.9)
                    .ok_or_else(|| bad("axis must be non-zero"))?
            }
        };
        let beam = GaussianBeam::new(self.power_w, wx * 1e-6, self.wavelength_nm * 1e-9)
            .with_waists(wx * 1e-6, wy * 1e-6)
            .with_orientation(axis, transverse)
            .with_focus(Vector3::from(self.focus_um) * 1e-6);
        beam.validate().map_err(|e| bad(&e.to_string()))?;
        Ok(beam)
    }
}

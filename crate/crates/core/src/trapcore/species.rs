use serde::{Deserialize, Serialize};

use super::constants::ATOMIC_MASS_UNIT;
use super::TrapError;

/// Two-line (D1/D2) alkali atom as seen by a far-detuned dipole trap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// m
    pub d1_wavelength: f64,
    /// m
    pub d2_wavelength: f64,
    /// Natural linewidth of D1, rad/s.
    pub d1_linewidth: f64,
    /// Natural linewidth of D2, rad/s.
    pub d2_linewidth: f64,
    /// s-wave scattering length, m.
    pub scattering_length: f64,
    /// Three-body loss coefficient, cm⁶/s.
    pub three_body_k3: f64,
}

impl AtomSpecies {
    /// ⁸⁷Rb in the F=1 ground-state manifold.
    pub fn rubidium87() -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            name: "Rb87".to_string(),
            mass: 86.909_180_527 * ATOMIC_MASS_UNIT,
            d1_wavelength: 794.978_851_156e-9,
            d2_wavelength: 780.241_209_686e-9,
            d1_linewidth: two_pi * 5.7500e6,
            d2_linewidth: two_pi * 6.0666e6,
            scattering_length: 5.3e-9,
            three_body_k3: 4.3e-29,
        }
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        let positive = [
            ("mass", self.mass),
            ("d1_wavelength", self.d1_wavelength),
            ("d2_wavelength", self.d2_wavelength),
            ("d1_linewidth", self.d1_linewidth),
            ("d2_linewidth", self.d2_linewidth),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(TrapError::InvalidSpecies(format!("{field} must be positive, got {value}")));
            }
        }
        if !self.scattering_length.is_finite() {
            return Err(TrapError::InvalidSpecies("scattering_length must be finite".into()));
        }
        if !(self.three_body_k3.is_finite() && self.three_body_k3 >= 0.0) {
            return Err(TrapError::InvalidSpecies("three_body_k3 must be non-negative".into()));
        }
        Ok(())
    }

    /// Reddest of the two D lines; trapping light must lie beyond it.
    pub fn reddest_line(&self) -> f64 {
        self.d1_wavelength.max(self.d2_wavelength)
    }
}

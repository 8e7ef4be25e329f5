//! Truncated-Boltzmann quasi-equilibrium in a finite-depth trap: equipotential
//! volumes, centre and wing populations, densities and collision diagnostics.

pub mod populations;
pub mod rates;
pub mod special;
pub mod volume;

pub use populations::{
    analytic_populations, density_at, exact_populations, exact_populations_with_tolerance, spatial_integral, Method,
    PopulationReport, SpatialEstimate,
};
pub use rates::{
    collision_rate, harmonic_peak_density, harmonic_wing_ratio, mean_speed, psd, thermalization_time,
    wing_collision_ratio, wing_fraction_half_point, wings, Wing,
};
pub use special::incomplete_gamma_p32;
pub use volume::{volume_table, BeamLandscape, HarmonicLandscape, Landscape, Region, VolumeTable};

use crate::trapcore::constants::BOLTZMANN;
use crate::trapcore::{TrapCharacterization, TrapError};

/// β above this is refused: the density of states diverges at the trap top.
pub const MAX_BETA: f64 = 1.97;
pub const DEFAULT_BETA: f64 = 1.9;
/// Target relative MC error on the normalization integral.
pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThermoError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("beta {beta} too large (limit {limit}); the volume of states diverges at the trap top")]
    BetaTooLarge { beta: f64, limit: f64 },
    #[error("Monte Carlo relative error {achieved:.3e} exceeds tolerance {tolerance:.3e}; raise the sample count")]
    ToleranceNotMet { achieved: f64, tolerance: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("volume table parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Trap(#[from] TrapError),
}

/// Quasi-equilibrium cloud of `atom_number` atoms truncated at energy β·U₀
/// above the trap minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedThermalState {
    pub atom_number: f64,
    /// K
    pub temperature: f64,
    /// U₀ / k_B T
    pub eta: f64,
    /// ε_t / U₀
    pub beta: f64,
    pub trap: TrapCharacterization,
}

impl TruncatedThermalState {
    pub fn new(atom_number: f64, temperature: f64, beta: f64, trap: TrapCharacterization) -> Result<Self, ThermoError> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(ThermoError::Domain(format!("temperature must be positive, got {temperature}")));
        }
        let eta = trap.single_beam_depth_u0 / (BOLTZMANN * temperature);
        Self::checked(atom_number, temperature, eta, beta, trap)
    }

    /// State at a given η = U₀/k_B T.
    pub fn from_eta(atom_number: f64, eta: f64, beta: f64, trap: TrapCharacterization) -> Result<Self, ThermoError> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(ThermoError::Domain(format!("eta must be positive, got {eta}")));
        }
        let temperature = trap.single_beam_depth_u0 / (BOLTZMANN * eta);
        Self::checked(atom_number, temperature, eta, beta, trap)
    }

    fn checked(
        atom_number: f64,
        temperature: f64,
        eta: f64,
        beta: f64,
        trap: TrapCharacterization,
    ) -> Result<Self, ThermoError> {
        if !(atom_number >= 0.0 && atom_number.is_finite()) {
            return Err(ThermoError::Domain(format!("atom number must be non-negative, got {atom_number}")));
        }
        if !(trap.single_beam_depth_u0 > 0.0) {
            return Err(ThermoError::Domain("primary beam depth U0 must be positive".into()));
        }
        if !(eta > 0.0 && eta.is_finite() && temperature > 0.0) {
            return Err(ThermoError::Domain(format!("eta must be positive and finite, got {eta}")));
        }
        if !(beta > 0.0) {
            return Err(ThermoError::Domain(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { atom_number, temperature, eta, beta, trap })
    }

    /// Truncation energy over k_B T, ηβ.
    pub fn truncation(&self) -> f64 {
        self.eta * self.beta
    }

    /// Occupation weight at reduced energy u = (U − U_min)/U₀, relative to n₀.
    #[inline]
    pub fn weight(&self, u: f64) -> f64 {
        occupation(self.eta, self.beta, u)
    }
}

/// e^(−ηu) P(3/2, η(β−u)) on [0, β), zero above.
#[inline]
pub(crate) fn occupation(eta: f64, beta: f64, u: f64) -> f64 {
    if u >= beta {
        return 0.0;
    }
    (-eta * u).exp() * special::p32_unchecked(eta * (beta - u))
}

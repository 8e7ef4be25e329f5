//! Gaussian-beam dipole potentials, trap depth, and harmonic frequencies.

pub mod beam;
pub mod constants;
pub mod species;
pub mod trap;

pub use beam::GaussianBeam;
pub use species::AtomSpecies;
pub use trap::{
    characterize, dipole_coefficient, single_beam_frequencies, TrapCharacterization, TrapConfig, TrapPotential,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrapError {
    #[error("wavelength {wavelength:e} m is not red-detuned of both D lines")]
    BlueDetuned { wavelength: f64 },
    #[error("invalid beam: {0}")]
    InvalidBeam(String),
    #[error("invalid species: {0}")]
    InvalidSpecies(String),
    #[error("trap has no bound minimum: {0}")]
    NoMinimum(String),
    #[error("non-positive curvature at the reported minimum (eigenvalues {eigenvalues:?})")]
    DegenerateHessian { eigenvalues: [f64; 3] },
}

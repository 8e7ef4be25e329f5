//! Closed-form densities, phase-space density, collision rates and the
//! harmonic wing model.

use std::f64::consts::PI;

use super::ThermoError;
use crate::trapcore::constants::{BOLTZMANN, PLANCK};
use crate::trapcore::{characterize, AtomSpecies, TrapCharacterization, TrapConfig, TrapError};

/// Peak phase-space density n₀ λ_dB³.
pub fn psd(n0: f64, temperature: f64, species: &AtomSpecies) -> f64 {
    debug_assert!(temperature > 0.0);
    let lambda_db = PLANCK / (2.0 * PI * species.mass * BOLTZMANN * temperature).sqrt();
    n0 * lambda_db.powi(3)
}

/// Mean thermal speed √(8 k_B T / π m), m/s.
pub fn mean_speed(temperature: f64, mass: f64) -> f64 {
    (8.0 * BOLTZMANN * temperature / (PI * mass)).sqrt()
}

/// Elastic collision rate n₀ σ v̄ with σ = 8πa², s⁻¹.
pub fn collision_rate(n0: f64, temperature: f64, species: &AtomSpecies) -> f64 {
    let sigma = 8.0 * PI * species.scattering_length.powi(2);
    n0 * sigma * mean_speed(temperature, species.mass)
}

/// One axial oscillation period, 2π/ω_ax.
pub fn thermalization_time(axial_frequency: f64) -> f64 {
    2.0 * PI / axial_frequency
}

/// Collision rate at the wing density n₀e^(−η), in units of ω_ax.
pub fn wing_collision_ratio(n0: f64, eta: f64, temperature: f64, species: &AtomSpecies, axial_frequency: f64) -> f64 {
    collision_rate(n0 * (-eta).exp(), temperature, species) / axial_frequency
}

/// η at which half the atoms sit in the wings of two equal crossed beams.
pub fn wing_fraction_half_point(waist: f64, wavelength: f64) -> f64 {
    (4.0 * PI * waist / wavelength).ln()
}

/// Peak density of a harmonic Boltzmann cloud sharing N with wing reservoirs
/// of total relative population `wing_ratio`.
pub fn harmonic_peak_density(
    atom_number: f64,
    temperature: f64,
    mean_frequency: f64,
    mass: f64,
    wing_ratio: f64,
) -> f64 {
    let scale = mass * mean_frequency * mean_frequency / (2.0 * PI * BOLTZMANN * temperature);
    atom_number * scale.powf(1.5) / (1.0 + wing_ratio)
}

/// Harmonic reservoir along one beam away from the crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wing {
    /// Index of the beam in the trap configuration.
    pub beam: usize,
    /// (ω̄_crossing / ω̄_beam)³: the wing's thermal volume over the crossing's.
    pub volume_ratio: f64,
    /// Wing floor above the trap minimum, J.
    pub offset: f64,
}

impl Wing {
    /// Population relative to the crossing. The factor (1 − e^(−δ/k_BT))
    /// removes the double count when the crossing is no deeper than the beam.
    pub fn relative_population(&self, temperature: f64) -> f64 {
        let x = self.offset / (BOLTZMANN * temperature);
        self.volume_ratio * (-x).exp() * -(-x).exp_m1()
    }
}

/// Wings of every lit beam, when at least two beams are lit. A wing is the
/// trap the beam forms on its own, under the same gravity; beams that cannot
/// hold atoms alone, and wings whose floor lies at or above the escape level,
/// are dropped.
pub fn wings(config: &TrapConfig, trap: &TrapCharacterization) -> Result<Vec<Wing>, ThermoError> {
    let depths = config.beam_depths()?;
    let lit = depths.iter().filter(|&&d| d > 0.0).count();
    if lit < 2 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for (index, beam) in config.beams.iter().enumerate().filter(|&(i, _)| depths[i] > 0.0) {
        let alone = TrapConfig { beams: vec![beam.clone()], ..config.clone() };
        let single = match characterize(&alone) {
            Ok(single) => single,
            Err(TrapError::NoMinimum(_) | TrapError::DegenerateHessian { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let wing = Wing {
            beam: index,
            volume_ratio: (trap.mean_frequency / single.mean_frequency).powi(3),
            offset: single.minimum_energy - trap.minimum_energy,
        };
        if wing.offset > 0.0 && wing.offset < trap.depth {
            out.push(wing);
        }
    }
    Ok(out)
}

/// Σ over wings of their population relative to the crossing.
pub fn harmonic_wing_ratio(
    config: &TrapConfig,
    trap: &TrapCharacterization,
    temperature: f64,
) -> Result<f64, ThermoError> {
    Ok(wings(config, trap)?.iter().map(|w| w.relative_population(temperature)).sum())
}

#[cfg(test)]
mod tests {
    use nalgebra::Vector3;

    use super::*;
    use crate::trapcore::GaussianBeam;

    fn rb() -> AtomSpecies {
        AtomSpecies::rubidium87()
    }

    #[test]
    fn psd_examples() {
        assert_eq!(psd(0.0, 1e-4, &rb()), 0.0);
        let ratio = psd(1e19, 1e-4, &rb()) / psd(1e19, 2e-4, &rb());
        assert!((ratio - 2f64.powf(1.5)).abs() < 1e-12);
        // λ_dB = h/√(2π m k_B T) = 13.24 nm at 200 μK.
        let lambda = 13.242e-9;
        let p = psd(1e19, 200e-6, &rb());
        assert!((p / (1e19 * lambda * lambda * lambda) - 1.0).abs() < 1e-3, "{p}");
    }

    #[test]
    fn collision_rate_examples() {
        let g = collision_rate(1e20, 200e-6, &rb());
        assert!((g / 1.56e4 - 1.0).abs() < 0.01, "{g}");
        assert!((collision_rate(2e20, 200e-6, &rb()) / g - 2.0).abs() < 1e-12);
    }

    #[test]
    fn half_point_examples() {
        assert!((wing_fraction_half_point(40e-6, 1.06e-6) - 6.1616).abs() < 1e-3);
        assert!((wing_fraction_half_point(40e-6, 10.6e-6) - 3.8590).abs() < 1e-3);
        assert!(wing_fraction_half_point(1e-6, 4.0 * PI * 1e-6).abs() < 1e-15);
    }

    #[test]
    fn axial_frequency_ratio_across_wavelengths() {
        // Equal depth and waist: ω_ax ∝ λ.
        let (_, short) = crate::trapcore::single_beam_frequencies(1e-27, rb().mass, 40e-6, 1.06e-6);
        let (_, long) = crate::trapcore::single_beam_frequencies(1e-27, rb().mass, 40e-6, 10.6e-6);
        assert!((long / short - 10.0).abs() < 1e-12);
        assert!((thermalization_time(short) / thermalization_time(long) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn equal_crossed_wing_ratio_reduces_to_four_rayleigh_over_waist() {
        let w = 40e-6;
        let lambda = 1064e-9;
        let beams = vec![
            GaussianBeam::new(5.0, w, lambda),
            GaussianBeam::new(5.0, w, lambda).with_orientation(Vector3::y(), Vector3::z()),
        ];
        let cfg = TrapConfig::new(rb(), beams);
        let trap = characterize(&cfg).unwrap();
        let ws = wings(&cfg, &trap).unwrap();
        assert_eq!(ws.len(), 2);
        let total: f64 = ws.iter().map(|w| w.volume_ratio).sum();
        let expected = 4.0 * PI * w / lambda;
        // Harmonic crossing frequencies carry O(w²/z_R²) corrections.
        assert!((total / expected - 1.0).abs() < 1e-3, "{total} vs {expected}");
        for wing in ws {
            assert!((wing.offset / trap.single_beam_depth_u0 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn vertical_beam_holds_no_wing_under_gravity() {
        let beams = vec![
            GaussianBeam::new(2.0, 25e-6, 1064e-9),
            GaussianBeam::new(1.0, 80e-6, 1064e-9)
                .with_waists(80e-6, 20e-6)
                .with_orientation(Vector3::z(), Vector3::x()),
        ];
        let flat = TrapConfig::new(rb(), beams);
        let trap = characterize(&flat).unwrap();
        assert_eq!(wings(&flat, &trap).unwrap().len(), 2);
        let tilted = flat.with_gravity(true);
        let trap = characterize(&tilted).unwrap();
        let ws = wings(&tilted, &trap).unwrap();
        assert_eq!(ws.iter().map(|w| w.beam).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn single_beam_has_no_wings() {
        let cfg = TrapConfig::new(rb(), vec![GaussianBeam::new(5.0, 25e-6, 1064e-9)]);
        let trap = characterize(&cfg).unwrap();
        assert_eq!(harmonic_wing_ratio(&cfg, &trap, 1e-4).unwrap(), 0.0);
    }
}

//! CODATA 2018 values, SI units.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// ζ(3)^(-1/3), prefactor of the ideal-gas harmonic-trap critical temperature.
pub const TC_PREFACTOR: f64 = 0.940_536_669_4;
/// ζ(3/2), peak phase-space density at the onset of condensation.
pub const BEC_PSD_THRESHOLD: f64 = 2.612_375_348_685_488;

//! Optical dipole traps built from focused Gaussian beams, the truncated
//! Boltzmann thermodynamics of atoms held in them, and a kinetic model of
//! all-optical evaporation down to Bose-Einstein condensation.

// `!(x > 0.0)` is the house idiom for rejecting NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Indexed loops over matrix columns read closer to the maths.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod evap;
pub mod par;
pub mod thermo;
pub mod trapcore;

pub use trapcore::{AtomSpecies, GaussianBeam, TrapCharacterization, TrapConfig, TrapError};

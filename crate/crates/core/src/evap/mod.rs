//! Power ramps, trap time series and the evaporation trajectory model.

pub mod diagnostics;
pub mod model;
pub mod ode;
pub mod schedule;

pub use diagnostics::{critical_temperature, detect_stagnation, summarize, EvapSummary, StagnationReport};
pub use model::{
    default_initial_state, evolve, trajectory_csv, trap_timeseries, write_trajectory_csv, EvapModelParams,
    EvaporationModel, TrajectoryPoint, TrapSample,
};
pub use schedule::{BeamSchedule, Interpolation, PowerSchedule, Segment};

use crate::thermo::ThermoError;
use crate::trapcore::TrapError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvapError {
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Trap(#[from] TrapError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    /// The cloud was lost; `trajectory` holds every point recorded before it.
    #[error("state collapse at t = {t} s: {reason}")]
    StateCollapse { t: f64, reason: String, trajectory: Vec<TrajectoryPoint> },
    #[error("integrator failure: {0}")]
    StiffnessFailure(#[from] ode::OdeError),
}

impl EvapError {
    /// Last valid trajectory point carried by a collapse.
    pub fn last_point(&self) -> Option<&TrajectoryPoint> {
        match self {
            EvapError::StateCollapse { trajectory, .. } => trajectory.last(),
            _ => None,
        }
    }
}

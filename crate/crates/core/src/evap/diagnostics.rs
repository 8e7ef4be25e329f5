//! Condensation threshold and stagnation diagnostics on trajectories.

use super::model::TrajectoryPoint;
use super::EvapError;
use crate::trapcore::constants::{BEC_PSD_THRESHOLD, BOLTZMANN, HBAR, TC_PREFACTOR};

/// Ideal-gas harmonic-trap critical temperature ζ(3)^(−1/3) ħω̄N^(1/3)/k_B.
pub fn critical_temperature(atom_number: f64, mean_frequency: f64) -> f64 {
    TC_PREFACTOR * HBAR * mean_frequency * atom_number.cbrt() / BOLTZMANN
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagnationReport {
    /// Time of the first point where PSD stops rising while N still falls.
    pub onset_time: Option<f64>,
    pub onset_psd: Option<f64>,
    pub peak_psd: f64,
    pub peak_time: f64,
    /// Elastic collision rate at the PSD peak, s⁻¹.
    pub peak_collision_rate: f64,
}

impl StagnationReport {
    pub fn stagnated(&self) -> bool {
        self.onset_time.is_some()
    }
}

pub const MIN_POINTS: usize = 10;

/// Flag the first step where PSD fails to grow (ΔPSD ≤ 0) while N decreases.
/// The onset is the start of that step.
pub fn detect_stagnation(trajectory: &[TrajectoryPoint]) -> Result<StagnationReport, EvapError> {
    if trajectory.len() < MIN_POINTS {
        return Err(EvapError::InvalidInput(format!(
            "stagnation needs at least {MIN_POINTS} points, got {}",
            trajectory.len()
        )));
    }
    let onset = trajectory
        .windows(2)
        .find(|w| w[1].psd - w[0].psd <= 0.0 && w[1].atom_number < w[0].atom_number)
        .map(|w| &w[0]);
    let peak = trajectory.iter().fold(&trajectory[0], |best, p| if p.psd > best.psd { p } else { best });
    Ok(StagnationReport {
        onset_time: onset.map(|p| p.t),
        onset_psd: onset.map(|p| p.psd),
        peak_psd: peak.psd,
        peak_time: peak.t,
        peak_collision_rate: peak.collision_rate,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvapSummary {
    pub stagnation: StagnationReport,
    /// First point with PSD ≥ 2.612.
    pub psd_crossing: Option<TrajectoryPoint>,
    /// First point with T ≤ T_c.
    pub tc_crossing: Option<TrajectoryPoint>,
    pub final_point: TrajectoryPoint,
}

pub fn summarize(trajectory: &[TrajectoryPoint]) -> Result<EvapSummary, EvapError> {
    let stagnation = detect_stagnation(trajectory)?;
    Ok(EvapSummary {
        stagnation,
        psd_crossing: trajectory.iter().find(|p| p.psd >= BEC_PSD_THRESHOLD).cloned(),
        tc_crossing: trajectory.iter().find(|p| p.degenerate).cloned(),
        final_point: trajectory[trajectory.len() - 1].clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(t: f64, n: f64, psd: f64) -> TrajectoryPoint {
        TrajectoryPoint {
            t,
            atom_number: n,
            temperature: 1e-6,
            eta: 10.0,
            depth: 1e-28,
            mean_frequency: 1e3,
            n0: 1e19,
            psd,
            wing_fraction: 0.0,
            collision_rate: 100.0 + t,
            critical_temperature: 1e-7,
            degenerate: false,
        }
    }

    #[test]
    fn critical_temperature_examples() {
        let w = 2.0 * std::f64::consts::PI * 100.0;
        let tc = critical_temperature(2e5, w);
        assert!((tc / 264e-9 - 1.0).abs() < 0.01, "{tc}");
        assert!((critical_temperature(1.0, w) - TC_PREFACTOR * HBAR * w / BOLTZMANN).abs() < 1e-20);
        assert!((critical_temperature(8e5, w) / critical_temperature(1e5, w) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn monotone_psd_is_not_flagged() {
        let traj: Vec<_> = (0..20).map(|i| point(i as f64, 1e6 - i as f64, 1e-5 * (1.0 + i as f64))).collect();
        let r = detect_stagnation(&traj).unwrap();
        assert!(!r.stagnated());
        assert_eq!(r.peak_time, 19.0);
    }

    #[test]
    fn plateau_onset_is_flagged() {
        let traj: Vec<_> = (0..20)
            .map(|i| {
                let psd = if i < 12 { 1e-4 * (i + 1) as f64 } else { 1.2e-3 };
                point(i as f64 * 0.1, 1e6 * (1.0 - 0.01 * i as f64), psd)
            })
            .collect();
        let r = detect_stagnation(&traj).unwrap();
        assert!((r.onset_time.unwrap() - 1.1).abs() < 1e-12);
        assert!((r.peak_psd - 1.2e-3).abs() < 1e-15);
        assert!((r.peak_collision_rate - 101.1).abs() < 1e-12);
    }

    #[test]
    fn flat_psd_with_constant_n_is_not_stagnation() {
        let traj: Vec<_> = (0..12).map(|i| point(i as f64, 1e6, 1e-5)).collect();
        assert!(!detect_stagnation(&traj).unwrap().stagnated());
        assert!(detect_stagnation(&traj[..5]).is_err());
    }
}

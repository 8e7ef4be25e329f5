//! Kinetic evaporation model in a harmonic truncated-Boltzmann picture.
//!
//! State is (ln N, ln T). Per unit time:
//!   d ln N = −(Γ_ev + 1/τ + Γ₃)
//!   d ln T = −Γ_ev (η + κ − 3)/3 + Γ₃/4 + clip(d ln ω̄)
//! with Γ_ev = Γ_el (η − 4) e^(−η), κ = (η − 5)/(η − 4), Γ₃ = K₃ n₀²/√27, and
//! the adiabatic term bounded by min(Γ_el, ω_min). η is the instantaneous
//! depth over k_B T.

use std::fmt::Write as _;
use std::path::Path;

use super::ode::{integrate, OdeError, Tolerances};
use super::schedule::PowerSchedule;
use super::EvapError;
use crate::par::{map_indexed, Execution};
use crate::thermo::{collision_rate, harmonic_peak_density, psd, wings, TruncatedThermalState, Wing};
use crate::trapcore::constants::BOLTZMANN;
use crate::trapcore::{characterize, AtomSpecies, TrapConfig};

use super::diagnostics::critical_temperature;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaporationModel {
    TruncatedBoltzmannHarmonic,
    /// No evaporative loss or cooling; other channels still act.
    Disabled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvapModelParams {
    /// One-body lifetime, s; infinite disables background loss.
    pub background_lifetime: f64,
    /// cm⁶/s
    pub three_body_k3: f64,
    pub evaporation_model: EvaporationModel,
    /// Bound on the per-step error in ln N and ln T is `ode_abs_tol + ode_rel_tol`.
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    /// Spacing of the trap characterization table, s.
    pub trap_grid_spacing: f64,
    /// Spacing of returned trajectory points, s.
    pub output_interval: f64,
    pub execution: Execution,
}

impl EvapModelParams {
    pub fn for_species(species: &AtomSpecies) -> Self {
        Self { three_body_k3: species.three_body_k3, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), EvapError> {
        let bad = |m: &str| Err(EvapError::InvalidInput(m.into()));
        if !(self.background_lifetime > 0.0) {
            return bad("background_lifetime must be positive");
        }
        if !(self.three_body_k3 >= 0.0 && self.three_body_k3.is_finite()) {
            return bad("three_body_k3 must be non-negative");
        }
        if !(self.ode_rel_tol > 0.0 && self.ode_abs_tol > 0.0) {
            return bad("ODE tolerances must be positive");
        }
        if !(self.trap_grid_spacing > 0.0 && self.output_interval > 0.0) {
            return bad("grid spacings must be positive");
        }
        Ok(())
    }
}

impl Default for EvapModelParams {
    fn default() -> Self {
        Self {
            background_lifetime: 6.0,
            three_body_k3: 4.3e-29,
            evaporation_model: EvaporationModel::TruncatedBoltzmannHarmonic,
            ode_rel_tol: 1e-6,
            ode_abs_tol: 1e-9,
            trap_grid_spacing: 5e-3,
            output_interval: 1e-2,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    /// s
    pub t: f64,
    pub atom_number: f64,
    /// K
    pub temperature: f64,
    /// depth / k_B T
    pub eta: f64,
    /// J
    pub depth: f64,
    /// rad/s
    pub mean_frequency: f64,
    /// m⁻³
    pub n0: f64,
    pub psd: f64,
    pub wing_fraction: f64,
    /// s⁻¹
    pub collision_rate: f64,
    /// K
    pub critical_temperature: f64,
    /// T ≤ T_c
    pub degenerate: bool,
}

pub const TRAJECTORY_HEADER: &str = "t,N,T_K,eta,depth_J,mean_freq_rad_s,n0_m3,psd,wing_fraction";

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            p.t, p.atom_number, p.temperature, p.eta, p.depth, p.mean_frequency, p.n0, p.psd, p.wing_fraction
        );
    }
    out
}

pub fn write_trajectory_csv(points: &[TrajectoryPoint], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, trajectory_csv(points))
}

/// Trap at one instant of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapSample {
    pub t: f64,
    pub powers: Vec<f64>,
    /// Combined depth, J.
    pub depth: f64,
    /// Focal depth of the second beam alone, J (zero for a single beam).
    pub auxiliary_depth: f64,
    /// rad/s
    pub mean_frequency: f64,
    /// Lowest trap frequency, rad/s.
    pub min_frequency: f64,
    /// Per beam: (ω̄_crossing/ω̄_beam)³ and wing floor (J); zero volume when
    /// the beam has no wing.
    pub wing_volume: Vec<f64>,
    pub wing_offset: Vec<f64>,
}

/// Characterize the trap at each time of `t_grid` under `schedule`.
pub fn trap_timeseries(
    config: &TrapConfig,
    schedule: &PowerSchedule,
    t_grid: &[f64],
    exec: Execution,
) -> Result<Vec<TrapSample>, EvapError> {
    schedule.validate(config.beams.len())?;
    config.validate()?;
    let (t0, t1) = (schedule.start(), schedule.end());
    if let Some(&t) = t_grid.iter().find(|&&t| !(t >= t0 - 1e-12 && t <= t1 + 1e-12)) {
        return Err(EvapError::Schedule(format!("time {t} outside the schedule [{t0}, {t1}]")));
    }
    let n_beams = config.beams.len();
    map_indexed(t_grid.len(), exec, |i| {
        let t = t_grid[i];
        let powers = schedule.powers_at(t);
        let cfg = config.with_powers(&powers);
        let trap = characterize(&cfg)?;
        let depths = cfg.beam_depths()?;
        let mut wing_volume = vec![0.0; n_beams];
        let mut wing_offset = vec![0.0; n_beams];
        for w in wings(&cfg, &trap)? {
            wing_volume[w.beam] = w.volume_ratio;
            wing_offset[w.beam] = w.offset;
        }
        Ok(TrapSample {
            t,
            powers,
            depth: trap.depth,
            auxiliary_depth: depths.get(1).copied().unwrap_or(0.0),
            mean_frequency: trap.mean_frequency,
            min_frequency: trap.frequencies.iter().copied().fold(f64::INFINITY, f64::min),
            wing_volume,
            wing_offset,
        })
    })
    .into_iter()
    .collect()
}

/// Interpolated trap quantities at one instant.
#[derive(Debug, Clone)]
struct TrapState {
    depth: f64,
    mean_frequency: f64,
    min_frequency: f64,
    /// d ln ω̄ / dt on the current table interval.
    log_frequency_rate: f64,
    wings: Vec<Wing>,
}

/// Trap table, log-linear between nodes for the positive scales.
struct TrapTable {
    nodes: Vec<TrapSample>,
}

impl TrapTable {
    fn interval(&self, t: f64) -> usize {
        let n = self.nodes.len();
        self.nodes.partition_point(|s| s.t <= t).clamp(1, n - 1) - 1
    }

    fn at(&self, t: f64, i: usize) -> TrapState {
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let f = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let log_lerp = |x: f64, y: f64| x * (y / x).powf(f);
        let lerp = |x: f64, y: f64| x + (y - x) * f;
        let wings = (0..a.wing_volume.len())
            .filter(|&k| a.wing_volume[k] > 0.0 || b.wing_volume[k] > 0.0)
            .map(|k| {
                let offset = match (a.wing_volume[k] > 0.0, b.wing_volume[k] > 0.0) {
                    (true, true) => lerp(a.wing_offset[k], b.wing_offset[k]),
                    (true, false) => a.wing_offset[k],
                    _ => b.wing_offset[k],
                };
                Wing { beam: k, volume_ratio: lerp(a.wing_volume[k], b.wing_volume[k]), offset }
            })
            .collect();
        TrapState {
            depth: log_lerp(a.depth, b.depth),
            mean_frequency: log_lerp(a.mean_frequency, b.mean_frequency),
            min_frequency: log_lerp(a.min_frequency, b.min_frequency),
            log_frequency_rate: (b.mean_frequency / a.mean_frequency).ln() / (b.t - a.t),
            wings,
        }
    }
}

/// Rates and derived quantities at one (t, N, T).
struct Kinetics {
    eta: f64,
    n0: f64,
    wing_fraction: f64,
    collision_rate: f64,
    d_ln_n: f64,
    d_ln_t: f64,
}

fn kinetics(trap: &TrapState, n: f64, temperature: f64, species: &AtomSpecies, params: &EvapModelParams) -> Kinetics {
    let eta = trap.depth / (BOLTZMANN * temperature);
    let x: f64 = trap.wings.iter().map(|w| w.relative_population(temperature)).sum();
    let n0 = harmonic_peak_density(n, temperature, trap.mean_frequency, species.mass, x);
    let gel = collision_rate(n0, temperature, species);
    let (gamma_ev, cooling) = match params.evaporation_model {
        EvaporationModel::TruncatedBoltzmannHarmonic if eta > 4.0 => {
            let g = gel * (-eta).exp();
            // Γ_ev (η + κ − 3) with the (η − 4) pole cancelled; kept non-negative
            // where the harmonic closed forms stop applying.
            let c = g * ((eta - 4.0) * (eta - 3.0) + (eta - 5.0));
            (g * (eta - 4.0), c.max(0.0))
        }
        _ => (0.0, 0.0),
    };
    let gamma_3 = params.three_body_k3 * 1e-12 * n0 * n0 / 27f64.sqrt();
    let limit = gel.min(trap.min_frequency);
    let adiabatic = trap.log_frequency_rate.clamp(-limit, limit);
    Kinetics {
        eta,
        n0,
        wing_fraction: x / (1.0 + x),
        collision_rate: gel,
        d_ln_n: -(gamma_ev + 1.0 / params.background_lifetime + gamma_3),
        d_ln_t: -cooling / 3.0 + gamma_3 / 4.0 + adiabatic,
    }
}

/// Evolve N and T from `initial` (its atom number and temperature) under
/// `schedule`. Returns points every `output_interval` plus the end time.
pub fn evolve(
    initial: &TruncatedThermalState,
    config: &TrapConfig,
    schedule: &PowerSchedule,
    params: &EvapModelParams,
) -> Result<Vec<TrajectoryPoint>, EvapError> {
    params.validate()?;
    if !(initial.atom_number >= 1.0 && initial.temperature > 0.0) {
        return Err(EvapError::InvalidInput("initial state needs N >= 1 and T > 0".into()));
    }
    let nodes = trap_timeseries(config, schedule, &schedule.grid(params.trap_grid_spacing), params.execution)?;
    let table = TrapTable { nodes };
    let species = &config.species;
    let (t0, t1) = (schedule.start(), schedule.end());

    let n_out = ((t1 - t0) / params.output_interval).floor() as usize;
    let mut outputs: Vec<f64> = (0..=n_out).map(|i| t0 + i as f64 * params.output_interval).collect();
    if t1 - outputs[n_out] > 1e-9 * params.output_interval {
        outputs.push(t1);
    }
    let mut stops: Vec<(f64, bool)> = outputs.iter().map(|&t| (t, true)).collect();
    stops.extend(table.nodes.iter().map(|s| (s.t, false)));
    stops.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    stops.dedup_by(|later, earlier| {
        let same = (later.0 - earlier.0).abs() <= 1e-12;
        if same {
            earlier.1 |= later.1;
        }
        same
    });

    let point = |t: f64, y: [f64; 2], i: usize| {
        let (n, temperature) = (y[0].exp(), y[1].exp());
        let trap = table.at(t, i);
        let k = kinetics(&trap, n, temperature, species, params);
        let tc = critical_temperature(n, trap.mean_frequency);
        TrajectoryPoint {
            t,
            atom_number: n,
            temperature,
            eta: k.eta,
            depth: trap.depth,
            mean_frequency: trap.mean_frequency,
            n0: k.n0,
            psd: psd(k.n0, temperature, species),
            wing_fraction: k.wing_fraction,
            collision_rate: k.collision_rate,
            critical_temperature: tc,
            degenerate: temperature <= tc,
        }
    };

    let tol = Tolerances { rel: 0.0, abs: params.ode_abs_tol + params.ode_rel_tol };
    let mut y = [initial.atom_number.ln(), initial.temperature.ln()];
    let mut h = 0.0;
    let mut trajectory = vec![point(t0, y, table.interval(t0))];
    for pair in stops.windows(2) {
        let (ta, tb) = (pair[0].0, pair[1].0);
        let i = table.interval(0.5 * (ta + tb));
        let rhs = |t: f64, y: &[f64; 2]| {
            let k = kinetics(&table.at(t, i), y[0].exp(), y[1].exp(), species, params);
            [k.d_ln_n, k.d_ln_t]
        };
        y = integrate(rhs, ta, y, tb, &mut h, tol).map_err(|e| match e {
            OdeError::NonFinite { t } => {
                EvapError::StateCollapse { t, reason: "non-finite rates".into(), trajectory: trajectory.clone() }
            }
            other => EvapError::StiffnessFailure(other),
        })?;
        let (n, temperature) = (y[0].exp(), y[1].exp());
        if !(n >= 1.0) || !(temperature > 0.0 && temperature.is_finite()) {
            return Err(EvapError::StateCollapse {
                t: tb,
                reason: format!("N = {n:e}, T = {temperature:e} K"),
                trajectory,
            });
        }
        if pair[1].1 {
            trajectory.push(point(tb, y, i));
        }
    }
    Ok(trajectory)
}

/// Default starting cloud: N atoms at a tenth of the initial depth.
pub fn default_initial_state(
    config: &TrapConfig,
    schedule: &PowerSchedule,
    atom_number: f64,
) -> Result<TruncatedThermalState, EvapError> {
    schedule.validate(config.beams.len())?;
    let cfg = config.with_powers(&schedule.powers_at(schedule.start()));
    let trap = characterize(&cfg)?;
    let temperature = trap.depth / (10.0 * BOLTZMANN);
    let beta = trap.beta.min(crate::thermo::MAX_BETA);
    Ok(TruncatedThermalState::new(atom_number, temperature, beta, trap)?)
}

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::beam::{BeamProfile, GaussianBeam};
use super::constants::{SPEED_OF_LIGHT, STANDARD_GRAVITY};
use super::species::AtomSpecies;
use super::TrapError;

/// Dipole coefficient κ (J per W/m²) so that a beam of intensity I produces a
/// potential well of depth κ·I.
///
/// Far-detuned two-line formula with counter-rotating terms, D1 and D2 weighted
/// 1/3 and 2/3 (scalar light shift of an alkali ground state).
pub fn dipole_coefficient(species: &AtomSpecies, wavelength: f64) -> Result<f64, TrapError> {
    if !(wavelength > species.reddest_line()) {
        return Err(TrapError::BlueDetuned { wavelength });
    }
    let omega = 2.0 * PI * SPEED_OF_LIGHT / wavelength;
    let lines = [
        (species.d1_wavelength, species.d1_linewidth, 1.0 / 3.0),
        (species.d2_wavelength, species.d2_linewidth, 2.0 / 3.0),
    ];
    let kappa = lines
        .iter()
        .map(|&(line, gamma, weight)| {
            let omega0 = 2.0 * PI * SPEED_OF_LIGHT / line;
            let strength = 3.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT / (2.0 * omega0.powi(3)) * gamma;
            weight * strength * (1.0 / (omega0 - omega) + 1.0 / (omega0 + omega))
        })
        .sum();
    Ok(kappa)
}

/// Atom species, beams, and gravity: everything that shapes the potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub species: AtomSpecies,
    /// The first beam is the primary beam; its depth sets the energy scale U₀.
    pub beams: Vec<GaussianBeam>,
    pub gravity_enabled: bool,
    /// m/s², acting along −z.
    pub gravity_acceleration: f64,
}

impl TrapConfig {
    pub fn new(species: AtomSpecies, beams: Vec<GaussianBeam>) -> Self {
        Self { species, beams, gravity_enabled: false, gravity_acceleration: STANDARD_GRAVITY }
    }

    pub fn with_gravity(mut self, enabled: bool) -> Self {
        self.gravity_enabled = enabled;
        self
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        self.species.validate()?;
        if self.beams.is_empty() {
            return Err(TrapError::InvalidBeam("trap needs at least one beam".into()));
        }
        for beam in &self.beams {
            beam.validate()?;
            dipole_coefficient(&self.species, beam.wavelength)?;
        }
        if !(self.gravity_acceleration.is_finite() && self.gravity_acceleration >= 0.0) {
            return Err(TrapError::InvalidBeam("gravity_acceleration must be non-negative".into()));
        }
        Ok(())
    }

    /// Copy of this trap with beam powers replaced.
    pub fn with_powers(&self, powers: &[f64]) -> Self {
        let mut out = self.clone();
        for (beam, &p) in out.beams.iter_mut().zip(powers) {
            beam.power = p;
        }
        out
    }

    pub fn potential(&self) -> Result<TrapPotential, TrapError> {
        self.validate()?;
        TrapPotential::new(self)
    }

    /// Potential energy (J) at `r`, zero at infinity with gravity off.
    pub fn potential_at(&self, r: &Vector3<f64>) -> Result<f64, TrapError> {
        Ok(self.potential()?.energy(r))
    }

    /// Focal depth κ·I₀ of each beam, J.
    pub fn beam_depths(&self) -> Result<Vec<f64>, TrapError> {
        self.beams.iter().map(|b| Ok(dipole_coefficient(&self.species, b.wavelength)? * b.peak_intensity())).collect()
    }
}

#[derive(Debug, Clone)]
struct BeamTerm {
    depth: f64,
    profile: BeamProfile,
}

/// Prepared, evaluation-ready form of a [`TrapConfig`].
#[derive(Debug, Clone)]
pub struct TrapPotential {
    terms: Vec<BeamTerm>,
    /// m·g when gravity is on.
    weight: Option<f64>,
}

impl TrapPotential {
    fn new(config: &TrapConfig) -> Result<Self, TrapError> {
        let depths = config.beam_depths()?;
        let terms =
            config.beams.iter().zip(depths).map(|(beam, depth)| BeamTerm { depth, profile: beam.profile() }).collect();
        let weight = config.gravity_enabled.then_some(config.species.mass * config.gravity_acceleration);
        Ok(Self { terms, weight })
    }

    #[inline]
    pub fn energy(&self, r: &Vector3<f64>) -> f64 {
        let optical: f64 = self.terms.iter().map(|t| -t.depth * t.profile.relative(r)).sum();
        optical + self.weight.map_or(0.0, |w| w * r.z)
    }

    pub fn gradient(&self, r: &Vector3<f64>) -> Vector3<f64> {
        let mut g: Vector3<f64> = self.terms.iter().map(|t| -t.depth * t.profile.relative_gradient(r)).sum();
        if let Some(w) = self.weight {
            g.z += w;
        }
        g
    }

    pub fn has_gravity(&self) -> bool {
        self.weight.is_some()
    }

    /// Energy contributed by beam `index` alone at `r`.
    pub fn beam_energy(&self, index: usize, r: &Vector3<f64>) -> f64 {
        let t = &self.terms[index];
        -t.depth * t.profile.relative(r)
    }

    pub fn beam_depth(&self, index: usize) -> f64 {
        self.terms[index].depth
    }

    /// Central-difference Hessian with step `h`.
    pub fn hessian(&self, r: &Vector3<f64>, h: f64) -> Matrix3<f64> {
        let e = |k: usize| {
            let mut v = Vector3::zeros();
            v[k] = h;
            v
        };
        let u0 = self.energy(r);
        let mut m = Matrix3::zeros();
        for i in 0..3 {
            let ei = e(i);
            m[(i, i)] = (self.energy(&(r + ei)) - 2.0 * u0 + self.energy(&(r - ei))) / (h * h);
            for j in (i + 1)..3 {
                let ej = e(j);
                let v = (self.energy(&(r + ei + ej)) - self.energy(&(r + ei - ej)) - self.energy(&(r - ei + ej))
                    + self.energy(&(r - ei - ej)))
                    / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

/// Minimum, depth, and harmonic frequencies of a trap.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapCharacterization {
    /// m
    pub minimum_position: Vector3<f64>,
    /// Potential energy at the minimum, J (not re-referenced).
    pub minimum_energy: f64,
    /// Lowest escape barrier above the minimum, J.
    pub depth: f64,
    /// Harmonic frequencies (rad/s), each assigned to the lab axis its
    /// principal direction is most aligned with.
    pub frequencies: [f64; 3],
    /// Columns are the principal directions matching `frequencies`.
    pub principal_axes: Matrix3<f64>,
    /// Geometric mean (ωx ωy ωz)^(1/3), rad/s.
    pub mean_frequency: f64,
    /// Focal depth of the primary beam alone, U₀, J.
    pub single_beam_depth_u0: f64,
    /// depth / U₀; infinite when the primary beam is off.
    pub beta: f64,
    /// Atom mass, kg.
    pub mass: f64,
}

impl TrapCharacterization {
    /// Harmonic spring constants m·ω² along the principal axes, J/m².
    pub fn spring_constants(&self) -> [f64; 3] {
        self.frequencies.map(|w| self.mass * w * w)
    }
}

const NEWTON_MAX_ITER: usize = 200;

/// Locate the minimum, escape barrier, and harmonic frequencies of `config`.
pub fn characterize(config: &TrapConfig) -> Result<TrapCharacterization, TrapError> {
    let potential = config.potential()?;
    let depths = config.beam_depths()?;
    let total_optical: f64 = depths.iter().sum();
    if total_optical <= 0.0 {
        return Err(TrapError::NoMinimum("all beams are off".into()));
    }
    let length = config.beams.iter().map(|b| b.min_waist()).fold(f64::INFINITY, f64::min);
    let reach = config.beams.iter().map(|b| b.rayleigh_range_x().max(b.rayleigh_range_y())).fold(0.0, f64::max);
    let step = 1e-3 * length;

    // Seed at the depth-weighted mean of the foci.
    let seed = config.beams.iter().zip(&depths).map(|(b, d)| b.focus * *d).sum::<Vector3<f64>>() / total_optical;

    let minimum = find_minimum(&potential, seed, step, length, 10.0 * reach)?;
    let minimum_energy = potential.energy(&minimum);

    let hessian = potential.hessian(&minimum, step);
    let eigen = SymmetricEigen::new(hessian);
    if eigen.eigenvalues.iter().any(|&k| !(k > 0.0)) {
        return Err(TrapError::DegenerateHessian { eigenvalues: eigen.eigenvalues.into() });
    }
    let (frequencies, principal_axes) = assign_to_lab_axes(&eigen, config.species.mass);
    let mean_frequency = (frequencies[0] * frequencies[1] * frequencies[2]).cbrt();

    let escape = if potential.has_gravity() {
        escape_energy_with_gravity(&potential, config, &minimum, minimum_energy)
    } else {
        // Every beam contribution is negative and vanishes away from the beam
        // axes, so the escape level is exactly the value at infinity.
        0.0
    };
    let depth = escape - minimum_energy;
    if !(depth > 0.0) {
        return Err(TrapError::NoMinimum(format!("no barrier above the minimum (depth {depth:e} J)")));
    }
    let u0 = depths[0];
    let beta = if u0 > 0.0 { depth / u0 } else { f64::INFINITY };
    Ok(TrapCharacterization {
        minimum_position: minimum,
        minimum_energy,
        depth,
        frequencies,
        principal_axes,
        mean_frequency,
        single_beam_depth_u0: u0,
        beta,
        mass: config.species.mass,
    })
}

fn find_minimum(
    potential: &TrapPotential,
    seed: Vector3<f64>,
    step: f64,
    length: f64,
    max_excursion: f64,
) -> Result<Vector3<f64>, TrapError> {
    let mut x = seed;
    let mut energy = potential.energy(&x);
    for _ in 0..NEWTON_MAX_ITER {
        let g = potential.gradient(&x);
        let h = potential.hessian(&x, step);
        let newton = h.cholesky().map(|c| -c.solve(&g));
        let direction = match newton {
            Some(d) if d.norm() < 10.0 * length => d,
            // Not convex here: steepest descent over a fraction of a waist.
            _ => {
                let gn = g.norm();
                if gn == 0.0 {
                    return Err(TrapError::NoMinimum("flat potential at the seed".into()));
                }
                -g * (0.1 * length / gn)
            }
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = x + direction * t;
            let e = potential.energy(&trial);
            if e <= energy {
                accepted = Some((trial, e));
                break;
            }
            t *= 0.5;
        }
        let Some((next, e)) = accepted else {
            // No descent possible along the step: stationary to round-off.
            break;
        };
        let moved = (next - x).norm();
        x = next;
        energy = e;
        if (x - seed).norm() > max_excursion {
            return Err(TrapError::NoMinimum("minimum search left the trap region".into()));
        }
        if moved < 1e-10 * length {
            break;
        }
    }
    let g = potential.gradient(&x);
    let curvature_scale = potential.hessian(&x, step).norm();
    if g.norm() > 1e-6 * curvature_scale * length {
        return Err(TrapError::NoMinimum("minimum search did not converge".into()));
    }
    Ok(x)
}

fn assign_to_lab_axes(eigen: &SymmetricEigen<f64, nalgebra::U3>, mass: f64) -> ([f64; 3], Matrix3<f64>) {
    let mut order = [usize::MAX; 3];
    let mut taken = [false; 3];
    // Greedy: strongest alignment first.
    let mut pairs: Vec<(f64, usize, usize)> = (0..3)
        .flat_map(|e| (0..3).map(move |lab| (e, lab)))
        .map(|(e, lab)| (eigen.eigenvectors[(lab, e)].abs(), e, lab))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    for (_, e, lab) in pairs {
        if order[lab] == usize::MAX && !taken[e] {
            order[lab] = e;
            taken[e] = true;
        }
    }
    let freqs = order.map(|e| (eigen.eigenvalues[e] / mass).sqrt());
    let axes = Matrix3::from_columns(&order.map(|e| eigen.eigenvectors.column(e).into_owned()));
    (freqs, axes)
}

/// Escape level under gravity: the cheapest of (a) falling straight down from
/// the minimum and (b) moving out along a horizontal direction, then dropping.
fn escape_energy_with_gravity(
    potential: &TrapPotential,
    config: &TrapConfig,
    minimum: &Vector3<f64>,
    minimum_energy: f64,
) -> f64 {
    let waist_max = config.beams.iter().map(|b| b.waist_x.max(b.waist_y)).fold(0.0, f64::max);
    let waist_min = config.beams.iter().map(|b| b.min_waist()).fold(f64::INFINITY, f64::min);
    let reach = config.beams.iter().map(|b| b.rayleigh_range_x().max(b.rayleigh_range_y())).fold(0.0, f64::max);

    let mut directions: Vec<Vector3<f64>> = vec![Vector3::x(), Vector3::y()];
    for b in &config.beams {
        directions.extend([b.axis, b.transverse_x, b.transverse_y()]);
    }
    let horizontal: Vec<Vector3<f64>> = directions
        .into_iter()
        .filter_map(|d| {
            let h = Vector3::new(d.x, d.y, 0.0);
            (h.norm() > 0.1).then(|| h.normalize())
        })
        .flat_map(|h| [h, -h])
        .collect();

    let s_grid = geometric_grid(1e-3 * waist_min, 30.0 * reach.max(waist_max), 160);
    let drop_reach = 20.0 * waist_max;

    let mut best = drop_barrier(potential, minimum, drop_reach, waist_min);
    for d in horizontal {
        let mut running_max = minimum_energy;
        for &s in &s_grid {
            let p = minimum + d * s;
            running_max = running_max.max(potential.energy(&p));
            if running_max >= best {
                break;
            }
            // The beam widens with distance, so the fall has to reach further out.
            let candidate = running_max.max(drop_barrier(potential, &p, drop_reach + s, waist_min));
            best = best.min(candidate);
        }
    }
    best
}

/// Highest energy met while falling from `start` straight down.
fn drop_barrier(potential: &TrapPotential, start: &Vector3<f64>, reach: f64, resolution: f64) -> f64 {
    let grid = geometric_grid(1e-3 * resolution, reach, 96);
    let at = |t: f64| potential.energy(&(start - Vector3::z() * t));
    let mut best_t = 0.0;
    let mut best = at(0.0);
    for &t in &grid {
        let e = at(t);
        if e > best {
            best = e;
            best_t = t;
        }
    }
    // Golden-section refinement around the coarse maximum.
    let idx = grid.iter().position(|&t| t == best_t);
    let (mut a, mut b) = match idx {
        Some(i) => (if i == 0 { 0.0 } else { grid[i - 1] }, *grid.get(i + 1).unwrap_or(&reach)),
        None => (0.0, grid[0]),
    };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if at(c) > at(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(at(0.5 * (a + b)))
}

fn geometric_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    let ratio = (end / start).powf(1.0 / (n - 1) as f64);
    (0..n).map(|i| start * ratio.powi(i as i32)).collect()
}

/// Radial and axial trap frequencies of a circular single beam of depth `depth`.
pub fn single_beam_frequencies(depth: f64, mass: f64, waist: f64, wavelength: f64) -> (f64, f64) {
    let zr = PI * waist * waist / wavelength;
    let radial = (4.0 * depth / (mass * waist * waist)).sqrt();
    let axial = (2.0 * depth / (mass * zr * zr)).sqrt();
    (radial, axial)
}

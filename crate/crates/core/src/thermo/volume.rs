//! Monte Carlo equipotential volumes V(u) = vol{r : U(r) − U_min < u·U₀}.
//!
//! Samples are stratified over nested boxes around the minimum followed by
//! coarser covering regions. A sample drawn in stratum k is counted only if no
//! earlier stratum contains it, so the strata partition their union and each
//! one contributes `volume_k · hits_k / samples_k` without overlap.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ThermoError, MAX_BETA};
use crate::par::{map_indexed, Execution};
use crate::trapcore::{characterize, GaussianBeam, TrapCharacterization, TrapConfig, TrapPotential};

pub const BINS: usize = 400;
const CHUNK: u64 = 1 << 16;
/// Reduced energies of the nested core boxes, as fractions of β.
const CORE_LEVELS: [f64; 3] = [1.0 / 64.0, 1.0 / 16.0, 1.0 / 4.0];
const CORE_BOX_MARGIN: f64 = 1.5;
/// β must stay this far below the escape level.
const ESCAPE_MARGIN: f64 = 0.03;

/// A potential expressed in reduced energy u = (U − U_min)/U₀.
pub trait Landscape: Sync {
    fn reduced_energy(&self, r: &Vector3<f64>) -> f64;
    fn centre(&self) -> Vector3<f64>;
    /// Columns are the principal directions at the minimum.
    fn principal_axes(&self) -> Matrix3<f64>;
    /// ∂²u/∂s² along each principal direction, m⁻².
    fn curvatures(&self) -> [f64; 3];
    /// Escape level in units of U₀.
    fn escape_beta(&self) -> f64;
    /// Regions whose union contains every point with u < `beta`.
    fn covering_regions(&self, beta: f64) -> Vec<Region>;
}

/// Sampling region, uniform measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Box {
        centre: Vector3<f64>,
        axes: Matrix3<f64>,
        half: [f64; 3],
    },
    Cylinder {
        centre: Vector3<f64>,
        axis: Vector3<f64>,
        tx: Vector3<f64>,
        ty: Vector3<f64>,
        radius: f64,
        half_length: f64,
    },
}

impl Region {
    pub fn volume(&self) -> f64 {
        match self {
            Region::Box { half, .. } => 8.0 * half[0] * half[1] * half[2],
            Region::Cylinder { radius, half_length, .. } => PI * radius * radius * 2.0 * half_length,
        }
    }

    pub fn contains(&self, r: &Vector3<f64>) -> bool {
        match self {
            Region::Box { centre, axes, half } => {
                let d = r - centre;
                (0..3).all(|i| axes.column(i).dot(&d).abs() <= half[i])
            }
            Region::Cylinder { centre, axis, tx, ty, radius, half_length } => {
                let d = r - centre;
                let (x, y) = (d.dot(tx), d.dot(ty));
                d.dot(axis).abs() <= *half_length && x * x + y * y <= radius * radius
            }
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vector3<f64> {
        match self {
            Region::Box { centre, axes, half } => {
                let mut r = *centre;
                for i in 0..3 {
                    r += axes.column(i) * (half[i] * (2.0 * rng.gen::<f64>() - 1.0));
                }
                r
            }
            Region::Cylinder { centre, axis, tx, ty, radius, half_length } => {
                let rho = radius * rng.gen::<f64>().sqrt();
                let phi = 2.0 * PI * rng.gen::<f64>();
                let z = half_length * (2.0 * rng.gen::<f64>() - 1.0);
                centre + axis * z + tx * (rho * phi.cos()) + ty * (rho * phi.sin())
            }
        }
    }
}

/// Nested boxes along the principal axes, each 1.5× the harmonic ellipsoid at
/// its level, followed by the landscape's covering regions.
pub fn strata<L: Landscape + ?Sized>(landscape: &L, beta: f64) -> Vec<Region> {
    let centre = landscape.centre();
    let axes = landscape.principal_axes();
    let curv = landscape.curvatures();
    let mut regions: Vec<Region> = CORE_LEVELS
        .iter()
        .map(|&level| {
            let u = level * beta;
            let half = curv.map(|k| CORE_BOX_MARGIN * (2.0 * u / k).sqrt());
            Region::Box { centre, axes, half }
        })
        .collect();
    regions.extend(landscape.covering_regions(beta));
    regions
}

pub(crate) fn check_beta<L: Landscape + ?Sized>(landscape: &L, beta: f64) -> Result<(), ThermoError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(ThermoError::Domain(format!("beta must be positive, got {beta}")));
    }
    let limit = MAX_BETA.min(landscape.escape_beta() - ESCAPE_MARGIN);
    if beta > limit {
        return Err(ThermoError::BetaTooLarge { beta, limit });
    }
    Ok(())
}

/// Optical potential of a gravity-free [`TrapConfig`] in reduced units.
#[derive(Debug, Clone)]
pub struct BeamLandscape {
    potential: TrapPotential,
    beams: Vec<GaussianBeam>,
    depths: Vec<f64>,
    trap: TrapCharacterization,
    curvatures: [f64; 3],
}

impl BeamLandscape {
    pub fn new(config: &TrapConfig) -> Result<Self, ThermoError> {
        if config.gravity_enabled {
            return Err(ThermoError::Unsupported(
                "equipotential volumes need a bounded sub-level set; disable gravity".into(),
            ));
        }
        let trap = characterize(config)?;
        let u0 = trap.single_beam_depth_u0;
        if !(u0 > 0.0) {
            return Err(ThermoError::Domain("primary beam is off, U0 = 0".into()));
        }
        let curvatures = trap.spring_constants().map(|k| k / u0);
        Ok(Self {
            potential: config.potential()?,
            beams: config.beams.clone(),
            depths: config.beam_depths()?,
            trap,
            curvatures,
        })
    }

    pub fn characterization(&self) -> &TrapCharacterization {
        &self.trap
    }

    fn cylinder(&self, beam: &GaussianBeam, threshold: f64) -> Region {
        let zrx2 = beam.rayleigh_range_x().powi(2);
        let zry2 = beam.rayleigh_range_y().powi(2);
        let on_axis = |z: f64| 1.0 / ((1.0 + z * z / zrx2) * (1.0 + z * z / zry2)).sqrt();
        let mut hi = beam.rayleigh_range_x().max(beam.rayleigh_range_y());
        while on_axis(hi) > threshold {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if on_axis(mid) > threshold {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z_edge = hi;
        let n = 4000;
        let radius = (0..=n)
            .map(|i| {
                let z = z_edge * i as f64 / n as f64;
                let f = on_axis(z);
                if f <= threshold {
                    return 0.0;
                }
                let sx = 1.0 + z * z / zrx2;
                let sy = 1.0 + z * z / zry2;
                let w2 = (beam.waist_x.powi(2) * sx).max(beam.waist_y.powi(2) * sy);
                (w2 * (f / threshold).ln() / 2.0).sqrt()
            })
            .fold(0.0, f64::max);
        Region::Cylinder {
            centre: beam.focus,
            axis: beam.axis,
            tx: beam.transverse_x,
            ty: beam.transverse_y(),
            radius: 1.1 * radius,
            half_length: 1.02 * z_edge,
        }
    }
}

impl Landscape for BeamLandscape {
    #[inline]
    fn reduced_energy(&self, r: &Vector3<f64>) -> f64 {
        (self.potential.energy(r) - self.trap.minimum_energy) / self.trap.single_beam_depth_u0
    }

    fn centre(&self) -> Vector3<f64> {
        self.trap.minimum_position
    }

    fn principal_axes(&self) -> Matrix3<f64> {
        self.trap.principal_axes
    }

    fn curvatures(&self) -> [f64; 3] {
        self.curvatures
    }

    fn escape_beta(&self) -> f64 {
        self.trap.beta
    }

    /// With U(r) = −Σ U_b f_b(r), a point below U_min + βU₀ needs Σ U_b f_b > E
    /// for E = −(U_min + βU₀), so at least one beam has U_b f_b > E/n. Each
    /// beam's cylinder bounds its own set {U_b f_b > E/n}.
    fn covering_regions(&self, beta: f64) -> Vec<Region> {
        let u0 = self.trap.single_beam_depth_u0;
        let budget = -(self.trap.minimum_energy + beta * u0);
        let lit: Vec<usize> = (0..self.beams.len()).filter(|&i| self.depths[i] > 0.0).collect();
        let share = budget / lit.len() as f64;
        lit.into_iter()
            .filter(|&i| share < self.depths[i])
            .map(|i| self.cylinder(&self.beams[i], share / self.depths[i]))
            .collect()
    }
}

/// Isotropic harmonic well U = U₀ (r/R)² with V(u) = (4π/3) R³ u^(3/2).
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicLandscape {
    /// Radius where u = 1, m.
    pub radius: f64,
    /// U₀, J.
    pub depth: f64,
    /// kg
    pub mass: f64,
}

impl HarmonicLandscape {
    pub fn new(radius: f64, depth: f64, mass: f64) -> Result<Self, ThermoError> {
        if !(radius > 0.0 && depth > 0.0 && mass > 0.0) {
            return Err(ThermoError::Domain("harmonic radius, depth and mass must be positive".into()));
        }
        Ok(Self { radius, depth, mass })
    }

    pub fn exact_volume(&self, u: f64) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3) * u.max(0.0).powf(1.5)
    }

    /// Characterization with U₀ = `depth`; an unbounded well has infinite depth.
    pub fn characterization(&self) -> TrapCharacterization {
        let omega = (2.0 * self.depth / (self.mass * self.radius * self.radius)).sqrt();
        TrapCharacterization {
            minimum_position: Vector3::zeros(),
            minimum_energy: 0.0,
            depth: f64::INFINITY,
            frequencies: [omega; 3],
            principal_axes: Matrix3::identity(),
            mean_frequency: omega,
            single_beam_depth_u0: self.depth,
            beta: f64::INFINITY,
            mass: self.mass,
        }
    }
}

impl Landscape for HarmonicLandscape {
    #[inline]
    fn reduced_energy(&self, r: &Vector3<f64>) -> f64 {
        r.norm_squared() / (self.radius * self.radius)
    }

    fn centre(&self) -> Vector3<f64> {
        Vector3::zeros()
    }

    fn principal_axes(&self) -> Matrix3<f64> {
        Matrix3::identity()
    }

    fn curvatures(&self) -> [f64; 3] {
        [2.0 / (self.radius * self.radius); 3]
    }

    fn escape_beta(&self) -> f64 {
        f64::INFINITY
    }

    fn covering_regions(&self, beta: f64) -> Vec<Region> {
        let half = 1.0001 * self.radius * beta.sqrt();
        vec![Region::Box { centre: Vector3::zeros(), axes: Matrix3::identity(), half: [half; 3] }]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Stratum {
    pub volume: f64,
    pub samples: u64,
    /// Hits per u bin among samples not claimed by an earlier stratum.
    pub counts: Vec<u64>,
}

/// Tabulated V(u) on 400 uniform bins over [0, β].
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeTable {
    pub beta: f64,
    /// Bin edges, `BINS + 1` values from 0 to β.
    pub u: Vec<f64>,
    /// V at each edge, m³; V(0) = 0.
    pub volume: Vec<f64>,
    /// dV/du at each edge from the adjacent bin averages, m³.
    pub density: Vec<f64>,
    /// Standard error of V at each edge, m³.
    pub stderr: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    pub(crate) strata: Vec<Stratum>,
}

/// V(u) for a gravity-free beam configuration, using all available workers.
pub fn volume_table(config: &TrapConfig, beta: f64, n_samples: u64, seed: u64) -> Result<VolumeTable, ThermoError> {
    let landscape = BeamLandscape::new(config)?;
    VolumeTable::build(&landscape, beta, n_samples, seed, Execution::Parallel)
}

impl VolumeTable {
    pub fn build<L: Landscape + ?Sized>(
        landscape: &L,
        beta: f64,
        n_samples: u64,
        seed: u64,
        exec: Execution,
    ) -> Result<Self, ThermoError> {
        check_beta(landscape, beta)?;
        let regions = strata(landscape, beta);
        if n_samples < regions.len() as u64 {
            return Err(ThermoError::Domain(format!("need at least {} samples", regions.len())));
        }
        let per = n_samples / regions.len() as u64;
        let extra = n_samples % regions.len() as u64;
        let allocation: Vec<u64> = (0..regions.len() as u64).map(|k| per + u64::from(k < extra)).collect();

        let jobs: Vec<(usize, u64, u64)> = allocation
            .iter()
            .enumerate()
            .flat_map(|(k, &n)| (0..n.div_ceil(CHUNK)).map(move |c| (k, c, CHUNK.min(n - c * CHUNK))))
            .collect();
        let partials = map_indexed(jobs.len(), exec, |j| {
            let (k, chunk, n) = jobs[j];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((k as u64) << 40) | chunk);
            let mut counts = vec![0u64; BINS];
            for _ in 0..n {
                let r = regions[k].sample(&mut rng);
                if regions[..k].iter().any(|earlier| earlier.contains(&r)) {
                    continue;
                }
                let u = landscape.reduced_energy(&r);
                if u < beta {
                    let bin = ((u / beta * BINS as f64) as usize).min(BINS - 1);
                    counts[bin] += 1;
                }
            }
            counts
        });

        let mut strata: Vec<Stratum> = regions
            .iter()
            .zip(&allocation)
            .map(|(r, &n)| Stratum { volume: r.volume(), samples: n, counts: vec![0; BINS] })
            .collect();
        for ((k, _, _), counts) in jobs.iter().zip(partials) {
            for (acc, c) in strata[*k].counts.iter_mut().zip(counts) {
                *acc += c;
            }
        }
        Ok(Self::from_strata(beta, strata, n_samples, seed))
    }

    fn from_strata(beta: f64, strata: Vec<Stratum>, samples: u64, seed: u64) -> Self {
        let du = beta / BINS as f64;
        let u: Vec<f64> = (0..=BINS).map(|i| i as f64 * du).collect();
        let bin_volume: Vec<f64> =
            (0..BINS).map(|j| strata.iter().map(|s| s.volume * s.counts[j] as f64 / s.samples as f64).sum()).collect();
        let mut volume = vec![0.0; BINS + 1];
        for j in 0..BINS {
            volume[j + 1] = volume[j] + bin_volume[j];
        }
        let mut stderr = vec![0.0; BINS + 1];
        let mut cumulative = vec![0u64; strata.len()];
        for j in 0..BINS {
            let mut var = 0.0;
            for (s, cum) in strata.iter().zip(cumulative.iter_mut()) {
                *cum += s.counts[j];
                let p = *cum as f64 / s.samples as f64;
                var += s.volume * s.volume * p * (1.0 - p) / s.samples as f64;
            }
            stderr[j + 1] = var.sqrt();
        }
        let density = edge_density(&bin_volume, du);
        Self { beta, u, volume, density, stderr, samples, seed, strata }
    }

    pub fn bins(&self) -> usize {
        self.u.len() - 1
    }

    pub fn bin_width(&self) -> f64 {
        self.beta / self.bins() as f64
    }

    pub fn bin_volume(&self, j: usize) -> f64 {
        self.volume[j + 1] - self.volume[j]
    }

    /// V(u) by linear interpolation between edges; V(β) beyond.
    pub fn volume_at(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let x = u / self.bin_width();
        let j = x.floor() as usize;
        if j >= self.bins() {
            return self.volume[self.bins()];
        }
        let t = x - j as f64;
        self.volume[j] * (1.0 - t) + self.volume[j + 1] * t
    }

    /// Covariance of the estimates Σ_j ΔV_j a_j and Σ_j ΔV_j b_j, where a_j is
    /// the integrand value assigned to a sample landing in bin j.
    pub(crate) fn covariance(&self, a: &[f64], b: &[f64]) -> f64 {
        if self.strata.is_empty() {
            // Imported table: bins treated as independent.
            return (0..self.bins())
                .map(|j| {
                    let var = (self.stderr[j + 1].powi(2) - self.stderr[j].powi(2)).abs();
                    a[j] * b[j] * var
                })
                .sum();
        }
        self.strata
            .iter()
            .map(|s| {
                let n = s.samples as f64;
                let (mut ea, mut eb, mut eab) = (0.0, 0.0, 0.0);
                for j in 0..self.bins() {
                    let c = s.counts[j] as f64;
                    ea += c * a[j];
                    eb += c * b[j];
                    eab += c * a[j] * b[j];
                }
                let (ea, eb, eab) = (ea / n, eb / n, eab / n);
                s.volume * s.volume * (eab - ea * eb) / n
            })
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,V,dV_du,stderr\n");
        for i in 0..self.u.len() {
            let _ = writeln!(
                out,
                "{:.9e},{:.9e},{:.9e},{:.9e}",
                self.u[i], self.volume[i], self.density[i], self.stderr[i]
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }

    /// Parse a table written by [`VolumeTable::to_csv`]. Per-stratum tallies
    /// are not stored, so error propagation falls back to independent bins.
    pub fn from_csv(text: &str) -> Result<Self, ThermoError> {
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l.trim()).unwrap_or_default();
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        if columns.len() != 4 || !columns[0].starts_with('u') || !columns[1].starts_with('V') {
            return Err(ThermoError::Parse { line: 1, message: format!("unexpected header {header:?}") });
        }
        let mut rows: Vec<[f64; 4]> = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(ThermoError::Parse { line: i + 1, message: "expected 4 columns".into() });
            }
            let mut row = [0.0; 4];
            for (slot, field) in row.iter_mut().zip(&fields) {
                *slot = field
                    .trim()
                    .parse()
                    .map_err(|e| ThermoError::Parse { line: i + 1, message: format!("{field:?}: {e}") })?;
            }
            rows.push(row);
        }
        if rows.len() < 2 || rows[0][0] != 0.0 || rows[0][1] != 0.0 {
            return Err(ThermoError::Parse { line: 2, message: "table must start at u = 0, V = 0".into() });
        }
        if rows.windows(2).any(|w| !(w[1][0] > w[0][0]) || w[1][1] < w[0][1]) {
            return Err(ThermoError::Parse { line: 0, message: "u must increase and V must not decrease".into() });
        }
        let beta = rows[rows.len() - 1][0];
        Ok(Self {
            beta,
            u: rows.iter().map(|r| r[0]).collect(),
            volume: rows.iter().map(|r| r[1]).collect(),
            density: rows.iter().map(|r| r[2]).collect(),
            stderr: rows.iter().map(|r| r[3]).collect(),
            samples: 0,
            seed: 0,
            strata: Vec::new(),
        })
    }

    pub fn read_csv(path: &Path) -> Result<Self, ThermoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ThermoError::Parse { line: 0, message: format!("{}: {e}", path.display()) })?;
        Self::from_csv(&text)
    }
}

fn edge_density(bin_volume: &[f64], du: f64) -> Vec<f64> {
    let n = bin_volume.len();
    (0..=n)
        .map(|i| match i {
            0 => bin_volume[0] / du,
            i if i == n => bin_volume[n - 1] / du,
            i => 0.5 * (bin_volume[i - 1] + bin_volume[i]) / du,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trapcore::AtomSpecies;

    fn harmonic() -> HarmonicLandscape {
        HarmonicLandscape::new(30e-6, 1e-28, AtomSpecies::rubidium87().mass).unwrap()
    }

    #[test]
    fn regions_sample_inside_themselves() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cyl = Region::Cylinder {
            centre: Vector3::new(1.0, 2.0, 3.0),
            axis: Vector3::z(),
            tx: Vector3::x(),
            ty: Vector3::y(),
            radius: 0.5,
            half_length: 2.0,
        };
        let bx = Region::Box { centre: Vector3::zeros(), axes: Matrix3::identity(), half: [1.0, 2.0, 3.0] };
        for _ in 0..1000 {
            assert!(cyl.contains(&cyl.sample(&mut rng)));
            assert!(bx.contains(&bx.sample(&mut rng)));
        }
        assert!((bx.volume() - 48.0).abs() < 1e-12);
        assert!((cyl.volume() - PI).abs() < 1e-12);
    }

    #[test]
    fn harmonic_volume_matches_closed_form() {
        let h = harmonic();
        let table = VolumeTable::build(&h, 1.5, 1_000_000, 7, Execution::Parallel).unwrap();
        assert_eq!(table.volume[0], 0.0);
        for i in (20..=BINS).step_by(20) {
            let exact = h.exact_volume(table.u[i]);
            assert!((table.volume[i] / exact - 1.0).abs() < 0.01, "u={}: {} vs {exact}", table.u[i], table.volume[i]);
        }
    }

    #[test]
    fn worker_count_does_not_change_the_table() {
        let h = harmonic();
        let seq = VolumeTable::build(&h, 1.0, 200_000, 3, Execution::Sequential).unwrap();
        let par = crate::par::with_threads(3, || VolumeTable::build(&h, 1.0, 200_000, 3, Execution::Parallel).unwrap());
        assert_eq!(seq.to_csv(), par.to_csv());
        let other = VolumeTable::build(&h, 1.0, 200_000, 4, Execution::Sequential).unwrap();
        assert_ne!(seq.to_csv(), other.to_csv());
    }

    #[test]
    fn csv_round_trip() {
        let table = VolumeTable::build(&harmonic(), 1.0, 50_000, 11, Execution::Sequential).unwrap();
        let back = VolumeTable::from_csv(&table.to_csv()).unwrap();
        assert_eq!(back.to_csv(), table.to_csv());
        assert!(VolumeTable::from_csv("u,V\n0,0\n").is_err());
        assert!(VolumeTable::from_csv("u,V,dV_du,stderr\n0,0,0,0\n0.1,x,0,0\n").is_err());
    }

    #[test]
    fn beta_guard() {
        let h = harmonic();
        assert!(matches!(
            VolumeTable::build(&h, 1.99, 1000, 1, Execution::Sequential),
            Err(ThermoError::BetaTooLarge { .. })
        ));
        assert!(VolumeTable::build(&h, 0.0, 1000, 1, Execution::Sequential).is_err());
    }

    #[test]
    fn gravity_is_refused() {
        let cfg = TrapConfig::new(AtomSpecies::rubidium87(), vec![GaussianBeam::new(15.0, 25e-6, 1064e-9)])
            .with_gravity(true);
        assert!(matches!(BeamLandscape::new(&cfg), Err(ThermoError::Unsupported(_))));
    }

    #[test]
    fn covering_cylinders_contain_the_sub_level_set() {
        let beams = vec![
            GaussianBeam::new(5.0, 40e-6, 1064e-9),
            GaussianBeam::new(5.0, 40e-6, 1064e-9).with_orientation(Vector3::y(), Vector3::z()),
        ];
        let land = BeamLandscape::new(&TrapConfig::new(AtomSpecies::rubidium87(), beams)).unwrap();
        let beta = 1.9;
        let regions = strata(&land, beta);
        // Walk each beam axis and a few off-axis rays outward: every sub-β point is covered.
        for dir in [Vector3::x(), Vector3::y(), Vector3::new(1.0, 0.0, 0.0)] {
            for off in [0.0, 20e-6, 60e-6] {
                for i in 0..4000 {
                    let s = i as f64 * 10e-6;
                    let r = dir * s + Vector3::z() * off;
                    if land.reduced_energy(&r) < beta {
                        assert!(regions.iter().any(|g| g.contains(&r)), "uncovered at s={s}, off={off}");
                    }
                }
            }
        }
    }
}

//! Centre and wing populations: exact (u-space quadrature over V(u)), an
//! independent direct spatial Monte Carlo, and the harmonic closed forms.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::volume::{check_beta, Landscape, VolumeTable};
use super::{occupation, ThermoError, TruncatedThermalState, DEFAULT_TOLERANCE};
use crate::par::{map_indexed, Execution};
use crate::trapcore::constants::{BOLTZMANN, PLANCK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationReport {
    pub atom_number: f64,
    /// Atoms with reduced energy below 1 (the crossing).
    pub center: f64,
    /// Atoms between 1 and β (the wings).
    pub wing: f64,
    pub wing_fraction: f64,
    /// Standard error; zero for closed forms.
    pub wing_fraction_err: f64,
    /// m⁻³
    pub n0: f64,
    pub n0_err: f64,
    /// n₀ λ_dB³ when the temperature is known.
    pub psd: Option<f64>,
    pub method: Method,
}

/// Truncated-Boltzmann density n₀ e^(−ηu) P(3/2, η(β−u)) at `r`.
pub fn density_at<L: Landscape + ?Sized>(
    state: &TruncatedThermalState,
    landscape: &L,
    n0: f64,
    r: &Vector3<f64>,
) -> f64 {
    n0 * state.weight(landscape.reduced_energy(r))
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// (1/width) ∫_a^b w(u) du and (1/width) ∫_a^b w(u)(u − centre) du.
fn bin_moments(eta: f64, beta: f64, a: f64, b: f64, centre: f64, width: f64) -> (f64, f64) {
    if b <= a {
        return (0.0, 0.0);
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (mut m0, mut m1) = (0.0, 0.0);
    for &(x, w) in &GAUSS4 {
        let u = mid + half * x;
        let f = w * occupation(eta, beta, u);
        m0 += f;
        m1 += f * (u - centre);
    }
    (m0 * half / width, m1 * half / width)
}

/// Per-bin integrand values such that Σ_j ΔV_j a_j integrates w(u) dV/du with
/// dV/du linear inside each interior bin (slope from the neighbouring bins).
/// The estimate stays linear in the bin volumes.
fn bin_weights(table: &VolumeTable, eta: f64, beta: f64, lo: f64, hi: f64) -> Vec<f64> {
    let n = table.bins();
    let width = table.bin_width();
    let moments: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let (a, b) = (table.u[j], table.u[j + 1]);
            bin_moments(eta, beta, a.max(lo), b.min(hi), 0.5 * (a + b), width)
        })
        .collect();
    // Slope in bin j is (ΔV_{j+1} − ΔV_{j−1}) / 2Δu², zero in the end bins.
    let first = |j: usize| if j >= 1 && j + 1 < n { moments[j].1 } else { 0.0 };
    (0..n)
        .map(|k| {
            let below = if k >= 1 { first(k - 1) } else { 0.0 };
            let above = if k + 1 < n { first(k + 1) } else { 0.0 };
            moments[k].0 + (below - above) / (2.0 * width)
        })
        .collect()
}

pub fn exact_populations(state: &TruncatedThermalState, table: &VolumeTable) -> Result<PopulationReport, ThermoError> {
    exact_populations_with_tolerance(state, table, DEFAULT_TOLERANCE)
}

/// Normalize N = n₀ ∫₀^β e^(−ηu) P(3/2, η(β−u)) dV/du du over the table and
/// split it at u = 1. Fails when the MC relative error on the integral
/// exceeds `tolerance`.
pub fn exact_populations_with_tolerance(
    state: &TruncatedThermalState,
    table: &VolumeTable,
    tolerance: f64,
) -> Result<PopulationReport, ThermoError> {
    if (table.beta - state.beta).abs() > 1e-9 * state.beta {
        return Err(ThermoError::Domain(format!(
            "volume table covers beta = {} but the state has beta = {}",
            table.beta, state.beta
        )));
    }
    let (eta, beta) = (state.eta, state.beta);
    let center = bin_weights(table, eta, beta, 0.0, 1.0);
    let wing = bin_weights(table, eta, beta, 1.0, beta);
    let total: Vec<f64> = center.iter().zip(&wing).map(|(c, w)| c + w).collect();
    let dot = |a: &[f64]| (0..table.bins()).map(|j| table.bin_volume(j) * a[j]).sum::<f64>();
    let (i_total, i_center, i_wing) = (dot(&total), dot(&center), dot(&wing));
    if !(i_total > 0.0) {
        return Err(ThermoError::Domain("volume table is empty".into()));
    }
    let var_total = table.covariance(&total, &total);
    let rel = var_total.sqrt() / i_total;
    if rel > tolerance {
        return Err(ThermoError::ToleranceNotMet { achieved: rel, tolerance });
    }
    let wf = i_wing / i_total;
    let var_wf = (table.covariance(&wing, &wing) - 2.0 * wf * table.covariance(&wing, &total) + wf * wf * var_total)
        / (i_total * i_total);
    let n0 = state.atom_number / i_total;
    Ok(PopulationReport {
        atom_number: state.atom_number,
        center: n0 * i_center,
        wing: n0 * i_wing,
        wing_fraction: wf,
        wing_fraction_err: var_wf.max(0.0).sqrt(),
        n0,
        n0_err: n0 * rel,
        psd: Some(psd_for_mass(n0, state.temperature, state.trap.mass)),
        method: Method::Exact,
    })
}

/// Closed forms for two equal crossed circular beams of waist `w0`:
/// X = (4πw₀/λ)e^(−η), wing fraction X/(1+X), n₀ = (4N/w₀³)(η/π)^(3/2)/(1+X).
pub fn analytic_populations(atom_number: f64, eta: f64, w0: f64, wavelength: f64) -> PopulationReport {
    let x = 4.0 * PI * w0 / wavelength * (-eta).exp();
    let n0 = 4.0 * atom_number / w0.powi(3) * (eta / PI).powf(1.5) / (1.0 + x);
    let center = n0 * w0.powi(3) / 4.0 * (PI / eta).powf(1.5);
    PopulationReport {
        atom_number,
        center,
        wing: center * x,
        wing_fraction: x / (1.0 + x),
        wing_fraction_err: 0.0,
        n0,
        n0_err: 0.0,
        psd: None,
        method: Method::Analytic,
    }
}

pub(crate) fn psd_for_mass(n0: f64, temperature: f64, mass: f64) -> f64 {
    let lambda_db = PLANCK / (2.0 * PI * mass * BOLTZMANN * temperature).sqrt();
    n0 * lambda_db.powi(3)
}

/// ∫ e^(−ηu) P(3/2, η(β−u)) d³r estimated straight from the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialEstimate {
    /// m³
    pub integral: f64,
    pub stderr: f64,
    /// Part with u < 1, m³.
    pub center: f64,
    /// Part with u ≥ 1, m³.
    pub wing: f64,
    pub samples: u64,
}

const SPATIAL_CHUNK: u64 = 1 << 14;
/// Proposal mixture: thermal Gaussians widened by each factor, each drawn with
/// the paired probability. Gaussian-beam wells are softer than harmonic, so the
/// wider components keep the importance weights bounded on the shoulders.
const GAUSSIANS: [(f64, f64); 3] = [(1.2, 0.25), (2.5, 0.2), (5.0, 0.15)];
/// Remaining probability goes uniformly into the covering regions, so the wings
/// keep positive proposal density.
const UNIFORM_SHARE: f64 = 0.4;

/// Direct 3-D Monte Carlo of the occupation integral. No volume table, bins or
/// strata: a defensive importance-sampling mixture of thermal Gaussians at the
/// minimum and uniform draws over the covering regions.
pub fn spatial_integral<L: Landscape + ?Sized>(
    state: &TruncatedThermalState,
    landscape: &L,
    n_samples: u64,
    seed: u64,
    exec: Execution,
) -> Result<SpatialEstimate, ThermoError> {
    check_beta(landscape, state.beta)?;
    let regions = landscape.covering_regions(state.beta);
    if regions.is_empty() || n_samples < 2 {
        return Err(ThermoError::Domain("nothing to sample".into()));
    }
    let centre = landscape.centre();
    let axes = landscape.principal_axes();
    let thermal = landscape.curvatures().map(|k| 1.0 / (state.eta * k).sqrt());
    let region_share = UNIFORM_SHARE / regions.len() as f64;
    let proposal = |r: &Vector3<f64>| {
        let d = r - centre;
        let s: [f64; 3] = std::array::from_fn(|i| axes.column(i).dot(&d) / thermal[i]);
        let q2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
        let unit = (2.0 * PI).powf(1.5) * thermal[0] * thermal[1] * thermal[2];
        let gauss: f64 = GAUSSIANS
            .iter()
            .map(|&(widen, share)| share * (-0.5 * q2 / (widen * widen)).exp() / (unit * widen.powi(3)))
            .sum();
        let uniform: f64 = regions.iter().filter(|g| g.contains(r)).map(|g| region_share / g.volume()).sum();
        gauss + uniform
    };

    let chunks = n_samples.div_ceil(SPATIAL_CHUNK);
    let partials = map_indexed(chunks as usize, exec, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let n = SPATIAL_CHUNK.min(n_samples - c as u64 * SPATIAL_CHUNK);
        let (mut s, mut s2, mut sc) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let mut pick = rng.gen::<f64>();
            let widen = GAUSSIANS.iter().find_map(|&(widen, share)| {
                if pick < share {
                    Some(widen)
                } else {
                    pick -= share;
                    None
                }
            });
            let r = match widen {
                Some(widen) => {
                    let mut r = centre;
                    for i in 0..3 {
                        let z: f64 = rng.sample(StandardNormal);
                        r += axes.column(i) * (widen * thermal[i] * z);
                    }
                    r
                }
                None => {
                    let k = rng.gen_range(0..regions.len());
                    regions[k].sample(&mut rng)
                }
            };
            let u = landscape.reduced_energy(&r);
            if u >= state.beta {
                continue;
            }
            let v = state.weight(u) / proposal(&r);
            s += v;
            s2 += v * v;
            if u < 1.0 {
                sc += v;
            }
        }
        [s, s2, sc]
    });
    let mut acc = [0.0; 3];
    for p in &partials {
        for i in 0..3 {
            acc[i] += p[i];
        }
    }
    let n = n_samples as f64;
    let mean = acc[0] / n;
    let var = (acc[1] / n - mean * mean).max(0.0) / (n - 1.0);
    Ok(SpatialEstimate {
        integral: mean,
        stderr: var.sqrt(),
        center: acc[2] / n,
        wing: (acc[0] - acc[2]) / n,
        samples: n_samples,
    })
}

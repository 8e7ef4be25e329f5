//! Focused Gaussian beams with independent waists along two principal axes.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::TrapError;

/// One focused trapping beam.
///
/// `waist_x` is the 1/e² intensity radius along `transverse_x` and `waist_y`
/// the radius along `axis × transverse_x`. Each principal axis has its own
/// Rayleigh range, so a 20 μm × 80 μm spot diverges faster along the tight axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBeam {
    /// W
    pub power: f64,
    /// m
    pub waist_x: f64,
    /// m
    pub waist_y: f64,
    /// m
    pub wavelength: f64,
    pub axis: Vector3<f64>,
    pub transverse_x: Vector3<f64>,
    /// m
    pub focus: Vector3<f64>,
}

impl GaussianBeam {
    /// Circular beam propagating along +x with its focus at the origin.
    pub fn new(power: f64, waist: f64, wavelength: f64) -> Self {
        Self {
            power,
            waist_x: waist,
            waist_y: waist,
            wavelength,
            axis: Vector3::x(),
            transverse_x: Vector3::y(),
            focus: Vector3::zeros(),
        }
    }

    pub fn with_waists(mut self, waist_x: f64, waist_y: f64) -> Self {
        self.waist_x = waist_x;
        self.waist_y = waist_y;
        self
    }

    pub fn with_orientation(mut self, axis: Vector3<f64>, transverse_x: Vector3<f64>) -> Self {
        self.axis = axis;
        self.transverse_x = transverse_x;
        self
    }

    pub fn with_focus(mut self, focus: Vector3<f64>) -> Self {
        self.focus = focus;
        self
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    pub fn validate(&self) -> Result<(), TrapError> {
        let bad = |msg: String| Err(TrapError::InvalidBeam(msg));
        if !(self.power.is_finite() && self.power >= 0.0) {
            return bad(format!("power must be non-negative, got {}", self.power));
        }
        if !(self.waist_x > 0.0 && self.waist_y > 0.0 && self.waist_x.is_finite() && self.waist_y.is_finite()) {
            return bad("waists must be positive".into());
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return bad("wavelength must be positive".into());
        }
        if (self.axis.norm() - 1.0).abs() > 1e-9 || (self.transverse_x.norm() - 1.0).abs() > 1e-9 {
            return bad("axis and transverse_x must be unit vectors".into());
        }
        if self.axis.dot(&self.transverse_x).abs() > 1e-9 {
            return bad("axis must be perpendicular to transverse_x".into());
        }
        if !(self.focus.iter().all(|c| c.is_finite())) {
            return bad("focus must be finite".into());
        }
        Ok(())
    }

    /// On-axis intensity at the focus, 2P/(π wx wy).
    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.power / (PI * self.waist_x * self.waist_y)
    }

    pub fn transverse_y(&self) -> Vector3<f64> {
        self.axis.cross(&self.transverse_x)
    }

    pub fn rayleigh_range_x(&self) -> f64 {
        PI * self.waist_x * self.waist_x / self.wavelength
    }

    pub fn rayleigh_range_y(&self) -> f64 {
        PI * self.waist_y * self.waist_y / self.wavelength
    }

    pub fn min_waist(&self) -> f64 {
        self.waist_x.min(self.waist_y)
    }

    pub(crate) fn profile(&self) -> BeamProfile {
        BeamProfile::new(self)
    }

    /// Intensity relative to the focal peak, in [0, 1].
    pub fn relative_intensity(&self, r: &Vector3<f64>) -> f64 {
        self.profile().relative(r)
    }

    pub fn intensity_at(&self, r: &Vector3<f64>) -> f64 {
        self.peak_intensity() * self.relative_intensity(r)
    }

    /// Analytic gradient of the intensity, W/m³.
    pub fn intensity_gradient(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.peak_intensity() * self.profile().relative_gradient(r)
    }
}

/// Beam geometry with the frame and inverse squared lengths precomputed.
#[derive(Debug, Clone)]
pub(crate) struct BeamProfile {
    focus: Vector3<f64>,
    axis: Vector3<f64>,
    tx: Vector3<f64>,
    ty: Vector3<f64>,
    inv_wx2: f64,
    inv_wy2: f64,
    inv_zrx2: f64,
    inv_zry2: f64,
}

impl BeamProfile {
    fn new(beam: &GaussianBeam) -> Self {
        let zrx = beam.rayleigh_range_x();
        let zry = beam.rayleigh_range_y();
        Self {
            focus: beam.focus,
            axis: beam.axis,
            tx: beam.transverse_x,
            ty: beam.transverse_y(),
            inv_wx2: 1.0 / (beam.waist_x * beam.waist_x),
            inv_wy2: 1.0 / (beam.waist_y * beam.waist_y),
            inv_zrx2: 1.0 / (zrx * zrx),
            inv_zry2: 1.0 / (zry * zry),
        }
    }

    #[inline]
    fn local(&self, r: &Vector3<f64>) -> (f64, f64, f64) {
        let d = r - self.focus;
        (d.dot(&self.tx), d.dot(&self.ty), d.dot(&self.axis))
    }

    #[inline]
    pub(crate) fn relative(&self, r: &Vector3<f64>) -> f64 {
        let (x, y, z) = self.local(r);
        let sx = 1.0 + z * z * self.inv_zrx2;
        let sy = 1.0 + z * z * self.inv_zry2;
        let exponent = -2.0 * (x * x * self.inv_wx2 / sx + y * y * self.inv_wy2 / sy);
        exponent.exp() / (sx * sy).sqrt()
    }

    pub(crate) fn relative_gradient(&self, r: &Vector3<f64>) -> Vector3<f64> {
        let (x, y, z) = self.local(r);
        let sx = 1.0 + z * z * self.inv_zrx2;
        let sy = 1.0 + z * z * self.inv_zry2;
        let dsx = 2.0 * z * self.inv_zrx2;
        let dsy = 2.0 * z * self.inv_zry2;
        let ax = x * x * self.inv_wx2;
        let ay = y * y * self.inv_wy2;
        let f = (-2.0 * (ax / sx + ay / sy)).exp() / (sx * sy).sqrt();
        let dlnf_dx = -4.0 * x * self.inv_wx2 / sx;
        let dlnf_dy = -4.0 * y * self.inv_wy2 / sy;
        let dlnf_dz = -0.5 * dsx / sx - 0.5 * dsy / sy + 2.0 * ax * dsx / (sx * sx) + 2.0 * ay * dsy / (sy * sy);
        f * (dlnf_dx * self.tx + dlnf_dy * self.ty + dlnf_dz * self.axis)
    }
}

//! Physical inputs of the source and the quantities derived from them.
//!
//! The down-converted photons are degenerate, so every propagation quantity
//! uses the signal/idler wavelength `λ = 2 λp`. The pump wavelength only
//! enters through the SPDC correlation length.
//!
//! All lengths are SI meters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phase-matching prefactor of the double-Gaussian approximation.
const PHASE_MATCHING_FACTOR: f64 = 0.455;

/// Immutable description of the source and collimation optics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalSetup {
    pub pump_wavelength: f64,
    pub downconverted_wavelength: f64,
    pub wavenumber: f64,
    pub pump_waist: f64,
    pub crystal_length: f64,
    pub spdc_correlation_length: f64,
    pub lens_focal_length: f64,
    /// Collimated width of the sum (pump-envelope) Gaussian.
    pub collimated_sum_waist: f64,
    /// Collimated width of the difference (correlation) Gaussian.
    pub collimated_diff_waist: f64,
}

fn check_length(field: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::Parameter {
            field,
            value,
            reason: "must be finite",
        });
    }
    if value <= 0.0 {
        return Err(Error::Parameter {
            field,
            value,
            reason: "must be strictly positive",
        });
    }
    Ok(value)
}

/// SPDC transverse correlation length `sqrt(0.455 L λp / 2π)`.
pub fn spdc_correlation_length(crystal_length: f64, pump_wavelength: f64) -> f64 {
    (PHASE_MATCHING_FACTOR * crystal_length * pump_wavelength / (2.0 * PI)).sqrt()
}

/// Thin-lens Fourier-plane width `λ f / (2π waist)`.
///
/// Applying the mapping twice with the same `wavelength` and `focal_length`
/// returns the original waist.
pub fn collimated_waist(waist: f64, wavelength: f64, focal_length: f64) -> f64 {
    wavelength * focal_length / (2.0 * PI * waist)
}

/// Builds a fully derived [`PhysicalSetup`] from the four primary inputs (SI units).
pub fn derive_setup(
    pump_wavelength: f64,
    pump_waist: f64,
    crystal_length: f64,
    focal_length: f64,
) -> Result<PhysicalSetup> {
    let pump_wavelength = check_length("pump_wavelength", pump_wavelength)?;
    let pump_waist = check_length("pump_waist", pump_waist)?;
    let crystal_length = check_length("crystal_length", crystal_length)?;
    let focal_length = check_length("focal_length", focal_length)?;

    let lambda = 2.0 * pump_wavelength;
    let sigma0 = spdc_correlation_length(crystal_length, pump_wavelength);
    Ok(PhysicalSetup {
        pump_wavelength,
        downconverted_wavelength: lambda,
        wavenumber: 2.0 * PI / lambda,
        pump_waist,
        crystal_length,
        spdc_correlation_length: sigma0,
        lens_focal_length: focal_length,
        collimated_sum_waist: collimated_waist(pump_waist, lambda, focal_length),
        collimated_diff_waist: collimated_waist(sigma0, lambda, focal_length),
    })
}

impl PhysicalSetup {
    /// The reference configuration used throughout the test suite:
    /// λp = 355 nm, w0 = 507 μm, L = 1 mm, f = 50 cm.
    pub fn reference() -> Self {
        derive_setup(355e-9, 507e-6, 1e-3, 0.5).expect("reference parameters are valid")
    }

    /// Distance at which the free-space sum and difference widths coincide
    /// (`k · w_c0 · σ_c0`), i.e. where the spatial correlation changes sign.
    pub fn correlation_crossover_distance(&self) -> f64 {
        self.wavenumber * self.collimated_sum_waist * self.collimated_diff_waist
    }

    /// Rayleigh range of the sum-coordinate Gaussian.
    pub fn sum_rayleigh_range(&self) -> f64 {
        self.wavenumber * self.collimated_sum_waist.powi(2)
    }

    /// Rayleigh range of the difference-coordinate Gaussian.
    pub fn diff_rayleigh_range(&self) -> f64 {
        self.wavenumber * self.collimated_diff_waist.powi(2)
    }
}

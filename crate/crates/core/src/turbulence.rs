//! Kolmogorov channel: spherical-wave coherence length and the
//! ensemble-averaged two-point phase factor in the quadratic approximation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalSetup;
use crate::Vec2;

/// Numerical prefactor of the spherical-wave coherence length.
const SPHERICAL_WAVE_FACTOR: f64 = 0.546;

/// A single turbulent path characterized by its refractive-index structure
/// constant `Cn²` (m^-2/3). Signal and idler each traverse an independent copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceChannel {
    structure_constant: f64,
}

impl TurbulenceChannel {
    pub fn new(structure_constant: f64) -> Result<Self> {
        if !structure_constant.is_finite() || structure_constant < 0.0 {
            return Err(Error::Parameter {
                field: "cn2",
                value: structure_constant,
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { structure_constant })
    }

    pub fn free_space() -> Self {
        Self {
            structure_constant: 0.0,
        }
    }

    pub fn structure_constant(&self) -> f64 {
        self.structure_constant
    }

    pub fn is_free_space(&self) -> bool {
        self.structure_constant == 0.0
    }
}

/// Spherical-wave coherence length. `Infinite` is the exact free-space value,
/// never approximated by a large number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoherenceLength {
    Finite(f64),
    Infinite,
}

impl CoherenceLength {
    /// `1/ρ0²`, exactly zero for the infinite sentinel.
    pub fn inverse_square(self) -> f64 {
        match self {
            CoherenceLength::Finite(rho0) => rho0.powi(-2),
            CoherenceLength::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, CoherenceLength::Infinite)
    }

    /// Value in meters, `f64::INFINITY` for the sentinel.
    pub fn meters(self) -> f64 {
        match self {
            CoherenceLength::Finite(rho0) => rho0,
            CoherenceLength::Infinite => f64::INFINITY,
        }
    }
}

pub(crate) fn check_distance(z: f64) -> Result<f64> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::Domain(format!(
            "propagation distance must be finite and non-negative, got {z}"
        )));
    }
    Ok(z)
}

/// `ρ0 = (0.546 Cn² k² z)^(-3/5)`.
pub fn coherence_length(
    channel: &TurbulenceChannel,
    setup: &PhysicalSetup,
    z: f64,
) -> Result<CoherenceLength> {
    let z = check_distance(z)?;
    if channel.is_free_space() || z == 0.0 {
        return Ok(CoherenceLength::Infinite);
    }
    let k = setup.wavenumber;
    let base = SPHERICAL_WAVE_FACTOR * channel.structure_constant * k * k * z;
    Ok(CoherenceLength::Finite(base.powf(-0.6)))
}

/// `1/ρ0²` computed directly as `(0.546 Cn² k² z)^(6/5)`, which stays
/// well-conditioned in the weak-turbulence limit.
pub fn inverse_square_coherence_length(
    channel: &TurbulenceChannel,
    setup: &PhysicalSetup,
    z: f64,
) -> Result<f64> {
    let z = check_distance(z)?;
    if channel.is_free_space() || z == 0.0 {
        return Ok(0.0);
    }
    let k = setup.wavenumber;
    Ok((SPHERICAL_WAVE_FACTOR * channel.structure_constant * k * k * z).powf(1.2))
}

/// Ensemble average `exp[-(ρd'² + ρd'·ρd + ρd²)/ρ0²]` for one photon's
/// transmitter-plane separation `rho_d_prime` and receiver-plane separation `rho_d`.
pub fn turbulence_factor(
    channel: &TurbulenceChannel,
    setup: &PhysicalSetup,
    z: f64,
    rho_d_prime: Vec2,
    rho_d: Vec2,
) -> Result<f64> {
    let inv_sq = inverse_square_coherence_length(channel, setup, z)?;
    Ok(turbulence_factor_with(inv_sq, rho_d_prime, rho_d))
}

/// Same as [`turbulence_factor`] with `1/ρ0²` already evaluated.
#[inline]
pub fn turbulence_factor_with(inv_rho0_sq: f64, rho_d_prime: Vec2, rho_d: Vec2) -> f64 {
    if inv_rho0_sq == 0.0 {
        return 1.0;
    }
    let [px, py] = rho_d_prime;
    let [dx, dy] = rho_d;
    let form = px * px + py * py + px * dx + py * dy + dx * dx + dy * dy;
    (-form * inv_rho0_sq).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coherence_length_reference_value() {
        let setup = PhysicalSetup::reference();
        let ch = TurbulenceChannel::new(1e-16).unwrap();
        let rho0 = coherence_length(&ch, &setup, 1000.0).unwrap().meters();
        // (0.546 · 1e-16 · k² · 1000)^(-3/5) with k = 2π/710 nm
        assert!((rho0 - 0.418).abs() < 5e-4, "{rho0}");
    }

    #[test]
    fn free_space_and_origin_are_infinite() {
        let setup = PhysicalSetup::reference();
        let free = TurbulenceChannel::free_space();
        assert!(coherence_length(&free, &setup, 123.0).unwrap().is_infinite());
        let ch = TurbulenceChannel::new(1e-14).unwrap();
        assert!(coherence_length(&ch, &setup, 0.0).unwrap().is_infinite());
        assert_eq!(inverse_square_coherence_length(&ch, &setup, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_distance_is_rejected() {
        let setup = PhysicalSetup::reference();
        let ch = TurbulenceChannel::new(1e-16).unwrap();
        assert!(matches!(
            coherence_length(&ch, &setup, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(TurbulenceChannel::new(-1e-16).is_err());
    }

    #[test]
    fn factor_trivial_values() {
        let setup = PhysicalSetup::reference();
        let ch = TurbulenceChannel::new(1e-15).unwrap();
        assert_eq!(
            turbulence_factor(&ch, &setup, 500.0, [0.0, 0.0], [0.0, 0.0]).unwrap(),
            1.0
        );
        let free = TurbulenceChannel::free_space();
        assert_eq!(
            turbulence_factor(&free, &setup, 500.0, [1.0, 2.0], [3.0, -1.0]).unwrap(),
            1.0
        );
        let rho0 = coherence_length(&ch, &setup, 500.0).unwrap().meters();
        let f = turbulence_factor(&ch, &setup, 500.0, [rho0, 0.0], [0.0, 0.0]).unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_matches_coherence_length() {
        let setup = PhysicalSetup::reference();
        let ch = TurbulenceChannel::new(3e-16).unwrap();
        for z in [1.0, 10.0, 700.0, 5000.0] {
            let a = coherence_length(&ch, &setup, z).unwrap().inverse_square();
            let b = inverse_square_coherence_length(&ch, &setup, z).unwrap();
            assert!(((a - b) / b).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn factor_never_exceeds_one(
            px in -1.0..1.0f64, py in -1.0..1.0f64,
            dx in -1.0..1.0f64, dy in -1.0..1.0f64,
            inv in 0.0..100.0f64,
        ) {
            let f = turbulence_factor_with(inv, [px, py], [dx, dy]);
            prop_assert!(f <= 1.0);
            prop_assert!(f >= 0.0);
        }

        #[test]
        fn coherence_length_decreases(
            cn2 in 1e-18..1e-13f64,
            z in 1.0..1e4f64,
            bump in 1.001..10.0f64,
        ) {
            let setup = PhysicalSetup::reference();
            let ch = TurbulenceChannel::new(cn2).unwrap();
            let stronger = TurbulenceChannel::new(cn2 * bump).unwrap();
            let base = coherence_length(&ch, &setup, z).unwrap().meters();
            prop_assert!(coherence_length(&stronger, &setup, z).unwrap().meters() < base);
            prop_assert!(coherence_length(&ch, &setup, z * bump).unwrap().meters() < base);
        }
    }
}

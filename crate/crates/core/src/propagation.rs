//! Closed-form propagation of the biphoton cross-spectral density.
//!
//! After collimation the two-photon amplitude is a product of a Gaussian of
//! width `w_c0` in the sum coordinate and a Gaussian of width `σ_c0` in the
//! difference coordinate. Because the Fresnel kernel and the turbulence
//! structure function are both invariant under the orthogonal sum/difference
//! rotation, the propagated kernel factorizes into two independent
//! partially-coherent Gaussian beams, each described by a width, a phase
//! curvature and a coupling (coherence) length.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::params::PhysicalSetup;
use crate::turbulence::{check_distance, inverse_square_coherence_length, TurbulenceChannel};
use crate::Vec2;

/// Width, curvature and coupling of one Gaussian factor after propagation.
///
/// `curvature` is `1/R` where the quadratic phase reads `exp(i k ρ² / 2R)`,
/// so it is exactly zero at the input plane. `inv_coupling_sq` is `1/C²`,
/// exactly zero without turbulence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeamMoments {
    pub width: f64,
    pub curvature: f64,
    pub inv_coupling_sq: f64,
}

impl BeamMoments {
    /// Propagates a Gaussian factor of input width `a` a distance `z` through a
    /// channel with `1/ρ0² = inv_rho0_sq`.
    pub fn propagate(a: f64, k: f64, z: f64, inv_rho0_sq: f64) -> Self {
        if inv_rho0_sq == 0.0 {
            return Self::free_space(a, k, z);
        }
        let u = inv_rho0_sq;
        let a2 = a * a;
        let z2 = z * z;
        let k2 = k * k;
        let width_sq = a2 + z2 / k2 * (1.0 / a2 + 4.0 * u);
        // 1/R = z (1/2a² + 3u) / (z²/2a² + k²a²/2 + 2u z²)
        let curvature =
            z * (0.5 / a2 + 3.0 * u) / (0.5 * z2 / a2 + 0.5 * k2 * a2 + 2.0 * u * z2);
        // 1/C² = u (z²/a² + 3k²a² + 3u z²) / (z²/a² + k²a² + 4u z²)
        let inv_coupling_sq = u * (z2 / a2 + 3.0 * k2 * a2 + 3.0 * u * z2)
            / (z2 / a2 + k2 * a2 + 4.0 * u * z2);
        Self {
            width: width_sq.sqrt(),
            curvature,
            inv_coupling_sq,
        }
    }

    /// Free-space Gaussian beam: `w_f = a sqrt(1 + z²/(k² a⁴))`, `R_f = (k² a⁴ + z²)/z`.
    pub fn free_space(a: f64, k: f64, z: f64) -> Self {
        let zr = k * a * a;
        Self {
            width: a * (1.0 + (z / zr).powi(2)).sqrt(),
            curvature: z / (zr * zr + z * z),
            inv_coupling_sq: 0.0,
        }
    }

    /// Phase divisor `R` (m); infinite at the input plane.
    pub fn phase_radius(&self) -> f64 {
        if self.curvature == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.curvature
        }
    }

    /// Coupling length `C` (m), `None` when it is infinite.
    pub fn coupling_length(&self) -> Option<f64> {
        if self.inv_coupling_sq == 0.0 {
            None
        } else {
            Some(self.inv_coupling_sq.powf(-0.5))
        }
    }
}

/// The six distance-dependent parameters of the propagated kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatedMoments {
    pub z: f64,
    pub wavenumber: f64,
    /// Sum-coordinate factor (width `w(z)`).
    pub plus: BeamMoments,
    /// Difference-coordinate factor (width `σ(z)`).
    pub minus: BeamMoments,
    pub is_free_space: bool,
}

impl PropagatedMoments {
    pub fn w(&self) -> f64 {
        self.plus.width
    }

    pub fn sigma(&self) -> f64 {
        self.minus.width
    }

    pub fn r_plus(&self) -> f64 {
        self.plus.phase_radius()
    }

    pub fn r_minus(&self) -> f64 {
        self.minus.phase_radius()
    }

    pub fn c_plus(&self) -> Option<f64> {
        self.plus.coupling_length()
    }

    pub fn c_minus(&self) -> Option<f64> {
        self.minus.coupling_length()
    }

    /// True when neither factor is decohered (pure state).
    pub fn is_coherent(&self) -> bool {
        self.plus.inv_coupling_sq == 0.0 && self.minus.inv_coupling_sq == 0.0
    }

    /// Moments with explicit sum/difference widths and no phase or coupling;
    /// only the diagonal of such a kernel is meaningful. Used for angle and
    /// correlation statistics that depend on widths alone.
    pub fn from_widths(w: f64, sigma: f64) -> Self {
        let flat = |width| BeamMoments {
            width,
            curvature: 0.0,
            inv_coupling_sq: 0.0,
        };
        Self {
            z: 0.0,
            wavenumber: 1.0,
            plus: flat(w),
            minus: flat(sigma),
            is_free_space: true,
        }
    }
}

/// Moments at distance `z` for the collimated state, with the free-space
/// closed forms whenever the channel has no turbulence.
pub fn propagated_moments(
    setup: &PhysicalSetup,
    channel: &TurbulenceChannel,
    z: f64,
) -> Result<PropagatedMoments> {
    let z = check_distance(z)?;
    let u = inverse_square_coherence_length(channel, setup, z)?;
    let k = setup.wavenumber;
    Ok(PropagatedMoments {
        z,
        wavenumber: k,
        plus: BeamMoments::propagate(setup.collimated_sum_waist, k, z, u),
        minus: BeamMoments::propagate(setup.collimated_diff_waist, k, z, u),
        is_free_space: channel.is_free_space(),
    })
}

/// `(ρ+, ρ−) = ((ρs + ρi)/√2, (ρs − ρi)/√2)`.
#[inline]
pub fn to_sum_diff(signal: Vec2, idler: Vec2) -> (Vec2, Vec2) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    (
        [r * (signal[0] + idler[0]), r * (signal[1] + idler[1])],
        [r * (signal[0] - idler[0]), r * (signal[1] - idler[1])],
    )
}

/// Inverse of [`to_sum_diff`]; the transform is its own inverse.
#[inline]
pub fn from_sum_diff(plus: Vec2, minus: Vec2) -> (Vec2, Vec2) {
    to_sum_diff(plus, minus)
}

/// Receiver-plane coordinates of the two kernel arguments: index 1 is the
/// conjugated (bra) side, index 2 the ket side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiphotonCoords {
    pub signal_1: Vec2,
    pub idler_1: Vec2,
    pub signal_2: Vec2,
    pub idler_2: Vec2,
}

impl BiphotonCoords {
    pub fn new(signal_1: Vec2, idler_1: Vec2, signal_2: Vec2, idler_2: Vec2) -> Self {
        Self {
            signal_1,
            idler_1,
            signal_2,
            idler_2,
        }
    }

    /// Coincident arguments: both sides at the same signal/idler positions.
    pub fn diagonal(signal: Vec2, idler: Vec2) -> Self {
        Self::new(signal, idler, signal, idler)
    }

    pub fn from_sum_diff(plus_1: Vec2, minus_1: Vec2, plus_2: Vec2, minus_2: Vec2) -> Self {
        let (s1, i1) = from_sum_diff(plus_1, minus_1);
        let (s2, i2) = from_sum_diff(plus_2, minus_2);
        Self::new(s1, i1, s2, i2)
    }

    /// `(ρ1+, ρ1−, ρ2+, ρ2−)`.
    pub fn sum_diff(&self) -> (Vec2, Vec2, Vec2, Vec2) {
        let (p1, m1) = to_sum_diff(self.signal_1, self.idler_1);
        let (p2, m2) = to_sum_diff(self.signal_2, self.idler_2);
        (p1, m1, p2, m2)
    }

    /// Exchanges the bra and ket arguments.
    pub fn swapped(&self) -> Self {
        Self::new(self.signal_2, self.idler_2, self.signal_1, self.idler_1)
    }
}

#[inline]
fn norm_sq(v: Vec2) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

#[inline]
fn dist_sq(a: Vec2, b: Vec2) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Exponent of one propagated Gaussian factor evaluated at bra/ket points `x1`, `x2`.
#[inline]
fn factor_exponent(m: &BeamMoments, k: f64, x1: Vec2, x2: Vec2) -> Complex64 {
    let n1 = norm_sq(x1);
    let n2 = norm_sq(x2);
    let re = -(n1 + n2) / (2.0 * m.width * m.width) - m.inv_coupling_sq * dist_sq(x2, x1);
    let im = 0.5 * k * m.curvature * (n2 - n1);
    Complex64::new(re, im)
}

/// Propagated second-order cross-spectral density (unnormalized, equal to 1
/// when all coordinates vanish).
pub fn cross_spectral_density(moments: &PropagatedMoments, coords: &BiphotonCoords) -> Complex64 {
    let (p1, m1, p2, m2) = coords.sum_diff();
    let k = moments.wavenumber;
    (factor_exponent(&moments.plus, k, p1, p2) + factor_exponent(&moments.minus, k, m1, m2)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::joint_position_pdf;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn vec2() -> impl Strategy<Value = Vec2> {
        (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y)| [x, y])
    }

    #[test]
    fn input_plane_identity() {
        let setup = PhysicalSetup::reference();
        let ch = TurbulenceChannel::new(1e-15).unwrap();
        let m = propagated_moments(&setup, &ch, 0.0).unwrap();
        assert_eq!(m.w(), setup.collimated_sum_waist);
        assert_eq!(m.sigma(), setup.collimated_diff_waist);
        assert!(m.c_plus().is_none() && m.c_minus().is_none());
        assert!(m.r_plus().is_infinite());
    }

    #[test]
    fn free_space_width() {
        let setup = PhysicalSetup::reference();
        let m = propagated_moments(&setup, &TurbulenceChannel::free_space(), 500.0).unwrap();
        let a = setup.collimated_sum_waist;
        let k = setup.wavenumber;
        let expected = a * (1.0 + 500.0f64.powi(2) / (k * k * a.powi(4))).sqrt();
        assert!(rel(m.w(), expected) < 1e-14);
        assert!(m.c_plus().is_none());
    }

    #[test]
    fn negative_distance_errors() {
        let setup = PhysicalSetup::reference();
        assert!(propagated_moments(&setup, &TurbulenceChannel::free_space(), -1.0).is_err());
    }

    #[test]
    fn sum_diff_special_cases() {
        let a = [0.3, -1.2];
        let (p, m) = to_sum_diff(a, a);
        assert!((p[0] - 2f64.sqrt() * a[0]).abs() < 1e-15);
        assert!((p[1] - 2f64.sqrt() * a[1]).abs() < 1e-15);
        assert_eq!(m, [0.0, 0.0]);
        let (p, m) = to_sum_diff(a, [-a[0], -a[1]]);
        assert_eq!(p, [0.0, 0.0]);
        assert!((m[0] - 2f64.sqrt() * a[0]).abs() < 1e-15);
    }

    #[test]
    fn weak_turbulence_approaches_free_space() {
        let setup = PhysicalSetup::reference();
        let weak = TurbulenceChannel::new(1e-22).unwrap();
        let free = TurbulenceChannel::free_space();
        for z in [0.5, 10.0, 300.0, 2_000.0, 10_000.0] {
            let a = propagated_moments(&setup, &weak, z).unwrap();
            let b = propagated_moments(&setup, &free, z).unwrap();
            assert!(rel(a.w(), b.w()) < 1e-6);
            assert!(rel(a.sigma(), b.sigma()) < 1e-6);
            assert!(rel(a.r_plus(), b.r_plus()) < 1e-6);
            assert!(rel(a.r_minus(), b.r_minus()) < 1e-6);
            // 1/C² vanishes in the limit: the state stays nearly pure.
            assert!(crate::statistics::purity(&a) > 0.99);
        }
    }

    #[test]
    fn diagonal_equals_position_pdf() {
        let setup = PhysicalSetup::reference();
        let ch = TurbulenceChannel::new(1e-16).unwrap();
        let m = propagated_moments(&setup, &ch, 800.0).unwrap();
        let s = [0.2, -0.4];
        let i = [0.25, -0.37];
        let v = cross_spectral_density(&m, &BiphotonCoords::diagonal(s, i));
        assert!(v.im.abs() < 1e-15);
        assert!(rel(v.re, joint_position_pdf(&m, s, i)) < 1e-13);
    }

    proptest! {
        #[test]
        fn sum_diff_round_trip_and_orthogonality(s in vec2(), i in vec2()) {
            let (p, m) = to_sum_diff(s, i);
            let (s2, i2) = from_sum_diff(p, m);
            for (a, b) in s.iter().zip(s2.iter()).chain(i.iter().zip(i2.iter())) {
                prop_assert!((a - b).abs() <= 1e-14 * (1.0 + a.abs()));
            }
            let lhs = norm_sq(s) + norm_sq(i);
            let rhs = norm_sq(p) + norm_sq(m);
            prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + lhs));
        }

        #[test]
        fn kernel_is_hermitian(
            s1 in vec2(), i1 in vec2(), s2 in vec2(), i2 in vec2(),
            z in 1.0..3000.0f64, cn2 in 0.0..1e-14f64,
        ) {
            let setup = PhysicalSetup::reference();
            let m = propagated_moments(&setup, &TurbulenceChannel::new(cn2).unwrap(), z).unwrap();
            let c = BiphotonCoords::new(s1, i1, s2, i2);
            let a = cross_spectral_density(&m, &c);
            let b = cross_spectral_density(&m, &c.swapped()).conj();
            prop_assert!((a - b).norm() <= 1e-14 * (1.0 + a.norm()));
        }

        #[test]
        fn diagonal_is_real_nonnegative(
            s in vec2(), i in vec2(), z in 0.0..5000.0f64, cn2 in 0.0..1e-14f64,
        ) {
            let setup = PhysicalSetup::reference();
            let m = propagated_moments(&setup, &TurbulenceChannel::new(cn2).unwrap(), z).unwrap();
            let v = cross_spectral_density(&m, &BiphotonCoords::diagonal(s, i));
            prop_assert!(v.im.abs() <= 1e-15 * (1.0 + v.re.abs()));
            prop_assert!(v.re >= 0.0);
        }

        #[test]
        fn spreading_is_monotone(z in 0.0..1e4f64, cn2 in 0.0..1e-13f64) {
            let setup = PhysicalSetup::reference();
            let m = propagated_moments(&setup, &TurbulenceChannel::new(cn2).unwrap(), z).unwrap();
            prop_assert!(m.w() >= setup.collimated_sum_waist);
            prop_assert!(m.sigma() >= setup.collimated_diff_waist);
            prop_assert_eq!(m.c_plus().is_some(), cn2 > 0.0 && z > 0.0);
        }

        #[test]
        fn couplings_shrink_with_turbulence(
            z in 1.0..1e4f64, cn2 in 1e-19..1e-13f64, bump in 1.01..100.0f64,
        ) {
            let setup = PhysicalSetup::reference();
            let a = propagated_moments(&setup, &TurbulenceChannel::new(cn2).unwrap(), z).unwrap();
            let b = propagated_moments(&setup, &TurbulenceChannel::new(cn2 * bump).unwrap(), z).unwrap();
            prop_assert!(b.c_plus().unwrap() < a.c_plus().unwrap());
            prop_assert!(b.c_minus().unwrap() < a.c_minus().unwrap());
        }
    }
}

//! Purity, position correlation and the conditional angle distribution.
//!
//! The coincidence distribution depends on the propagated widths only:
//! `P(ρs, ρi) = exp[-|ρs+ρi|²/2w² - |ρs-ρi|²/2σ²]`. Integrating out both radii
//! gives a closed form in the angle difference (see [`joint_angle_pdf`]).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagation::PropagatedMoments;
use crate::quadrature::gauss_legendre;
use crate::Vec2;

/// `tr ρ̂² = C+²C−² / ((C+² + 4w²)(C−² + 4σ²))`, exactly 1 without decoherence.
pub fn purity(moments: &PropagatedMoments) -> f64 {
    if moments.is_coherent() {
        return 1.0;
    }
    let w2 = moments.w().powi(2);
    let s2 = moments.sigma().powi(2);
    1.0 / ((1.0 + 4.0 * w2 * moments.plus.inv_coupling_sq)
        * (1.0 + 4.0 * s2 * moments.minus.inv_coupling_sq))
}

/// Normalized signal–idler position correlation `(w² − σ²)/(w² + σ²)`:
/// −1 perfectly anti-correlated, +1 perfectly correlated.
pub fn spatial_correlation(moments: &PropagatedMoments) -> f64 {
    let w2 = moments.w().powi(2);
    let s2 = moments.sigma().powi(2);
    (w2 - s2) / (w2 + s2)
}

/// Unnormalized coincidence density, 1 at the origin.
pub fn joint_position_pdf(moments: &PropagatedMoments, signal: Vec2, idler: Vec2) -> f64 {
    let w2 = moments.w().powi(2);
    let s2 = moments.sigma().powi(2);
    let sum = (signal[0] + idler[0]).powi(2) + (signal[1] + idler[1]).powi(2);
    let diff = (signal[0] - idler[0]).powi(2) + (signal[1] - idler[1]).powi(2);
    (-sum / (2.0 * w2) - diff / (2.0 * s2)).exp()
}

/// `g(y) = (1 − t cot t)/sin² t` with `t = arccos y`, i.e.
/// `½ ∫₀^π sinψ / (1 + y sinψ)² dψ`.
fn radial_kernel(y: f64) -> f64 {
    let t = y.clamp(-1.0, 1.0).acos();
    if t < 1e-2 {
        let t2 = t * t;
        return 1.0 / 3.0 + t2 * (2.0 / 15.0 + t2 * 2.0 / 63.0);
    }
    let (s, c) = t.sin_cos();
    (1.0 - t * c / s) / (s * s)
}

/// `α = (1/w² + 1/σ²)/2`, the isotropic part of the radial exponent.
fn radial_alpha(moments: &PropagatedMoments) -> f64 {
    0.5 * (moments.w().powi(-2) + moments.sigma().powi(-2))
}

/// `∬ r_s r_i P(r_s, θ_s, r_i, θ_i) dr_s dr_i`, evaluated in closed form.
/// Depends on `θ_s − θ_i` only.
pub fn joint_angle_pdf(moments: &PropagatedMoments, theta_s: f64, theta_i: f64) -> f64 {
    angle_difference_pdf(moments, theta_s - theta_i)
}

fn angle_difference_pdf(moments: &PropagatedMoments, delta: f64) -> f64 {
    let alpha = radial_alpha(moments);
    let fc = spatial_correlation(moments);
    radial_kernel(-fc * delta.cos()) / (4.0 * alpha * alpha)
}

/// `∫₀^{2π} joint_angle_pdf dθ_s = π w² σ² / 2`.
pub fn joint_angle_normalization(moments: &PropagatedMoments) -> f64 {
    0.5 * PI * moments.w().powi(2) * moments.sigma().powi(2)
}

/// Conditional signal-angle distribution given `θ_i = 0`, on a 2π window
/// centered at its circular mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleDistribution {
    /// Sample angles covering `[center − π, center + π)`.
    pub theta: Vec<f64>,
    /// Normalized density at `theta` (1/rad).
    pub density: Vec<f64>,
    pub window_center: f64,
    /// Density at the window edges `center ± π` (1/rad).
    pub boundary_density: f64,
    /// Standard deviation of `θ_s` within the window (rad).
    pub circular_std: f64,
}

/// Composite Gauss–Legendre panels on `[0, π]`, geometrically graded toward 0
/// down to `smallest`.
fn graded_panels(smallest: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![PI];
    let mut e = PI;
    while e > smallest {
        e *= 0.5;
        edges.push(e);
    }
    edges.push(0.0);
    edges.reverse();
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Moments of the angle distribution, returned as `(∫P, ∫Δ²P)` over the
/// window half `[0, π]` (doubled by symmetry), with Δ measured from the center.
fn window_moments(moments: &PropagatedMoments, center: f64, nodes: usize) -> (f64, f64) {
    let fc = spatial_correlation(moments).abs();
    // Peak half-width of the density around the center.
    let width = (2.0 * (1.0 - fc)).sqrt().max(1e-12);
    let gl = gauss_legendre(nodes);
    let mut mass = 0.0;
    let mut second = 0.0;
    for (a, b) in graded_panels(width * 1e-2) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        for (t, w) in gl.nodes.iter().zip(gl.weights.iter()) {
            let d = mid + half * t;
            let p = angle_difference_pdf(moments, center + d) * w * half;
            mass += p;
            second += d * d * p;
        }
    }
    (2.0 * mass, 2.0 * second)
}

/// Angle statistics at `θ_i = 0`. `grid_size` controls only the sampled
/// `theta`/`density` vectors; the moments use graded Gauss–Legendre panels and
/// are checked against the closed-form normalization.
pub fn conditional_angle_stats(
    moments: &PropagatedMoments,
    grid_size: usize,
) -> Result<AngleDistribution> {
    if grid_size < 64 {
        return Err(Error::Domain(format!(
            "angle grid needs at least 64 points, got {grid_size}"
        )));
    }
    // Mean direction: the density peaks at 0 for correlated photons, at π for
    // anti-correlated ones.
    let center = if spatial_correlation(moments) < 0.0 { PI } else { 0.0 };
    let (mass, second) = window_moments(moments, center, 32);
    let exact = joint_angle_normalization(moments);
    let rel = ((mass - exact) / exact).abs();
    if rel > 1e-9 {
        let (mass_fine, _) = window_moments(moments, center, 64);
        return Err(Error::Quadrature {
            best: mass_fine,
            estimate: (mass_fine - mass).abs(),
            tolerance: 1e-9,
        });
    }
    let norm = 1.0 / mass;
    let step = 2.0 * PI / grid_size as f64;
    let theta: Vec<f64> = (0..grid_size)
        .map(|j| center - PI + j as f64 * step)
        .collect();
    let density = theta
        .iter()
        .map(|&t| angle_difference_pdf(moments, t) * norm)
        .collect();
    Ok(AngleDistribution {
        theta,
        density,
        window_center: center,
        boundary_density: angle_difference_pdf(moments, center + PI) * norm,
        circular_std: (second * norm).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalSetup;
    use crate::propagation::propagated_moments;
    use crate::turbulence::TurbulenceChannel;
    use proptest::prelude::*;

    fn reference_moments(cn2: f64, z: f64) -> PropagatedMoments {
        let setup = PhysicalSetup::reference();
        propagated_moments(&setup, &TurbulenceChannel::new(cn2).unwrap(), z).unwrap()
    }

    #[test]
    fn purity_limits() {
        assert_eq!(purity(&reference_moments(1e-15, 0.0)), 1.0);
        assert_eq!(purity(&reference_moments(0.0, 5000.0)), 1.0);
        let g = purity(&reference_moments(1e-15, 2000.0));
        assert!(g > 0.0 && g < 1.0);
    }

    #[test]
    fn correlation_regimes() {
        let setup = PhysicalSetup::reference();
        assert!(spatial_correlation(&reference_moments(0.0, 0.0)) < -0.999);
        let zc = setup.correlation_crossover_distance();
        assert!(spatial_correlation(&reference_moments(0.0, zc)).abs() < 1e-12);
        let far = spatial_correlation(&reference_moments(0.0, 1e4));
        assert!(far > 0.999);
    }

    #[test]
    fn position_pdf_values() {
        let m = reference_moments(1e-16, 300.0);
        assert_eq!(joint_position_pdf(&m, [0.0, 0.0], [0.0, 0.0]), 1.0);
        let s = m.sigma() / 2f64.sqrt();
        let v = joint_position_pdf(&m, [s, 0.0], [-s, 0.0]);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn radial_kernel_branches_agree() {
        let t: f64 = 1.0001e-2;
        let y = t.cos();
        let (s, c) = t.sin_cos();
        let direct = (1.0 - t * c / s) / (s * s);
        let series = 1.0 / 3.0 + t * t * (2.0 / 15.0 + t * t * 2.0 / 63.0);
        assert!((direct - series).abs() < 1e-11);
        assert!((radial_kernel(y) - direct).abs() < 1e-11);
        assert!((radial_kernel(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_angle_case() {
        let m = PropagatedMoments::from_widths(0.01, 0.01);
        let a = conditional_angle_stats(&m, 64).unwrap();
        assert!((a.circular_std - PI / 3f64.sqrt()).abs() < 1e-12);
        assert!((a.boundary_density - 1.0 / (2.0 * PI)).abs() < 1e-12);
        assert!(a.density.iter().all(|d| (d - 1.0 / (2.0 * PI)).abs() < 1e-12));
    }

    #[test]
    fn correlated_regime_peaks_at_zero() {
        let m = PropagatedMoments::from_widths(1.0, 0.05);
        let a = conditional_angle_stats(&m, 128).unwrap();
        assert_eq!(a.window_center, 0.0);
        let peak = a
            .density
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .unwrap()
            .0;
        assert!(a.theta[peak].abs() < 1e-12);
    }

    #[test]
    fn small_grid_rejected() {
        let m = PropagatedMoments::from_widths(1.0, 0.5);
        assert!(conditional_angle_stats(&m, 32).is_err());
    }

    #[test]
    fn sampled_density_integrates_to_one() {
        for (w, s) in [(1.0, 0.5), (0.3, 1.0), (1.0, 0.99)] {
            let m = PropagatedMoments::from_widths(w, s);
            let a = conditional_angle_stats(&m, 256).unwrap();
            let total: f64 = a.density.iter().sum::<f64>() * 2.0 * PI / 256.0;
            assert!((total - 1.0).abs() < 1e-8, "{total}");
        }
    }

    proptest! {
        #[test]
        fn angle_pdf_shift_invariant(
            t_s in -10.0..10.0f64, t_i in -10.0..10.0f64, d in -10.0..10.0f64,
            z in 0.0..3000.0f64,
        ) {
            let m = reference_moments(1e-16, z);
            let a = joint_angle_pdf(&m, t_s, t_i);
            let b = joint_angle_pdf(&m, t_s + d, t_i + d);
            prop_assert!((a - b).abs() <= 1e-10 * a.abs());
        }

        #[test]
        fn angle_density_symmetric_and_positive(z in 0.0..5000.0f64, d in 0.0..3.14f64) {
            let m = reference_moments(1e-16, z);
            let a = conditional_angle_stats(&m, 64).unwrap();
            let c = a.window_center;
            let p = joint_angle_pdf(&m, c + d, 0.0);
            let q = joint_angle_pdf(&m, c - d, 0.0);
            prop_assert!(p >= 0.0);
            prop_assert!((p - q).abs() <= 1e-12 * p);
        }

        #[test]
        fn purity_in_unit_interval(z in 0.0..1e4f64, cn2 in 0.0..1e-14f64) {
            let g = purity(&reference_moments(cn2, z));
            prop_assert!(g > 0.0 && g <= 1.0);
        }
    }
}

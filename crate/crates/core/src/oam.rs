//! Laguerre–Gauss modes and the conditional OAM spectrum `P(l_s | l_i = 0)`.
//!
//! Summing the joint LG probabilities over both radial indices collapses the
//! radial basis to a delta function in radius, so the slice becomes an angular
//! Fourier transform of
//!
//! ```text
//! T(φs, φi) = ∫ d²a d²b W2(a, b, R(φs)·a, R(φi)·b)
//! ```
//!
//! where `a`, `b` are the signal/idler positions on the bra side and `R(φ)` is
//! a rotation. Because the kernel is a complex Gaussian in the four Cartesian
//! components of `(a, b)`, `T = π² / sqrt(det M(φs, φi))` exactly, which leaves
//! only the two rotation angles for the trapezoid rule. The analysis waist of
//! the LG basis drops out entirely.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::propagation::PropagatedMoments;

/// Largest radial index accepted by [`laguerre_poly`].
pub const MAX_RADIAL_INDEX: u32 = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct LgIndex {
    pub l: i32,
    pub p: u32,
}

impl LgIndex {
    pub fn new(l: i32, p: u32) -> Self {
        Self { l, p }
    }
}

/// Generalized Laguerre polynomial `L_p^α(x)` by upward recurrence.
pub fn laguerre_poly(p: u32, alpha: f64, x: f64) -> Result<f64> {
    if p > MAX_RADIAL_INDEX {
        return Err(Error::Domain(format!(
            "Laguerre degree {p} exceeds the stability bound {MAX_RADIAL_INDEX}"
        )));
    }
    if p == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Radial part of the normalized LG mode, `LG = R_lp(r) e^{ilθ}`, so that
/// `2π ∫ R_lp² r dr = 1`. Evaluated in log space to stay finite for large `p`
/// and `|l|`.
pub fn lg_radial(index: LgIndex, waist: f64, r: f64) -> Result<f64> {
    let al = index.l.unsigned_abs();
    let p = index.p;
    let x = 2.0 * r * r / (waist * waist);
    let lag = laguerre_poly(p, al as f64, x)?;
    if lag == 0.0 {
        return Ok(0.0);
    }
    // ln sqrt(2 p! / (π (p+|l|)!)) − ln w
    let ln_fact: f64 = ((p + 1)..=(p + al)).map(|j| (j as f64).ln()).sum();
    let mut ln_mag = 0.5 * ((2.0 / PI).ln() - ln_fact) - waist.ln() - 0.5 * x;
    if al > 0 {
        if r == 0.0 {
            return Ok(0.0);
        }
        ln_mag += al as f64 * (2f64.sqrt() * r / waist).ln();
    }
    Ok(lag.signum() * (ln_mag + lag.abs().ln()).exp())
}

/// Normalized LG mode at polar point `(r, θ)`.
pub fn lg_mode(index: LgIndex, waist: f64, r: f64, theta: f64) -> Result<Complex64> {
    if !(waist > 0.0 && waist.is_finite()) {
        return Err(Error::Parameter {
            field: "waist",
            value: waist,
            reason: "must be finite and strictly positive",
        });
    }
    let radial = lg_radial(index, waist, r)?;
    Ok(Complex64::from_polar(radial, index.l as f64 * theta))
}

/// Normalized `P(l | l_i = 0)` over `[-l_max, l_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OamSpectrum {
    pub l_max: u32,
    /// `probabilities[l + l_max]`; sums to 1 over the truncated range.
    pub probabilities: Vec<f64>,
    /// Fraction of the full spectrum lying outside `[-l_max, l_max]`.
    pub tail_mass: f64,
    /// LG basis waist used to label the spectrum; the result does not depend on it.
    pub analysis_waist: f64,
    pub z: f64,
    /// Final trapezoid node counts `(N_signal, N_difference)`.
    pub angular_nodes: (usize, usize),
}

impl OamSpectrum {
    pub fn probability(&self, l: i32) -> f64 {
        if l.unsigned_abs() > self.l_max {
            return 0.0;
        }
        self.probabilities[(l + self.l_max as i32) as usize]
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        let m = self.l_max as i32;
        -m..=m
    }

    pub fn mean(&self) -> f64 {
        self.indices()
            .zip(&self.probabilities)
            .map(|(l, p)| l as f64 * p)
            .sum()
    }

    fn concentrated(l_max: u32, analysis_waist: f64, z: f64) -> Self {
        let mut probabilities = vec![0.0; 2 * l_max as usize + 1];
        probabilities[l_max as usize] = 1.0;
        Self {
            l_max,
            probabilities,
            tail_mass: 0.0,
            analysis_waist,
            z,
            angular_nodes: (0, 0),
        }
    }
}

/// Grid and tolerance controls for [`conditional_oam_distribution_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OamOptions {
    pub initial_nodes: usize,
    /// Convergence threshold on `max_l |ΔP(l)|` between grid doublings.
    pub tolerance: f64,
    /// Upper bound on `N_signal · N_difference`.
    pub max_grid_points: usize,
    /// Largest tail mass accepted before reporting a truncation error. The
    /// standard deviation weights the tail by l², so this must be small.
    pub max_tail: f64,
}

impl Default for OamOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 256,
            tolerance: 1e-8,
            max_grid_points: 1 << 24,
            max_tail: 1e-6,
        }
    }
}

type Mat4 = [[Complex64; 4]; 4];

/// Adds `coef · Lᵀ L` for a 2×4 real matrix `L`.
#[inline]
fn add_gram(m: &mut Mat4, coef: Complex64, l: &[[f64; 4]; 2]) {
    for i in 0..4 {
        for j in i..4 {
            let g = l[0][i] * l[0][j] + l[1][i] * l[1][j];
            if g != 0.0 {
                m[i][j] += coef * g;
            }
        }
    }
}

/// Precomputed coefficients of the quadratic form.
#[derive(Debug, Clone, Copy)]
struct FormCoefficients {
    bra_plus: Complex64,
    ket_plus: Complex64,
    bra_minus: Complex64,
    ket_minus: Complex64,
    coupling_plus: f64,
    coupling_minus: f64,
}

impl FormCoefficients {
    fn new(m: &PropagatedMoments) -> Self {
        let k = m.wavenumber;
        let gp = 0.5 / m.w().powi(2);
        let gm = 0.5 / m.sigma().powi(2);
        let pp = 0.5 * k * m.plus.curvature;
        let pm = 0.5 * k * m.minus.curvature;
        Self {
            bra_plus: Complex64::new(gp, pp),
            ket_plus: Complex64::new(gp, -pp),
            bra_minus: Complex64::new(gm, pm),
            ket_minus: Complex64::new(gm, -pm),
            coupling_plus: m.plus.inv_coupling_sq,
            coupling_minus: m.minus.inv_coupling_sq,
        }
    }

    /// Symmetric matrix `M` with `W2(a, b, R_s a, R_i b) = exp(−xᵀ M x)`,
    /// `x = (a_x, a_y, b_x, b_y)`. Only the upper triangle is filled.
    fn matrix(&self, (cs, ss): (f64, f64), (ci, si): (f64, f64)) -> Mat4 {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let l1p = [[r, 0.0, r, 0.0], [0.0, r, 0.0, r]];
        let l1m = [[r, 0.0, -r, 0.0], [0.0, r, 0.0, -r]];
        let l2p = [[r * cs, -r * ss, r * ci, -r * si], [r * ss, r * cs, r * si, r * ci]];
        let l2m = [[r * cs, -r * ss, -r * ci, r * si], [r * ss, r * cs, -r * si, -r * ci]];
        let sub = |a: &[[f64; 4]; 2], b: &[[f64; 4]; 2]| {
            let mut d = [[0.0; 4]; 2];
            for i in 0..2 {
                for j in 0..4 {
                    d[i][j] = a[i][j] - b[i][j];
                }
            }
            d
        };
        let zero = Complex64::new(0.0, 0.0);
        let mut m = [[zero; 4]; 4];
        add_gram(&mut m, self.bra_plus, &l1p);
        add_gram(&mut m, self.ket_plus, &l2p);
        add_gram(&mut m, self.bra_minus, &l1m);
        add_gram(&mut m, self.ket_minus, &l2m);
        if self.coupling_plus != 0.0 {
            add_gram(&mut m, Complex64::new(self.coupling_plus, 0.0), &sub(&l2p, &l1p));
        }
        if self.coupling_minus != 0.0 {
            add_gram(&mut m, Complex64::new(self.coupling_minus, 0.0), &sub(&l2m, &l1m));
        }
        m
    }

    /// `1/sqrt(det M)` via LDLᵀ without pivoting. The real part of `M` is
    /// positive definite, so every pivot has positive real part and the
    /// principal square root of each pivot selects the correct branch.
    fn inv_sqrt_det(&self, rot_s: (f64, f64), rot_i: (f64, f64)) -> Complex64 {
        let mut a = self.matrix(rot_s, rot_i);
        let mut acc = Complex64::new(1.0, 0.0);
        for k in 0..4 {
            let d = a[k][k];
            acc /= d.sqrt();
            for i in (k + 1)..4 {
                let f = a[k][i] / d;
                for j in i..4 {
                    let t = f * a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        acc
    }
}

/// `T(φs, φi)/π²`: the radially-traced kernel at rotation angles `φs`, `φi`.
pub fn angular_kernel(moments: &PropagatedMoments, phi_s: f64, phi_i: f64) -> Complex64 {
    let c = FormCoefficients::new(moments);
    c.inv_sqrt_det(
        (phi_s.cos(), phi_s.sin()),
        (phi_i.cos(), phi_i.sin()),
    )
}

/// Nested trapezoid grid: per signal angle, the running sum over difference angles.
struct AngularGrid {
    coef: FormCoefficients,
    n_diff: usize,
    /// `sums[j] = Σ_m T(φs_j, φs_j − φ−_m)` over the current `n_diff` nodes.
    sums: Vec<f64>,
}

impl AngularGrid {
    fn new(coef: FormCoefficients, n_sig: usize, n_diff: usize) -> Self {
        let sums = (0..n_sig)
            .into_par_iter()
            .map(|j| Self::row(&coef, 2.0 * PI * j as f64 / n_sig as f64, n_diff, 0, 1))
            .collect();
        Self { coef, n_diff, sums }
    }

    /// `Σ_{m = start, start+step, ...} T(φs, φs − 2πm/n)`.
    fn row(coef: &FormCoefficients, phi_s: f64, n: usize, start: usize, step: usize) -> f64 {
        let rot_s = (phi_s.cos(), phi_s.sin());
        let mut acc = 0.0;
        let mut m = start;
        while m < n {
            let phi_i = phi_s - 2.0 * PI * m as f64 / n as f64;
            // T is real: Hermiticity maps (φs, φi) to (−φs, −φi), reflection maps it back.
            acc += coef.inv_sqrt_det(rot_s, (phi_i.cos(), phi_i.sin())).re;
            m += step;
        }
        acc
    }

    fn n_sig(&self) -> usize {
        self.sums.len()
    }

    fn refine_diff(&mut self) {
        let n = 2 * self.n_diff;
        let n_sig = self.n_sig();
        let coef = self.coef;
        let extra: Vec<f64> = (0..n_sig)
            .into_par_iter()
            .map(|j| Self::row(&coef, 2.0 * PI * j as f64 / n_sig as f64, n, 1, 2))
            .collect();
        for (s, e) in self.sums.iter_mut().zip(extra) {
            *s += e;
        }
        self.n_diff = n;
    }

    fn refine_sig(&mut self) {
        let n = 2 * self.n_sig();
        let coef = self.coef;
        let n_diff = self.n_diff;
        let odd: Vec<f64> = (0..n / 2)
            .into_par_iter()
            .map(|j| Self::row(&coef, 2.0 * PI * (2 * j + 1) as f64 / n as f64, n_diff, 0, 1))
            .collect();
        let mut sums = Vec::with_capacity(n);
        for (even, o) in self.sums.iter().zip(odd) {
            sums.push(*even);
            sums.push(o);
        }
        self.sums = sums;
    }

    /// Fourier coefficients `c_l`, `|l| ≤ l_max`, and the total `Σ_all c_l = H(0)`.
    fn coefficients(&self, l_max: u32) -> (Vec<f64>, f64) {
        let n = self.n_sig();
        let scale = 1.0 / (n as f64 * self.n_diff as f64);
        let coeffs = (-(l_max as i64)..=l_max as i64)
            .map(|l| {
                let mut acc = 0.0;
                for (j, h) in self.sums.iter().enumerate() {
                    // H is even in φs, so only the cosine part survives.
                    let idx = (l * j as i64).rem_euclid(n as i64) as f64;
                    acc += h * (2.0 * PI * idx / n as f64).cos();
                }
                acc * scale
            })
            .collect();
        (coeffs, self.sums[0] / self.n_diff as f64)
    }

    fn normalized(&self, l_max: u32) -> (Vec<f64>, f64) {
        let (c, total) = self.coefficients(l_max);
        let kept: f64 = c.iter().sum();
        (c.iter().map(|v| v / kept).collect(), 1.0 - kept / total)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Conditional OAM spectrum with default grid controls.
pub fn conditional_oam_distribution(
    moments: &PropagatedMoments,
    l_max: u32,
    analysis_waist: f64,
) -> Result<OamSpectrum> {
    conditional_oam_distribution_with(moments, l_max, analysis_waist, &OamOptions::default())
}

pub fn conditional_oam_distribution_with(
    moments: &PropagatedMoments,
    l_max: u32,
    analysis_waist: f64,
    options: &OamOptions,
) -> Result<OamSpectrum> {
    spectrum(moments, l_max, l_max, analysis_waist, options)
}

/// Like [`conditional_oam_distribution_with`], doubling `l_max` (up to
/// `l_max_limit`) while the tail is too heavy. The angular grid is reused
/// across doublings.
pub fn conditional_oam_distribution_auto(
    moments: &PropagatedMoments,
    l_max: u32,
    l_max_limit: u32,
    analysis_waist: f64,
    options: &OamOptions,
) -> Result<OamSpectrum> {
    if l_max_limit < l_max {
        return Err(Error::Domain(format!(
            "l_max_limit {l_max_limit} is below l_max {l_max}"
        )));
    }
    spectrum(moments, l_max, l_max_limit, analysis_waist, options)
}

/// Refines `grid` until the truncated spectrum changes by less than the
/// tolerance under doubling of either angle. Returns `(P, tail)`.
fn converge(grid: &mut AngularGrid, l_max: u32, options: &OamOptions) -> Result<(Vec<f64>, f64)> {
    let budget_error = |grid: &AngularGrid| Error::Quadrature {
        best: grid.n_sig() as f64 * grid.n_diff as f64,
        estimate: f64::NAN,
        tolerance: options.tolerance,
    };
    let min_sig = (4 * (l_max as usize + 1)).next_power_of_two();
    while grid.n_sig() < min_sig {
        grid.refine_sig();
    }
    let (mut probs, _) = grid.normalized(l_max);
    loop {
        let mut changed = false;
        // difference angle: the coupling Gaussians make this the sharp direction
        loop {
            if grid.n_sig() * grid.n_diff * 2 > options.max_grid_points {
                return Err(budget_error(grid));
            }
            grid.refine_diff();
            let (p, _) = grid.normalized(l_max);
            let change = max_abs_diff(&p, &probs);
            probs = p;
            if change < options.tolerance {
                break;
            }
            changed = true;
        }
        if grid.n_sig() * grid.n_diff * 2 > options.max_grid_points {
            return Err(budget_error(grid));
        }
        grid.refine_sig();
        let (p, t) = grid.normalized(l_max);
        let change = max_abs_diff(&p, &probs);
        probs = p;
        let tail = t;
        if change >= options.tolerance {
            changed = true;
        }
        if !changed {
            return Ok((probs, tail));
        }
    }
}

fn spectrum(
    moments: &PropagatedMoments,
    l_max: u32,
    l_max_limit: u32,
    analysis_waist: f64,
    options: &OamOptions,
) -> Result<OamSpectrum> {
    if l_max < 1 {
        return Err(Error::Domain("l_max must be at least 1".into()));
    }
    if !(analysis_waist > 0.0 && analysis_waist.is_finite()) {
        return Err(Error::Parameter {
            field: "analysis_waist",
            value: analysis_waist,
            reason: "must be finite and strictly positive",
        });
    }
    if options.initial_nodes < 8 {
        return Err(Error::Domain("initial_nodes must be at least 8".into()));
    }
    // Without decoherence the state is invariant under joint rotations, so
    // total OAM is conserved and l_i = 0 forces l_s = 0.
    if moments.is_coherent() {
        return Ok(OamSpectrum::concentrated(l_max, analysis_waist, moments.z));
    }

    let mut l_max = l_max;
    let mut grid = AngularGrid::new(
        FormCoefficients::new(moments),
        options.initial_nodes,
        options.initial_nodes,
    );
    let (mut p, mut t) = converge(&mut grid, l_max, options)?;
    while t > options.max_tail {
        if 2 * l_max > l_max_limit {
            return Err(Error::Truncation { l_max, tail: t });
        }
        // The difference-angle resolution does not depend on l_max; only the
        // sum-angle sampling has to keep up with the wider l range. Accept the
        // wider spectrum directly if the already-converged band is unchanged.
        let (old, old_kept) = (p, 1.0 - t);
        l_max *= 2;
        let min_sig = (4 * (l_max as usize + 1)).next_power_of_two();
        while grid.n_sig() < min_sig {
            grid.refine_sig();
        }
        (p, t) = grid.normalized(l_max);
        let offset = (p.len() - old.len()) / 2;
        // compare on the un-renormalized scale, where the band should not move
        let kept = 1.0 - t;
        let change = p[offset..offset + old.len()]
            .iter()
            .zip(&old)
            .map(|(a, b)| (a * kept - b * old_kept).abs())
            .fold(0.0, f64::max);
        if change >= options.tolerance {
            (p, t) = converge(&mut grid, l_max, options)?;
        }
    }
    let (mut probs, tail) = (p, t);

    for v in probs.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-10 {
                return Err(Error::Consistency(format!(
                    "negative OAM probability {v:e}"
                )));
            }
            *v = 0.0;
        }
    }
    // Enforce exact mirror symmetry; the two halves agree to rounding already.
    let n = probs.len();
    for i in 0..n / 2 {
        let avg = 0.5 * (probs[i] + probs[n - 1 - i]);
        probs[i] = avg;
        probs[n - 1 - i] = avg;
    }
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|v| *v /= s);
    Ok(OamSpectrum {
        l_max,
        probabilities: probs,
        tail_mass: tail.max(0.0),
        analysis_waist,
        z: moments.z,
        angular_nodes: (grid.n_sig(), grid.n_diff),
    })
}

/// Standard deviation of `l` (units of ħ); errors if the mean is not ≈ 0.
pub fn conditional_oam_uncertainty(spectrum: &OamSpectrum) -> Result<f64> {
    let mean = spectrum.mean();
    if mean.abs() > 1e-6 {
        return Err(Error::Consistency(format!(
            "OAM spectrum mean {mean:e} is not zero"
        )));
    }
    let second: f64 = spectrum
        .indices()
        .zip(&spectrum.probabilities)
        .map(|(l, p)| (l as f64).powi(2) * p)
        .sum();
    Ok((second - mean * mean).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalSetup;
    use crate::propagation::propagated_moments;
    use crate::turbulence::TurbulenceChannel;

    fn binom(n: f64, k: u32) -> f64 {
        let mut r = 1.0;
        for j in 0..k {
            r *= (n - j as f64) / (j + 1) as f64;
        }
        r
    }

    fn laguerre_series(p: u32, alpha: f64, x: f64) -> f64 {
        let mut fact = 1.0;
        let mut sum = 0.0;
        for k in 0..=p {
            if k > 0 {
                fact *= k as f64;
            }
            sum += (-1f64).powi(k as i32) * binom(p as f64 + alpha, p - k) * x.powi(k as i32) / fact;
        }
        sum
    }

    #[test]
    fn laguerre_seeds_and_series() {
        assert_eq!(laguerre_poly(0, 2.5, 7.0).unwrap(), 1.0);
        assert!((laguerre_poly(1, 2.0, 0.3).unwrap() - 2.7).abs() < 1e-15);
        let v = laguerre_poly(5, 2.0, 1.5).unwrap();
        assert!((v - laguerre_series(5, 2.0, 1.5)).abs() < 1e-13);
        assert!((v + 2.524_218_75).abs() < 1e-13, "{v}");
        assert!(laguerre_poly(301, 0.0, 1.0).is_err());
    }

    #[test]
    fn fundamental_mode() {
        let w = 1.3e-3;
        let r = 0.7e-3;
        let v = lg_mode(LgIndex::new(0, 0), w, r, 0.4).unwrap();
        let expected = (2.0 / PI).sqrt() / w * (-(r * r) / (w * w)).exp();
        assert!((v.re - expected).abs() < 1e-12 * expected);
        assert!(v.im.abs() < 1e-15 * expected);
    }

    #[test]
    fn mode_magnitude_independent_of_angle() {
        let idx = LgIndex::new(-3, 4);
        let a = lg_mode(idx, 1.0, 0.8, 0.1).unwrap().norm();
        let b = lg_mode(idx, 1.0, 0.8, 2.9).unwrap().norm();
        assert!((a - b).abs() < 1e-15 * a);
    }

    fn overlap(a: LgIndex, b: LgIndex, w: f64) -> Complex64 {
        let specs = [
            crate::quadrature::QuadratureSpec::radial(w).with_nodes(128),
            crate::quadrature::QuadratureSpec::periodic(64),
        ];
        crate::quadrature::integrate_fixed(
            |p: &[f64]| {
                let (r, t) = (p[0], p[1]);
                lg_mode(a, w, r, t).unwrap().conj() * lg_mode(b, w, r, t).unwrap() * r
            },
            &specs,
        )
        .unwrap()
    }

    #[test]
    fn orthonormality() {
        let w = 2.0;
        assert!((overlap(LgIndex::new(0, 0), LgIndex::new(0, 0), w) - 1.0).norm() < 1e-10);
        assert!((overlap(LgIndex::new(2, 3), LgIndex::new(2, 3), w) - 1.0).norm() < 1e-10);
        assert!(overlap(LgIndex::new(1, 0), LgIndex::new(0, 0), w).norm() < 1e-10);
        assert!(overlap(LgIndex::new(1, 0), LgIndex::new(1, 2), w).norm() < 1e-10);
    }

    #[test]
    fn uncertainty_simple_spectra() {
        let mut s = OamSpectrum::concentrated(3, 1.0, 0.0);
        assert_eq!(conditional_oam_uncertainty(&s).unwrap(), 0.0);
        s.probabilities = vec![0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0];
        let u = conditional_oam_uncertainty(&s).unwrap();
        assert!((u - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        s.probabilities = vec![0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0];
        assert!(matches!(conditional_oam_uncertainty(&s), Err(Error::Consistency(_))));
    }

    #[test]
    fn free_space_is_concentrated() {
        let setup = PhysicalSetup::reference();
        let m = propagated_moments(&setup, &TurbulenceChannel::free_space(), 700.0).unwrap();
        let s = conditional_oam_distribution(&m, 10, setup.collimated_diff_waist).unwrap();
        assert_eq!(s.probability(0), 1.0);
        assert_eq!(s.tail_mass, 0.0);
    }

    #[test]
    fn kernel_is_real_and_even() {
        let setup = PhysicalSetup::reference();
        let m = propagated_moments(&setup, &TurbulenceChannel::new(1e-16).unwrap(), 800.0).unwrap();
        let a = angular_kernel(&m, 0.3, -0.2);
        let b = angular_kernel(&m, -0.3, 0.2);
        assert!(a.im.abs() < 1e-10 * a.norm());
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn turbulent_spectrum_invariants() {
        let setup = PhysicalSetup::reference();
        let m = propagated_moments(&setup, &TurbulenceChannel::new(1e-16).unwrap(), 500.0).unwrap();
        let s = conditional_oam_distribution(&m, 15, setup.collimated_diff_waist).unwrap();
        let total: f64 = s.probabilities.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        for l in 1..=15 {
            assert!((s.probability(l) - s.probability(-l)).abs() < 1e-12);
        }
        assert!(s.probability(0) > s.probability(1));
        assert!(s.tail_mass < 1e-6);
        let u = conditional_oam_uncertainty(&s).unwrap();
        assert!(u > 0.5 && u < 1.2, "{u}");
    }

    #[test]
    fn truncation_is_reported() {
        let setup = PhysicalSetup::reference();
        let m = propagated_moments(&setup, &TurbulenceChannel::new(1e-15).unwrap(), 2000.0).unwrap();
        let e = conditional_oam_distribution(&m, 3, 1.0).unwrap_err();
        assert!(matches!(e, Error::Truncation { l_max: 3, .. }));
    }
}

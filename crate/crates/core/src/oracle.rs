//! Independent validators. Each one re-derives a main-path quantity by a
//! different route: brute-force quadrature of the Fresnel integral, generic
//! complex-Gaussian linear algebra, explicit trace composition, explicit
//! Laguerre–Gauss overlaps, and direct radial quadrature. Grids and mappings
//! are deliberately unrelated to those of the main path.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oam::{lg_radial, LgIndex, MAX_RADIAL_INDEX};
use crate::params::{derive_setup, PhysicalSetup};
use crate::propagation::{cross_spectral_density, BiphotonCoords, PropagatedMoments};
use crate::Vec2;
use crate::quadrature::{
    gauss_legendre, integrate_fixed, integrate_nd, integrate_radial, QuadratureSpec,
};
use crate::turbulence::{check_distance, inverse_square_coherence_length, TurbulenceChannel};

/// Bumped whenever an oracle's numerical method changes.
pub const ORACLE_VERSION: &str = "1";

/// Per-axis probe `(x_s1, x_i1, x_s2, x_i2)`.
type AxisProbe = [f64; 4];

fn axis_probes(coords: &BiphotonCoords) -> [AxisProbe; 2] {
    let c = coords;
    [
        [c.signal_1[0], c.idler_1[0], c.signal_2[0], c.idler_2[0]],
        [c.signal_1[1], c.idler_1[1], c.signal_2[1], c.idler_2[1]],
    ]
}

/// Controls for [`brute_force_w2`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForceOptions {
    /// Initial Gauss–Legendre nodes per axis.
    pub nodes: usize,
    /// Half-width of each source-plane integration range in units of the
    /// collimated waist along that direction.
    pub extent: f64,
    pub rel_tol: f64,
    pub max_levels: usize,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            nodes: 24,
            extent: 7.5,
            rel_tol: 1e-8,
            max_levels: 3,
        }
    }
}

/// The one-axis Fresnel integral of the source kernel with the turbulence
/// factor, integrated over the four source-plane coordinates. Nodes are laid
/// out along the collimated sum/difference directions; the integrand itself
/// is written in signal/idler coordinates.
fn brute_force_axis(
    setup: &PhysicalSetup,
    inv_rho0_sq: f64,
    z: f64,
    probe: AxisProbe,
    options: &BruteForceOptions,
) -> Result<Complex64> {
    let k = setup.wavenumber;
    let a_p = setup.collimated_sum_waist;
    let a_m = setup.collimated_diff_waist;
    let [xs1, xi1, xs2, xi2] = probe;
    let ds = xs1 - xs2;
    let di = xi1 - xi2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let source = |s: f64, i: f64| -((s + i).powi(2)) / (4.0 * a_p * a_p) - (s - i).powi(2) / (4.0 * a_m * a_m);
    let f = |p: &[f64]| {
        let (p1, m1, p2, m2) = (p[0], p[1], p[2], p[3]);
        let s1 = r * (p1 + m1);
        let i1 = r * (p1 - m1);
        let s2 = r * (p2 + m2);
        let i2 = r * (p2 - m2);
        let dsp = s1 - s2;
        let dip = i1 - i2;
        let re = source(s1, i1) + source(s2, i2)
            - inv_rho0_sq * (dsp * dsp + dsp * ds + ds * ds + dip * dip + dip * di + di * di);
        let im = k / (2.0 * z)
            * ((xs2 - s2).powi(2) + (xi2 - i2).powi(2) - (xs1 - s1).powi(2) - (xi1 - i1).powi(2));
        Complex64::from_polar(re.exp(), im)
    };
    let lp = options.extent * a_p;
    let lm = options.extent * a_m;
    let spec = |l: f64| {
        QuadratureSpec::interval(-l, l)
            .with_nodes(options.nodes)
            .with_tolerance(options.rel_tol)
            .with_max_levels(options.max_levels)
    };
    Ok(integrate_nd(f, &[spec(lp), spec(lm), spec(lp), spec(lm)])?.value)
}

/// Propagated kernel by direct quadrature of the Fresnel integral, per axis,
/// normalized by its value at the origin. Requires `z > 0`; the chirp of the
/// Fresnel kernel limits this route to distances of order the Rayleigh range
/// of the difference mode or larger (see [`gaussian_w2`] for short ranges).
pub fn brute_force_w2(
    setup: &PhysicalSetup,
    channel: &TurbulenceChannel,
    z: f64,
    coords: &BiphotonCoords,
    options: &BruteForceOptions,
) -> Result<Complex64> {
    Ok(brute_force_w2_batch(setup, channel, z, std::slice::from_ref(coords), options)?[0])
}

/// [`brute_force_w2`] over many probes sharing one origin normalization.
pub fn brute_force_w2_batch(
    setup: &PhysicalSetup,
    channel: &TurbulenceChannel,
    z: f64,
    probes: &[BiphotonCoords],
    options: &BruteForceOptions,
) -> Result<Vec<Complex64>> {
    let z = check_distance(z)?;
    if z == 0.0 {
        return Err(Error::Domain("brute-force Fresnel quadrature needs z > 0".into()));
    }
    let u = inverse_square_coherence_length(channel, setup, z)?;
    let origin = brute_force_axis(setup, u, z, [0.0; 4], options)?;
    probes
        .iter()
        .map(|c| {
            let mut out = Complex64::new(1.0, 0.0);
            for probe in axis_probes(c) {
                out *= brute_force_axis(setup, u, z, probe, options)? / origin;
            }
            Ok(out)
        })
        .collect()
}

/// Deterministic probe points where the kernel is of order one: per axis the
/// sum coordinates are spread over the propagated sum width, the difference
/// coordinates over the smaller of the difference width and the coupling
/// length. `seed` selects the sequence.
pub fn kernel_probes(moments: &PropagatedMoments, count: usize, seed: u64) -> Vec<BiphotonCoords> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let w = moments.w();
    let spread = |c: Option<f64>, width: f64| c.map_or(width, |c| c.min(width));
    let sp = 0.5 * spread(moments.c_plus(), w);
    let sm = 0.5 * spread(moments.c_minus(), moments.sigma());
    let mut draw = |s: f64| -> Vec2 { [s * rng.gen_range(-1.0..1.0), s * rng.gen_range(-1.0..1.0)] };
    (0..count)
        .map(|_| BiphotonCoords::from_sum_diff(draw(sp), draw(sm), draw(sp), draw(sm)))
        .collect()
}

/// Quadratic form `xᵀ A x + bᵀ x + c` in the four source-plane coordinates
/// `(s1', i1', s2', i2')` of one axis.
#[derive(Debug, Clone, Copy)]
struct QuadForm {
    a: [[Complex64; 4]; 4],
    b: [Complex64; 4],
    c: Complex64,
}

impl QuadForm {
    fn new() -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            a: [[zero; 4]; 4],
            b: [zero; 4],
            c: zero,
        }
    }

    /// Adds `coef · (vᵀx + w)²`.
    fn add_square(&mut self, coef: Complex64, v: [f64; 4], w: f64) {
        for i in 0..4 {
            for j in 0..4 {
                self.a[i][j] += coef * v[i] * v[j];
            }
            self.b[i] += coef * 2.0 * w * v[i];
        }
        self.c += coef * w * w;
    }

    /// Adds `coef · (vᵀx) · w`.
    fn add_bilinear(&mut self, coef: Complex64, v: [f64; 4], w: f64) {
        for i in 0..4 {
            self.b[i] += coef * w * v[i];
        }
    }

    /// `log ∫ exp(form) d⁴x` minus the `b`/`c`-independent part:
    /// `−bᵀA⁻¹b/4 + c`.
    fn reduced_log_integral(&self) -> Result<Complex64> {
        let y = solve4(self.a, self.b)?;
        let mut q = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            q += self.b[i] * y[i];
        }
        Ok(-q / 4.0 + self.c)
    }
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[Complex64; 4]; 4], mut b: [Complex64; 4]) -> Result<[Complex64; 4]> {
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        if a[piv][col].norm() == 0.0 {
            return Err(Error::Consistency("singular Gaussian form".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                let t = f * a[col][k];
                a[row][k] -= t;
            }
            let t = f * b[col];
            b[row] -= t;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 4];
    for row in (0..4).rev() {
        let mut s = b[row];
        for k in (row + 1)..4 {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Ok(x)
}

fn gaussian_axis(setup: &PhysicalSetup, u: f64, z: f64, probe: AxisProbe) -> Result<Complex64> {
    let k = setup.wavenumber;
    let a_p = setup.collimated_sum_waist;
    let a_m = setup.collimated_diff_waist;
    let [xs1, xi1, xs2, xi2] = probe;
    let re = |v: f64| Complex64::new(v, 0.0);
    let mut q = QuadForm::new();
    // source amplitudes on both sides
    for (s, i) in [(0, 1), (2, 3)] {
        let mut plus = [0.0; 4];
        plus[s] = 1.0;
        plus[i] = 1.0;
        let mut minus = [0.0; 4];
        minus[s] = 1.0;
        minus[i] = -1.0;
        q.add_square(re(-1.0 / (4.0 * a_p * a_p)), plus, 0.0);
        q.add_square(re(-1.0 / (4.0 * a_m * a_m)), minus, 0.0);
    }
    // Fresnel phases: ket side +, bra side −
    let chirp = Complex64::new(0.0, k / (2.0 * z));
    let unit = |i: usize| {
        let mut v = [0.0; 4];
        v[i] = -1.0;
        v
    };
    q.add_square(chirp, unit(2), xs2);
    q.add_square(chirp, unit(3), xi2);
    q.add_square(-chirp, unit(0), xs1);
    q.add_square(-chirp, unit(1), xi1);
    // turbulence: per photon −u (d'² + d'·d + d²)
    if u != 0.0 {
        for (one, two, d) in [(0, 2, xs1 - xs2), (1, 3, xi1 - xi2)] {
            let mut v = [0.0; 4];
            v[one] = 1.0;
            v[two] = -1.0;
            q.add_square(re(-u), v, 0.0);
            q.add_bilinear(re(-u), v, d);
            q.c += re(-u * d * d);
        }
    }
    q.reduced_log_integral()
}

/// Propagated kernel by exact complex-Gaussian integration of the Fresnel
/// integral: the source-plane form is assembled term by term and integrated
/// by a 4×4 linear solve per axis. Valid for any `z > 0`, including the
/// short-range regime where quadrature cannot resolve the chirp.
pub fn gaussian_w2(
    setup: &PhysicalSetup,
    channel: &TurbulenceChannel,
    z: f64,
    coords: &BiphotonCoords,
) -> Result<Complex64> {
    let z = check_distance(z)?;
    if z == 0.0 {
        return Err(Error::Domain("Fresnel integral needs z > 0".into()));
    }
    let u = inverse_square_coherence_length(channel, setup, z)?;
    let origin = gaussian_axis(setup, u, z, [0.0; 4])?;
    let mut log = Complex64::new(0.0, 0.0);
    for probe in axis_probes(coords) {
        log += gaussian_axis(setup, u, z, probe)? - origin;
    }
    Ok(log.exp())
}

/// Input-plane kernel `ψ*(1) ψ(2)` of the collimated state (peak 1).
pub fn input_kernel(setup: &PhysicalSetup, coords: &BiphotonCoords) -> f64 {
    let a_p = setup.collimated_sum_waist;
    let a_m = setup.collimated_diff_waist;
    let amp = |s: [f64; 2], i: [f64; 2]| {
        let sum = (s[0] + i[0]).powi(2) + (s[1] + i[1]).powi(2);
        let diff = (s[0] - i[0]).powi(2) + (s[1] - i[1]).powi(2);
        -sum / (4.0 * a_p * a_p) - diff / (4.0 * a_m * a_m)
    };
    (amp(coords.signal_1, coords.idler_1) + amp(coords.signal_2, coords.idler_2)).exp()
}

/// `tr ρ̂² / (tr ρ̂)²` by explicit composition of the closed-form kernel.
/// The two transverse axes are identical, so the one-axis ratio is squared.
///
/// The composition integral runs over the bra/ket midpoints and separations
/// of the sum and difference coordinates; each range is sized from the decay
/// scales of `|W2|²` along that direction.
pub fn trace_purity_check(moments: &PropagatedMoments, nodes: usize) -> Result<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let kernel = |p1: f64, m1: f64, p2: f64, m2: f64| {
        let c = BiphotonCoords::new(
            [r * (p1 + m1), 0.0],
            [r * (p1 - m1), 0.0],
            [r * (p2 + m2), 0.0],
            [r * (p2 - m2), 0.0],
        );
        cross_spectral_density(moments, &c)
    };
    let extent = 8.0;
    let mid = |width: f64| width * r;
    let sep = |width: f64, inv_c2: f64| (0.5 / (width * width) + 2.0 * inv_c2).powf(-0.5);
    let span = |scale: f64| {
        QuadratureSpec::interval(-extent * scale, extent * scale)
            .with_nodes(nodes)
            .with_tolerance(1e-9)
            .with_max_levels(3)
    };
    let (w, s) = (moments.w(), moments.sigma());
    let trace = integrate_nd(
        |p: &[f64]| kernel(p[0], p[1], p[0], p[1]).re,
        &[span(mid(w)), span(mid(s))],
    )?
    .value;
    let square = integrate_nd(
        |p: &[f64]| {
            let (pc, pd, mc, md) = (p[0], p[1], p[2], p[3]);
            let (p1, p2) = (pc - 0.5 * pd, pc + 0.5 * pd);
            let (m1, m2) = (mc - 0.5 * md, mc + 0.5 * md);
            (kernel(p1, m1, p2, m2) * kernel(p2, m2, p1, m1)).re
        },
        &[
            span(mid(w)),
            span(sep(w, moments.plus.inv_coupling_sq)),
            span(mid(s)),
            span(sep(s, moments.minus.inv_coupling_sq)),
        ],
    )?
    .value;
    Ok((square / (trace * trace)).powi(2))
}

/// `∬ r_s r_i P dr_s dr_i` by direct quadrature in the rotated radial
/// coordinates `u = (r_s + r_i)/√2`, `v = (r_s − r_i)/√2` over the wedge `|v| ≤ u`.
pub fn angle_pdf_quadrature(moments: &PropagatedMoments, delta: f64) -> Result<f64> {
    let w2 = moments.w().powi(2);
    let s2 = moments.sigma().powi(2);
    // exponent: −A(r_s² + r_i²) − B r_s r_i
    let a = 0.5 * (1.0 / w2 + 1.0 / s2);
    let b = (1.0 / w2 - 1.0 / s2) * delta.cos();
    let cu = a + 0.5 * b;
    let cv = a - 0.5 * b;
    let su = cu.powf(-0.5);
    let sv = cv.powf(-0.5);
    let inner = |u: f64| -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        let lim = u.min(9.0 * sv);
        let spec = QuadratureSpec::interval(-lim, lim)
            .with_nodes(24)
            .with_tolerance(1e-11)
            .with_abs_tolerance(1e-300);
        integrate_radial(|v| 0.5 * (u * u - v * v) * (-cv * v * v).exp(), &spec)
            .map(|e| e.value * (-cu * u * u).exp())
    };
    let spec = QuadratureSpec::radial(2.0 * su).with_nodes(48).with_tolerance(1e-11);
    let outer = integrate_radial(|u| inner(u).unwrap_or(f64::NAN), &spec)?;
    if !outer.value.is_finite() {
        return Err(Error::Quadrature {
            best: outer.value,
            estimate: outer.error,
            tolerance: 1e-11,
        });
    }
    Ok(outer.value)
}

/// Conditional angle statistics `(Δθ, P(θ0))` from a dense trapezoid grid of
/// [`angle_pdf_quadrature`] values on the window centered at the peak.
pub fn angle_stats_quadrature(moments: &PropagatedMoments, nodes: usize) -> Result<(f64, f64)> {
    let w2 = moments.w().powi(2);
    let s2 = moments.sigma().powi(2);
    let center = if w2 < s2 { PI } else { 0.0 };
    let h = 2.0 * PI / nodes as f64;
    let values = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let d = -PI + j as f64 * h;
            angle_pdf_quadrature(moments, center + d).map(|p| (d, p))
        })
        .collect::<Result<Vec<_>>>()?;
    let mass: f64 = values.iter().map(|(_, p)| p).sum::<f64>() * h;
    // the window edge ±π carries half weight on each side
    let second: f64 = values.iter().map(|(d, p)| d * d * p).sum::<f64>() * h;
    let edge = values[0].1;
    Ok(((second / mass).sqrt(), edge / mass))
}

/// Report of the truncated radial-sum identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub l: i32,
    pub waist: f64,
    /// `2π ∫ h² ρ dρ`.
    pub exact: f64,
    /// `Σ_{p ≤ P} (2π ∫ h R_lp ρ dρ)²` for `P = 0..=p_max`.
    pub partial_sums: Vec<f64>,
    pub relative_errors: Vec<f64>,
}

impl IdentityReport {
    pub fn error_at(&self, p: usize) -> f64 {
        self.relative_errors[p]
    }
}

/// The standard test function for [`verify_identity`]: a Gaussian ring
/// `(ρ/w)^|l| exp(−(ρ − w)²/w²)`, matched to the basis waist and regular at
/// the origin like the modes it is expanded in.
pub fn standard_test_function(l: i32, waist: f64) -> impl Fn(f64) -> f64 {
    let al = l.unsigned_abs() as i32;
    move |rho: f64| (rho / waist).powi(al) * (-((rho - waist) / waist).powi(2)).exp()
}

/// Integrates both sides of `Σ_p R_lp(ρ1) R_lp(ρ2) = δ(ρ1 − ρ2)/(2πρ1)`
/// against `h(ρ1) h(ρ2)` on `[0, 10w]`.
pub fn verify_identity<H>(l: i32, waist: f64, test_function: H, p_max: u32) -> Result<IdentityReport>
where
    H: Fn(f64) -> f64 + Sync,
{
    if p_max > MAX_RADIAL_INDEX {
        return Err(Error::Domain(format!(
            "p_max {p_max} exceeds {MAX_RADIAL_INDEX}"
        )));
    }
    let upper = 10.0 * waist;
    let nodes = 600 + 4 * p_max as usize;
    let gl = gauss_legendre(nodes);
    let pts: Vec<(f64, f64)> = gl
        .nodes
        .iter()
        .zip(gl.weights.iter())
        .map(|(t, w)| (0.5 * upper * (t + 1.0), 0.5 * upper * w))
        .collect();
    let exact: f64 = 2.0 * PI * pts.iter().map(|(r, w)| test_function(*r).powi(2) * r * w).sum::<f64>();
    let coeffs = (0..=p_max)
        .into_par_iter()
        .map(|p| -> Result<f64> {
            let mut s = 0.0;
            for (r, w) in &pts {
                s += test_function(*r) * lg_radial(LgIndex::new(l, p), waist, *r)? * r * w;
            }
            Ok(2.0 * PI * s)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut partial_sums = Vec::with_capacity(coeffs.len());
    let mut acc = 0.0;
    for c in coeffs {
        acc += c * c;
        partial_sums.push(acc);
    }
    let relative_errors = partial_sums.iter().map(|s| ((s - exact) / exact).abs()).collect();
    Ok(IdentityReport {
        l,
        waist,
        exact,
        partial_sums,
        relative_errors,
    })
}

/// A small-Schmidt-number configuration on which explicit mode expansions and
/// multi-angle quadratures converge quickly: pump waist twice the SPDC
/// correlation length, evaluated near the sum-mode Rayleigh range with the
/// turbulence coherence length comparable to the beam.
pub fn low_schmidt_fixture() -> (PhysicalSetup, TurbulenceChannel, f64) {
    let sigma0 = crate::params::spdc_correlation_length(1e-3, 355e-9);
    let setup = derive_setup(355e-9, 2.0 * sigma0, 1e-3, 0.5).expect("valid fixture");
    let z = setup.sum_rayleigh_range();
    (setup, TurbulenceChannel::new(2.0e-14).expect("valid cn2"), z)
}

/// Kernel with coincident radii, bra angles `(0, χ)` and rotations
/// `(φs, φi)` on the ket side.
fn rotated_kernel(m: &PropagatedMoments, rs: f64, ri: f64, chi: f64, phi_s: f64, phi_i: f64) -> Complex64 {
    let (chi_s, chi_c) = chi.sin_cos();
    let (ps, pc) = phi_s.sin_cos();
    let (qs, qc) = (chi + phi_i).sin_cos();
    let c = BiphotonCoords::new(
        [rs, 0.0],
        [ri * chi_c, ri * chi_s],
        [rs * pc, rs * ps],
        [ri * qc, ri * qs],
    );
    cross_spectral_density(m, &c)
}

/// Radially traced kernel `T(φs, φi) = ∫ d²a d²b W2(a, b, R_φs a, R_φi b)` by
/// direct quadrature over both radii and the relative bra angle (the global
/// rotation contributes 2π).
pub fn traced_kernel_quadrature(m: &PropagatedMoments, phi_s: f64, phi_i: f64, nodes: usize) -> Result<Complex64> {
    let scale = 2.0 * m.w().max(m.sigma());
    let specs = [
        QuadratureSpec::radial(scale).with_nodes(nodes).with_tolerance(1e-11).with_max_levels(3),
        QuadratureSpec::radial(scale).with_nodes(nodes).with_tolerance(1e-11).with_max_levels(3),
        QuadratureSpec::periodic(nodes).with_tolerance(1e-11).with_max_levels(3),
    ];
    let v = integrate_nd(
        |p: &[f64]| rotated_kernel(m, p[0], p[1], p[2], phi_s, phi_i) * (p[0] * p[1]),
        &specs,
    )?;
    Ok(v.value * (2.0 * PI))
}

/// Unnormalized `P(l, l_i = 0)` straight from the coincident-radius form:
/// two radii and three angles (relative bra angle plus both rotations), with
/// the global rotation factored out.
pub fn coincident_radius_oam(m: &PropagatedMoments, ls: &[i32], radial_nodes: usize, angle_nodes: usize) -> Result<Vec<f64>> {
    let scale = 2.0 * m.w().max(m.sigma());
    let specs = [
        QuadratureSpec::radial(scale).with_nodes(radial_nodes),
        QuadratureSpec::radial(scale).with_nodes(radial_nodes),
        QuadratureSpec::periodic(angle_nodes),
        QuadratureSpec::periodic(angle_nodes),
        QuadratureSpec::periodic(angle_nodes),
    ];
    ls.iter()
        .map(|&l| {
            integrate_fixed(
                |p: &[f64]| {
                    let v = rotated_kernel(m, p[0], p[1], p[2], p[3], p[4]) * (p[0] * p[1]);
                    (v * Complex64::from_polar(1.0, -(l as f64) * p[3])).re
                },
                &specs,
            )
            .map(|v| v * 2.0 * PI)
        })
        .collect()
}

/// Controls for [`full_oam_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullOamOptions {
    pub p_truncation: u32,
    pub radial_nodes: usize,
    pub angle_nodes: usize,
    pub analysis_waist: f64,
}

impl FullOamOptions {
    /// Settings validated against the main path on [`low_schmidt_fixture`]:
    /// basis waist twice the propagated sum width, p ≤ 30, 20 radial nodes.
    pub fn standard(m: &PropagatedMoments) -> Self {
        Self {
            p_truncation: 30,
            radial_nodes: 20,
            angle_nodes: 12,
            analysis_waist: 2.0 * m.w(),
        }
    }
}

/// `P(l_s, l_i = 0)` (unnormalized) by explicit LG overlaps summed over
/// `p_s, p_i ≤ p_truncation`: four radial integrals on Gauss–Legendre nodes and
/// three angles by trapezoid (global rotation factored out).
pub fn full_oam_check(m: &PropagatedMoments, ls: &[i32], options: &FullOamOptions) -> Result<Vec<f64>> {
    if options.p_truncation > 40 || options.radial_nodes > 32 || options.angle_nodes > 32 {
        return Err(Error::Domain(
            "full OAM check is limited to p <= 40 and 32 nodes per axis".into(),
        ));
    }
    let upper = 4.0 * m.w().max(m.sigma()).max(options.analysis_waist);
    let gl = gauss_legendre(options.radial_nodes);
    let pts: Vec<(f64, f64)> = gl
        .nodes
        .iter()
        .zip(gl.weights.iter())
        .map(|(t, w)| (0.5 * upper * (t + 1.0), 0.5 * upper * w))
        .collect();
    let n = pts.len();
    // truncated radial kernels Σ_p R_lp(r1) R_lp(r2) r1 r2 w1 w2
    let kernel = |l: i32| -> Result<Vec<f64>> {
        let mut k = vec![0.0; n * n];
        for p in 0..=options.p_truncation {
            let r: Vec<f64> = pts
                .iter()
                .map(|(x, _)| lg_radial(LgIndex::new(l, p), options.analysis_waist, *x))
                .collect::<Result<_>>()?;
            for a in 0..n {
                for b in 0..n {
                    k[a * n + b] += r[a] * r[b];
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                k[a * n + b] *= pts[a].0 * pts[a].1 * pts[b].0 * pts[b].1;
            }
        }
        Ok(k)
    };
    let ki = kernel(0)?;
    let ks: Vec<Vec<f64>> = ls.iter().map(|&l| kernel(l)).collect::<Result<_>>()?;
    let na = options.angle_nodes;
    let h = 2.0 * PI / na as f64;
    // index over (r1s, r2s) pairs in parallel, ordered reduction afterwards
    let partial: Vec<Vec<f64>> = (0..n * n)
        .into_par_iter()
        .map(|sidx| {
            let (a1, a2) = (sidx / n, sidx % n);
            let (r1s, r2s) = (pts[a1].0, pts[a2].0);
            let mut acc = vec![0.0; ls.len()];
            for b1 in 0..n {
                for b2 in 0..n {
                    let wi = ki[b1 * n + b2];
                    if wi == 0.0 {
                        continue;
                    }
                    let (r1i, r2i) = (pts[b1].0, pts[b2].0);
                    for j2s in 0..na {
                        let t2s = j2s as f64 * h;
                        let mut ang = Complex64::new(0.0, 0.0);
                        for j1i in 0..na {
                            let t1i = j1i as f64 * h;
                            for j2i in 0..na {
                                let t2i = j2i as f64 * h;
                                let c = BiphotonCoords::new(
                                    [r1s, 0.0],
                                    [r1i * t1i.cos(), r1i * t1i.sin()],
                                    [r2s * t2s.cos(), r2s * t2s.sin()],
                                    [r2i * t2i.cos(), r2i * t2i.sin()],
                                );
                                ang += cross_spectral_density(m, &c);
                            }
                        }
                        for (q, &l) in ls.iter().enumerate() {
                            // mode phase e^{il(θ1s − θ2s)} with θ1s = 0
                            let ph = Complex64::from_polar(1.0, -(l as f64) * t2s);
                            acc[q] += (ang * ph).re * wi * ks[q][a1 * n + a2];
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let scale = 2.0 * PI * h * h * h;
    let mut out = vec![0.0; ls.len()];
    for p in partial {
        for (o, v) in out.iter_mut().zip(p) {
            *o += v;
        }
    }
    Ok(out.into_iter().map(|v| v * scale).collect())
}

//! Deterministic quadrature: mapped Gauss–Legendre for semi-infinite radial
//! integrals, plain Gauss–Legendre on intervals, uniform trapezoid for
//! periodic integrands, and tensor products of those with refinement.
//!
//! Parallel evaluation splits only the outermost axis and sums the slices in
//! index order, so results are bitwise identical for any thread count.

use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::{Mutex, OnceLock};
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Scalar types the integrators can accumulate.
pub trait QuadValue: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Integration rule for one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureMethod {
    /// `∫₀^∞` through `r = s·t/(1−t)`, Gauss–Legendre in `t ∈ [0,1)`.
    MappedGaussLegendre { scale: f64 },
    /// Gauss–Legendre on `[lo, hi]`.
    GaussLegendre { lo: f64, hi: f64 },
    /// Uniform trapezoid on `[0, 2π)`.
    PeriodicTrapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub nodes: usize,
    pub rel_tol: f64,
    /// Absolute floor for integrals whose value is (near) zero.
    pub abs_tol: f64,
    pub max_levels: usize,
}

impl QuadratureSpec {
    pub fn radial(scale: f64) -> Self {
        Self {
            method: QuadratureMethod::MappedGaussLegendre { scale },
            nodes: 32,
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_levels: 8,
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self {
            method: QuadratureMethod::GaussLegendre { lo, hi },
            nodes: 32,
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_levels: 8,
        }
    }

    pub fn periodic(nodes: usize) -> Self {
        Self {
            method: QuadratureMethod::PeriodicTrapezoid,
            nodes,
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_levels: 6,
        }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_tolerance(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tolerance(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_levels(mut self, max_levels: usize) -> Self {
        self.max_levels = max_levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::Domain(format!(
                "quadrature needs at least 8 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.rel_tol > 1e-14 && self.rel_tol < 1e-2) {
            return Err(Error::Domain(format!(
                "relative tolerance {} outside (1e-14, 1e-2)",
                self.rel_tol
            )));
        }
        if self.max_levels == 0 {
            return Err(Error::Domain("max_levels must be at least 1".into()));
        }
        match self.method {
            QuadratureMethod::MappedGaussLegendre { scale } if !(scale > 0.0 && scale.is_finite()) => {
                Err(Error::Domain(format!("mapping scale must be positive, got {scale}")))
            }
            QuadratureMethod::GaussLegendre { lo, hi } if !(hi > lo && lo.is_finite() && hi.is_finite()) => {
                Err(Error::Domain(format!("bad interval [{lo}, {hi}]")))
            }
            _ => Ok(()),
        }
    }

    /// Node count at refinement level `level` (×1.5 per level).
    fn nodes_at(&self, level: usize) -> usize {
        let mut n = self.nodes;
        for _ in 0..level {
            n += n / 2;
        }
        n
    }

    /// Abscissas and weights of this rule with `n` nodes.
    pub fn rule(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        match self.method {
            QuadratureMethod::PeriodicTrapezoid => {
                let h = 2.0 * PI / n as f64;
                ((0..n).map(|j| j as f64 * h).collect(), vec![h; n])
            }
            QuadratureMethod::GaussLegendre { lo, hi } => {
                let gl = gauss_legendre(n);
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                let x = gl.nodes.iter().map(|t| mid + half * t).collect();
                let w = gl.weights.iter().map(|w| half * w).collect();
                (x, w)
            }
            QuadratureMethod::MappedGaussLegendre { scale } => {
                let gl = gauss_legendre(n);
                let mut x = Vec::with_capacity(n);
                let mut w = Vec::with_capacity(n);
                for (t, wt) in gl.nodes.iter().zip(gl.weights.iter()) {
                    let t = 0.5 * (t + 1.0);
                    let one_minus = 1.0 - t;
                    x.push(scale * t / one_minus);
                    w.push(0.5 * wt * scale / (one_minus * one_minus));
                }
                (x, w)
            }
        }
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_gauss_legendre(n: usize) -> GaussLegendre {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussLegendre { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Cached Gauss–Legendre rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().expect("cache poisoned").get(&n) {
        return rule.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n));
    cache
        .lock()
        .expect("cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

/// Error estimate for the finer of two successive levels: their difference,
/// floored by accumulated rounding in the finer sum.
fn level_error<T: QuadValue>(fine: T, coarse: T, abs_sum: f64) -> f64 {
    let diff = (fine + coarse * -1.0).magnitude();
    diff.max(64.0 * f64::EPSILON * abs_sum)
}

fn converged(error: f64, value: f64, spec_rel: f64, spec_abs: f64) -> bool {
    error <= spec_rel * value || error <= spec_abs
}

/// `∫₀^∞ f(r) dr` (or over the spec's interval) with refinement until
/// successive levels agree to the spec tolerance.
pub fn integrate_radial<T, F>(f: F, spec: &QuadratureSpec) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    spec.validate()?;
    let eval = |level: usize| {
        let (x, w) = spec.rule(spec.nodes_at(level));
        let mut acc = T::zero();
        let mut abs_sum = 0.0;
        for (xi, wi) in x.iter().zip(w.iter()) {
            let v = f(*xi) * *wi;
            abs_sum += v.magnitude();
            acc = acc + v;
        }
        (acc, abs_sum)
    };
    let (mut prev, _) = eval(0);
    let mut best = Estimate {
        value: prev,
        error: f64::INFINITY,
    };
    for level in 1..=spec.max_levels {
        let (cur, abs_sum) = eval(level);
        let error = level_error(cur, prev, abs_sum);
        best = Estimate { value: cur, error };
        if converged(error, cur.magnitude(), spec.rel_tol, spec.abs_tol) {
            return Ok(best);
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        best: best.value.magnitude(),
        estimate: best.error,
        tolerance: spec.rel_tol,
    })
}

/// Uniform trapezoid `∫₀^{2π} f(θ) dθ` with `nodes` points.
pub fn integrate_periodic<T, F>(f: F, nodes: usize) -> T
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let h = 2.0 * PI / nodes as f64;
    let mut acc = T::zero();
    for j in 0..nodes {
        acc = acc + f(j as f64 * h);
    }
    acc * h
}

/// Largest dimension accepted by [`integrate_nd`].
pub const MAX_DIMENSION: usize = 6;

/// One tensor-product evaluation without refinement. Returns the sum and the
/// sum of magnitudes.
pub fn tensor_sum<T, F>(f: &F, rules: &[(Vec<f64>, Vec<f64>)]) -> (T, f64)
where
    T: QuadValue,
    F: Fn(&[f64]) -> T + Sync,
{
    let dim = rules.len();
    let (outer_x, outer_w) = &rules[0];
    let slices: Vec<(T, f64)> = outer_x
        .par_iter()
        .zip(outer_w.par_iter())
        .map(|(&x0, &w0)| {
            let mut point = [0.0; MAX_DIMENSION];
            point[0] = x0;
            let mut idx = [0usize; MAX_DIMENSION];
            let mut acc = T::zero();
            let mut abs_sum = 0.0;
            if dim == 1 {
                let v = f(&point[..1]) * w0;
                return (v, v.magnitude());
            }
            loop {
                let mut weight = w0;
                for d in 1..dim {
                    point[d] = rules[d].0[idx[d]];
                    weight *= rules[d].1[idx[d]];
                }
                let v = f(&point[..dim]) * weight;
                abs_sum += v.magnitude();
                acc = acc + v;
                // odometer over axes 1..dim, last axis fastest
                let mut d = dim - 1;
                loop {
                    idx[d] += 1;
                    if idx[d] < rules[d].0.len() {
                        break;
                    }
                    idx[d] = 0;
                    if d == 1 {
                        return (acc, abs_sum);
                    }
                    d -= 1;
                }
            }
        })
        .collect();
    slices
        .into_iter()
        .fold((T::zero(), 0.0), |(a, s), (v, m)| (a + v, s + m))
}

/// Tensor-product integral over up to six axes. Every axis is refined by ×1.5
/// per level until successive levels agree to the tightest axis tolerance.
pub fn integrate_nd<T, F>(f: F, specs: &[QuadratureSpec]) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(&[f64]) -> T + Sync,
{
    if specs.is_empty() || specs.len() > MAX_DIMENSION {
        return Err(Error::Domain(format!(
            "integrate_nd supports 1..={MAX_DIMENSION} dimensions, got {}",
            specs.len()
        )));
    }
    for s in specs {
        s.validate()?;
    }
    let rel_tol = specs.iter().map(|s| s.rel_tol).fold(f64::INFINITY, f64::min);
    let abs_tol = specs.iter().map(|s| s.abs_tol).fold(f64::INFINITY, f64::min);
    let max_levels = specs.iter().map(|s| s.max_levels).max().unwrap_or(1);
    let eval = |level: usize| {
        let rules: Vec<_> = specs.iter().map(|s| s.rule(s.nodes_at(level))).collect();
        tensor_sum(&f, &rules)
    };
    let (mut prev, _) = eval(0);
    let mut best = Estimate {
        value: prev,
        error: f64::INFINITY,
    };
    for level in 1..=max_levels {
        let (cur, abs_sum) = eval(level);
        let error = level_error(cur, prev, abs_sum);
        best = Estimate { value: cur, error };
        if converged(error, cur.magnitude(), rel_tol, abs_tol) {
            return Ok(best);
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        best: best.value.magnitude(),
        estimate: best.error,
        tolerance: rel_tol,
    })
}

/// Single tensor-product evaluation at fixed node counts (no refinement).
pub fn integrate_fixed<T, F>(f: F, specs: &[QuadratureSpec]) -> Result<T>
where
    T: QuadValue,
    F: Fn(&[f64]) -> T + Sync,
{
    if specs.is_empty() || specs.len() > MAX_DIMENSION {
        return Err(Error::Domain(format!(
            "integrate_fixed supports 1..={MAX_DIMENSION} dimensions, got {}",
            specs.len()
        )));
    }
    for s in specs {
        s.validate()?;
    }
    let rules: Vec<_> = specs.iter().map(|s| s.rule(s.nodes)).collect();
    Ok(tensor_sum(&f, &rules).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erfc by continued fraction / series, adequate to ~1e-15 for the test below.
    fn erf(x: f64) -> f64 {
        // Maclaurin series; converges fast for |x| < 4.
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -x2 / n;
            sum += term / (2.0 * n + 1.0);
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(10);
        // exact up to degree 19
        let s: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        let total: f64 = gl.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_large_n() {
        let gl = gauss_legendre(400);
        let total: f64 = gl.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-12);
        assert!(gl.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn radial_moments() {
        let spec = QuadratureSpec::radial(2.0);
        let a = integrate_radial(|r| r * (-r * r).exp(), &spec).unwrap();
        assert!((a.value - 0.5).abs() < 1e-10, "{:?}", a);
        let b = integrate_radial(|r| r.powi(3) * (-r * r).exp(), &spec).unwrap();
        assert!((b.value - 0.5).abs() < 1e-10, "{:?}", b);
    }

    #[test]
    fn shifted_gaussian() {
        // ∫₀^∞ e^{-(r-3)²} dr = √π/2 · (1 + erf 3)
        let exact = PI.sqrt() / 2.0 * (1.0 + erf(3.0));
        let spec = QuadratureSpec::radial(4.0).with_nodes(48);
        let v = integrate_radial(|r| (-(r - 3.0) * (r - 3.0)).exp(), &spec).unwrap();
        assert!((v.value - exact).abs() < 1e-10, "{} vs {}", v.value, exact);
        assert!((exact - 1.772_434_273_712_279).abs() < 1e-13);
    }

    #[test]
    fn periodic_exponentials() {
        for l in -5i32..=5 {
            let v: Complex64 = integrate_periodic(|t| Complex64::from_polar(1.0, l as f64 * t), 64);
            let expected = if l == 0 { 2.0 * PI } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
        let c: f64 = integrate_periodic(|t| t.cos().powi(2), 16);
        assert!((c - PI).abs() < 1e-13);
    }

    #[test]
    fn periodic_bessel() {
        // 2π I0(1), I0(1) = Σ 1/(k!)² 4^-k
        let mut i0 = 0.0;
        let mut term = 1.0;
        for k in 0..30 {
            if k > 0 {
                term /= 4.0 * (k * k) as f64;
            }
            i0 += term;
        }
        let v: f64 = integrate_periodic(|t| t.cos().exp(), 32);
        assert!((v - 2.0 * PI * i0).abs() < 1e-13);
        assert!((i0 - 1.266_065_877_752_008_4).abs() < 1e-15);
    }

    #[test]
    fn nd_factorizes() {
        let s1 = QuadratureSpec::radial(2.0);
        let s2 = QuadratureSpec::interval(-6.0, 6.0);
        let a = integrate_radial(|r| r * (-r * r).exp(), &s1).unwrap().value;
        let b = integrate_radial(|x| (-0.5 * x * x).exp(), &s2).unwrap().value;
        let ab = integrate_nd(|p| p[0] * (-p[0] * p[0]).exp() * (-0.5 * p[1] * p[1]).exp(), &[s1, s2])
            .unwrap()
            .value;
        assert!(((ab - a * b) / (a * b)).abs() < 1e-9);
    }

    #[test]
    fn nd_disk() {
        let r_max: f64 = 1.7;
        let specs = [QuadratureSpec::interval(0.0, r_max), QuadratureSpec::periodic(16)];
        let v = integrate_nd(|p| p[0] * (-p[0] * p[0]).exp(), &specs).unwrap();
        let exact = PI * (1.0 - (-r_max * r_max).exp());
        assert!((v.value - exact).abs() < 1e-10);
    }

    #[test]
    fn nd_four_dim_self_convergence() {
        let specs = [QuadratureSpec::interval(-5.0, 5.0).with_nodes(16); 4];
        let f = |p: &[f64]| {
            let q = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3] + 0.3 * p[0] * p[2];
            Complex64::new(0.0, 0.2 * p[1] * p[3]).exp() * (-0.5 * q).exp()
        };
        let est = integrate_nd(f, &specs).unwrap();
        let finer: Complex64 = integrate_fixed(f, &[QuadratureSpec::interval(-5.0, 5.0).with_nodes(60); 4]).unwrap();
        assert!((est.value - finer).norm() <= est.error.max(1e-9 * finer.norm()) * 1.0 + 1e-12);
    }

    #[test]
    fn estimates_are_conservative() {
        let cases: Vec<(Box<dyn Fn(f64) -> f64>, f64, QuadratureSpec)> = vec![
            (Box::new(|r: f64| r * (-r * r).exp()), 0.5, QuadratureSpec::radial(2.0)),
            (Box::new(|r: f64| r.powi(3) * (-r * r).exp()), 0.5, QuadratureSpec::radial(2.0)),
            (Box::new(|r: f64| (-r * r).exp()), PI.sqrt() / 2.0, QuadratureSpec::radial(1.0)),
            (Box::new(|r: f64| r.powi(5) * (-r * r).exp()), 1.0, QuadratureSpec::radial(3.0)),
            (Box::new(|x: f64| x * x), 2.0 / 3.0, QuadratureSpec::interval(-1.0, 1.0)),
            (Box::new(|x: f64| (-x).exp()), 1.0, QuadratureSpec::radial(1.0).with_tolerance(1e-6)),
        ];
        let mut ok = 0;
        for (f, exact, spec) in &cases {
            let e = integrate_radial(f, spec).unwrap();
            if (e.value - exact).abs() <= e.error {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.95 * cases.len() as f64, "{ok}/{}", cases.len());
    }

    #[test]
    fn validation() {
        assert!(QuadratureSpec::radial(1.0).with_nodes(4).validate().is_err());
        assert!(QuadratureSpec::radial(1.0).with_tolerance(1e-1).validate().is_err());
        assert!(QuadratureSpec::radial(-1.0).validate().is_err());
        assert!(integrate_nd(|_| 1.0, &[QuadratureSpec::periodic(8); 7]).is_err());
    }

    #[test]
    fn non_convergence_reports_best() {
        let spec = QuadratureSpec::interval(0.0, 1.0).with_nodes(8).with_max_levels(1).with_tolerance(1e-13);
        let e = integrate_radial(|x| (1000.0 * x).sin(), &spec).unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }
}

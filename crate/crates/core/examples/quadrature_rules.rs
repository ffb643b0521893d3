//! The quadrature layer: mapped Gauss–Legendre, periodic trapezoid and
//! tensor-product integration with refinement-based error estimates.
use std::f64::consts::PI;

use turbilink::quadrature::{integrate_nd, integrate_periodic, integrate_radial, QuadratureSpec};

fn main() -> turbilink::Result<()> {
    let spec = QuadratureSpec::radial(1.0);
    let e = integrate_radial(|r: f64| (-(r - 3.0).powi(2)).exp(), &spec)?;
    println!("∫₀^∞ exp(-(r-3)²) dr = {:.15} ± {:.1e}", e.value, e.error);

    let v: f64 = integrate_periodic(|t: f64| t.cos().exp(), 32);
    println!("∫ exp(cos θ) dθ = {v:.15}  (2π I₀(1))");

    let disk = integrate_nd(
        |p: &[f64]| p[0] * (-p[0] * p[0]).exp(),
        &[QuadratureSpec::interval(0.0, 1.5), QuadratureSpec::periodic(16)],
    )?;
    println!("disk Gaussian {:.12} vs {:.12}", disk.value, PI * (1.0 - (-2.25f64).exp()));
    Ok(())
}

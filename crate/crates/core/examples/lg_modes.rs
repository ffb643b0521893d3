//! Laguerre–Gauss modes: generalized Laguerre polynomials and normalization.
use std::f64::consts::PI;

use turbilink::oam::{laguerre_poly, lg_mode, lg_radial, LgIndex};
use turbilink::quadrature::{integrate_radial, QuadratureSpec};

fn main() -> turbilink::Result<()> {
    println!("L_5^2(1.5) = {}", laguerre_poly(5, 2.0, 1.5)?);
    let waist = 1e-3;
    for (l, p) in [(0, 0), (1, 0), (2, 3), (-3, 5)] {
        let idx = LgIndex::new(l, p);
        let spec = QuadratureSpec::radial(2.0 * waist).with_nodes(96);
        let norm = integrate_radial(|r| 2.0 * PI * r * lg_radial(idx, waist, r).unwrap().powi(2), &spec)?;
        println!("LG(l={l}, p={p}): ∫|u|² = {:.12}", norm.value);
    }
    println!("LG(1,0) at (w, π/4) = {:.4}", lg_mode(LgIndex::new(1, 0), waist, waist, PI / 4.0)?);
    Ok(())
}

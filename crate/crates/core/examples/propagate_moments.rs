//! Widths, curvature radii and coupling lengths of the propagated kernel, and
//! the kernel itself at a few points.
use turbilink::params::PhysicalSetup;
use turbilink::propagation::{cross_spectral_density, propagated_moments, BiphotonCoords};
use turbilink::turbulence::TurbulenceChannel;

fn main() -> turbilink::Result<()> {
    let setup = PhysicalSetup::reference();
    let ch = TurbulenceChannel::new(1e-16)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "z (m)", "w (mm)", "σ (mm)", "C+ (mm)", "C- (mm)");
    for z in [0.0, 10.0, 100.0, 1000.0, 2000.0] {
        let m = propagated_moments(&setup, &ch, z)?;
        let c = |v: Option<f64>| v.map_or("inf".to_string(), |c| format!("{:.4}", c * 1e3));
        println!(
            "{z:>8} {:>12.4} {:>12.4} {:>12} {:>12}",
            m.w() * 1e3,
            m.sigma() * 1e3,
            c(m.c_plus()),
            c(m.c_minus())
        );
    }
    let m = propagated_moments(&setup, &ch, 1000.0)?;
    let diag = BiphotonCoords::diagonal([1e-3, 0.0], [-1e-3, 0.0]);
    let off = BiphotonCoords::new([1e-3, 0.0], [-1e-3, 0.0], [0.0, 1e-3], [0.0, -1e-3]);
    println!("W2 diagonal {:.6}", cross_spectral_density(&m, &diag));
    println!("W2 off-diagonal {:.6}", cross_spectral_density(&m, &off));
    Ok(())
}

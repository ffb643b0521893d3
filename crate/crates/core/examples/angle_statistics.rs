//! Conditional angle distribution of the signal photon given the idler angle.
use turbilink::params::PhysicalSetup;
use turbilink::propagation::propagated_moments;
use turbilink::statistics::conditional_angle_stats;
use turbilink::turbulence::TurbulenceChannel;

fn main() -> turbilink::Result<()> {
    let setup = PhysicalSetup::reference();
    let ch = TurbulenceChannel::new(1e-16)?;
    for z in [0.0, 5.0, 11.0, 20.0, 100.0, 1000.0] {
        let m = propagated_moments(&setup, &ch, z)?;
        let a = conditional_angle_stats(&m, 256)?;
        println!(
            "z = {z:>6} m  window center {:.3} rad  Δθ = {:.5} rad  P(θ0) = {:.5}/rad",
            a.window_center, a.circular_std, a.boundary_density
        );
    }
    Ok(())
}

//! Purity and signal–idler position correlation versus distance.
use turbilink::params::PhysicalSetup;
use turbilink::propagation::propagated_moments;
use turbilink::statistics::{purity, spatial_correlation};
use turbilink::turbulence::TurbulenceChannel;

fn main() -> turbilink::Result<()> {
    let setup = PhysicalSetup::reference();
    let cn2s = [0.0, 1e-17, 1e-16, 1e-15];
    print!("{:>8}", "z (m)");
    for c in cn2s {
        print!("  γ[{c:e}]  f_c[{c:e}]");
    }
    println!();
    for z in [0.0, 5.0, 11.0, 20.0, 100.0, 500.0, 1000.0, 2000.0] {
        print!("{z:>8}");
        for c in cn2s {
            let m = propagated_moments(&setup, &TurbulenceChannel::new(c)?, z)?;
            print!("  {:>8.5} {:>9.5}", purity(&m), spatial_correlation(&m));
        }
        println!();
    }
    println!("f_c crosses zero near z = k·w_c0·σ_c0 = {:.2} m", setup.correlation_crossover_distance());
    Ok(())
}

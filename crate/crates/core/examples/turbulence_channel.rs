//! Coherence length of the Kolmogorov channel and the two-point phase factor.
use turbilink::params::PhysicalSetup;
use turbilink::turbulence::{coherence_length, turbulence_factor, CoherenceLength, TurbulenceChannel};

fn main() -> turbilink::Result<()> {
    let setup = PhysicalSetup::reference();
    for cn2 in [1e-17, 1e-16, 1e-15] {
        let ch = TurbulenceChannel::new(cn2)?;
        for z in [100.0, 1000.0] {
            match coherence_length(&ch, &setup, z)? {
                CoherenceLength::Finite(r) => println!("Cn²={cn2:e} z={z:>6} m  ρ0 = {:.3} mm", r * 1e3),
                CoherenceLength::Infinite => println!("Cn²={cn2:e} z={z:>6} m  ρ0 = inf"),
            }
        }
    }
    let ch = TurbulenceChannel::new(1e-16)?;
    let f = turbulence_factor(&ch, &setup, 1000.0, [1e-4, 0.0], [2e-4, 0.0])?;
    println!("phase factor for 0.1 mm / 0.2 mm separations at 1 km: {f:.6}");
    Ok(())
}

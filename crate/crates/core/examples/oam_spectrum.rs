//! Conditional OAM spectrum P(l | l_i = 0) and its width at several distances.
use turbilink::oam::{conditional_oam_distribution_auto, conditional_oam_uncertainty, OamOptions};
use turbilink::params::PhysicalSetup;
use turbilink::propagation::propagated_moments;
use turbilink::turbulence::TurbulenceChannel;

fn main() -> turbilink::Result<()> {
    let setup = PhysicalSetup::reference();
    let ch = TurbulenceChannel::new(1e-16)?;
    for z in [500.0, 1000.0, 1500.0, 2000.0] {
        let m = propagated_moments(&setup, &ch, z)?;
        // start at |l| <= 15 and widen until the tail mass is below 1e-6
        let s = conditional_oam_distribution_auto(&m, 15, 1024, setup.collimated_diff_waist, &OamOptions::default())?;
        let bars: String = (0..=5)
            .map(|l| format!(" P({l})={:.4}", s.probability(l)))
            .collect();
        println!(
            "z = {z:>6} m  ΔL = {:.4} ħ  l_max {:>3}  tail {:.1e}{bars}",
            conditional_oam_uncertainty(&s)?,
            s.l_max,
            s.tail_mass
        );
    }
    Ok(())
}

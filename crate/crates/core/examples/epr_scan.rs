//! EPR criterion versus distance: loss, revival and persistence of entanglement.
use turbilink::epr::{distance_grid, epr_report, scan_entanglement, EprOptions};
use turbilink::params::PhysicalSetup;
use turbilink::turbulence::TurbulenceChannel;

fn main() -> turbilink::Result<()> {
    let setup = PhysicalSetup::reference();
    let ch = TurbulenceChannel::new(1e-16)?;
    let opts = EprOptions::default();
    for z in [1.0, 20.0, 100.0, 1000.0] {
        let r = epr_report(&setup, &ch, z, &opts)?;
        println!(
            "z = {z:>6} m  Δθ = {:.4}  ΔL = {:.4}  lhs = {:.4}  rhs = {:.4}  entangled: {}",
            r.delta_theta, r.delta_oam, r.lhs, r.rhs, r.entangled
        );
    }
    let grid = distance_grid(0.1, 2000.0, 32, true)?;
    let scan = scan_entanglement(&setup, &ch, &grid, &opts)?;
    println!("entangled intervals (m): {:?}", scan.intervals);
    println!("peak violation {:?} at z = {:?} m", scan.max_violation, scan.z_max_violation);
    println!("maximal window (m): {:?}", scan.maximal_window);
    Ok(())
}

//! Independent cross-checks of the closed forms: Fresnel quadrature of the
//! propagation integral, explicit trace of ρ², and the radial-sum identity.
use turbilink::oracle::{
    brute_force_w2, kernel_probes, standard_test_function, trace_purity_check, verify_identity,
    BruteForceOptions,
};
use turbilink::params::PhysicalSetup;
use turbilink::propagation::{cross_spectral_density, propagated_moments};
use turbilink::statistics::purity;
use turbilink::turbulence::TurbulenceChannel;

fn main() -> turbilink::Result<()> {
    let setup = PhysicalSetup::reference();
    let ch = TurbulenceChannel::new(1e-16)?;
    let z = 1000.0;
    let m = propagated_moments(&setup, &ch, z)?;
    let probe = kernel_probes(&m, 1, 42)[0];
    let bf = brute_force_w2(&setup, &ch, z, &probe, &BruteForceOptions::default())?;
    let cf = cross_spectral_density(&m, &probe);
    println!("W2 quadrature {bf:.10}\nW2 closed form {cf:.10}");

    println!("purity trace {:.10} closed form {:.10}", trace_purity_check(&m, 24)?, purity(&m));

    let r = verify_identity(1, 1.0, standard_test_function(1, 1.0), 150)?;
    for p in [10, 50, 100, 150] {
        println!("identity l=1, p_max={p}: relative error {:.2e}", r.error_at(p));
    }
    Ok(())
}

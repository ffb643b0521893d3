//! Oracle behaviors not covered by the fixtures.

use turbilink::oam::conditional_oam_distribution;
use turbilink::oracle::{
    full_oam_check, low_schmidt_fixture, standard_test_function, trace_purity_check, verify_identity,
    FullOamOptions,
};
use turbilink::params::PhysicalSetup;
use turbilink::propagation::propagated_moments;
use turbilink::turbulence::TurbulenceChannel;

#[test]
fn traced_purity_is_one_at_input_plane() {
    let m = propagated_moments(&PhysicalSetup::reference(), &TurbulenceChannel::new(1e-15).unwrap(), 0.0).unwrap();
    let p = trace_purity_check(&m, 24).unwrap();
    assert!((p - 1.0).abs() < 1e-6, "{p}");
}

#[test]
fn lg_overlap_check_at_input_plane() {
    let (setup, _, _) = low_schmidt_fixture();
    let m = propagated_moments(&setup, &TurbulenceChannel::free_space(), 0.0).unwrap();
    let main = conditional_oam_distribution(&m, 15, setup.collimated_diff_waist).unwrap();
    let f = full_oam_check(&m, &[0, 1, -1, 2], &FullOamOptions::standard(&m)).unwrap();
    let total: f64 = f.iter().sum();
    assert!((f[0] / total - main.probability(0)).abs() < 0.05);
    assert!((f[1] - f[2]).abs() <= 1e-12 * f[0]);
}

#[test]
fn identity_error_shrinks_with_p() {
    for l in 0..=2 {
        let r = verify_identity(l, 1.0, standard_test_function(l, 1.0), 150).unwrap();
        assert!(r.error_at(150) < 1e-3);
        let ups = (50..150).filter(|&p| r.error_at(p + 1) > r.error_at(p)).count();
        assert!(ups <= 10, "l={l}: {ups} increases");
    }
}

#[test]
fn identity_rejects_excessive_truncation() {
    assert!(verify_identity(0, 1.0, standard_test_function(0, 1.0), 301).is_err());
}

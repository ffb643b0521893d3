//! Main-path results against the oracle-minted fixtures.

use turbilink::cli::{cmd_oam_spectrum, cmd_oam_width, cmd_purity_correlation, SweepConfig};
use turbilink::fixtures::{
    csv_difference, default_dir, point_label, propagation_label, FixtureFile, ANGLE_POINTS, FIG2_CONFIG,
    FIG3_CONFIG, FIG4_CONFIG, OAM_RATIO_LS, PROPAGATION_PAIRS, PROPAGATION_PROBES, PROPAGATION_SEED,
    PURITY_POINTS,
};
use turbilink::oam::conditional_oam_distribution;
use turbilink::oracle::{kernel_probes, low_schmidt_fixture, ORACLE_VERSION};
use turbilink::params::PhysicalSetup;
use turbilink::propagation::{cross_spectral_density, propagated_moments, PropagatedMoments};
use turbilink::statistics::{conditional_angle_stats, purity};
use turbilink::turbulence::TurbulenceChannel;

fn load(name: &str) -> FixtureFile {
    let f = FixtureFile::load(&default_dir().join(name)).unwrap();
    assert_eq!(f.oracle_version, ORACLE_VERSION, "{name} minted by another oracle version");
    f
}

fn moments(cn2: f64, z: f64) -> PropagatedMoments {
    propagated_moments(&PhysicalSetup::reference(), &TurbulenceChannel::new(cn2).unwrap(), z).unwrap()
}

#[test]
fn kernel_matches_fresnel_quadrature_fixture() {
    let f = load("propagation_w2.json");
    for (cn2, z) in PROPAGATION_PAIRS {
        let m = moments(cn2, z);
        for (i, c) in kernel_probes(&m, PROPAGATION_PROBES, PROPAGATION_SEED).iter().enumerate() {
            let w = cross_spectral_density(&m, c);
            let re = f.get(&propagation_label(cn2, z, i, "re")).unwrap();
            let im = f.get(&propagation_label(cn2, z, i, "im")).unwrap();
            let err = ((w.re - re).powi(2) + (w.im - im).powi(2)).sqrt() / w.norm();
            assert!(err < f.tolerance, "{cn2} {z} probe {i}: {err:e}");
        }
    }
}

#[test]
fn purity_matches_trace_fixture() {
    let f = load("purity_trace.json");
    for (cn2, z) in PURITY_POINTS {
        let p = purity(&moments(cn2, z));
        let t = f.get(&point_label(cn2, z)).unwrap();
        assert!((p - t).abs() / t < f.tolerance, "{cn2} {z}: {p} vs {t}");
    }
}

#[test]
fn angle_stats_match_quadrature_fixture() {
    let f = load("angle_stats.json");
    for (cn2, z) in ANGLE_POINTS {
        let a = conditional_angle_stats(&moments(cn2, z), 256).unwrap();
        let dt = f.get(&format!("{} delta_theta", point_label(cn2, z))).unwrap();
        let edge = f.get(&format!("{} boundary_density", point_label(cn2, z))).unwrap();
        assert!((a.circular_std - dt).abs() / dt < f.tolerance, "{cn2} {z}");
        assert!((a.boundary_density - edge).abs() < f.tolerance, "{cn2} {z}");
    }
}

fn oam_ratios() -> Vec<f64> {
    let (setup, ch, z) = low_schmidt_fixture();
    let m = propagated_moments(&setup, &ch, z).unwrap();
    let s = conditional_oam_distribution(&m, 15, setup.collimated_diff_waist).unwrap();
    OAM_RATIO_LS.iter().map(|&l| s.probability(l) / s.probability(0)).collect()
}

#[test]
fn oam_matches_direct_and_lg_overlap_fixtures() {
    let ratios = oam_ratios();
    for name in ["oam_direct.json", "oam_full.json"] {
        let f = load(name);
        for (l, r) in OAM_RATIO_LS.iter().zip(&ratios) {
            let v = f.get(&format!("l={l}")).unwrap();
            assert!((r - v).abs() / v < f.tolerance, "{name} l={l}: {r} vs {v}");
        }
    }
}

#[test]
fn identity_fixture_within_tolerance() {
    let f = load("identity.json");
    for l in 0..=2 {
        assert!(f.get(&format!("l={l} p_max=150")).unwrap() < f.tolerance);
    }
}

fn regression(file: &str, config: &str, cmd: fn(&SweepConfig) -> turbilink::Result<String>, tol: f64) {
    let stored = std::fs::read_to_string(default_dir().join(file)).unwrap();
    let fresh = cmd(&SweepConfig::from_text(config).unwrap()).unwrap();
    let d = csv_difference(&stored, &fresh).unwrap();
    assert!(d < tol, "{file}: {d:e}");
}

#[test]
fn purity_correlation_golden() {
    regression("fig2_purity_correlation.csv", FIG2_CONFIG, cmd_purity_correlation, 1e-10);
}

#[test]
fn oam_spectrum_golden() {
    regression("fig3_oam_spectrum.csv", FIG3_CONFIG, cmd_oam_spectrum, 1e-7);
}

#[test]
fn oam_width_golden() {
    regression("fig4_oam_width.csv", FIG4_CONFIG, cmd_oam_width, 1e-7);
}

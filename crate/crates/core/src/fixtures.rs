//! Golden fixtures: oracle-minted reference values (JSON) and regression
//! copies of the figure sweeps (CSV). Each JSON file records the oracle
//! version and the tolerance consumers must apply.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::{cmd_oam_spectrum, cmd_oam_width, cmd_purity_correlation, SweepConfig};
use crate::error::{Error, Result};
use crate::oracle::{
    angle_stats_quadrature, brute_force_w2_batch, coincident_radius_oam, full_oam_check,
    kernel_probes, low_schmidt_fixture, standard_test_function, trace_purity_check,
    verify_identity, BruteForceOptions, FullOamOptions, ORACLE_VERSION,
};
use crate::params::PhysicalSetup;
use crate::propagation::propagated_moments;
use crate::turbulence::TurbulenceChannel;

pub const FIG2_CONFIG: &str = include_str!("../configs/fig2.conf");
pub const FIG3_CONFIG: &str = include_str!("../configs/fig3.conf");
pub const FIG4_CONFIG: &str = include_str!("../configs/fig4.conf");
pub const FIG5_CONFIG: &str = include_str!("../configs/fig5.conf");

/// Directory holding the fixtures of this source tree.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub oracle_version: String,
    pub generator: String,
    /// Relative tolerance consumers must apply.
    pub tolerance: f64,
    pub entries: Vec<Entry>,
}

impl FixtureFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.label == label).map(|e| e.value)
    }
}

pub enum Generator {
    Json(fn() -> Result<Vec<Entry>>),
    Csv(fn() -> Result<String>),
}

pub struct Fixture {
    pub file: &'static str,
    pub description: &'static str,
    pub tolerance: f64,
    pub generator: Generator,
}

fn entry(label: String, value: f64) -> Entry {
    Entry { label, value }
}

/// `(cn2, z)` pairs and probe count of the propagation fixture.
pub const PROPAGATION_PAIRS: [(f64, f64); 8] = [
    (0.0, 1000.0),
    (1e-17, 1000.0),
    (1e-16, 1000.0),
    (1e-15, 1000.0),
    (0.0, 2000.0),
    (1e-17, 2000.0),
    (1e-16, 2000.0),
    (1e-15, 2000.0),
];
pub const PROPAGATION_PROBES: usize = 3;
pub const PROPAGATION_SEED: u64 = 2024;

pub fn propagation_label(cn2: f64, z: f64, probe: usize, part: &str) -> String {
    format!("cn2={cn2:e} z={z} probe={probe} {part}")
}

fn gen_propagation() -> Result<Vec<Entry>> {
    let setup = PhysicalSetup::reference();
    let mut out = Vec::new();
    for (cn2, z) in PROPAGATION_PAIRS {
        let ch = TurbulenceChannel::new(cn2)?;
        let m = propagated_moments(&setup, &ch, z)?;
        let probes = kernel_probes(&m, PROPAGATION_PROBES, PROPAGATION_SEED);
        let v = brute_force_w2_batch(&setup, &ch, z, &probes, &BruteForceOptions::default())?;
        for (i, c) in v.iter().enumerate() {
            out.push(entry(propagation_label(cn2, z, i, "re"), c.re));
            out.push(entry(propagation_label(cn2, z, i, "im"), c.im));
        }
    }
    Ok(out)
}

pub const PURITY_POINTS: [(f64, f64); 3] = [(1e-15, 2000.0), (1e-16, 1000.0), (1e-17, 500.0)];

pub fn point_label(cn2: f64, z: f64) -> String {
    format!("cn2={cn2:e} z={z}")
}

fn gen_purity() -> Result<Vec<Entry>> {
    let setup = PhysicalSetup::reference();
    PURITY_POINTS
        .iter()
        .map(|&(cn2, z)| {
            let m = propagated_moments(&setup, &TurbulenceChannel::new(cn2)?, z)?;
            Ok(entry(point_label(cn2, z), trace_purity_check(&m, 24)?))
        })
        .collect()
}

pub const ANGLE_POINTS: [(f64, f64); 4] = [(0.0, 0.0), (0.0, 100.0), (1e-16, 20.0), (1e-16, 1000.0)];

fn gen_angle() -> Result<Vec<Entry>> {
    let setup = PhysicalSetup::reference();
    let mut out = Vec::new();
    for (cn2, z) in ANGLE_POINTS {
        let m = propagated_moments(&setup, &TurbulenceChannel::new(cn2)?, z)?;
        let (dt, edge) = angle_stats_quadrature(&m, 2560)?;
        out.push(entry(format!("{} delta_theta", point_label(cn2, z)), dt));
        out.push(entry(format!("{} boundary_density", point_label(cn2, z)), edge));
    }
    Ok(out)
}

/// `l` values of the OAM fixtures, ratios `P(l)/P(0)`.
pub const OAM_RATIO_LS: [i32; 3] = [1, 2, -1];

fn gen_oam_full() -> Result<Vec<Entry>> {
    let (setup, ch, z) = low_schmidt_fixture();
    let m = propagated_moments(&setup, &ch, z)?;
    let f = full_oam_check(&m, &[0, 1, 2, -1], &FullOamOptions::standard(&m))?;
    Ok(OAM_RATIO_LS
        .iter()
        .zip(&f[1..])
        .map(|(l, v)| entry(format!("l={l}"), v / f[0]))
        .collect())
}

fn gen_oam_direct() -> Result<Vec<Entry>> {
    let (setup, ch, z) = low_schmidt_fixture();
    let m = propagated_moments(&setup, &ch, z)?;
    let d = coincident_radius_oam(&m, &[0, 1, 2, -1], 32, 16)?;
    Ok(OAM_RATIO_LS
        .iter()
        .zip(&d[1..])
        .map(|(l, v)| entry(format!("l={l}"), v / d[0]))
        .collect())
}

fn gen_identity() -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for l in 0..=2 {
        let r = verify_identity(l, 1.0, standard_test_function(l, 1.0), 150)?;
        for p in [50, 100, 150] {
            out.push(entry(format!("l={l} p_max={p}"), r.error_at(p)));
        }
    }
    Ok(out)
}

fn sweep(text: &str, f: fn(&SweepConfig) -> Result<String>) -> Result<String> {
    f(&SweepConfig::from_text(text)?)
}

pub const FIXTURES: &[Fixture] = &[
    Fixture {
        file: "propagation_w2.json",
        description: "kernel values by Fresnel quadrature at deterministic probes",
        tolerance: 1e-6,
        generator: Generator::Json(gen_propagation),
    },
    Fixture {
        file: "purity_trace.json",
        description: "purity by explicit trace composition",
        tolerance: 1e-4,
        generator: Generator::Json(gen_purity),
    },
    Fixture {
        file: "angle_stats.json",
        description: "angle spread and window-edge density by angle quadrature",
        tolerance: 1e-6,
        generator: Generator::Json(gen_angle),
    },
    Fixture {
        file: "oam_direct.json",
        description: "OAM ratios P(l)/P(0) by coincident-radius quadrature, low-Schmidt fixture",
        tolerance: 1e-6,
        generator: Generator::Json(gen_oam_direct),
    },
    Fixture {
        file: "oam_full.json",
        description: "OAM ratios P(l)/P(0) by explicit LG overlaps, low-Schmidt fixture",
        tolerance: 1e-2,
        generator: Generator::Json(gen_oam_full),
    },
    Fixture {
        file: "identity.json",
        description: "radial-sum identity relative errors (Gaussian-ring test function)",
        tolerance: 1e-3,
        generator: Generator::Json(gen_identity),
    },
    Fixture {
        file: "fig2_purity_correlation.csv",
        description: "purity-correlation sweep",
        tolerance: 1e-10,
        generator: Generator::Csv(|| sweep(FIG2_CONFIG, cmd_purity_correlation)),
    },
    Fixture {
        file: "fig3_oam_spectrum.csv",
        description: "oam-spectrum sweep",
        tolerance: 1e-7,
        generator: Generator::Csv(|| sweep(FIG3_CONFIG, cmd_oam_spectrum)),
    },
    Fixture {
        file: "fig4_oam_width.csv",
        description: "oam-width sweep",
        tolerance: 1e-7,
        generator: Generator::Csv(|| sweep(FIG4_CONFIG, cmd_oam_width)),
    },
];

/// Largest difference between two CSV outputs, compared field by field as
/// `|a - b| / max(1, |a|, |b|)`: relative for large values, absolute for
/// small ones such as far-tail probabilities, whose last digits carry only
/// rounding noise. Non-numeric fields must match exactly; header comments are
/// skipped.
pub fn csv_difference(a: &str, b: &str) -> Result<f64> {
    let rows = |t: &str| -> Vec<String> {
        t.lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
    };
    let (ra, rb) = (rows(a), rows(b));
    if ra.len() != rb.len() {
        return Err(Error::Consistency(format!("row count {} vs {}", ra.len(), rb.len())));
    }
    let mut worst: f64 = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        let (fx, fy): (Vec<_>, Vec<_>) = (x.split(',').collect(), y.split(',').collect());
        if fx.len() != fy.len() {
            return Err(Error::Consistency(format!("row shape differs: {x} vs {y}")));
        }
        for (p, q) in fx.iter().zip(&fy) {
            match (p.parse::<f64>(), q.parse::<f64>()) {
                (Ok(u), Ok(v)) if u != v => {
                    worst = worst.max((u - v).abs() / u.abs().max(v.abs()).max(1.0))
                }
                (Ok(_), Ok(_)) => {}
                _ if p == q => {}
                _ => return Err(Error::Consistency(format!("field {p} vs {q}"))),
            }
        }
    }
    Ok(worst)
}

/// Regenerates `fixture` and compares it to the stored file in `dir`
/// (writing it instead when `update` is set or the file is missing).
pub fn check_fixture(fixture: &Fixture, dir: &Path, update: bool) -> Result<(bool, String)> {
    let path = dir.join(fixture.file);
    let fresh = match fixture.generator {
        Generator::Json(g) => {
            let f = FixtureFile {
                oracle_version: ORACLE_VERSION.to_string(),
                generator: fixture.description.to_string(),
                tolerance: fixture.tolerance,
                entries: g()?,
            };
            serde_json::to_string_pretty(&f).map_err(|e| Error::Io(e.to_string()))? + "\n"
        }
        Generator::Csv(g) => g()?,
    };
    if update || !path.exists() {
        std::fs::create_dir_all(dir)?;
        std::fs::write(&path, &fresh)?;
        return Ok((true, format!("wrote {}", path.display())));
    }
    let stored = std::fs::read_to_string(&path)?;
    let diff = match fixture.generator {
        Generator::Json(_) => {
            let a: FixtureFile = serde_json::from_str(&stored).map_err(|e| Error::Io(e.to_string()))?;
            let b: FixtureFile = serde_json::from_str(&fresh).map_err(|e| Error::Io(e.to_string()))?;
            if a.oracle_version != b.oracle_version || a.entries.len() != b.entries.len() {
                return Ok((false, "oracle version or entry set changed".into()));
            }
            a.entries
                .iter()
                .zip(&b.entries)
                .map(|(x, y)| {
                    if x.label != y.label {
                        f64::INFINITY
                    } else {
                        // differences between tiny values are judged on the absolute scale
                        (x.value - y.value).abs() / x.value.abs().max(y.value.abs()).max(1e-12)
                    }
                })
                .fold(0.0, f64::max)
        }
        Generator::Csv(_) => csv_difference(&stored, &fresh)?,
    };
    // regeneration must reproduce the stored values far inside the consumer tolerance
    let limit = 1e-9_f64.max(fixture.tolerance * 1e-3);
    Ok((diff <= limit, format!("max rel diff {diff:.2e} (limit {limit:.0e})")))
}

//! Sweep configuration, CSV/JSON emitters for each figure-style sweep, and the
//! validation suite. The `turbilink` binary is a thin wrapper over this module.
//!
//! Config files are flat `key = value` text; `#` starts a comment. Every key
//! is also accepted as a command-line flag of the same name. Lengths take an
//! optional unit suffix (`nm`, `um`/`μm`, `mm`, `cm`, `m`, `km`); bare numbers
//! are meters.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::epr::{distance_grid, scan_entanglement, EntanglementScan, EprOptions};
use crate::error::{Error, Result};
use crate::oam::{conditional_oam_distribution_auto, conditional_oam_uncertainty, OamOptions, OamSpectrum};
use crate::params::{derive_setup, PhysicalSetup};
use crate::propagation::{propagated_moments, PropagatedMoments};
use crate::statistics::{purity, spatial_correlation};
use crate::turbulence::TurbulenceChannel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZScale {
    Linear,
    Log,
}

/// Everything a sweep needs. Lengths are stored in meters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub pump_wavelength: f64,
    pub pump_waist: f64,
    pub crystal_length: f64,
    pub focal_length: f64,
    pub cn2: Vec<f64>,
    pub z_min: f64,
    pub z_max: f64,
    pub z_count: usize,
    pub z_scale: ZScale,
    pub l_max: u32,
    pub l_max_limit: u32,
    pub oam_offset: f64,
    pub window_fraction: f64,
    pub angle_grid: usize,
    /// LG basis waist; `None` uses the collimated difference waist.
    pub analysis_waist: Option<f64>,
    pub oam_tolerance: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            pump_wavelength: 355e-9,
            pump_waist: 507e-6,
            crystal_length: 1e-3,
            focal_length: 0.5,
            cn2: vec![0.0, 1e-17, 1e-16, 1e-15],
            z_min: 0.0,
            z_max: 2000.0,
            z_count: 201,
            z_scale: ZScale::Linear,
            l_max: 15,
            l_max_limit: 1024,
            oam_offset: 1.0,
            window_fraction: 0.9,
            angle_grid: 256,
            analysis_waist: None,
            oam_tolerance: 1e-8,
            out: None,
            threads: None,
        }
    }
}

/// Keys accepted in config files and as `--flag` overrides.
pub const CONFIG_KEYS: &[&str] = &[
    "pump_wavelength",
    "pump_waist",
    "crystal_length",
    "focal_length",
    "cn2",
    "z_min",
    "z_max",
    "z_count",
    "z_scale",
    "l_max",
    "l_max_limit",
    "oam_offset",
    "window_fraction",
    "angle_grid",
    "analysis_waist",
    "oam_tolerance",
    "out",
    "threads",
];

fn config_err(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key} = {value:?}: {why}"))
}

/// Parses a length with an optional unit suffix into meters.
pub fn parse_length(text: &str) -> Result<f64> {
    let t = text.trim();
    // decimal exponents; dividing by an exact power of ten keeps "355nm" == 355e-9
    const UNITS: &[(&str, i32)] = &[
        ("km", 3),
        ("cm", -2),
        ("mm", -3),
        ("um", -6),
        ("μm", -6),
        ("µm", -6),
        ("nm", -9),
        ("m", 0),
    ];
    let (number, exp) = UNITS
        .iter()
        .find_map(|(suffix, exp)| t.strip_suffix(suffix).map(|n| (n.trim(), *exp)))
        .unwrap_or((t, 0));
    let v: f64 = number
        .parse()
        .map_err(|_| Error::Config(format!("not a length: {text:?}")))?;
    Ok(if exp >= 0 {
        v * 10f64.powi(exp)
    } else {
        v / 10f64.powi(-exp)
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| config_err(key, value, e))
}

impl SweepConfig {
    /// Sets one key from its textual value. Keys may use `-` or `_`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let len = |v: &str| parse_length(v).map_err(|e| config_err(&key, v, e));
        match key.as_str() {
            "pump_wavelength" => self.pump_wavelength = len(value)?,
            "pump_waist" => self.pump_waist = len(value)?,
            "crystal_length" => self.crystal_length = len(value)?,
            "focal_length" => self.focal_length = len(value)?,
            "cn2" => {
                self.cn2 = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_num::<f64>(&key, s))
                    .collect::<Result<_>>()?
            }
            "z_min" => self.z_min = len(value)?,
            "z_max" => self.z_max = len(value)?,
            "z_count" => self.z_count = parse_num(&key, value)?,
            "z_scale" => {
                self.z_scale = match value.trim() {
                    "linear" | "lin" => ZScale::Linear,
                    "log" => ZScale::Log,
                    other => return Err(config_err(&key, other, "expected `linear` or `log`")),
                }
            }
            "l_max" => self.l_max = parse_num(&key, value)?,
            "l_max_limit" => self.l_max_limit = parse_num(&key, value)?,
            "oam_offset" => self.oam_offset = parse_num(&key, value)?,
            "window_fraction" => self.window_fraction = parse_num(&key, value)?,
            "angle_grid" => self.angle_grid = parse_num(&key, value)?,
            "analysis_waist" => {
                self.analysis_waist = match value.trim() {
                    "" | "auto" => None,
                    v => Some(len(v)?),
                }
            }
            "oam_tolerance" => self.oam_tolerance = parse_num(&key, value)?,
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "threads" => self.threads = Some(parse_num(&key, value)?),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.apply(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.setup()?;
        if self.cn2.is_empty() {
            return Err(Error::Config("cn2: need at least one value".into()));
        }
        for &c in &self.cn2 {
            TurbulenceChannel::new(c)?;
        }
        if self.z_count < 2 {
            return Err(Error::Config(format!("z_count: need >= 2, got {}", self.z_count)));
        }
        if !(self.z_min >= 0.0 && self.z_max > self.z_min && self.z_max.is_finite()) {
            return Err(Error::Config(format!(
                "z_min/z_max: need 0 <= z_min < z_max, got {} and {}",
                self.z_min, self.z_max
            )));
        }
        if self.z_scale == ZScale::Log && self.z_min <= 0.0 {
            return Err(Error::Config("z_min: log scale needs z_min > 0".into()));
        }
        if let Some(w) = self.analysis_waist {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("analysis_waist: must be positive, got {w}")));
            }
        }
        if !(self.oam_tolerance > 0.0 && self.oam_tolerance < 1e-2) {
            return Err(Error::Config(format!(
                "oam_tolerance: must lie in (0, 1e-2), got {}",
                self.oam_tolerance
            )));
        }
        if self.angle_grid < 64 {
            return Err(Error::Config(format!("angle_grid: need >= 64, got {}", self.angle_grid)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads: must be at least 1".into()));
        }
        self.epr_options().validate()
    }

    pub fn setup(&self) -> Result<PhysicalSetup> {
        derive_setup(self.pump_wavelength, self.pump_waist, self.crystal_length, self.focal_length)
    }

    pub fn z_grid(&self) -> Result<Vec<f64>> {
        distance_grid(self.z_min, self.z_max, self.z_count, self.z_scale == ZScale::Log)
    }

    pub fn oam_options(&self) -> OamOptions {
        OamOptions {
            tolerance: self.oam_tolerance,
            ..OamOptions::default()
        }
    }

    pub fn epr_options(&self) -> EprOptions {
        EprOptions {
            oam_offset: self.oam_offset,
            l_max: self.l_max,
            l_max_limit: self.l_max_limit,
            angle_grid: self.angle_grid,
            analysis_waist: self.analysis_waist,
            oam: self.oam_options(),
            window_fraction: self.window_fraction,
            ..EprOptions::default()
        }
    }

    /// `# key=value` lines recording the configuration (the output path and
    /// thread count are left out so that outputs stay byte-identical).
    pub fn header(&self, command: &str) -> String {
        let mut h = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(h, "# {k}={v}");
        };
        kv("command", command.to_string());
        kv("version", env!("CARGO_PKG_VERSION").to_string());
        kv("pump_wavelength", fmt_f64(self.pump_wavelength));
        kv("pump_waist", fmt_f64(self.pump_waist));
        kv("crystal_length", fmt_f64(self.crystal_length));
        kv("focal_length", fmt_f64(self.focal_length));
        kv("cn2", self.cn2.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(","));
        kv("z_min", fmt_f64(self.z_min));
        kv("z_max", fmt_f64(self.z_max));
        kv("z_count", self.z_count.to_string());
        kv(
            "z_scale",
            match self.z_scale {
                ZScale::Linear => "linear",
                ZScale::Log => "log",
            }
            .into(),
        );
        kv("l_max", self.l_max.to_string());
        kv("l_max_limit", self.l_max_limit.to_string());
        kv("oam_offset", fmt_f64(self.oam_offset));
        kv("window_fraction", fmt_f64(self.window_fraction));
        kv("angle_grid", self.angle_grid.to_string());
        kv("analysis_waist", self.analysis_waist.map_or("auto".into(), fmt_f64));
        kv("oam_tolerance", fmt_f64(self.oam_tolerance));
        h
    }
}

/// Shortest round-trip decimal; infinities as `inf`/`-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if v == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Runs `f` on a dedicated pool with `threads` workers (default: rayon's choice).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    let pool = b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// All `(cn2, z)` points of the sweep, Cn² outermost.
fn sweep_points(config: &SweepConfig) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    let grid = config.z_grid()?;
    Ok(config
        .cn2
        .iter()
        .flat_map(|&c| grid.iter().map(move |&z| (c, z)))
        .collect())
}

fn moments_at(setup: &PhysicalSetup, cn2: f64, z: f64) -> Result<PropagatedMoments> {
    propagated_moments(setup, &TurbulenceChannel::new(cn2)?, z)
}

fn opt_len(v: Option<f64>) -> String {
    v.map_or("inf".into(), fmt_f64)
}

/// Propagated moments per `(cn2, z)`. The `r_*_sq` columns hold the squared
/// phase-curvature radius.
pub fn cmd_moments(config: &SweepConfig) -> Result<String> {
    let setup = config.setup()?;
    let rows = sweep_points(config)?
        .par_iter()
        .map(|&(c, z)| {
            let m = moments_at(&setup, c, z)?;
            Ok(format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt_f64(c),
                fmt_f64(z),
                fmt_f64(m.w()),
                fmt_f64(m.sigma()),
                fmt_f64(m.r_plus().powi(2)),
                fmt_f64(m.r_minus().powi(2)),
                opt_len(m.c_plus()),
                opt_len(m.c_minus()),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = config.header("moments");
    out.push_str("cn2,z_m,w_m,sigma_m,r_plus_sq_m2,r_minus_sq_m2,c_plus_m,c_minus_m\n");
    out.extend(rows);
    Ok(out)
}

pub fn cmd_purity_correlation(config: &SweepConfig) -> Result<String> {
    let setup = config.setup()?;
    let rows = sweep_points(config)?
        .par_iter()
        .map(|&(c, z)| {
            let m = moments_at(&setup, c, z)?;
            Ok(format!(
                "{},{},{},{}\n",
                fmt_f64(c),
                fmt_f64(z),
                fmt_f64(purity(&m)),
                fmt_f64(spatial_correlation(&m))
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = config.header("purity-correlation");
    out.push_str("cn2,z_m,purity,f_c\n");
    out.extend(rows);
    Ok(out)
}

fn spectra(config: &SweepConfig) -> Result<Vec<((f64, f64), OamSpectrum)>> {
    let setup = config.setup()?;
    let waist = config.analysis_waist.unwrap_or(setup.collimated_diff_waist);
    let options = config.oam_options();
    sweep_points(config)?
        .into_par_iter()
        .map(|(c, z)| {
            let m = moments_at(&setup, c, z)?;
            let s = conditional_oam_distribution_auto(&m, config.l_max, config.l_max_limit, waist, &options)?;
            Ok(((c, z), s))
        })
        .collect()
}

/// Conditional OAM spectrum `P(l | l_i = 0)` per `(cn2, z)`. The `l` range of
/// a block grows beyond `l_max` when needed to hold the spectrum.
pub fn cmd_oam_spectrum(config: &SweepConfig) -> Result<String> {
    let mut out = config.header("oam-spectrum");
    out.push_str("cn2,z_m,l,probability\n");
    for ((c, z), s) in spectra(config)? {
        for (l, p) in s.indices().zip(&s.probabilities) {
            let _ = writeln!(out, "{},{},{l},{}", fmt_f64(c), fmt_f64(z), fmt_f64(*p));
        }
    }
    Ok(out)
}

/// OAM standard deviation (ħ) per `(cn2, z)`.
pub fn cmd_oam_width(config: &SweepConfig) -> Result<String> {
    let mut out = config.header("oam-width");
    out.push_str("cn2,z_m,std_hbar\n");
    for ((c, z), s) in spectra(config)? {
        let _ = writeln!(out, "{},{},{}", fmt_f64(c), fmt_f64(z), fmt_f64(conditional_oam_uncertainty(&s)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanEntry {
    pub cn2: f64,
    pub entangled_at_end: bool,
    #[serde(flatten)]
    pub scan: EntanglementScan,
}

#[derive(Debug, Clone, Serialize)]
pub struct EprScanReport {
    pub command: &'static str,
    pub version: &'static str,
    pub config: SweepConfig,
    pub scans: Vec<ScanEntry>,
}

/// EPR scan per Cn²: a JSON report (intervals, peak, maximal window, config)
/// and a CSV of both sides of the criterion.
pub fn cmd_epr_scan(config: &SweepConfig) -> Result<(String, String)> {
    config.validate()?;
    let setup = config.setup()?;
    let grid = config.z_grid()?;
    let options = config.epr_options();
    let scans = config
        .cn2
        .iter()
        .map(|&c| {
            let scan = scan_entanglement(&setup, &TurbulenceChannel::new(c)?, &grid, &options)?;
            Ok(ScanEntry {
                cn2: c,
                entangled_at_end: scan.is_entangled_at_end(),
                scan,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = config.header("epr-scan");
    csv.push_str("cn2,z_m,lhs,rhs,entangled\n");
    for e in &scans {
        for r in &e.scan.reports {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                fmt_f64(e.cn2),
                fmt_f64(r.z),
                fmt_f64(r.lhs),
                fmt_f64(r.rhs),
                r.entangled
            );
        }
    }
    let report = EprScanReport {
        command: "epr-scan",
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        scans,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))? + "\n";
    Ok((json, csv))
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// validation

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationLevel {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Runs the oracle suite. `Quick` runs the cheap cross-checks; `Full` adds the
/// expensive oracles and regenerates every golden fixture in `fixtures`,
/// diffing against the stored copy (or overwriting it when `update` is set).
/// `progress` sees each check as it finishes.
pub fn cmd_validate(
    level: ValidationLevel,
    fixtures: &Path,
    update: bool,
    progress: &mut dyn FnMut(&CheckResult),
) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let mut run = |name: &str, f: &dyn Fn() -> Result<(bool, String)>| {
        let t = Instant::now();
        let (passed, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let c = CheckResult {
            name: name.to_string(),
            passed,
            detail,
            seconds: t.elapsed().as_secs_f64(),
        };
        progress(&c);
        checks.push(c);
    };
    for (name, f) in crate::validation::quick_checks() {
        run(name, &*f);
    }
    if level == ValidationLevel::Full {
        for (name, f) in crate::validation::full_checks() {
            run(name, &*f);
        }
        for fx in crate::fixtures::FIXTURES {
            let name = format!("fixture {}", fx.file);
            run(&name, &|| crate::fixtures::check_fixture(fx, fixtures, update));
        }
    }
    Ok(ValidationReport { checks })
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use turbilink::cli::{self, SweepConfig, ValidationLevel};
use turbilink::fixtures;

#[derive(Parser)]
#[command(name = "turbilink", version, about = "Biphoton spatial entanglement through Kolmogorov turbulence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagated widths, curvature radii and coupling lengths.
    Moments(SweepArgs),
    /// Purity and position correlation versus distance.
    PurityCorrelation(SweepArgs),
    /// Conditional OAM spectrum P(l | l_i = 0).
    OamSpectrum(SweepArgs),
    /// Conditional OAM standard deviation.
    OamWidth(SweepArgs),
    /// EPR criterion scan: JSON report plus CSV of both sides.
    EprScan(SweepArgs),
    /// Oracle cross-checks; exit code 0 iff every check passes.
    Validate(ValidateArgs),
}

/// Every config key is available as a flag of the same name.
#[derive(Args)]
struct SweepArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    pump_wavelength: Option<String>,
    #[arg(long)]
    pump_waist: Option<String>,
    #[arg(long)]
    crystal_length: Option<String>,
    #[arg(long)]
    focal_length: Option<String>,
    /// Turbulence strength (m^-2/3); repeatable or comma-separated.
    #[arg(long)]
    cn2: Vec<String>,
    #[arg(long)]
    z_min: Option<String>,
    #[arg(long)]
    z_max: Option<String>,
    #[arg(long)]
    z_count: Option<String>,
    /// `linear` or `log`.
    #[arg(long)]
    z_scale: Option<String>,
    #[arg(long)]
    l_max: Option<String>,
    #[arg(long)]
    l_max_limit: Option<String>,
    #[arg(long)]
    oam_offset: Option<String>,
    #[arg(long)]
    window_fraction: Option<String>,
    #[arg(long)]
    angle_grid: Option<String>,
    #[arg(long)]
    analysis_waist: Option<String>,
    #[arg(long)]
    oam_tolerance: Option<String>,
    /// Output CSV path (stdout when absent). `epr-scan` writes the JSON next
    /// to it with a `.json` extension.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (falls back to TURBILINK_THREADS).
    #[arg(long, env = "TURBILINK_THREADS")]
    threads: Option<String>,
}

impl SweepArgs {
    fn config(&self) -> turbilink::Result<SweepConfig> {
        let mut c = SweepConfig::default();
        if let Some(p) = &self.config {
            c.apply_text(&std::fs::read_to_string(p)?)?;
        }
        if !self.cn2.is_empty() {
            c.apply("cn2", &self.cn2.join(","))?;
        }
        let flags = [
            ("pump_wavelength", &self.pump_wavelength),
            ("pump_waist", &self.pump_waist),
            ("crystal_length", &self.crystal_length),
            ("focal_length", &self.focal_length),
            ("z_min", &self.z_min),
            ("z_max", &self.z_max),
            ("z_count", &self.z_count),
            ("z_scale", &self.z_scale),
            ("l_max", &self.l_max),
            ("l_max_limit", &self.l_max_limit),
            ("oam_offset", &self.oam_offset),
            ("window_fraction", &self.window_fraction),
            ("angle_grid", &self.angle_grid),
            ("analysis_waist", &self.analysis_waist),
            ("oam_tolerance", &self.oam_tolerance),
            ("out", &self.out),
            ("threads", &self.threads),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                c.apply(k, v)?;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Quick,
    Full,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(value_enum, default_value = "quick")]
    level: Level,
    /// Fixture directory (defaults to the one in the source tree).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Overwrite stored fixtures with the regenerated ones.
    #[arg(long)]
    update: bool,
    #[arg(long, env = "TURBILINK_THREADS")]
    threads: Option<usize>,
}

fn run_sweep(args: &SweepArgs, f: fn(&SweepConfig) -> turbilink::Result<String>) -> turbilink::Result<()> {
    let c = args.config()?;
    let text = cli::with_threads(c.threads, || f(&c))??;
    cli::emit(c.out.as_deref(), &text)
}

fn run(cli: Cli) -> turbilink::Result<bool> {
    match cli.command {
        Command::Moments(a) => run_sweep(&a, cli::cmd_moments)?,
        Command::PurityCorrelation(a) => run_sweep(&a, cli::cmd_purity_correlation)?,
        Command::OamSpectrum(a) => run_sweep(&a, cli::cmd_oam_spectrum)?,
        Command::OamWidth(a) => run_sweep(&a, cli::cmd_oam_width)?,
        Command::EprScan(a) => {
            let c = a.config()?;
            let (json, csv) = cli::with_threads(c.threads, || cli::cmd_epr_scan(&c))??;
            match &c.out {
                Some(p) => {
                    std::fs::write(p, csv)?;
                    std::fs::write(p.with_extension("json"), json)?;
                }
                None => cli::emit(None, &json)?,
            }
        }
        Command::Validate(a) => {
            let level = match a.level {
                Level::Quick => ValidationLevel::Quick,
                Level::Full => ValidationLevel::Full,
            };
            let dir = a.fixtures.unwrap_or_else(fixtures::default_dir);
            let report = cli::with_threads(a.threads, || {
                cli::cmd_validate(level, &dir, a.update, &mut |c| {
                    eprintln!(
                        "[{}] {} ({:.1} s): {}",
                        if c.passed { "PASS" } else { "FAIL" },
                        c.name,
                        c.seconds,
                        c.detail
                    )
                })
            })??;
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            eprintln!("{} checks, {failed} failed", report.checks.len());
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

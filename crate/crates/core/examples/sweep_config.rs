//! Building a sweep from config text with overrides, and emitting CSV.
use turbilink::cli::{cmd_moments, cmd_purity_correlation, SweepConfig};

fn main() -> turbilink::Result<()> {
    let mut config = SweepConfig::from_text(
        "pump_waist = 507um\ncn2 = 0, 1e-16\nz_min = 1m\nz_max = 1km\nz_count = 4\nz_scale = log\n",
    )?;
    config.apply("z-count", "3")?;
    config.validate()?;
    print!("{}", cmd_moments(&config)?);
    print!("{}", cmd_purity_correlation(&config)?);
    Ok(())
}

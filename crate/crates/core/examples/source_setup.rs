//! Derived source quantities for the reference configuration.
use turbilink::params::{derive_setup, PhysicalSetup};

fn main() -> turbilink::Result<()> {
    let s = PhysicalSetup::reference();
    println!("wavenumber            {:.6e} 1/m", s.wavenumber);
    println!("SPDC correlation      {:.4} µm", s.spdc_correlation_length * 1e6);
    println!("collimated sum waist  {:.4} µm", s.collimated_sum_waist * 1e6);
    println!("collimated diff waist {:.4} mm", s.collimated_diff_waist * 1e3);
    println!("correlation crossover {:.3} m", s.correlation_crossover_distance());
    println!("sum Rayleigh range    {:.4} m", s.sum_rayleigh_range());
    println!("diff Rayleigh range   {:.1} m", s.diff_rayleigh_range());

    // a wider pump narrows the collimated sum mode
    let wide = derive_setup(355e-9, 1e-3, 1e-3, 0.5)?;
    println!("1 mm pump: sum waist {:.4} µm", wide.collimated_sum_waist * 1e6);
    Ok(())
}

//! Angle–OAM EPR criterion `Δθ·(Δl + offset) < ½[1 − 2π P(θ0)]` (ħ = 1) and
//! scans over propagation distance.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oam::{conditional_oam_distribution_auto, conditional_oam_uncertainty, OamOptions};
use crate::params::PhysicalSetup;
use crate::propagation::propagated_moments;
use crate::statistics::conditional_angle_stats;
use crate::turbulence::TurbulenceChannel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprOptions {
    /// Added to the OAM uncertainty to model practical imperfections (ħ).
    pub oam_offset: f64,
    /// Initial OAM truncation; doubled automatically while the tail is too heavy.
    pub l_max: u32,
    /// Upper bound for the automatic `l_max` growth.
    pub l_max_limit: u32,
    pub angle_grid: usize,
    /// LG basis waist; `None` uses the collimated difference waist.
    pub analysis_waist: Option<f64>,
    pub oam: OamOptions,
    /// Maximal window: violation ≥ `window_fraction` × peak violation.
    pub window_fraction: f64,
    /// Relative z-precision of bisection-refined endpoints.
    pub z_precision: f64,
}

impl Default for EprOptions {
    fn default() -> Self {
        Self {
            oam_offset: 1.0,
            l_max: 15,
            l_max_limit: 1024,
            angle_grid: 256,
            analysis_waist: None,
            oam: OamOptions::default(),
            window_fraction: 0.9,
            z_precision: 1e-3,
        }
    }
}

impl EprOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.oam_offset >= 0.0 && self.oam_offset.is_finite()) {
            return Err(Error::Parameter {
                field: "oam_offset",
                value: self.oam_offset,
                reason: "must be finite and non-negative",
            });
        }
        if !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return Err(Error::Parameter {
                field: "window_fraction",
                value: self.window_fraction,
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.z_precision > 0.0 && self.z_precision < 0.5) {
            return Err(Error::Parameter {
                field: "z_precision",
                value: self.z_precision,
                reason: "must lie in (0, 0.5)",
            });
        }
        if self.l_max < 1 || self.l_max_limit < self.l_max {
            return Err(Error::Domain(format!(
                "need 1 <= l_max ({}) <= l_max_limit ({})",
                self.l_max, self.l_max_limit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprReport {
    pub z: f64,
    pub delta_theta: f64,
    pub delta_oam: f64,
    pub oam_offset: f64,
    pub lhs: f64,
    pub boundary_density: f64,
    pub rhs: f64,
    pub entangled: bool,
    pub violation: f64,
    /// OAM truncation actually used.
    pub l_max: u32,
}

/// Evaluates both sides of the criterion at distance `z`.
pub fn epr_report(
    setup: &PhysicalSetup,
    channel: &TurbulenceChannel,
    z: f64,
    options: &EprOptions,
) -> Result<EprReport> {
    options.validate()?;
    let moments = propagated_moments(setup, channel, z)?;
    let angle = conditional_angle_stats(&moments, options.angle_grid)?;
    let waist = options.analysis_waist.unwrap_or(setup.collimated_diff_waist);
    let spectrum = conditional_oam_distribution_auto(
        &moments,
        options.l_max,
        options.l_max_limit,
        waist,
        &options.oam,
    )?;
    let delta_oam = conditional_oam_uncertainty(&spectrum)?;
    let lhs = angle.circular_std * (delta_oam + options.oam_offset);
    let rhs = 0.5 * (1.0 - 2.0 * std::f64::consts::PI * angle.boundary_density);
    let violation = rhs - lhs;
    Ok(EprReport {
        z: moments.z,
        delta_theta: angle.circular_std,
        delta_oam,
        oam_offset: options.oam_offset,
        lhs,
        boundary_density: angle.boundary_density,
        rhs,
        entangled: violation > 0.0,
        violation,
        l_max: spectrum.l_max,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntanglementScan {
    pub z_grid: Vec<f64>,
    pub reports: Vec<EprReport>,
    /// Disjoint, sorted `[z_lo, z_hi]` intervals where the criterion is
    /// violated. Intervals touching the scan ends are clipped there.
    pub intervals: Vec<[f64; 2]>,
    pub z_max_violation: Option<f64>,
    pub max_violation: Option<f64>,
    /// Region around the peak where violation ≥ `window_fraction` × peak.
    pub maximal_window: Option<[f64; 2]>,
    pub window_fraction: f64,
}

impl EntanglementScan {
    pub fn is_entangled_at_end(&self) -> bool {
        self.reports.last().is_some_and(|r| r.entangled)
    }
}

/// Bisects `g` (a function of z whose sign differs at `lo` and `hi`) until the
/// bracket is narrower than `precision · hi`. Returns the bracket midpoint.
fn bisect<G>(g: G, mut lo: f64, mut hi: f64, g_lo: f64, precision: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let lo_positive = g_lo > 0.0;
    for _ in 0..200 {
        if hi - lo <= precision * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (g(mid)? > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Evaluates the criterion across `z_grid` and extracts entangled intervals
/// and the maximal-entanglement window.
pub fn scan_entanglement(
    setup: &PhysicalSetup,
    channel: &TurbulenceChannel,
    z_grid: &[f64],
    options: &EprOptions,
) -> Result<EntanglementScan> {
    options.validate()?;
    if z_grid.is_empty() {
        return Err(Error::Domain("empty z grid".into()));
    }
    if z_grid.len() < 16 {
        return Err(Error::Domain(format!(
            "z grid needs at least 16 points, got {}",
            z_grid.len()
        )));
    }
    if z_grid.windows(2).any(|w| !(w[1] > w[0])) || z_grid[0] < 0.0 {
        return Err(Error::Domain(
            "z grid must be non-negative and strictly increasing".into(),
        ));
    }
    let reports = z_grid
        .par_iter()
        .map(|&z| epr_report(setup, channel, z, options))
        .collect::<Result<Vec<_>>>()?;

    let violation_at = |z: f64| epr_report(setup, channel, z, options).map(|r| r.violation);
    let mut intervals = Vec::new();
    let mut start = reports[0].entangled.then_some(z_grid[0]);
    for i in 0..reports.len() - 1 {
        let (a, b) = (&reports[i], &reports[i + 1]);
        if a.entangled == b.entangled {
            continue;
        }
        let edge = bisect(violation_at, a.z, b.z, a.violation, options.z_precision)?;
        if a.entangled {
            intervals.push([start.take().unwrap_or(z_grid[0]), edge]);
        } else {
            start = Some(edge);
        }
    }
    if let Some(s) = start {
        intervals.push([s, *z_grid.last().unwrap()]);
    }

    let peak = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.entangled)
        .max_by(|a, b| a.1.violation.total_cmp(&b.1.violation));
    let (z_max_violation, max_violation, maximal_window) = match peak {
        None => (None, None, None),
        Some((ip, rp)) => {
            let threshold = options.window_fraction * rp.violation;
            let excess = |z: f64| violation_at(z).map(|v| v - threshold);
            let mut lo = ip;
            while lo > 0 && reports[lo - 1].violation >= threshold {
                lo -= 1;
            }
            let mut hi = ip;
            while hi + 1 < reports.len() && reports[hi + 1].violation >= threshold {
                hi += 1;
            }
            let left = if lo == 0 {
                z_grid[0]
            } else {
                let r = &reports[lo - 1];
                bisect(excess, r.z, reports[lo].z, r.violation - threshold, options.z_precision)?
            };
            let right = if hi + 1 == reports.len() {
                *z_grid.last().unwrap()
            } else {
                let r = &reports[hi];
                bisect(excess, r.z, reports[hi + 1].z, r.violation - threshold, options.z_precision)?
            };
            (Some(rp.z), Some(rp.violation), Some([left, right]))
        }
    };

    Ok(EntanglementScan {
        z_grid: z_grid.to_vec(),
        reports,
        intervals,
        z_max_violation,
        max_violation,
        maximal_window,
        window_fraction: options.window_fraction,
    })
}

/// `count` points from `min` to `max`, inclusive, linear or logarithmic.
pub fn distance_grid(min: f64, max: f64, count: usize, log: bool) -> Result<Vec<f64>> {
    if count < 2 || !(max > min) || min < 0.0 || !max.is_finite() {
        return Err(Error::Domain(format!(
            "invalid grid: min={min}, max={max}, count={count}"
        )));
    }
    if log && min <= 0.0 {
        return Err(Error::Domain("log grid needs min > 0".into()));
    }
    let n = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / n;
            if i == count - 1 {
                max
            } else if log {
                min * (max / min).powf(t)
            } else {
                min + (max - min) * t
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_space_short_range_is_entangled() {
        let setup = PhysicalSetup::reference();
        let r = epr_report(&setup, &TurbulenceChannel::free_space(), 0.0, &EprOptions::default()).unwrap();
        assert_eq!(r.delta_oam, 0.0);
        assert!(r.entangled);
        assert!(r.rhs <= 0.5);
        assert_eq!(r.entangled, r.violation > 0.0);
    }

    #[test]
    fn crossover_is_not_entangled() {
        let setup = PhysicalSetup::reference();
        let z = setup.correlation_crossover_distance();
        let r = epr_report(&setup, &TurbulenceChannel::free_space(), z, &EprOptions::default()).unwrap();
        assert!(r.rhs.abs() < 1e-9);
        assert!(!r.entangled);
    }

    #[test]
    fn grid_validation() {
        let setup = PhysicalSetup::reference();
        let ch = TurbulenceChannel::free_space();
        let opts = EprOptions::default();
        assert!(scan_entanglement(&setup, &ch, &[], &opts).is_err());
        assert!(scan_entanglement(&setup, &ch, &[1.0, 2.0], &opts).is_err());
        let mut g = distance_grid(1.0, 10.0, 16, false).unwrap();
        g.swap(3, 4);
        assert!(scan_entanglement(&setup, &ch, &g, &opts).is_err());
    }

    #[test]
    fn grids() {
        let g = distance_grid(0.1, 1e3, 11, true).unwrap();
        assert_eq!(g[0], 0.1);
        assert_eq!(g[10], 1e3);
        assert!((g[5] - 10.0).abs() < 1e-11);
        let l = distance_grid(0.0, 10.0, 6, false).unwrap();
        assert_eq!(l, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert!(distance_grid(0.0, 1.0, 5, true).is_err());
    }

    #[test]
    fn bisection_locates_root() {
        let r = bisect(|z| Ok(2.0 - z), 1.0, 5.0, 1.0, 1e-6).unwrap();
        assert!((r - 2.0).abs() < 1e-5);
    }
}

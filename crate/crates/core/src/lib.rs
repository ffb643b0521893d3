//! Propagation of a down-converted photon pair's transverse spatial state
//! through weak Kolmogorov turbulence, with purity, position correlation,
//! conditional angle and OAM statistics, and the angle–OAM EPR criterion.

pub mod error;
pub mod params;
pub mod turbulence;
pub mod propagation;
pub mod quadrature;
pub mod statistics;
pub mod oam;
pub mod epr;
pub mod oracle;
pub mod validation;
pub mod fixtures;
pub mod cli;

pub use error::{Error, Result};

/// Transverse position `(x, y)` in meters.
pub type Vec2 = [f64; 2];

//! Deterministic indoor terahertz propagation engine.
//!
//! The crate models a furnished room at THz carrier frequencies and answers
//! one question per human-blocker position: which link (direct, wall
//! reflection, or one of several wall-mounted reconfigurable intelligent
//! surfaces) gives the receiver the lowest path loss?
//!
//! Module map:
//!
//! - [`scene`]: room geometry, obstacles, nodes and the blocker sampling grid
//! - [`propagation`]: materials, Fresnel reflection, roughness, Friis loss
//! - [`atmosphere`]: gaseous, rain, fog and snow specific attenuation
//! - [`ris`]: unit-cell model, Fraunhofer region, RIS path-loss models and
//!   phase-profile synthesis
//! - [`raytrace`]: image-method tracer producing LOS, reflected and
//!   RIS-relayed paths
//! - [`drf`]: the per-blockage sweep, strategy selection and statistics
//! - [`scenariofmt`]: scene files, report documents and CSV exports
//! - [`data`]: checksummed coefficient tables and the material database

pub mod atmosphere;
pub mod data;
pub mod drf;
mod error;
pub mod numeric;
pub mod propagation;
pub mod raytrace;
pub mod ris;
pub mod scenariofmt;
pub mod scene;

pub use error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permeability (H/m), CODATA 2018.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity (F/m), CODATA 2018.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Free-space wavelength in meters for a frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Linear power ratio to decibels.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Decibels to a linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

//! Simulation library for cavity-assisted photon scattering (CAPS) interconnects.
//!
//! The crate is organised bottom-up:
//!
//! * [`cavity`]: atom-cavity parameters, reflection responses and optimisation rules
//! * [`gate`] and [`robustness`]: CAPS gate metrics for long and finite-bandwidth pulses
//! * [`crosstalk`]: many-atom crosstalk under time multiplexing
//! * [`source`]: master-equation photon source, g1 kernel and temporal modes
//! * [`protocols`]: memory loading and remote-entanglement protocols
//! * [`transfer`]: transfer-matrix cavity spectra and wavelength-multiplexing crosstalk
//! * [`throughput`]: closed-form multiplexed networking rates
//! * [`harness`]: declarative experiment runner behind the `capsnet` binary

pub mod cavity;
pub mod crosstalk;
pub mod error;
pub mod gate;
pub mod harness;
pub mod protocols;
pub mod quadrature;
pub mod robustness;
pub mod source;
pub mod throughput;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts a frequency in MHz to an angular rate in rad/s.
pub fn two_pi_mhz(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f * 1e6
}

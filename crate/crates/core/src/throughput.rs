//! Closed-form rates for time- and wavelength-multiplexed operation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default pulse spacing in units of `σ_t`.
pub const DEFAULT_SPACING: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuxScenario {
    pub n_atoms: usize,
    /// Atom shuttling time (s).
    pub tau_s: f64,
    /// Pulse width (s).
    pub sigma_t: f64,
    #[serde(default = "default_spacing")]
    pub pulse_spacing_factor: f64,
    pub p_success: f64,
    #[serde(default = "one")]
    pub n_channels: usize,
    /// Detector dark-count rate (1/s).
    #[serde(default)]
    pub r_dark: f64,
}

fn default_spacing() -> f64 {
    DEFAULT_SPACING
}

fn one() -> usize {
    1
}

impl MuxScenario {
    pub fn new(n_atoms: usize, tau_s: f64, sigma_t: f64, p_success: f64) -> Result<Self> {
        let s = Self {
            n_atoms,
            tau_s,
            sigma_t,
            pulse_spacing_factor: DEFAULT_SPACING,
            p_success,
            n_channels: 1,
            r_dark: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_channels(mut self, n_channels: usize) -> Self {
        self.n_channels = n_channels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(invalid("n_atoms", "must be positive"));
        }
        if !(self.tau_s >= 0.0) || !self.tau_s.is_finite() {
            return Err(invalid("tau_s", "must be finite and non-negative"));
        }
        if !(self.sigma_t > 0.0) || !self.sigma_t.is_finite() {
            return Err(invalid("sigma_t", "must be positive"));
        }
        if !(self.pulse_spacing_factor > 0.0) {
            return Err(invalid("pulse_spacing_factor", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.p_success) {
            return Err(invalid("p_success", "must lie in [0, 1]"));
        }
        if self.n_channels == 0 || self.n_channels > self.n_atoms {
            return Err(invalid("n_channels", "must lie in 1..=n_atoms"));
        }
        if !(self.r_dark >= 0.0) {
            return Err(invalid("r_dark", "must be non-negative"));
        }
        Ok(())
    }

    /// Atoms left idle by the integer split across channels.
    pub fn remainder_atoms(&self) -> usize {
        self.n_atoms % self.n_channels
    }
}

/// `N P / (τ_s + k σ_t N)`.
pub fn rate_time_mux(s: &MuxScenario) -> f64 {
    let n = s.n_atoms as f64;
    n * s.p_success / (s.tau_s + s.pulse_spacing_factor * s.sigma_t * n)
}

/// `N_ch` channels each time-multiplexing `⌊N/N_ch⌋` atoms.
pub fn rate_wavelength_mux(s: &MuxScenario) -> f64 {
    let per = MuxScenario {
        n_atoms: s.n_atoms / s.n_channels,
        ..*s
    };
    s.n_channels as f64 * rate_time_mux(&per)
}

/// Upper bound on a false herald from dark counts in a `5σ_t` window at two detectors.
pub fn dark_count_error(sigma_t: f64, r_dark: f64) -> f64 {
    DEFAULT_SPACING * sigma_t * 2.0 * r_dark
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loading_rate_example() {
        let s = MuxScenario::new(200, 100e-6, 210e-9, 0.65).unwrap();
        let r = rate_time_mux(&s);
        assert!((r - 200.0 * 0.65 / (100e-6 + 5.0 * 210e-9 * 200.0)).abs() < 1e-6);
        assert!(r > 4e5);
    }

    #[test]
    fn saturation_limits() {
        let s = MuxScenario::new(7, 0.0, 1e-7, 0.5).unwrap();
        assert!((rate_time_mux(&s) - 0.5 / 5e-7).abs() < 1e-6);
        let big = MuxScenario::new(10_000_000, 1e-4, 1e-7, 0.5).unwrap();
        assert!((rate_time_mux(&big) / (0.5 / 5e-7) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn single_channel_and_one_atom_per_channel() {
        let s = MuxScenario::new(200, 100e-6, 210e-9, 0.65).unwrap();
        assert_eq!(rate_wavelength_mux(&s), rate_time_mux(&s));
        let all = s.with_channels(200);
        let want = 200.0 * 0.65 / (100e-6 + 5.0 * 210e-9);
        assert!((rate_wavelength_mux(&all) - want).abs() < 1e-6 * want);
        assert_eq!(s.with_channels(6).remainder_atoms(), 2);
    }

    #[test]
    fn dark_counts() {
        assert_eq!(dark_count_error(210e-9, 0.0), 0.0);
        assert!((dark_count_error(210e-9, 10.0) - 2.1e-5).abs() < 1e-18);
        assert!((dark_count_error(210e-9, 1.0) - 2.1e-6).abs() < 1e-18);
    }
}

//! Analytic drive that makes a cavity emit a Gaussian temporal mode.
//!
//! Under no-jump evolution the amplitudes of `|g,1⟩`, `|e,0⟩` and `|u,0⟩`
//! (called `x`, `y`, `z`) obey `ẋ = -κx + g y`, `ẏ = -γy - g x - Ω z` and
//! `ż = Ω y`. Choosing `x = a φ(t)` fixes `y` and, through the norm budget,
//! `z`, which in turn fixes `Ω`. Everything is closed form, so the drive can
//! be sampled at any time without integrating.

use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

/// The drive is switched off once this fraction of the target remains.
/// Past that point the Gaussian tail decays faster than any cavity can
/// follow, so `z²` eventually turns negative for every parameter set.
pub const TAIL_CUTOFF: f64 = 1e-10;

/// Parameters entering the inversion. `kappa` is the total field decay rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDrive {
    pub g: f64,
    pub kappa: f64,
    pub kappa_ex: f64,
    pub gamma: f64,
    pub sigma_t: f64,
    /// Emission amplitude, at most [`GaussianDrive::max_amplitude`].
    pub amplitude: f64,
}

impl GaussianDrive {
    /// Drive at the largest amplitude the budget allows.
    pub fn new(g: f64, kappa: f64, kappa_ex: f64, gamma: f64, sigma_t: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(invalid("g", "photon generation needs g > 0"));
        }
        if !(kappa > 0.0) || !(kappa_ex >= 0.0) || kappa_ex > kappa {
            return Err(invalid(
                "kappa_ex",
                "need 0 <= kappa_ex <= kappa and kappa > 0",
            ));
        }
        if !(gamma >= 0.0) {
            return Err(invalid("gamma", "must be non-negative"));
        }
        if !(sigma_t > 0.0) {
            return Err(invalid("sigma_t", "must be positive"));
        }
        let mut d = Self {
            g,
            kappa,
            kappa_ex,
            gamma,
            sigma_t,
            amplitude: 0.0,
        };
        d.amplitude = d.max_amplitude();
        Ok(d)
    }

    pub fn max_amplitude(&self) -> f64 {
        let (g, k, gm, s) = (self.g, self.kappa, self.gamma, self.sigma_t);
        (1.0 / (2.0 * k + 2.0 * gm * k * k / (g * g) + gm / (g * g * s * s))).sqrt()
    }

    /// No-jump probability of emitting through the external port.
    pub fn emission_probability(&self) -> f64 {
        2.0 * self.kappa_ex * self.amplitude * self.amplitude
    }

    /// Normalised target mode `φ(t)` and its first two derivatives.
    fn phi(&self, t: f64) -> (f64, f64, f64) {
        let s = self.sigma_t;
        let p = (std::f64::consts::PI * s * s).powf(-0.25) * (-t * t / (2.0 * s * s)).exp();
        let s2 = s * s;
        (p, -t / s2 * p, (t * t / (s2 * s2) - 1.0 / s2) * p)
    }

    pub fn target_mode(&self, t: f64) -> f64 {
        self.phi(t).0
    }

    /// `(x, y, z²)` at time `t`.
    pub fn amplitudes(&self, t: f64) -> (f64, f64, f64) {
        let (g, k, gm, s, a) = (self.g, self.kappa, self.gamma, self.sigma_t, self.amplitude);
        let (p, dp, _) = self.phi(t);
        let x = a * p;
        let y = a * (dp + k * p) / g;
        let q0 = 0.5 * erfc(t / s);
        let p2 = p * p;
        let q2 = t * p2 / (2.0 * s * s) + erfc(t / s) / (4.0 * s * s);
        let remaining =
            2.0 * gm * a * a / (g * g) * (q2 - k * p2 + k * k * q0) + 2.0 * k * a * a * q0;
        let deficit = 1.0 - (a / self.max_amplitude()).powi(2);
        (x, y, deficit + remaining - x * x - y * y)
    }

    /// Rabi frequency at `t`, failing where the `|u⟩` amplitude is exhausted
    /// before the pulse has been emitted.
    pub fn omega(&self, t: f64) -> Result<f64> {
        if 0.5 * erfc(t / self.sigma_t) < TAIL_CUTOFF {
            return Ok(0.0);
        }
        let (g, k, gm, a) = (self.g, self.kappa, self.gamma, self.amplitude);
        let (x, y, z2) = self.amplitudes(t);
        if !(z2 > 0.0) {
            return Err(Error::PhotonTooFast { t });
        }
        let (_, dp, ddp) = self.phi(t);
        let dy = a * (ddp + k * dp) / g;
        Ok(-(dy + gm * y + g * x) / z2.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(c: f64, sigma: f64) -> GaussianDrive {
        let (gamma, kin) = (1.0, 1.0);
        let g = (2.0 * c * kin * gamma).sqrt();
        let kex = kin * (1.0 + 2.0 * c).sqrt();
        GaussianDrive::new(g, kin + kex, kex, gamma, sigma).unwrap()
    }

    #[test]
    fn budget_closes_at_late_times() {
        let d = drive(10.0, 1.0);
        let (_, _, z2) = d.amplitudes(40.0);
        assert!(z2.abs() < 1e-14);
        let (_, _, z2) = d.amplitudes(-40.0);
        assert!((z2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn z_squared_matches_numerical_integral() {
        let d = drive(10.0, 1.0);
        // 1 - x² - y² - ∫(2κx² + 2γy²) by dense trapezoid.
        let (t0, t1, n) = (-12.0, 1.5, 200_000);
        let h = (t1 - t0) / n as f64;
        let f = |t: f64| {
            let (x, y, _) = d.amplitudes(t);
            2.0 * d.kappa * x * x + 2.0 * d.gamma * y * y
        };
        let mut acc = 0.5 * (f(t0) + f(t1));
        for i in 1..n {
            acc += f(t0 + i as f64 * h);
        }
        let (x, y, z2) = d.amplitudes(t1);
        assert!((1.0 - x * x - y * y - acc * h - z2).abs() < 1e-9);
    }

    #[test]
    fn short_pulse_is_rejected() {
        let d = drive(10.0, 0.3);
        let mut hit = false;
        for i in 0..1100 {
            let t = -5.0 * 0.3 + i as f64 * 0.003;
            if matches!(d.omega(t), Err(Error::PhotonTooFast { .. })) {
                hit = true;
                break;
            }
        }
        assert!(hit);
    }

    #[test]
    fn drive_vanishes_in_the_far_past() {
        let d = drive(10.0, 1.0);
        let peak = (0..1100)
            .map(|i| d.omega(-5.0 + i as f64 * 0.01).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(d.omega(-5.0).unwrap().abs() < 1e-4 * peak);
    }
}
